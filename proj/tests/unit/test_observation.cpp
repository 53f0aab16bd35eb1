#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "tsl/error.hpp"
#include "tsl/fourier.hpp"
#include "tsl/mri.hpp"
#include "tsl/observation.hpp"

using namespace tsl;

namespace {

std::vector<MultiIndex> random_mask(std::vector<std::size_t> const &ext, double p, Rng &rng)
{
  std::vector<MultiIndex> out;
  for (auto const &idx : all_indices(ext)) {
    if (uniform01(rng) < p) {
      out.push_back(idx);
    }
  }
  if (out.empty()) {
    out.push_back(all_indices(ext).front());
  }
  return out;
}

std::vector<ProjectionDescriptor> descriptors(Rng &rng)
{
  std::vector<ProjectionDescriptor> d;
  d.push_back(ProjectionDescriptor::entry_mask({4, 5, 3}, random_mask({4, 5, 3}, 0.4, rng)));
  d.push_back(ProjectionDescriptor::fourier_mask(6, 5, random_mask({6, 5}, 0.5, rng)));
  auto coils = synth_sensitivities(6, 5, 3, 0.4, rng);
  d.push_back(ProjectionDescriptor::coil_fourier_mask(coils.maps, random_mask({6, 5}, 0.4, rng)));
  std::vector<DenseTensor> w;
  for (int l = 0; l < 7; ++l) {
    DenseTensor t({3, 4});
    for (auto &v : t.data()) {
      v = complex_normal(rng, 1.0);
    }
    w.push_back(t);
  }
  d.push_back(ProjectionDescriptor::generic_dense(std::move(w)));
  return d;
}

DenseTensor random_frame(std::vector<std::size_t> const &ext, Rng &rng)
{
  DenseTensor x(ext);
  for (auto &v : x.data()) {
    v = complex_normal(rng, 1.0);
  }
  return x;
}

} // namespace

TEST_CASE("projections agree with dense sketches for every kind")
{
  Rng rng(21);
  for (auto const &d : descriptors(rng)) {
    auto const x = random_frame(d.extents(), rng);
    CHECK(oracle::rel_err(project(x, d), oracle::dense_project(x, d)) < 1e-12);
  }
}

TEST_CASE("build_phi agrees with dense sketches for every kind")
{
  Rng rng(22);
  for (auto const &d : descriptors(rng)) {
    auto const s = oracle::random_subspace(d.extents(), 3, rng);
    CHECK(oracle::rel_err(build_phi(s, d), oracle::dense_phi(s, d)) < 1e-12);
  }
}

TEST_CASE("adjoint image is sum_l e_l conj(W_l)")
{
  Rng rng(23);
  for (auto const &d : descriptors(rng)) {
    CVec const e = oracle::random_vector(static_cast<Eigen::Index>(d.measurement_count()), rng);
    DenseTensor want(d.extents());
    for (std::size_t l = 0; l < d.measurement_count(); ++l) {
      auto const w = d.sketch(l);
      for (std::size_t k = 0; k < want.size(); ++k) {
        want[k] += e(static_cast<Eigen::Index>(l)) * std::conj(w[k]);
      }
    }
    auto const got = adjoint_image(d, e);
    double err = 0.0, scale = want.frobenius_norm();
    for (std::size_t k = 0; k < got.size(); ++k) {
      err = std::max(err, std::abs(got[k] - want[k]));
    }
    CHECK(err <= 1e-10 * scale);
  }
}

TEST_CASE("coil projection is the Fourier transform of the weighted frame")
{
  Rng rng(24);
  auto coils = synth_sensitivities(8, 6, 2, 0.3, rng);
  auto const omega = all_indices({8, 6});
  auto const d = ProjectionDescriptor::coil_fourier_mask(coils.maps, omega);
  auto const x = random_frame({8, 6}, rng);
  CVec const y = project(x, d);
  for (std::size_t c = 0; c < 2; ++c) {
    CMat const k = unitary_dft2(coils.list()[c].gain.cwiseProduct(x.to_matrix()));
    for (std::size_t l = 0; l < omega.size(); ++l) {
      auto const i = static_cast<Eigen::Index>(omega[l][0]), j = static_cast<Eigen::Index>(omega[l][1]);
      CHECK(std::abs(y(static_cast<Eigen::Index>(c * omega.size() + l)) - k(i, j)) < 1e-12);
    }
  }
}

TEST_CASE("descriptor validation")
{
  CHECK_THROWS_AS(ProjectionDescriptor::entry_mask({3, 3}, {{3, 0}}), ShapeError);
  CHECK_THROWS_AS(ProjectionDescriptor::entry_mask({3, 3}, {{1, 1}, {1, 1}}), ShapeError);
  CHECK_THROWS_AS(ProjectionDescriptor::fourier_mask(3, 3, {{0, 0, 0}}), ShapeError);
  auto const empty = ProjectionDescriptor::entry_mask({3, 3}, {});
  CHECK(empty.empty());
  CHECK(project(DenseTensor({3, 3}), empty).size() == 0);
}

TEST_CASE("budget count rounds up with a guard")
{
  CHECK(budget_count(0.1, 200) == 20);
  CHECK(budget_count(0.25, 64) == 16);
  CHECK(budget_count(0.101, 100) == 11);
  CHECK(budget_count(1.0, 7) == 7);
  CHECK_THROWS_AS(budget_count(0.0, 10), DomainError);
  CHECK_THROWS_AS(budget_count(1.5, 10), DomainError);
}

TEST_CASE("variable density rows include DC and have the requested count")
{
  Rng rng(25);
  for (int rep = 0; rep < 20; ++rep) {
    auto const rows = variable_density_rows(64, -1.0, 0.25, rng);
    CHECK(rows.size() == 16);
    CHECK(rows.front() == 0);
    CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
  }
}

TEST_CASE("first variable density draw follows the distance law")
{
  std::size_t const n = 32;
  double const alpha = -1.0;
  auto const law = variable_density_distance_law(n, alpha);
  CHECK(law[0] == 0.0);
  double total = 0.0;
  for (double p : law) {
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(26);
  std::size_t const trials = 40000;
  std::vector<double> hits(law.size(), 0.0);
  for (std::size_t k = 0; k < trials; ++k) {
    auto const order = variable_density_draw_order(n, alpha, 2.0 / static_cast<double>(n), rng);
    REQUIRE(order.size() == 2);
    hits[static_cast<std::size_t>(std::labs(signed_frequency(order[1], n)))] += 1.0;
  }
  for (std::size_t d = 1; d < law.size(); ++d) {
    double const p = law[d];
    double const se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    CHECK(std::abs(hits[d] / static_cast<double>(trials) - p) < 4.0 * se + 1e-12);
  }
}

TEST_CASE("measurement noise has the requested power")
{
  Rng rng(27);
  DenseTensor const x({20, 20});
  auto const b = measure(x, ProjectionDescriptor::entry_mask({20, 20}, all_indices({20, 20})), 0.5, rng);
  double const power = b.y.squaredNorm() / static_cast<double>(b.y.size());
  CHECK(power == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("uniform01 is in [0, 1) and reproducible")
{
  Rng a(9), b(9);
  for (int i = 0; i < 1000; ++i) {
    double const u = uniform01(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == uniform01(b));
  }
}
