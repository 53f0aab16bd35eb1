#include <doctest.h>

#include "oracles.hpp"
#include "tsl/error.hpp"
#include "tsl/fourier.hpp"
#include "tsl/mri.hpp"

using namespace tsl;

namespace {

std::vector<MultiIndex> random_mask(std::size_t n1, std::size_t n2, double p, Rng &rng)
{
  std::vector<MultiIndex> out;
  for (auto const &idx : all_indices({n1, n2})) {
    if (uniform01(rng) < p) {
      out.push_back(idx);
    }
  }
  return out;
}

} // namespace

TEST_CASE("reconstruct_frame is the factor product and its image magnitude")
{
  Rng rng(51);
  auto const s = oracle::random_subspace({6, 7}, 3, rng);
  CVec const g = oracle::random_vector(3, rng);
  auto const est = reconstruct_frame(s, g);
  CMat want = CMat::Zero(6, 7);
  for (Eigen::Index r = 0; r < 3; ++r) {
    want += g(r) * s.factor(0).col(r) * s.factor(1).col(r).transpose();
  }
  CHECK(oracle::rel_err(est.kspace, want) < 1e-13);
  CMat const f1 = dft_matrix(6), f2 = dft_matrix(7);
  RMat const image = (f1.conjugate() * want * f2.conjugate()).cwiseAbs();
  CHECK((est.image - image).norm() < 1e-12 * image.norm());
  CHECK(reconstruct_frame(s, CVec::Zero(3)).image.norm() == 0.0);
}

TEST_CASE("patch partition and assembly are inverse")
{
  Rng rng(52);
  auto const grid = PatchGrid::tile(8, 12, 4, 3, 2);
  CHECK(grid.k1 == 2);
  CHECK(grid.k2 == 4);
  CMat const frame = oracle::random_matrix(8, 12, rng);
  auto const parts = patch_partition(frame, grid);
  REQUIRE(parts.size() == 8);
  CHECK(parts[5] == frame.block(4, 3, 4, 3));
  CHECK(patch_assemble(parts, grid) == frame);
  CHECK_THROWS_AS(PatchGrid::tile(8, 12, 3, 3, 2), ShapeError);
  CHECK_THROWS_AS(patch_partition(CMat::Zero(8, 11), grid), ShapeError);
}

TEST_CASE("quadrant patches of a block-structured frame")
{
  auto const grid = PatchGrid::tile(4, 4, 2, 2, 1);
  CMat frame(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      frame(i, j) = static_cast<double>((i / 2) * 2 + j / 2);
    }
  }
  auto const parts = patch_partition(frame, grid);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(parts[k] == CMat::Constant(2, 2, static_cast<double>(k)));
  }
}

TEST_CASE("patch batches carry local indices and the matching values")
{
  Rng rng(53);
  auto const grid = PatchGrid::tile(6, 6, 3, 2, 1);
  DenseTensor const frame = DenseTensor::from_matrix(oracle::random_matrix(6, 6, rng));
  auto const d = ProjectionDescriptor::entry_mask({6, 6}, random_mask(6, 6, 0.5, rng));
  auto const b = measure(frame, d, 0.0, rng);
  auto const parts = patch_batches(b, grid);
  REQUIRE(parts.size() == grid.count());
  std::size_t total = 0;
  auto const local = patch_partition(frame.to_matrix(), grid);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto const &pd = parts[k].descriptor;
    CHECK(pd.extents() == std::vector<std::size_t>{3, 2});
    total += pd.measurement_count();
    for (std::size_t l = 0; l < pd.measurement_count(); ++l) {
      auto const &idx = pd.indices()[l];
      CHECK(parts[k].y(static_cast<Eigen::Index>(l)) ==
            local[k](static_cast<Eigen::Index>(idx[0]), static_cast<Eigen::Index>(idx[1])));
    }
  }
  CHECK(total == d.measurement_count());
}

TEST_CASE("a single-patch grid matches the plain interpolation tracker")
{
  Rng data_rng(54);
  StepConfig c;
  c.rank = 2;
  c.lambda = 0.5;
  Rng r1(9), r2(9);
  auto patches = PatchTrackers::create(PatchGrid::tile(6, 5, 6, 5, 2), c, r1);
  TrackerState plain = TrackerState::initial(c, {6, 5}, r2);
  for (int t = 0; t < 4; ++t) {
    DenseTensor const image = DenseTensor::from_matrix(oracle::random_matrix(6, 5, data_rng));
    auto const b = measure(image, ProjectionDescriptor::fourier_mask(6, 5, random_mask(6, 5, 0.6, data_rng)), 0.0,
                           data_rng);
    CMat const est = patches.step(b);
    auto [next, report] = interp_track_step(std::move(plain), b, c);
    plain = std::move(next);
    CHECK(oracle::rel_err(est, reconstruct_frame(plain.subspace, report.gamma).kspace) < 1e-14);
  }
}

TEST_CASE("interpolation step equals an entry-mask step on k-space")
{
  Rng rng(55);
  DenseTensor const image = DenseTensor::from_matrix(oracle::random_matrix(6, 6, rng));
  auto const omega = random_mask(6, 6, 0.5, rng);
  auto const b = measure(image, ProjectionDescriptor::fourier_mask(6, 6, omega), 0.0, rng);
  auto const kspace = DenseTensor::from_matrix(unitary_dft2(image.to_matrix()));
  auto const be = measure(kspace, ProjectionDescriptor::entry_mask({6, 6}, omega), 0.0, rng);
  CHECK(oracle::rel_err(b.y, be.y) < 1e-13);
  StepConfig c;
  c.rank = 2;
  TrackerState st;
  st.subspace = oracle::random_subspace({6, 6}, 2, rng);
  auto const a = interp_track_step(st, b, c);
  auto const e = track_step(st, be, c);
  CHECK(oracle::rel_err(a.first.subspace.factor(0), e.first.subspace.factor(0)) < 1e-12);
  CHECK(oracle::rel_err(a.second.gamma, e.second.gamma) < 1e-12);
  MeasurementBatch coil;
  coil.descriptor = ProjectionDescriptor::coil_fourier_mask(synth_sensitivities(6, 6, 2, 0.3, rng).maps, omega);
  CHECK_THROWS_AS(interp_track_step(st, coil, c), ShapeError);
}

TEST_CASE("a single sample only moves the sampled rows")
{
  Rng rng(56);
  StepConfig c;
  c.rank = 2;
  c.lambda = 0.0;
  TrackerState st;
  st.subspace = oracle::random_subspace({5, 5}, 2, rng);
  MeasurementBatch b;
  b.descriptor = ProjectionDescriptor::fourier_mask(5, 5, {{1, 3}});
  b.y = CVec::Constant(1, cd{2.0, -1.0});
  auto const [next, report] = interp_track_step(st, b, c);
  CMat const d0 = next.subspace.factor(0) - st.subspace.factor(0);
  CMat const d1 = next.subspace.factor(1) - st.subspace.factor(1);
  for (Eigen::Index i = 0; i < 5; ++i) {
    if (i != 1) {
      CHECK(d0.row(i).norm() == 0.0);
    }
    if (i != 3) {
      CHECK(d1.row(i).norm() == 0.0);
    }
  }
  CHECK(next.subspace.rank() == 2);
}

TEST_CASE("coil sensitivities")
{
  Rng rng(57);
  auto const one = synth_sensitivities(8, 8, 1, 0.4, rng);
  REQUIRE(one.size() == 1);
  CHECK(one.list()[0].gain.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.list()[0].gain.cwiseAbs().minCoeff() == doctest::Approx(1.0).epsilon(1e-12));

  auto const four = synth_sensitivities(16, 12, 4, 0.35, rng);
  CHECK(four.normalization_error() < 1e-12);
  Rng a(5), b(5);
  auto const x = synth_sensitivities(8, 8, 3, 0.3, a), y = synth_sensitivities(8, 8, 3, 0.3, b);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(x.list()[c].gain == y.list()[c].gain);
  }
  CHECK_THROWS_AS(synth_sensitivities(8, 8, 0, 0.3, rng), DomainError);
  CHECK_THROWS_AS(synth_sensitivities(8, 8, 2, 0.0, rng), DomainError);
}

TEST_CASE("coil residual image")
{
  Rng rng(58);
  auto const coils = synth_sensitivities(6, 5, 3, 0.4, rng);
  std::vector<CMat> zero(3, CMat::Zero(6, 5));
  CHECK(coil_residual_image(zero, coils).norm() == 0.0);

  std::vector<CMat> res;
  CMat want = CMat::Zero(6, 5);
  CMat const f1 = dft_matrix(6), f2 = dft_matrix(5);
  for (std::size_t c = 0; c < 3; ++c) {
    res.push_back(oracle::random_matrix(6, 5, rng));
    CMat const back = f1.conjugate() * res.back() * f2.conjugate();
    want += coils.list()[c].gain.conjugate().cwiseProduct(back);
  }
  CHECK(oracle::rel_err(coil_residual_image(res, coils), want) < 1e-12);

  auto const single = synth_sensitivities(6, 5, 1, 0.4, rng);
  CMat const r = oracle::random_matrix(6, 5, rng);
  CMat const plain = f1.conjugate() * r * f2.conjugate();
  CHECK(oracle::rel_err(coil_residual_image({r}, single), single.list()[0].gain.conjugate().cwiseProduct(plain)) <
        1e-12);
  CHECK_THROWS_AS(coil_residual_image({r, r}, single), ShapeError);
}

TEST_CASE("parallel-imaging step equals the generic dense-sketch step")
{
  Rng rng(59);
  auto const coils = synth_sensitivities(6, 5, 3, 0.4, rng);
  auto const omega = random_mask(6, 5, 0.5, rng);
  auto const d = ProjectionDescriptor::coil_fourier_mask(coils.maps, omega);
  DenseTensor const image = DenseTensor::from_matrix(oracle::random_matrix(6, 5, rng));
  auto const b = measure(image, d, 0.1, rng);
  MeasurementBatch g = b;
  g.descriptor = oracle::as_generic(d);
  StepConfig c;
  c.rank = 3;
  c.lambda = 0.7;
  TrackerState st;
  st.subspace = oracle::random_subspace({6, 5}, 3, rng);
  auto const p = parallel_track_step(st, b, coils, c);
  auto const q = track_step(st, g, c);
  for (std::size_t m = 0; m < 2; ++m) {
    CHECK(oracle::rel_err(p.first.subspace.factor(m), q.first.subspace.factor(m)) < 1e-10);
  }
  CHECK(oracle::rel_err(p.second.gamma, q.second.gamma) < 1e-10);
  CHECK(p.first.subspace.extents() == std::vector<std::size_t>{6, 5});

  auto const other = synth_sensitivities(6, 5, 2, 0.4, rng);
  CHECK_THROWS_AS(parallel_track_step(st, b, other, c), ShapeError);
}
