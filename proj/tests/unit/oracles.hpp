#pragma once
// Independent reference computations used by the unit and acceptance tests.
// Everything here is written from the definitions with dense linear algebra,
// sharing no code paths with the specialized library routines.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tsl/observation.hpp"
#include "tsl/tensor.hpp"
#include "tsl/tracker.hpp"

namespace oracle {

using tsl::cd;
using tsl::CMat;
using tsl::CVec;

inline CMat random_matrix(Eigen::Index rows, Eigen::Index cols, tsl::Rng &rng, double sigma = 1.0)
{
  CMat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = tsl::complex_normal(rng, sigma);
    }
  }
  return m;
}

inline CVec random_vector(Eigen::Index n, tsl::Rng &rng, double sigma = 1.0)
{
  return random_matrix(n, 1, rng, sigma).col(0);
}

inline tsl::TensorSubspace random_subspace(std::vector<std::size_t> const &extents, std::size_t rank, tsl::Rng &rng)
{
  std::vector<CMat> f;
  for (auto n : extents) {
    f.push_back(random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank), rng));
  }
  return tsl::TensorSubspace(std::move(f));
}

inline double rel_err(CMat const &a, CMat const &b)
{
  double const s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

// Dense tensor from explicit nested outer products of the r-th columns.
inline tsl::DenseTensor rank_one(tsl::TensorSubspace const &s, std::size_t r)
{
  auto const ext = s.extents();
  tsl::DenseTensor out(ext);
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto const idx = out.multi_index(k);
    cd p = 1.0;
    for (std::size_t m = 0; m < ext.size(); ++m) {
      p *= s.factor(m)(static_cast<Eigen::Index>(idx[m]), static_cast<Eigen::Index>(r));
    }
    out[k] = p;
  }
  return out;
}

// Bilinear <A, B> = sum A .* B.
inline cd inner(tsl::DenseTensor const &a, tsl::DenseTensor const &b)
{
  cd s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += a[k] * b[k];
  }
  return s;
}

// Phi(l, r) = <W_l, rank-one basis r> with W_l the dense sketch.
inline CMat dense_phi(tsl::TensorSubspace const &s, tsl::ProjectionDescriptor const &d)
{
  CMat phi(static_cast<Eigen::Index>(d.measurement_count()), static_cast<Eigen::Index>(s.rank()));
  for (std::size_t r = 0; r < s.rank(); ++r) {
    auto const b = rank_one(s, r);
    for (std::size_t l = 0; l < d.measurement_count(); ++l) {
      phi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r)) = inner(d.sketch(l), b);
    }
  }
  return phi;
}

// Measurements of a frame through dense sketches.
inline CVec dense_project(tsl::DenseTensor const &x, tsl::ProjectionDescriptor const &d)
{
  CVec y(static_cast<Eigen::Index>(d.measurement_count()));
  for (std::size_t l = 0; l < d.measurement_count(); ++l) {
    y(static_cast<Eigen::Index>(l)) = inner(d.sketch(l), x);
  }
  return y;
}

// Generic descriptor carrying the same dense sketches as d.
inline tsl::ProjectionDescriptor as_generic(tsl::ProjectionDescriptor const &d)
{
  std::vector<tsl::DenseTensor> w;
  for (std::size_t l = 0; l < d.measurement_count(); ++l) {
    w.push_back(d.sketch(l));
  }
  return tsl::ProjectionDescriptor::generic_dense(std::move(w));
}

// f_t evaluated from dense sketches.
inline double cost(tsl::TensorSubspace const &s, CVec const &gamma, tsl::ProjectionDescriptor const &d, CVec const &y,
                   double lambda, double t)
{
  CVec const e = y - dense_phi(s, d) * gamma;
  double reg = 0.0;
  for (auto const &f : s.factors()) {
    reg += f.squaredNorm();
  }
  return 0.5 * e.squaredNorm() + 0.5 * lambda * gamma.squaredNorm() + 0.5 * lambda / t * reg;
}

// Central differences over real and imaginary coordinates, returned as d/dRe + i d/dIm.
inline std::vector<CMat> finite_difference_gradient(std::function<double(tsl::TensorSubspace const &)> const &f,
                                                    tsl::TensorSubspace const &s, double h = 1e-6)
{
  std::vector<CMat> g;
  for (std::size_t m = 0; m < s.modes(); ++m) {
    CMat gm(s.factor(m).rows(), s.factor(m).cols());
    for (Eigen::Index k = 0; k < gm.size(); ++k) {
      double part[2];
      for (int c = 0; c < 2; ++c) {
        cd const step = c == 0 ? cd{h, 0.0} : cd{0.0, h};
        tsl::TensorSubspace p = s, q = s;
        p.factor(m).data()[k] += step;
        q.factor(m).data()[k] -= step;
        part[c] = (f(p) - f(q)) / (2.0 * h);
      }
      gm.data()[k] = {part[0], part[1]};
    }
    g.push_back(gm);
  }
  return g;
}

// Matrix of A_m -> Phi(A_m) gamma, columns ordered like vec(A_m) (column-major).
inline CMat mode_jacobian(tsl::TensorSubspace const &s, CVec const &gamma, tsl::ProjectionDescriptor const &d,
                          std::size_t m)
{
  auto const n = s.factor(m).rows();
  auto const r = s.factor(m).cols();
  CMat j(static_cast<Eigen::Index>(d.measurement_count()), n * r);
  for (Eigen::Index c = 0; c < r; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      tsl::TensorSubspace probe = s;
      probe.factor(m).setZero();
      probe.factor(m)(i, c) = 1.0;
      j.col(c * n + i) = dense_phi(probe, d).col(c) * gamma(c);
    }
  }
  return j;
}

// lambda/t + max_m lambda_max(J_m^H J_m) by full eigendecomposition.
inline double dense_hessian_bound(tsl::TensorSubspace const &s, CVec const &gamma, tsl::ProjectionDescriptor const &d,
                                  double lambda, double t)
{
  double best = 0.0;
  for (std::size_t m = 0; m < s.modes(); ++m) {
    CMat const j = mode_jacobian(s, gamma, d, m);
    Eigen::SelfAdjointEigenSolver<CMat> eig(j.adjoint() * j, Eigen::EigenvaluesOnly);
    best = std::max(best, eig.eigenvalues().maxCoeff());
  }
  return lambda / t + best;
}

// sum_r sigma_r^{2/M} with sigma_r the product of column norms.
inline double balanced_factor_sum(tsl::TensorSubspace const &s)
{
  double const m = static_cast<double>(s.modes());
  double total = 0.0;
  for (std::size_t r = 0; r < s.rank(); ++r) {
    double p = 1.0;
    for (auto const &f : s.factors()) {
      p *= f.col(static_cast<Eigen::Index>(r)).norm();
    }
    total += std::pow(p, 2.0 / m);
  }
  return total;
}

} // namespace oracle
