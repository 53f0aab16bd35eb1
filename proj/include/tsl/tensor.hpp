#pragma once

#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tsl {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Principal components of one slice, one entry per rank-one basis.
using CoefficientVector = CVec;

// N_m x R, column r is the mode-m vector of basis r.
using FactorMatrix = CMat;

/// Complex M-way array stored row-major (last index fastest).
///
/// Modes are numbered from 0 in this API; mode 0 is the first (row) mode.
class DenseTensor {
public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> dims);
  DenseTensor(std::vector<std::size_t> dims, std::vector<cd> data);

  std::vector<std::size_t> const &dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t mode) const { return dims_.at(mode); }

  std::span<cd const> data() const { return data_; }
  std::span<cd> data() { return data_; }

  cd operator[](std::size_t flat) const { return data_[flat]; }
  cd &operator[](std::size_t flat) { return data_[flat]; }

  std::size_t flat_index(std::span<std::size_t const> index) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  cd at(std::span<std::size_t const> index) const { return data_[flat_index(index)]; }
  cd &at(std::span<std::size_t const> index) { return data_[flat_index(index)]; }

  // 2-way views. The tensor must have order 2.
  CMat to_matrix() const;
  static DenseTensor from_matrix(CMat const &m);

  // Slice along the last mode, e.g. frame t of an N1 x N2 x T stream.
  DenseTensor last_mode_slice(std::size_t index) const;
  void set_last_mode_slice(std::size_t index, DenseTensor const &slice);

  double frobenius_norm() const;

  friend bool operator==(DenseTensor const &, DenseTensor const &) = default;

private:
  std::vector<std::size_t> dims_;
  std::vector<cd> data_;
};

/// The M-1 non-temporal factor matrices of a rank-R PARAFAC model.
class TensorSubspace {
public:
  TensorSubspace() = default;
  explicit TensorSubspace(std::vector<FactorMatrix> factors);

  std::size_t rank() const { return factors_.empty() ? 0 : static_cast<std::size_t>(factors_.front().cols()); }
  std::size_t modes() const { return factors_.size(); }
  std::vector<std::size_t> extents() const;

  FactorMatrix const &factor(std::size_t m) const { return factors_.at(m); }
  FactorMatrix &factor(std::size_t m) { return factors_.at(m); }
  std::vector<FactorMatrix> const &factors() const { return factors_; }

  // Entries i.i.d. circular complex Gaussian with variance scale^2 / N_m.
  static TensorSubspace random(std::span<std::size_t const> extents, std::size_t rank, double scale, Rng &rng);

private:
  std::vector<FactorMatrix> factors_;
};

cd complex_normal(Rng &rng, double sigma);

// a_1 o a_2 o ... o a_K as a K-way tensor.
DenseTensor outer_rank_one(std::span<CVec const> vectors);

// Rank-one basis r of the subspace.
DenseTensor basis_tensor(TensorSubspace const &subspace, std::size_t r);

// sum_r gamma_r a_r^(1) o ... o a_r^(M-1).
DenseTensor synthesize_slice(TensorSubspace const &subspace, CoefficientVector const &gamma);

// sigma_r = prod_m ||a_r^(m)|| in column order; the optional factor is the temporal one.
RVec singular_values(TensorSubspace const &subspace, FactorMatrix const *temporal_factor = nullptr);

// (1/M) sum_m ||A_m||_F^2 with M = factors.size().
double rank_surrogate(std::span<FactorMatrix const> factors);

// Equalizes per-basis column norms across modes to their geometric mean.
TensorSubspace rebalance(TensorSubspace const &subspace);

// Largest relative spread of per-basis column norms across modes.
double norm_spread(TensorSubspace const &subspace);

CMat unfold(DenseTensor const &tensor, std::size_t mode);
DenseTensor refold(CMat const &matrix, std::vector<std::size_t> const &dims, std::size_t mode);

} // namespace tsl
