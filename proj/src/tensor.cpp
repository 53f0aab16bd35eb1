#include "tsl/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "tsl/error.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

namespace {

std::size_t product(std::span<std::size_t const> dims)
{
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

void check_dims(std::vector<std::size_t> const &dims)
{
  if (dims.size() < 2) {
    throw ShapeError("tensor order must be at least 2, got " + std::to_string(dims.size()));
  }
  for (auto d : dims) {
    if (d == 0) {
      throw ShapeError("tensor extents must be positive");
    }
  }
}

} // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims)
  : dims_(std::move(dims))
{
  check_dims(dims_);
  data_.assign(product(dims_), cd{});
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<cd> data)
  : dims_(std::move(dims))
  , data_(std::move(data))
{
  check_dims(dims_);
  if (data_.size() != product(dims_)) {
    throw ShapeError("tensor payload has " + std::to_string(data_.size()) + " entries, dims need " +
                     std::to_string(product(dims_)));
  }
}

std::size_t DenseTensor::flat_index(std::span<std::size_t const> index) const
{
  if (index.size() != dims_.size()) {
    throw ShapeError("multi-index order does not match tensor order");
  }
  std::size_t flat = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (index[m] >= dims_[m]) {
      throw ShapeError("index out of range in mode " + std::to_string(m));
    }
    flat = flat * dims_[m] + index[m];
  }
  return flat;
}

std::vector<std::size_t> DenseTensor::multi_index(std::size_t flat) const
{
  std::vector<std::size_t> idx(dims_.size());
  for (std::size_t m = dims_.size(); m-- > 0;) {
    idx[m] = flat % dims_[m];
    flat /= dims_[m];
  }
  return idx;
}

CMat DenseTensor::to_matrix() const
{
  if (order() != 2) {
    throw ShapeError("to_matrix needs a 2-way tensor");
  }
  CMat m(dims_[0], dims_[1]);
  for (std::size_t i = 0; i < dims_[0]; ++i) {
    for (std::size_t j = 0; j < dims_[1]; ++j) {
      m(i, j) = data_[i * dims_[1] + j];
    }
  }
  return m;
}

DenseTensor DenseTensor::from_matrix(CMat const &m)
{
  std::vector<cd> data(static_cast<std::size_t>(m.size()));
  auto const rows = static_cast<std::size_t>(m.rows());
  auto const cols = static_cast<std::size_t>(m.cols());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      data[i * cols + j] = m(i, j);
    }
  }
  return DenseTensor({rows, cols}, std::move(data));
}

DenseTensor DenseTensor::last_mode_slice(std::size_t index) const
{
  if (order() < 3) {
    throw ShapeError("last_mode_slice needs order >= 3");
  }
  std::size_t const last = dims_.back();
  if (index >= last) {
    throw ShapeError("slice index out of range");
  }
  std::vector<std::size_t> sub(dims_.begin(), dims_.end() - 1);
  std::size_t const n = product(sub);
  std::vector<cd> data(n);
  for (std::size_t k = 0; k < n; ++k) {
    data[k] = data_[k * last + index];
  }
  return DenseTensor(std::move(sub), std::move(data));
}

void DenseTensor::set_last_mode_slice(std::size_t index, DenseTensor const &slice)
{
  std::size_t const last = dims_.back();
  if (index >= last || slice.order() + 1 != order() ||
      !std::equal(slice.dims().begin(), slice.dims().end(), dims_.begin())) {
    throw ShapeError("slice shape does not match tensor");
  }
  for (std::size_t k = 0; k < slice.size(); ++k) {
    data_[k * last + index] = slice[k];
  }
}

double DenseTensor::frobenius_norm() const { return std::sqrt(kernels::norm2(data_)); }

TensorSubspace::TensorSubspace(std::vector<FactorMatrix> factors)
  : factors_(std::move(factors))
{
  if (factors_.size() < 2) {
    throw ShapeError("a tensor subspace needs at least two factor matrices");
  }
  auto const r = factors_.front().cols();
  if (r < 1) {
    throw RankMismatch("subspace rank must be at least 1");
  }
  for (auto const &f : factors_) {
    if (f.cols() != r) {
      throw RankMismatch("factor matrices disagree on rank");
    }
    if (f.rows() < 1) {
      throw ShapeError("factor extents must be positive");
    }
  }
}

std::vector<std::size_t> TensorSubspace::extents() const
{
  std::vector<std::size_t> e;
  e.reserve(factors_.size());
  for (auto const &f : factors_) {
    e.push_back(static_cast<std::size_t>(f.rows()));
  }
  return e;
}

cd complex_normal(Rng &rng, double sigma)
{
  std::normal_distribution<double> n(0.0, sigma / std::sqrt(2.0));
  double const re = n(rng);
  double const im = n(rng);
  return {re, im};
}

TensorSubspace TensorSubspace::random(std::span<std::size_t const> extents, std::size_t rank, double scale, Rng &rng)
{
  std::vector<FactorMatrix> factors;
  for (auto n : extents) {
    FactorMatrix f(n, rank);
    double const sigma = scale / std::sqrt(static_cast<double>(n));
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      for (Eigen::Index r = 0; r < f.rows(); ++r) {
        f(r, c) = complex_normal(rng, sigma);
      }
    }
    factors.push_back(std::move(f));
  }
  return TensorSubspace(std::move(factors));
}

DenseTensor outer_rank_one(std::span<CVec const> vectors)
{
  if (vectors.empty()) {
    throw ShapeError("outer product of an empty vector list");
  }
  std::vector<std::size_t> dims;
  for (auto const &v : vectors) {
    if (v.size() == 0) {
      throw ShapeError("outer product of an empty vector");
    }
    dims.push_back(static_cast<std::size_t>(v.size()));
  }
  if (dims.size() == 1) {
    dims.push_back(1);
  }
  // Grow the product one mode at a time; row-major means the newest mode is fastest.
  std::vector<cd> data(vectors[0].data(), vectors[0].data() + vectors[0].size());
  for (std::size_t m = 1; m < vectors.size(); ++m) {
    auto const &v = vectors[m];
    std::vector<cd> next(data.size() * static_cast<std::size_t>(v.size()));
    std::size_t k = 0;
    for (cd const head : data) {
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        next[k++] = head * v(j);
      }
    }
    data = std::move(next);
  }
  return DenseTensor(std::move(dims), std::move(data));
}

DenseTensor basis_tensor(TensorSubspace const &subspace, std::size_t r)
{
  if (r >= subspace.rank()) {
    throw RankMismatch("basis index out of range");
  }
  std::vector<CVec> cols;
  for (auto const &f : subspace.factors()) {
    cols.emplace_back(f.col(static_cast<Eigen::Index>(r)));
  }
  return outer_rank_one(cols);
}

DenseTensor synthesize_slice(TensorSubspace const &subspace, CoefficientVector const &gamma)
{
  if (static_cast<std::size_t>(gamma.size()) != subspace.rank()) {
    throw RankMismatch("gamma length " + std::to_string(gamma.size()) + " != subspace rank " +
                       std::to_string(subspace.rank()));
  }
  DenseTensor out(subspace.extents());
  for (std::size_t r = 0; r < subspace.rank(); ++r) {
    cd const g = gamma(static_cast<Eigen::Index>(r));
    if (g == cd{}) {
      continue;
    }
    DenseTensor const basis = basis_tensor(subspace, r);
    kernels::axpby(cd{1.0, 0.0}, out.data(), g, basis.data());
  }
  return out;
}

RVec singular_values(TensorSubspace const &subspace, FactorMatrix const *temporal_factor)
{
  auto const rank = static_cast<Eigen::Index>(subspace.rank());
  if (temporal_factor && temporal_factor->cols() != rank) {
    throw RankMismatch("temporal factor rank does not match subspace");
  }
  RVec sigma = RVec::Ones(rank);
  for (auto const &f : subspace.factors()) {
    sigma.array() *= f.colwise().norm().transpose().array();
  }
  if (temporal_factor) {
    sigma.array() *= temporal_factor->colwise().norm().transpose().array();
  }
  return sigma;
}

double rank_surrogate(std::span<FactorMatrix const> factors)
{
  if (factors.empty()) {
    throw ShapeError("rank surrogate of an empty factor list");
  }
  double s = 0.0;
  for (auto const &f : factors) {
    s += f.squaredNorm();
  }
  return s / static_cast<double>(factors.size());
}

TensorSubspace rebalance(TensorSubspace const &subspace)
{
  std::vector<FactorMatrix> out = subspace.factors();
  double const modes = static_cast<double>(subspace.modes());
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(subspace.rank()); ++r) {
    std::size_t zeros = 0;
    double log_sum = 0.0;
    for (auto const &f : out) {
      double const n = f.col(r).norm();
      if (n == 0.0) {
        ++zeros;
      } else {
        log_sum += std::log(n);
      }
    }
    if (zeros == out.size()) {
      continue;
    }
    if (zeros > 0) {
      throw DegenerateComponent("basis " + std::to_string(r) + " is zero in some modes but not others");
    }
    double const target = std::exp(log_sum / modes);
    for (auto &f : out) {
      f.col(r) *= target / f.col(r).norm();
    }
  }
  return TensorSubspace(std::move(out));
}

double norm_spread(TensorSubspace const &subspace)
{
  double worst = 0.0;
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(subspace.rank()); ++r) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto const &f : subspace.factors()) {
      double const n = f.col(r).norm();
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    if (hi > 0.0) {
      worst = std::max(worst, (hi - lo) / hi);
    }
  }
  return worst;
}

CMat unfold(DenseTensor const &tensor, std::size_t mode)
{
  auto const &dims = tensor.dims();
  if (mode >= dims.size()) {
    throw ShapeError("unfold mode " + std::to_string(mode) + " out of range");
  }
  std::size_t const rows = dims[mode];
  std::size_t const cols = tensor.size() / rows;
  CMat out(rows, cols);
  // Column index enumerates the remaining modes in ascending order, last fastest.
  for (std::size_t flat = 0; flat < tensor.size(); ++flat) {
    auto const idx = tensor.multi_index(flat);
    std::size_t col = 0;
    for (std::size_t m = 0; m < dims.size(); ++m) {
      if (m != mode) {
        col = col * dims[m] + idx[m];
      }
    }
    out(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(col)) = tensor[flat];
  }
  return out;
}

DenseTensor refold(CMat const &matrix, std::vector<std::size_t> const &dims, std::size_t mode)
{
  DenseTensor out(dims);
  if (mode >= dims.size() || static_cast<std::size_t>(matrix.rows()) != dims[mode] ||
      static_cast<std::size_t>(matrix.size()) != out.size()) {
    throw ShapeError("refold: matrix shape does not match dims");
  }
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    auto const idx = out.multi_index(flat);
    std::size_t col = 0;
    for (std::size_t m = 0; m < dims.size(); ++m) {
      if (m != mode) {
        col = col * dims[m] + idx[m];
      }
    }
    out[flat] = matrix(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(col));
  }
  return out;
}

} // namespace tsl
