#include "tsl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tsl/error.hpp"
#include "tsl/fourier.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

namespace {

template <typename M>
double nmse_impl(M const &truth, M const &estimate)
{
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ShapeError("nmse operands differ in shape");
  }
  double const den = truth.squaredNorm();
  if (den == 0.0) {
    throw DomainError("nmse of an all-zero reference");
  }
  return (truth - estimate).squaredNorm() / den;
}

RVec gaussian_window(Eigen::Index size, double sigma)
{
  RVec w(size);
  double const c = 0.5 * static_cast<double>(size - 1);
  for (Eigen::Index i = 0; i < size; ++i) {
    double const d = static_cast<double>(i) - c;
    w(i) = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return w / w.sum();
}

// Separable valid-mode filtering.
RMat filter_valid(RMat const &img, RVec const &wr, RVec const &wc)
{
  Eigen::Index const out_r = img.rows() - wr.size() + 1, out_c = img.cols() - wc.size() + 1;
  RMat tmp(out_r, img.cols());
  for (Eigen::Index i = 0; i < out_r; ++i) {
    tmp.row(i) = wr.transpose() * img.middleRows(i, wr.size());
  }
  RMat out(out_r, out_c);
  for (Eigen::Index j = 0; j < out_c; ++j) {
    out.col(j) = tmp.middleCols(j, wc.size()) * wc;
  }
  return out;
}

CVec masked_forward(CMat const &image, std::vector<MultiIndex> const &omega)
{
  CMat const k = unitary_dft2(image);
  CVec y(static_cast<Eigen::Index>(omega.size()));
  for (std::size_t l = 0; l < omega.size(); ++l) {
    y(static_cast<Eigen::Index>(l)) = k(static_cast<Eigen::Index>(omega[l][0]), static_cast<Eigen::Index>(omega[l][1]));
  }
  return y;
}

CMat masked_adjoint(CVec const &r, std::vector<MultiIndex> const &omega, Eigen::Index rows, Eigen::Index cols)
{
  CMat k = CMat::Zero(rows, cols);
  for (std::size_t l = 0; l < omega.size(); ++l) {
    k(static_cast<Eigen::Index>(omega[l][0]), static_cast<Eigen::Index>(omega[l][1])) = r(static_cast<Eigen::Index>(l));
  }
  return unitary_dft2(k, true);
}

double l1(CMat const &x) { return x.cwiseAbs().sum(); }

} // namespace

double nmse(CMat const &truth, CMat const &estimate) { return nmse_impl(truth, estimate); }

double nmse(RMat const &truth, RMat const &estimate) { return nmse_impl(truth, estimate); }

double ssim(RMat const &reference, RMat const &estimate)
{
  if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols() || reference.size() == 0) {
    throw ShapeError("ssim operands differ in shape");
  }
  double range = reference.maxCoeff();
  if (!(range > 0.0)) {
    range = 1.0;
  }
  double const c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  RVec const wr = gaussian_window(std::min<Eigen::Index>(11, reference.rows()), 1.5);
  RVec const wc = gaussian_window(std::min<Eigen::Index>(11, reference.cols()), 1.5);

  RMat const mx = filter_valid(reference, wr, wc);
  RMat const my = filter_valid(estimate, wr, wc);
  RMat const xx = filter_valid(reference.cwiseProduct(reference), wr, wc);
  RMat const yy = filter_valid(estimate.cwiseProduct(estimate), wr, wc);
  RMat const xy = filter_valid(reference.cwiseProduct(estimate), wr, wc);

  double total = 0.0;
  for (Eigen::Index k = 0; k < mx.size(); ++k) {
    double const ux = mx(k), uy = my(k);
    double const vx = xx(k) - ux * ux, vy = yy(k) - uy * uy, cxy = xy(k) - ux * uy;
    total += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

CMat soft_threshold(CMat const &z, double tau)
{
  if (tau < 0.0) {
    throw DomainError("negative shrinkage threshold");
  }
  CMat out(z.rows(), z.cols());
  kernels::soft_threshold({z.data(), static_cast<std::size_t>(z.size())}, tau,
                          {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

void LassoConfig::validate() const
{
  if (!(lambda > 0.0)) {
    throw ConfigError("lasso lambda must be positive");
  }
  if (max_iterations < 1) {
    throw ConfigError("lasso needs at least one iteration");
  }
}

LassoResult differential_cs_step(CMat const &previous, MeasurementBatch const &batch, LassoConfig const &config)
{
  config.validate();
  auto const &desc = batch.descriptor;
  if (desc.kind() != ProjectionKind::FourierMask) {
    throw ShapeError("differential baseline needs a Fourier mask batch");
  }
  auto const rows = previous.rows(), cols = previous.cols();
  if (desc.extents() != std::vector<std::size_t>{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)}) {
    throw ShapeError("mask does not match the frame shape");
  }
  auto const &omega = desc.indices();
  CVec const b = batch.y - masked_forward(previous, omega);

  LassoResult res;
  auto objective = [&](CMat const &x, CVec &r) {
    r = b - masked_forward(x, omega);
    return 0.5 * r.squaredNorm() + config.lambda * l1(x);
  };
  res.difference = CMat::Zero(rows, cols);
  CVec r;
  double f = objective(res.difference, r);
  if (config.warm_start && config.warm_start->rows() == rows && config.warm_start->cols() == cols) {
    // The previous difference is only kept as the starting point when it beats zero.
    CVec rw;
    double const fw = objective(*config.warm_start, rw);
    if (fw <= f) {
      res.difference = *config.warm_start;
      r = std::move(rw);
      f = fw;
    }
  }
  res.objective.push_back(f);
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    // Unit step, ||P F|| <= 1.
    CMat const g = masked_adjoint(r, omega, rows, cols);
    res.difference = soft_threshold(res.difference + g, config.lambda);
    double const next = objective(res.difference, r);
    res.objective.push_back(next);
    res.iterations = it + 1;

    // Dual point scaled into the feasible set ||A^H u||_inf <= lambda.
    double const corr = masked_adjoint(r, omega, rows, cols).cwiseAbs().maxCoeff();
    double const scale = corr > config.lambda ? config.lambda / corr : 1.0;
    CVec const u = scale * r;
    double const dual = 0.5 * b.squaredNorm() - 0.5 * (b - u).squaredNorm();
    res.gap = next - dual;
    bool const small_change = std::abs(f - next) <= config.relative_tolerance * std::max(std::abs(f), 1e-300);
    f = next;
    if (res.gap < config.gap_tolerance || small_change) {
      break;
    }
  }
  res.frame = previous + res.difference;
  return res;
}

} // namespace tsl
