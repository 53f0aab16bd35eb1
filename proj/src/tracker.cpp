#include "tsl/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsl/error.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

namespace {

std::span<cd> col_span(CMat &m, Eigen::Index c)
{
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

std::span<cd const> col_span(CMat const &m, Eigen::Index c)
{
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

// v(n_m) = sum over the other indices of W(n) prod_{i != m} a_i(n_i).
CVec contract_except(DenseTensor const &w, std::vector<CVec> const &vectors, std::size_t mode)
{
  auto const &dims = w.dims();
  CVec v = CVec::Zero(static_cast<Eigen::Index>(dims[mode]));
  std::vector<std::size_t> idx(dims.size(), 0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    cd p = w[k];
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i != mode) {
        p *= vectors[i](static_cast<Eigen::Index>(idx[i]));
      }
    }
    v(static_cast<Eigen::Index>(idx[mode])) += p;
    for (std::size_t i = dims.size(); i-- > 0;) {
      if (++idx[i] < dims[i]) {
        break;
      }
      idx[i] = 0;
    }
  }
  return v;
}

CMat backproject_dense_mode(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor,
                            CVec const &residual, std::size_t mode)
{
  auto const rank = static_cast<Eigen::Index>(subspace.rank());
  CMat out = CMat::Zero(subspace.factor(mode).rows(), rank);
  for (std::size_t l = 0; l < descriptor.measurement_count(); ++l) {
    DenseTensor const w = descriptor.sketch(l);
    cd const e = residual(static_cast<Eigen::Index>(l));
    for (Eigen::Index r = 0; r < rank; ++r) {
      std::vector<CVec> cols;
      for (auto const &f : subspace.factors()) {
        cols.emplace_back(f.col(r));
      }
      out.col(r) += e * contract_except(w, cols, mode).conjugate();
    }
  }
  return out;
}

CMat backproject_mode(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor, CVec const &residual,
                      std::size_t mode, DenseTensor const *theta)
{
  auto const rank = static_cast<Eigen::Index>(subspace.rank());
  switch (descriptor.kind()) {
  case ProjectionKind::EntryMask: {
    // Scatter: each sample touches one row per mode.
    CMat out = CMat::Zero(subspace.factor(mode).rows(), rank);
    auto const &omega = descriptor.indices();
    for (std::size_t l = 0; l < omega.size(); ++l) {
      auto const &idx = omega[l];
      cd const e = residual(static_cast<Eigen::Index>(l));
      for (Eigen::Index r = 0; r < rank; ++r) {
        cd p{1.0, 0.0};
        for (std::size_t i = 0; i < idx.size(); ++i) {
          if (i != mode) {
            p *= subspace.factor(i)(static_cast<Eigen::Index>(idx[i]), r);
          }
        }
        out(static_cast<Eigen::Index>(idx[mode]), r) += e * std::conj(p);
      }
    }
    return out;
  }
  case ProjectionKind::FourierMask:
  case ProjectionKind::CoilFourierMask: {
    // Theta = sum_l e_l conj(W_l); mode 0 gets Theta conj(A_2), mode 1 gets Theta^T conj(A_1).
    CMat const th = theta ? theta->to_matrix() : adjoint_image(descriptor, residual).to_matrix();
    if (mode == 0) {
      return th * subspace.factor(1).conjugate();
    }
    return th.transpose() * subspace.factor(0).conjugate();
  }
  case ProjectionKind::GenericDense:
    return backproject_dense_mode(subspace, descriptor, residual, mode);
  }
  return {};
}

void check_step_inputs(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor, CVec const &residual)
{
  if (static_cast<std::size_t>(residual.size()) != descriptor.measurement_count()) {
    throw ShapeError("residual length does not match descriptor");
  }
  if (descriptor.measurement_count() > 0 && subspace.extents() != descriptor.extents()) {
    throw ShapeError("descriptor extents do not match subspace");
  }
  if ((descriptor.kind() == ProjectionKind::FourierMask || descriptor.kind() == ProjectionKind::CoilFourierMask) &&
      subspace.modes() != 2) {
    throw ShapeError("Fourier descriptors need a two-mode subspace");
  }
}

double alpha_for(StepConfig const &config, TensorSubspace const &subspace, CoefficientVector const &gamma,
                 ProjectionDescriptor const &descriptor, std::size_t t)
{
  auto const &hb = std::get<HessianBoundStep>(config.step);
  double raw = config.lambda / static_cast<double>(t);
  if (!descriptor.empty()) {
    raw = hessian_bound(subspace, gamma, descriptor, config.lambda, t, config.power_iterations,
                        config.power_tolerance);
  }
  return std::clamp(raw, hb.c_floor, hb.c_cap);
}

} // namespace

void StepConfig::validate() const
{
  if (!(lambda >= 0.0)) {
    throw ConfigError("lambda must be nonnegative");
  }
  if (rank < 1) {
    throw ConfigError("rank must be at least 1");
  }
  if (auto const *f = std::get_if<FixedStep>(&step); f && !(f->mu > 0.0)) {
    throw ConfigError("fixed step size must be positive");
  }
  if (auto const *h = std::get_if<HessianBoundStep>(&step); h && !(h->c_floor > 0.0 && h->c_floor <= h->c_cap)) {
    throw ConfigError("need 0 < c_floor <= c_cap");
  }
  if (warm_start && warm_start->rank() != rank) {
    throw ConfigError("warm start rank does not match configured rank");
  }
  if (!(init_scale > 0.0)) {
    throw ConfigError("init_scale must be positive");
  }
}

TrackerState TrackerState::initial(StepConfig const &config, std::vector<std::size_t> const &extents, Rng &rng)
{
  TrackerState s;
  if (config.warm_start) {
    if (config.warm_start->extents() != extents) {
      throw ConfigError("warm start extents do not match the data");
    }
    s.subspace = *config.warm_start;
  } else {
    s.subspace = TensorSubspace::random(extents, config.rank, config.init_scale, rng);
  }
  return s;
}

CoefficientVector solve_gamma(CMat const &phi, CVec const &y, double lambda)
{
  if (!(lambda >= 0.0)) {
    throw DomainError("ridge parameter must be nonnegative");
  }
  if (phi.rows() != y.size()) {
    throw ShapeError("phi rows do not match measurement length");
  }
  if (phi.rows() == 0) {
    return CoefficientVector::Zero(phi.cols());
  }
  Eigen::BDCSVD<CMat> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVec const s = svd.singularValues();
  RVec shrink = s.array() / (s.array().square() + lambda);
  if (lambda == 0.0) {
    // Minimum-norm least squares: drop numerically null directions.
    double const tol = s.size() ? s(0) * 1e-12 * static_cast<double>(std::max(phi.rows(), phi.cols())) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      shrink(i) = s(i) > tol ? 1.0 / s(i) : 0.0;
    }
  }
  return svd.matrixV() * (shrink.cast<cd>().asDiagonal() * (svd.matrixU().adjoint() * y));
}

FactorSet residual_backprojection(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor,
                                  CVec const &residual)
{
  check_step_inputs(subspace, descriptor, residual);
  FactorSet out;
  if (descriptor.empty()) {
    for (auto const &f : subspace.factors()) {
      out.push_back(CMat::Zero(f.rows(), f.cols()));
    }
    return out;
  }
  std::optional<DenseTensor> theta;
  if (descriptor.kind() == ProjectionKind::FourierMask || descriptor.kind() == ProjectionKind::CoilFourierMask) {
    theta = adjoint_image(descriptor, residual);
  }
  for (std::size_t m = 0; m < subspace.modes(); ++m) {
    out.push_back(backproject_mode(subspace, descriptor, residual, m, theta ? &*theta : nullptr));
  }
  return out;
}

FactorSet residual_backprojection_dense(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor,
                                        CVec const &residual)
{
  check_step_inputs(subspace, descriptor, residual);
  FactorSet out;
  for (std::size_t m = 0; m < subspace.modes(); ++m) {
    out.push_back(backproject_dense_mode(subspace, descriptor, residual, m));
  }
  return out;
}

FactorSet factor_gradient(TensorSubspace const &subspace, CoefficientVector const &gamma,
                          ProjectionDescriptor const &descriptor, CVec const &residual, double lambda, std::size_t t)
{
  if (static_cast<std::size_t>(gamma.size()) != subspace.rank()) {
    throw RankMismatch("gamma length does not match subspace rank");
  }
  FactorSet grad = residual_backprojection(subspace, descriptor, residual);
  double const shrink = lambda / static_cast<double>(t);
  for (std::size_t m = 0; m < grad.size(); ++m) {
    // (lambda/t) a - conj(gamma_r) b, written as an axpby on each column.
    for (Eigen::Index r = 0; r < grad[m].cols(); ++r) {
      kernels::axpby(-std::conj(gamma(r)), col_span(grad[m], r), cd{shrink, 0.0}, col_span(subspace.factor(m), r));
    }
  }
  return grad;
}

double instantaneous_cost(TensorSubspace const &subspace, CoefficientVector const &gamma,
                          ProjectionDescriptor const &descriptor, CVec const &y, double lambda, std::size_t t)
{
  CMat const phi = build_phi(subspace, descriptor);
  if (phi.rows() != y.size()) {
    throw ShapeError("measurement length does not match descriptor");
  }
  CVec const e = y - phi * gamma;
  double reg = 0.0;
  for (auto const &f : subspace.factors()) {
    reg += f.squaredNorm();
  }
  return 0.5 * e.squaredNorm() + 0.5 * lambda * gamma.squaredNorm() + 0.5 * lambda / static_cast<double>(t) * reg;
}

double hessian_bound(TensorSubspace const &subspace, CoefficientVector const &gamma,
                     ProjectionDescriptor const &descriptor, double lambda, std::size_t t, std::size_t max_iterations,
                     double tolerance)
{
  double const reg = lambda / static_cast<double>(t);
  if (descriptor.empty() || gamma.squaredNorm() == 0.0) {
    return reg;
  }
  Rng rng(0x5eedULL);
  double best = 0.0;
  for (std::size_t m = 0; m < subspace.modes(); ++m) {
    auto const rows = subspace.factor(m).rows();
    auto const cols = subspace.factor(m).cols();
    auto const n = rows * cols;
    TensorSubspace probe = subspace;
    // x -> J^H J x on vec(A_m).
    auto const apply = [&](CVec const &x) {
      probe.factor(m) = Eigen::Map<CMat const>(x.data(), rows, cols);
      CVec const u = build_phi(probe, descriptor) * gamma;
      CMat y = backproject_mode(subspace, descriptor, u, m, nullptr);
      for (Eigen::Index r = 0; r < cols; ++r) {
        y.col(r) *= std::conj(gamma(r));
      }
      return CVec(Eigen::Map<CVec>(y.data(), n));
    };

    CVec start(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      start(k) = complex_normal(rng, 1.0);
    }
    start /= start.norm();
    Eigen::Index const dim = std::min<Eigen::Index>(n, 32);
    std::size_t budget = std::max<std::size_t>(max_iterations, 1);
    double theta = 0.0;
    // Restarted Lanczos with full reorthogonalization.
    while (budget > 0) {
      CMat basis(n, dim);
      std::vector<double> diag, off;
      basis.col(0) = start;
      bool converged = false;
      RVec ritz;
      for (Eigen::Index j = 0; j < dim && budget > 0; ++j, --budget) {
        CVec w = apply(basis.col(j));
        diag.push_back(basis.col(j).dot(w).real());
        for (int pass = 0; pass < 2; ++pass) {
          w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
        }
        double const beta = w.norm();
        auto const k = static_cast<Eigen::Index>(diag.size());
        RMat tri = RMat::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
          tri(i, i) = diag[static_cast<std::size_t>(i)];
          if (i + 1 < k) {
            tri(i, i + 1) = tri(i + 1, i) = off[static_cast<std::size_t>(i)];
          }
        }
        Eigen::SelfAdjointEigenSolver<RMat> eig(tri);
        theta = eig.eigenvalues()(k - 1);
        ritz = eig.eigenvectors().col(k - 1);
        double const residual = beta * std::abs(ritz(k - 1));
        if (residual <= tolerance * std::abs(theta) || beta <= 1e-300 || k == n) {
          converged = true;
          break;
        }
        if (j + 1 < dim) {
          off.push_back(beta);
          basis.col(j + 1) = w / beta;
        }
      }
      if (converged || budget == 0) {
        break;
      }
      start = basis.leftCols(ritz.size()) * ritz.cast<cd>();
      start /= start.norm();
    }
    best = std::max(best, theta);
  }
  return reg + best;
}

std::pair<TrackerState, StepReport> track_step(TrackerState state, MeasurementBatch const &batch,
                                               StepConfig const &config)
{
  auto const &desc = batch.descriptor;
  auto &sub = state.subspace;
  std::size_t const t = state.t;
  StepReport report;
  report.t = t;

  // Ridge projection onto the previous subspace.
  CMat const phi = build_phi(sub, desc);
  if (phi.rows() != batch.y.size()) {
    throw ShapeError("measurement length does not match descriptor");
  }
  report.gamma = solve_gamma(phi, batch.y, config.lambda);
  report.residual = batch.y - phi * report.gamma;
  double reg = 0.0;
  for (auto const &f : sub.factors()) {
    reg += f.squaredNorm();
  }
  report.instantaneous_cost = 0.5 * report.residual.squaredNorm() + 0.5 * config.lambda * report.gamma.squaredNorm() +
                              0.5 * config.lambda / static_cast<double>(t) * reg;

  double mu = 0.0;
  if (auto const *f = std::get_if<FixedStep>(&config.step)) {
    mu = f->mu;
  } else {
    report.alpha = alpha_for(config, sub, report.gamma, desc, t);
    state.alpha_bar += report.alpha;
    mu = 1.0 / state.alpha_bar;
  }
  report.step_size = mu;

  if (!desc.empty()) {
    // Every column update reads only the frozen previous subspace.
    FactorSet const back = residual_backprojection(sub, desc, report.residual);
    cd const keep{1.0 - mu * config.lambda / static_cast<double>(t), 0.0};
    for (std::size_t m = 0; m < sub.modes(); ++m) {
      for (Eigen::Index r = 0; r < back[m].cols(); ++r) {
        kernels::axpby(keep, col_span(sub.factor(m), r), mu * std::conj(report.gamma(r)), col_span(back[m], r));
      }
    }
    for (auto const &f : sub.factors()) {
      if (f.colwise().norm().maxCoeff() > config.norm_cap) {
        state.norm_cap_exceeded = true;
      }
    }
  }
  ++state.t;
  return {std::move(state), std::move(report)};
}

double empirical_cost(TensorSubspace const &subspace, std::span<MeasurementBatch const> batches, double lambda)
{
  if (batches.empty()) {
    throw DomainError("empirical cost needs at least one batch");
  }
  double sum = 0.0;
  for (auto const &b : batches) {
    CMat const phi = build_phi(subspace, b.descriptor);
    CoefficientVector const g = solve_gamma(phi, b.y, lambda);
    sum += 0.5 * (b.y - phi * g).squaredNorm() + 0.5 * lambda * g.squaredNorm();
  }
  double reg = 0.0;
  for (auto const &f : subspace.factors()) {
    reg += f.squaredNorm();
  }
  auto const T = static_cast<double>(batches.size());
  return sum / T + 0.5 * lambda / T * reg;
}

FactorSet empirical_cost_gradient(TensorSubspace const &subspace, std::span<MeasurementBatch const> batches,
                                  double lambda)
{
  if (batches.empty()) {
    throw DomainError("empirical cost needs at least one batch");
  }
  auto const T = static_cast<double>(batches.size());
  FactorSet grad;
  for (auto const &f : subspace.factors()) {
    grad.push_back(lambda / T * f);
  }
  // Envelope form: gamma is held at its per-batch optimum.
  for (auto const &b : batches) {
    CMat const phi = build_phi(subspace, b.descriptor);
    CoefficientVector const g = solve_gamma(phi, b.y, lambda);
    CVec const e = b.y - phi * g;
    FactorSet const back = residual_backprojection(subspace, b.descriptor, e);
    for (std::size_t m = 0; m < grad.size(); ++m) {
      grad[m] -= back[m] * g.conjugate().asDiagonal() / T;
    }
  }
  return grad;
}

double frobenius_norm(FactorSet const &set)
{
  double s = 0.0;
  for (auto const &m : set) {
    s += m.squaredNorm();
  }
  return std::sqrt(s);
}

RunResult run(std::span<MeasurementBatch const> stream, StepConfig const &config, std::size_t epochs, bool reshuffle,
              Rng &rng, std::optional<TrackerState> initial)
{
  config.validate();
  if (epochs < 1) {
    throw ConfigError("epochs must be at least 1");
  }
  if (stream.empty()) {
    throw ConfigError("empty measurement stream");
  }
  RunResult result;
  if (initial) {
    result.state = std::move(*initial);
  } else {
    std::vector<std::size_t> extents = stream.front().descriptor.extents();
    result.state = TrackerState::initial(config, extents, rng);
  }
  result.last_gamma.resize(stream.size());
  std::vector<std::size_t> order(stream.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    if (reshuffle && epoch > 0) {
      // Fisher-Yates on the portable uniform draw.
      for (std::size_t i = order.size(); i-- > 1;) {
        auto const j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
        std::swap(order[i], order[std::min(j, i)]);
      }
    }
    for (std::size_t k : order) {
      auto [next, report] = track_step(std::move(result.state), stream[k], config);
      result.state = std::move(next);
      result.trace.push_back({report.t, epoch, k, report.instantaneous_cost, report.step_size, report.gamma.norm(),
                              report.residual.norm()});
      result.last_gamma[k] = std::move(report.gamma);
    }
  }
  return result;
}

} // namespace tsl
