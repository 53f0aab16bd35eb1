#include "tsl/observation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "tsl/error.hpp"
#include "tsl/fourier.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

namespace {

void check_indices(std::vector<std::size_t> const &extents, std::vector<MultiIndex> const &omega)
{
  std::set<MultiIndex> seen;
  for (auto const &idx : omega) {
    if (idx.size() != extents.size()) {
      throw ShapeError("sample index order does not match frame order");
    }
    for (std::size_t m = 0; m < idx.size(); ++m) {
      if (idx[m] >= extents[m]) {
        throw ShapeError("sample index out of range in mode " + std::to_string(m));
      }
    }
    if (!seen.insert(idx).second) {
      throw ShapeError("duplicate sample index in descriptor");
    }
  }
}

void check_compatible(std::vector<std::size_t> const &frame, ProjectionDescriptor const &d)
{
  if (d.kind() == ProjectionKind::GenericDense && d.sketches().empty()) {
    return;
  }
  if (frame != d.extents()) {
    throw ShapeError("frame shape does not match projection descriptor");
  }
}

CMat slice_matrix(DenseTensor const &slice)
{
  if (slice.order() != 2) {
    throw ShapeError("Fourier projections need 2-way frames");
  }
  return slice.to_matrix();
}

} // namespace

ProjectionDescriptor ProjectionDescriptor::entry_mask(std::vector<std::size_t> extents, std::vector<MultiIndex> omega)
{
  check_indices(extents, omega);
  ProjectionDescriptor d;
  d.kind_ = ProjectionKind::EntryMask;
  d.extents_ = std::move(extents);
  d.indices_ = std::move(omega);
  return d;
}

ProjectionDescriptor ProjectionDescriptor::fourier_mask(std::size_t n1, std::size_t n2, std::vector<MultiIndex> omega)
{
  std::vector<std::size_t> extents{n1, n2};
  check_indices(extents, omega);
  ProjectionDescriptor d;
  d.kind_ = ProjectionKind::FourierMask;
  d.extents_ = std::move(extents);
  d.indices_ = std::move(omega);
  return d;
}

ProjectionDescriptor ProjectionDescriptor::coil_fourier_mask(CoilMaps coils, std::vector<MultiIndex> omega)
{
  if (!coils || coils->empty()) {
    throw ShapeError("coil descriptor needs at least one sensitivity map");
  }
  auto const &g0 = coils->front().gain;
  std::vector<std::size_t> extents{static_cast<std::size_t>(g0.rows()), static_cast<std::size_t>(g0.cols())};
  for (auto const &c : *coils) {
    if (c.gain.rows() != g0.rows() || c.gain.cols() != g0.cols()) {
      throw ShapeError("sensitivity maps disagree on frame shape");
    }
  }
  check_indices(extents, omega);
  ProjectionDescriptor d;
  d.kind_ = ProjectionKind::CoilFourierMask;
  d.extents_ = std::move(extents);
  d.indices_ = std::move(omega);
  d.coils_ = std::move(coils);
  return d;
}

ProjectionDescriptor ProjectionDescriptor::generic_dense(std::vector<DenseTensor> sketches)
{
  ProjectionDescriptor d;
  d.kind_ = ProjectionKind::GenericDense;
  if (!sketches.empty()) {
    d.extents_ = sketches.front().dims();
    for (auto const &w : sketches) {
      if (w.dims() != d.extents_) {
        throw ShapeError("generic sketches disagree on shape");
      }
    }
  }
  d.sketches_ = std::move(sketches);
  return d;
}

std::vector<SensitivityMap> const &ProjectionDescriptor::coils() const
{
  static std::vector<SensitivityMap> const none;
  return coils_ ? *coils_ : none;
}

std::size_t ProjectionDescriptor::measurement_count() const
{
  switch (kind_) {
  case ProjectionKind::EntryMask:
  case ProjectionKind::FourierMask:
    return indices_.size();
  case ProjectionKind::CoilFourierMask:
    return indices_.size() * coil_count();
  case ProjectionKind::GenericDense:
    return sketches_.size();
  }
  return 0;
}

DenseTensor ProjectionDescriptor::sketch(std::size_t l) const
{
  if (l >= measurement_count()) {
    throw ShapeError("sketch index out of range");
  }
  switch (kind_) {
  case ProjectionKind::EntryMask: {
    DenseTensor w(extents_);
    w.at(indices_[l]) = 1.0;
    return w;
  }
  case ProjectionKind::FourierMask:
  case ProjectionKind::CoilFourierMask: {
    std::size_t const per_coil = indices_.size();
    auto const &idx = indices_[l % per_coil];
    CMat const fl = dft_matrix(extents_[0]);
    CMat const fr = dft_matrix(extents_[1]);
    CMat w = fl.col(static_cast<Eigen::Index>(idx[0])) * fr.row(static_cast<Eigen::Index>(idx[1]));
    if (kind_ == ProjectionKind::CoilFourierMask) {
      w = w.cwiseProduct(coils()[l / per_coil].gain);
    }
    return DenseTensor::from_matrix(w);
  }
  case ProjectionKind::GenericDense:
    return sketches_[l];
  }
  return {};
}

std::vector<MultiIndex> all_indices(std::vector<std::size_t> const &extents)
{
  DenseTensor const shape(extents);
  std::vector<MultiIndex> out;
  out.reserve(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    out.push_back(shape.multi_index(k));
  }
  return out;
}

std::vector<MultiIndex> rows_to_indices(std::vector<std::size_t> const &rows, std::size_t n2)
{
  std::vector<MultiIndex> out;
  out.reserve(rows.size() * n2);
  for (auto i : rows) {
    for (std::size_t j = 0; j < n2; ++j) {
      out.push_back({i, j});
    }
  }
  return out;
}

CVec project(DenseTensor const &slice, ProjectionDescriptor const &descriptor)
{
  check_compatible(slice.dims(), descriptor);
  CVec y(static_cast<Eigen::Index>(descriptor.measurement_count()));
  auto const &omega = descriptor.indices();
  switch (descriptor.kind()) {
  case ProjectionKind::EntryMask:
    for (std::size_t l = 0; l < omega.size(); ++l) {
      y(static_cast<Eigen::Index>(l)) = slice.at(omega[l]);
    }
    break;
  case ProjectionKind::FourierMask: {
    if (omega.empty()) {
      break;
    }
    CMat const k = unitary_dft2(slice_matrix(slice));
    for (std::size_t l = 0; l < omega.size(); ++l) {
      y(static_cast<Eigen::Index>(l)) = k(static_cast<Eigen::Index>(omega[l][0]), static_cast<Eigen::Index>(omega[l][1]));
    }
    break;
  }
  case ProjectionKind::CoilFourierMask: {
    if (omega.empty()) {
      break;
    }
    CMat const image = slice_matrix(slice);
    CMat weighted(image.rows(), image.cols());
    std::size_t row = 0;
    for (auto const &coil : descriptor.coils()) {
      kernels::mul({coil.gain.data(), static_cast<std::size_t>(coil.gain.size())},
                   {image.data(), static_cast<std::size_t>(image.size())},
                   {weighted.data(), static_cast<std::size_t>(weighted.size())});
      CMat const k = unitary_dft2(weighted);
      for (auto const &idx : omega) {
        y(static_cast<Eigen::Index>(row++)) = k(static_cast<Eigen::Index>(idx[0]), static_cast<Eigen::Index>(idx[1]));
      }
    }
    break;
  }
  case ProjectionKind::GenericDense:
    for (std::size_t l = 0; l < descriptor.sketches().size(); ++l) {
      y(static_cast<Eigen::Index>(l)) = kernels::dotu(slice.data(), descriptor.sketches()[l].data());
    }
    break;
  }
  return y;
}

CMat build_phi(TensorSubspace const &subspace, ProjectionDescriptor const &descriptor)
{
  check_compatible(subspace.extents(), descriptor);
  auto const rank = static_cast<Eigen::Index>(subspace.rank());
  auto const L = static_cast<Eigen::Index>(descriptor.measurement_count());
  CMat phi(L, rank);
  auto const &omega = descriptor.indices();
  switch (descriptor.kind()) {
  case ProjectionKind::EntryMask:
    for (Eigen::Index l = 0; l < L; ++l) {
      auto const &idx = omega[static_cast<std::size_t>(l)];
      for (Eigen::Index r = 0; r < rank; ++r) {
        cd p = subspace.factor(0)(static_cast<Eigen::Index>(idx[0]), r);
        for (std::size_t m = 1; m < idx.size(); ++m) {
          p *= subspace.factor(m)(static_cast<Eigen::Index>(idx[m]), r);
        }
        phi(l, r) = p;
      }
    }
    break;
  case ProjectionKind::FourierMask: {
    if (subspace.modes() != 2) {
      throw ShapeError("Fourier descriptors need a two-mode subspace");
    }
    // F(a b^T) = (F a)(F b)^T for the symmetric DFT.
    CMat const fa = unitary_dft_cols(subspace.factor(0));
    CMat const fb = unitary_dft_cols(subspace.factor(1));
    for (Eigen::Index l = 0; l < L; ++l) {
      auto const &idx = omega[static_cast<std::size_t>(l)];
      phi.row(l) = fa.row(static_cast<Eigen::Index>(idx[0])).cwiseProduct(fb.row(static_cast<Eigen::Index>(idx[1])));
    }
    break;
  }
  case ProjectionKind::CoilFourierMask: {
    if (subspace.modes() != 2) {
      throw ShapeError("coil descriptors need a two-mode subspace");
    }
    auto const per_coil = static_cast<Eigen::Index>(omega.size());
    CMat weighted(subspace.factor(0).rows(), subspace.factor(1).rows());
    std::span<cd> wspan{weighted.data(), static_cast<std::size_t>(weighted.size())};
    for (Eigen::Index r = 0; r < rank; ++r) {
      CMat const basis = subspace.factor(0).col(r) * subspace.factor(1).col(r).transpose();
      std::span<cd const> bspan{basis.data(), static_cast<std::size_t>(basis.size())};
      for (std::size_t c = 0; c < descriptor.coil_count(); ++c) {
        auto const &gain = descriptor.coils()[c].gain;
        kernels::mul({gain.data(), static_cast<std::size_t>(gain.size())}, bspan, wspan);
        CMat const k = unitary_dft2(weighted);
        for (Eigen::Index l = 0; l < per_coil; ++l) {
          auto const &idx = omega[static_cast<std::size_t>(l)];
          phi(static_cast<Eigen::Index>(c) * per_coil + l, r) =
            k(static_cast<Eigen::Index>(idx[0]), static_cast<Eigen::Index>(idx[1]));
        }
      }
    }
    break;
  }
  case ProjectionKind::GenericDense:
    for (Eigen::Index r = 0; r < rank; ++r) {
      DenseTensor const basis = basis_tensor(subspace, static_cast<std::size_t>(r));
      for (Eigen::Index l = 0; l < L; ++l) {
        phi(l, r) = kernels::dotu(basis.data(), descriptor.sketches()[static_cast<std::size_t>(l)].data());
      }
    }
    break;
  }
  return phi;
}

double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t draw_weighted(std::span<double const> weights, Rng &rng)
{
  double total = 0.0;
  for (double w : weights) {
    total += w;
  }
  if (!(total > 0.0)) {
    throw DomainError("cannot draw from an all-zero weight vector");
  }
  double const u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) {
      continue;
    }
    acc += weights[i];
    last = i;
    if (u < acc) {
      return i;
    }
  }
  return last;
}

std::size_t budget_count(double fraction, std::size_t n)
{
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw DomainError("sampling fraction must lie in (0, 1]");
  }
  // Guard against 0.1 * 200 = 20.000000000000004 rounding up to 21.
  double const want = fraction * static_cast<double>(n);
  auto const k = static_cast<std::size_t>(std::ceil(want - 1e-9 * std::max(1.0, want)));
  if (k < 1) {
    throw DomainError("sampling fraction selects no rows");
  }
  return std::min(k, n);
}

namespace {

std::vector<double> row_weights(std::size_t n1, double alpha)
{
  std::vector<std::size_t> multiplicity(n1 / 2 + 1, 0);
  for (std::size_t k = 0; k < n1; ++k) {
    ++multiplicity[static_cast<std::size_t>(std::labs(signed_frequency(k, n1)))];
  }
  std::vector<double> w(n1, 0.0);
  for (std::size_t k = 1; k < n1; ++k) {
    auto const d = static_cast<std::size_t>(std::labs(signed_frequency(k, n1)));
    w[k] = std::pow(static_cast<double>(d), alpha) / static_cast<double>(multiplicity[d]);
  }
  return w;
}

} // namespace

std::vector<double> variable_density_distance_law(std::size_t n1, double alpha)
{
  std::vector<double> law(n1 / 2 + 1, 0.0);
  double total = 0.0;
  for (std::size_t d = 1; d < law.size(); ++d) {
    law[d] = std::pow(static_cast<double>(d), alpha);
    total += law[d];
  }
  for (auto &p : law) {
    p /= total;
  }
  return law;
}

std::vector<std::size_t> variable_density_draw_order(std::size_t n1, double alpha, double fraction, Rng &rng)
{
  std::size_t const count = budget_count(fraction, n1);
  std::vector<std::size_t> order{0};
  std::vector<double> w = row_weights(n1, alpha);
  while (order.size() < count) {
    std::size_t const k = draw_weighted(w, rng);
    order.push_back(k);
    w[k] = 0.0;
  }
  return order;
}

std::vector<std::size_t> variable_density_rows(std::size_t n1, double alpha, double fraction, Rng &rng)
{
  auto rows = variable_density_draw_order(n1, alpha, fraction, rng);
  std::sort(rows.begin(), rows.end());
  return rows;
}

MeasurementBatch measure(DenseTensor const &truth_slice, ProjectionDescriptor descriptor, double noise_sigma,
                         Rng &rng, std::size_t t)
{
  if (noise_sigma < 0.0) {
    throw DomainError("noise sigma must be nonnegative");
  }
  MeasurementBatch b;
  b.y = project(truth_slice, descriptor);
  if (noise_sigma > 0.0) {
    for (Eigen::Index l = 0; l < b.y.size(); ++l) {
      b.y(l) += complex_normal(rng, noise_sigma);
    }
  }
  b.descriptor = std::move(descriptor);
  b.t = t;
  b.noise_sigma = noise_sigma;
  return b;
}

} // namespace tsl

namespace tsl {

CMat coil_adjoint(std::vector<CMat> const &residual_images, std::vector<SensitivityMap> const &coils)
{
  if (residual_images.size() != coils.size() || coils.empty()) {
    throw ShapeError("need one residual image per coil");
  }
  auto const rows = coils.front().gain.rows(), cols = coils.front().gain.cols();
  CMat theta = CMat::Zero(rows, cols);
  std::span<cd> out{theta.data(), static_cast<std::size_t>(theta.size())};
  for (std::size_t c = 0; c < coils.size(); ++c) {
    if (residual_images[c].rows() != rows || residual_images[c].cols() != cols || coils[c].gain.rows() != rows ||
        coils[c].gain.cols() != cols) {
      throw ShapeError("residual image shape does not match coil maps");
    }
    CMat const back = unitary_dft2(residual_images[c], true);
    kernels::conj_mul_acc({coils[c].gain.data(), static_cast<std::size_t>(coils[c].gain.size())},
                          {back.data(), static_cast<std::size_t>(back.size())}, out);
  }
  return theta;
}

DenseTensor adjoint_image(ProjectionDescriptor const &descriptor, CVec const &residual)
{
  if (static_cast<std::size_t>(residual.size()) != descriptor.measurement_count()) {
    throw ShapeError("residual length does not match descriptor");
  }
  auto const &omega = descriptor.indices();
  switch (descriptor.kind()) {
  case ProjectionKind::EntryMask: {
    DenseTensor out(descriptor.extents());
    for (std::size_t l = 0; l < omega.size(); ++l) {
      out.at(omega[l]) += residual(static_cast<Eigen::Index>(l));
    }
    return out;
  }
  case ProjectionKind::FourierMask:
  case ProjectionKind::CoilFourierMask: {
    auto const &ext = descriptor.extents();
    auto const rows = static_cast<Eigen::Index>(ext[0]), cols = static_cast<Eigen::Index>(ext[1]);
    if (descriptor.kind() == ProjectionKind::FourierMask) {
      CMat xi = CMat::Zero(rows, cols);
      for (std::size_t l = 0; l < omega.size(); ++l) {
        xi(static_cast<Eigen::Index>(omega[l][0]), static_cast<Eigen::Index>(omega[l][1])) =
          residual(static_cast<Eigen::Index>(l));
      }
      return DenseTensor::from_matrix(unitary_dft2(xi, true));
    }
    std::vector<CMat> xi(descriptor.coil_count(), CMat::Zero(rows, cols));
    for (std::size_t c = 0; c < xi.size(); ++c) {
      for (std::size_t l = 0; l < omega.size(); ++l) {
        xi[c](static_cast<Eigen::Index>(omega[l][0]), static_cast<Eigen::Index>(omega[l][1])) =
          residual(static_cast<Eigen::Index>(c * omega.size() + l));
      }
    }
    return DenseTensor::from_matrix(coil_adjoint(xi, descriptor.coils()));
  }
  case ProjectionKind::GenericDense: {
    if (descriptor.sketches().empty()) {
      throw ShapeError("adjoint of an empty generic descriptor has no shape");
    }
    DenseTensor out(descriptor.extents());
    for (std::size_t l = 0; l < descriptor.sketches().size(); ++l) {
      auto const w = descriptor.sketches()[l].data();
      cd const e = residual(static_cast<Eigen::Index>(l));
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] += e * std::conj(w[k]);
      }
    }
    return out;
  }
  }
  return {};
}

} // namespace tsl
