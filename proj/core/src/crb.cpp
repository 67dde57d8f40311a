#include "fadoa/crb.hpp"

#include <cmath>

#include "fadoa/signal.hpp"

namespace fadoa {

namespace {

CVec vec(const CMat& m) {
  return Eigen::Map<const CVec>(m.data(), m.size());
}

// Hermitian inverse square root via eigendecomposition.
CMat inverse_sqrt(const CMat& r) {
  Eigen::SelfAdjointEigenSolver<CMat> es(r);
  if (es.info() != Eigen::Success)
    throw numerical_error("covariance eigendecomposition failed");
  const RVec& d = es.eigenvalues();
  if (d[0] <= 1e-14 * d[d.size() - 1])
    throw numerical_error("singular model covariance");
  return es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

// Columns of Psi^1/2 [D_theta D_p] without forming the Kronecker product:
// Psi^1/2 vec(X) = vec(R^-1/2 X R^-1/2).
CMat whiten(const CMat& r_inv_sqrt, const CMat& grads) {
  const Eigen::Index n = r_inv_sqrt.rows();
  CMat out(grads.rows(), grads.cols());
  for (Eigen::Index k = 0; k < grads.cols(); ++k) {
    const CMat x = Eigen::Map<const CMat>(grads.col(k).data(), n, n);
    out.col(k) = vec(CMat(r_inv_sqrt * x * r_inv_sqrt));
  }
  return out;
}

}  // namespace

void validate(const CrbInput& input) {
  if (!(input.noise_var > 0.0))
    throw config_error("noise variance must be positive");
  if (input.snapshots < 1) throw config_error("snapshot count must be >= 1");
  const std::size_t k = input.angles_deg.size();
  if (input.powers.size() != k)
    throw config_error("angles/powers size mismatch");
  for (double p : input.powers)
    if (!(p > 0.0)) throw config_error("source powers must be positive");
  if (static_cast<std::int64_t>(2 * k) > 2 * input.design.delta() + 1)
    throw numerical_error(
        "bound undefined for this configuration: 2K > 2*delta + 1");
}

CMat model_covariance(const CrbInput& input) {
  const auto positions = input.design.stacked_positions();
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
  CMat r = input.noise_var * CMat::Identity(n, n);
  for (std::size_t k = 0; k < input.angles_deg.size(); ++k) {
    const CVec a = steering_vector(positions, input.design.unit_spacing,
                                   input.design.wavelength(), input.angles_deg[k]);
    r += input.powers[k] * (a * a.adjoint());
  }
  return r;
}

CovarianceGradients covariance_gradients(const CrbInput& input) {
  const auto positions = input.design.stacked_positions();
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
  const double d = input.design.unit_spacing;
  const double wavelength = input.design.wavelength();
  const Eigen::Index k_total = static_cast<Eigen::Index>(input.angles_deg.size());

  CovarianceGradients out;
  out.d_theta = CMat(n * n, k_total);
  out.d_power = CMat(n * n, k_total);
  for (Eigen::Index k = 0; k < k_total; ++k) {
    const double theta = deg2rad(input.angles_deg[k]);
    const CVec a = steering_vector(positions, d, wavelength, input.angles_deg[k]);
    // da/dtheta = -j (2 pi / lambda) cos(theta) * diag(x) a, x in meters.
    CVec da(n);
    const double scale = 2.0 * kPi / wavelength * std::cos(theta);
    for (Eigen::Index i = 0; i < n; ++i)
      da[i] = cxd(0.0, -1.0) * scale * (static_cast<double>(positions[i]) * d) * a[i];

    out.d_theta.col(k) =
        vec(CMat(input.powers[k] * (da * a.adjoint() + a * da.adjoint())));
    out.d_power.col(k) = vec(CMat(a * a.adjoint()));
  }
  return out;
}

CMat fim(const CrbInput& input) {
  validate(input);
  const CMat r_inv_sqrt = inverse_sqrt(model_covariance(input));
  const CovarianceGradients grads = covariance_gradients(input);
  const Eigen::Index k = grads.d_theta.cols();

  CMat whitened(grads.d_theta.rows(), 2 * k);
  whitened.leftCols(k) = whiten(r_inv_sqrt, grads.d_theta);
  whitened.rightCols(k) = whiten(r_inv_sqrt, grads.d_power);
  return static_cast<double>(input.snapshots) * (whitened.adjoint() * whitened);
}

CMat crb_theta(const CrbInput& input) {
  validate(input);
  if (input.angles_deg.empty()) throw config_error("no sources");

  const CMat r_inv_sqrt = inverse_sqrt(model_covariance(input));
  const CovarianceGradients grads = covariance_gradients(input);
  const CMat g_theta = whiten(r_inv_sqrt, grads.d_theta);
  const CMat g_power = whiten(r_inv_sqrt, grads.d_power);

  const CMat gram_p = g_power.adjoint() * g_power;
  Eigen::LDLT<CMat> ldlt(gram_p);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw numerical_error("bound undefined for this configuration: "
                          "degenerate power gradients");

  const CMat cross = g_power.adjoint() * g_theta;
  const CMat projected =
      g_theta.adjoint() * g_theta - cross.adjoint() * ldlt.solve(cross);

  Eigen::SelfAdjointEigenSolver<CMat> es(projected);
  if (es.info() != Eigen::Success ||
      es.eigenvalues()[0] <= 1e-12 * es.eigenvalues()[es.eigenvalues().size() - 1])
    throw numerical_error(
        "bound undefined for this configuration: rank-deficient projection");

  const CMat inv = es.eigenvectors() *
                   es.eigenvalues().cwiseInverse().asDiagonal() *
                   es.eigenvectors().adjoint();
  return inv / static_cast<double>(input.snapshots);
}

}  // namespace fadoa
