#include "fadoa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fadoa {

namespace {

constexpr double kEigenFloor = 1e-12;   // relative to rho_1
constexpr double kPeakGapRatio = 3.0;   // smallest ratio counted as a gap
constexpr double kUnitDiskTol = 1e-9;   // |z| <= 1 + tol counts as inside
constexpr double kRootDedupTol = 1e-8;  // cluster radius for duplicate roots

void check_descending(const RVec& rho) {
  if (rho.size() < 2) throw config_error("need at least two eigenvalues");
  for (Eigen::Index i = 0; i + 1 < rho.size(); ++i)
    if (rho[i] < rho[i + 1] - 1e-12 * std::abs(rho[0]))
      throw config_error("eigenvalues must be sorted descending");
}

}  // namespace

RVec eigenvalue_ratios(const RVec& eigenvalues_desc) {
  check_descending(eigenvalues_desc);
  const Eigen::Index n = eigenvalues_desc.size();
  const double floor = kEigenFloor * eigenvalues_desc[0];
  RVec f(n - 1);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double hi = std::max(eigenvalues_desc[k], floor);
    const double lo = std::max(eigenvalues_desc[k + 1], floor);
    f[k] = hi / lo;
  }
  return f;
}

int detect_los_count(const RVec& eigenvalues_desc) {
  check_descending(eigenvalues_desc);
  const Eigen::Index n = eigenvalues_desc.size();
  const double rho1 = eigenvalues_desc[0];
  if (!(rho1 > 0.0) ||
      eigenvalues_desc[0] - eigenvalues_desc[n - 1] <= 1e-12 * std::abs(rho1))
    throw numerical_error("no detectable source: flat eigenvalue spectrum");

  const RVec f = eigenvalue_ratios(eigenvalues_desc);
  // First peak that can be an LoS/interference power gap: a 5 dB gap (the
  // weakest the NLoS model allows) already pushes the eigenvalue ratio past
  // 10^0.5 ~ 3.2, while adjacent eigenvalues inside one group keep their
  // ratio near 1. Without such a gap the curve's global maximum decides.
  for (Eigen::Index k = 0; k < f.size(); ++k)
    if (f[k] >= kPeakGapRatio) return static_cast<int>(k) + 1;
  Eigen::Index best = 0;
  f.maxCoeff(&best);
  return static_cast<int>(best) + 1;
}

int mdl_count(const RVec& eigenvalues_desc, int snapshots) {
  check_descending(eigenvalues_desc);
  if (snapshots < 1) throw config_error("MDL needs a positive snapshot count");
  const Eigen::Index n = eigenvalues_desc.size();
  const double floor = std::max(1e-20 * std::abs(eigenvalues_desc[0]), 1e-300);
  RVec lam = eigenvalues_desc.cwiseMax(floor);

  const double t = static_cast<double>(snapshots);
  double best_cost = 0.0;
  int best_k = 0;
  for (int k = 0; k < n; ++k) {
    const double m = static_cast<double>(n - k);
    double sum = 0.0, log_sum = 0.0;
    for (Eigen::Index i = k; i < n; ++i) {
      sum += lam[i];
      log_sum += std::log(lam[i]);
    }
    const double log_am = std::log(sum / m);
    const double log_gm = log_sum / m;
    const double cost =
        t * m * (log_am - log_gm) + 0.5 * k * (2.0 * n - k) * std::log(t);
    if (k == 0 || cost < best_cost) {
      best_cost = cost;
      best_k = k;
    }
  }
  return best_k;
}

std::pair<CMat, CMat> subspace_split(const CMat& rr, int k_hat) {
  const Eigen::Index n = rr.rows();
  if (n < 2 || rr.cols() != n) throw config_error("covariance must be square");
  if (k_hat < 1) throw config_error("LoS count must be at least 1");
  if (k_hat > n - 1)
    throw config_error("capacity exceeded: LoS count " + std::to_string(k_hat) +
                       " > delta " + std::to_string(n - 1));

  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rr + rr.adjoint()));
  if (es.info() != Eigen::Success)
    throw numerical_error("eigendecomposition failed");

  const CMat& v = es.eigenvectors();  // ascending eigenvalues
  CMat signal(n, k_hat);
  for (int i = 0; i < k_hat; ++i) signal.col(i) = v.col(n - 1 - i);
  const CMat noise = v.leftCols(n - k_hat);
  return {signal, noise};
}

CVec root_polynomial_coefficients(const CMat& noise_projector) {
  const Eigen::Index n = noise_projector.rows();
  const Eigen::Index delta = n - 1;
  CVec coeffs = CVec::Zero(2 * delta + 1);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) coeffs[(r - c) + delta] += noise_projector(r, c);
  return coeffs;
}

std::vector<cxd> polynomial_roots(const CVec& coeffs) {
  const double max_mag = coeffs.cwiseAbs().maxCoeff();
  if (!(max_mag > 0.0)) return {};
  Eigen::Index degree = coeffs.size() - 1;
  while (degree > 0 && std::abs(coeffs[degree]) <= 1e-14 * max_mag) --degree;
  if (degree == 0) return {};

  CMat companion = CMat::Zero(degree, degree);
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i)
    companion(i, degree - 1) = -coeffs[i] / coeffs[degree];

  Eigen::ComplexEigenSolver<CMat> es(companion, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numerical_error("polynomial root finding failed");
  const CVec& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

namespace {

// Newton refinement of a root angle on the unit circle. The restriction
// g(phi) = sum_m gamma_m exp(j m phi) is real (conjugate-reciprocal
// coefficients) and has a simple minimum where the polynomial has a double
// root, so a few guarded iterations on g' reach machine precision.
double polish_root_angle(const CVec& coeffs, double phi) {
  const Eigen::Index delta = (coeffs.size() - 1) / 2;
  for (int iter = 0; iter < 4; ++iter) {
    double g1 = 0.0, g2 = 0.0;
    for (Eigen::Index m = 1; m <= delta; ++m) {
      const cxd e(std::cos(m * phi), std::sin(m * phi));
      const cxd c = coeffs[delta + m];
      // d/dphi of 2*Re(c e^{jm phi}) and its derivative
      g1 += -2.0 * static_cast<double>(m) * std::imag(c * e);
      g2 += -2.0 * static_cast<double>(m * m) * std::real(c * e);
    }
    if (!(g2 > 0.0)) break;  // not locally convex, leave the root alone
    const double step = g1 / g2;
    if (!std::isfinite(step) || std::abs(step) > 0.05) break;
    phi -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return phi;
}

}  // namespace

RootMusicResult root_music(const CMat& noise_basis, int k_hat, double d,
                           double wavelength) {
  if (k_hat < 1) throw config_error("LoS count must be at least 1");
  const CMat q = noise_basis * noise_basis.adjoint();
  const CVec coeffs = root_polynomial_coefficients(q);
  const std::vector<cxd> all_roots = polynomial_roots(coeffs);

  // Keep the closed unit disk, refine each root's angle along the circle,
  // and collapse duplicates: a double root on the circle splits into two
  // nearby roots that polish onto the same spectrum minimum.
  struct Candidate {
    cxd root;
    double phi;          // polished angle
    double sin_theta;
    double circle_dist;  // pre-polish distance to the unit circle
  };
  std::vector<Candidate> candidates;
  for (const cxd& z : all_roots) {
    if (std::abs(z) > 1.0 + kUnitDiskTol) continue;
    Candidate c;
    c.root = z;
    c.phi = polish_root_angle(coeffs, std::arg(z));
    c.circle_dist = std::abs(std::abs(z) - 1.0);
    bool merged = false;
    for (Candidate& u : candidates) {
      const double gap = std::remainder(c.phi - u.phi, 2.0 * kPi);
      if (std::abs(gap) <= kRootDedupTol ||
          std::abs(c.root - u.root) <= kRootDedupTol) {
        if (c.circle_dist < u.circle_dist) u = c;
        merged = true;
        break;
      }
    }
    if (!merged) candidates.push_back(c);
  }

  // Map the angle to sin(theta); roots outside the visible region drop out.
  for (auto it = candidates.begin(); it != candidates.end();) {
    double s = wavelength * it->phi / (2.0 * kPi * d);
    if (std::abs(s) > 1.0 + 1e-12) {
      it = candidates.erase(it);
    } else {
      it->sin_theta = std::clamp(s, -1.0, 1.0);
      ++it;
    }
  }

  if (static_cast<int>(candidates.size()) < k_hat)
    throw numerical_error(
        "root finding failed: fewer candidate roots than detected paths");

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.circle_dist < b.circle_dist;
                   });
  candidates.resize(k_hat);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.sin_theta < b.sin_theta;
                   });

  RootMusicResult out;
  for (const Candidate& c : candidates) {
    out.angles_deg.push_back(rad2deg(std::asin(c.sin_theta)));
    out.roots.push_back(c.root);
  }
  return out;
}

double mse_prediction(double root_mse, double angle_deg, std::int64_t delta,
                      double d, double wavelength) {
  if (!(std::abs(angle_deg) < 90.0))
    throw config_error("angle outside (-90, 90) degrees");
  const double scale = wavelength / (2.0 * kPi * d * std::cos(deg2rad(angle_deg)));
  return scale * scale * root_mse / (2.0 * static_cast<double>(delta + 1));
}

const char* to_string(Detector detector) {
  switch (detector) {
    case Detector::Ratio: return "ratio";
    case Detector::Mdl: return "mdl";
    default: return "fixed";
  }
}

Detector detector_from_string(const std::string& name) {
  if (name == "ratio") return Detector::Ratio;
  if (name == "mdl") return Detector::Mdl;
  if (name == "fixed") return Detector::FixedK;
  throw config_error("unknown detector: " + name);
}

EstimationResult estimate(const CovarianceStack& cov,
                          const GeometryDesign& design,
                          const EstimatorOptions& options) {
  const LagVector r = rearrange_to_lags(cov, design);
  const CMat rr = toeplitz_covariance(r);
  const Eigen::Index n = rr.rows();

  Eigen::SelfAdjointEigenSolver<CMat> es(rr);
  if (es.info() != Eigen::Success)
    throw numerical_error("eigendecomposition failed");

  EstimationResult result;
  result.eigenvalues = es.eigenvalues().reverse();
  result.ratio_curve = eigenvalue_ratios(result.eigenvalues);

  switch (options.detector) {
    case Detector::Ratio:
      result.k_hat = detect_los_count(result.eigenvalues);
      break;
    case Detector::Mdl:
      result.k_hat = mdl_count(result.eigenvalues, cov.snapshot_count);
      if (result.k_hat == 0)
        throw numerical_error("no detectable source: MDL selected zero paths");
      break;
    case Detector::FixedK:
      if (options.fixed_k < 1 || options.fixed_k > n - 1)
        throw config_error("fixed LoS count outside [1, delta]");
      result.k_hat = options.fixed_k;
      break;
  }
  if (result.k_hat > n - 1)
    throw numerical_error("capacity exceeded: detected " +
                          std::to_string(result.k_hat) + " paths > delta " +
                          std::to_string(n - 1));

  const CMat noise = es.eigenvectors().leftCols(n - result.k_hat);
  RootMusicResult rm =
      root_music(noise, result.k_hat, design.unit_spacing, design.wavelength());
  result.angles_deg = std::move(rm.angles_deg);
  result.roots = std::move(rm.roots);
  return result;
}

}  // namespace fadoa
