#pragma once

#include <utility>
#include <vector>

#include "fadoa/covariance.hpp"
#include "fadoa/types.hpp"

namespace fadoa {

struct EstimationResult {
  int k_hat = 0;
  std::vector<double> angles_deg;  // ascending, size k_hat
  RVec eigenvalues;                // descending spectrum of R_r
  std::vector<cxd> roots;          // selected roots, paired with angles_deg
  RVec ratio_curve;                // f_k = rho_k / rho_{k+1}, k = 1..delta
};

/// Adjacent-eigenvalue ratio curve f_k = rho_k / rho_{k+1} with small
/// eigenvalues floored at 1e-12 * rho_1.
RVec eigenvalue_ratios(const RVec& eigenvalues_desc);

/// LoS path count from the first gap-sized peak of the ratio curve (ratio
/// >= 3, the eigenvalue gap a 5 dB LoS/NLoS power difference guarantees),
/// falling back to the curve's global maximum when no gap qualifies.
/// Throws numerical_error("no detectable source") on a flat spectrum.
int detect_los_count(const RVec& eigenvalues_desc);

/// Wax-Kailath MDL over the eigenvalues; detects the total path count.
int mdl_count(const RVec& eigenvalues_desc, int snapshots);

/// Eigendecomposition of the Toeplitz covariance split at k_hat:
/// (signal basis, interference-plus-noise basis), both orthonormal.
std::pair<CMat, CMat> subspace_split(const CMat& rr, int k_hat);

struct RootMusicResult {
  std::vector<double> angles_deg;  // ascending
  std::vector<cxd> roots;          // paired with angles_deg
};

/// Polynomial-rooting DOA estimation from the noise-subspace basis.
RootMusicResult root_music(const CMat& noise_basis, int k_hat, double d,
                           double wavelength);

/// Laurent coefficients of the root polynomial built from the noise
/// projector Q: index m + delta holds the coefficient of z^m, the sum of
/// the entries of Q with row - col = m. Conjugate-reciprocal:
/// coeff(-m) == conj(coeff(m)).
CVec root_polynomial_coefficients(const CMat& noise_projector);

/// All roots of sum_i coeffs[i] z^i (companion-matrix eigenvalues).
std::vector<cxd> polynomial_roots(const CVec& coeffs);

/// Predicted DOA mean squared error (radians^2) from the polynomial root
/// mean squared error.
double mse_prediction(double root_mse, double angle_deg, std::int64_t delta,
                      double d, double wavelength);

enum class Detector { Ratio, Mdl, FixedK };

const char* to_string(Detector detector);
Detector detector_from_string(const std::string& name);

struct EstimatorOptions {
  Detector detector = Detector::Ratio;
  int fixed_k = 0;  // used when detector == FixedK
};

/// Full pipeline: lag rearrangement, Toeplitz reconstruction, LoS count
/// detection, subspace split and polynomial rooting.
EstimationResult estimate(const CovarianceStack& cov,
                          const GeometryDesign& design,
                          const EstimatorOptions& options = {});

}  // namespace fadoa
