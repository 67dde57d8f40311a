#pragma once

#include <vector>

#include "fadoa/geometry.hpp"
#include "fadoa/types.hpp"

namespace fadoa {

/// Inputs for the deterministic LoS-only bound: the design's stacked
/// manifold, K source angles/powers, known noise power, T snapshots.
struct CrbInput {
  GeometryDesign design;
  std::vector<double> angles_deg;
  std::vector<double> powers;
  double noise_var = 1.0;
  int snapshots = 1;
};

void validate(const CrbInput& input);

/// Model covariance A diag(p) A^H + noise_var * I on the stacked manifold.
CMat model_covariance(const CrbInput& input);

/// Covariance derivatives, one vectorized matrix per column:
/// d_theta (radians) columns are vec(p_k (da a^H + a da^H)),
/// d_power columns are vec(a a^H).
struct CovarianceGradients {
  CMat d_theta;  // (M(G+1))^2 x K
  CMat d_power;  // (M(G+1))^2 x K
};

CovarianceGradients covariance_gradients(const CrbInput& input);

/// Fisher information for [theta_1..theta_K, p_1..p_K]:
/// F = T [D_theta D_p]^H (R^-T kron R^-1) [D_theta D_p], Hermitian PSD.
CMat fim(const CrbInput& input);

/// Closed-form DOA block of the inverse Fisher information (radians^2):
/// (1/T) {D_theta^H Psi^1/2 Pperp Psi^1/2 D_theta}^-1 with Pperp the
/// projector onto the orthogonal complement of Psi^1/2 D_p.
CMat crb_theta(const CrbInput& input);

}  // namespace fadoa
