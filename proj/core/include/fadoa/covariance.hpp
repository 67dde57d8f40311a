#pragma once

#include <iosfwd>
#include <vector>

#include "fadoa/geometry.hpp"
#include "fadoa/signal.hpp"
#include "fadoa/types.hpp"

namespace fadoa {

enum class CovarianceMode { Stacked, PerMovement };

/// Sample (or model) covariances of the array output. Stacked mode holds a
/// single M(G+1) x M(G+1) matrix over the movement-stacked snapshot vector;
/// PerMovement holds one M x M matrix per movement.
struct CovarianceStack {
  CovarianceMode mode = CovarianceMode::Stacked;
  std::vector<CMat> matrices;
  int snapshot_count = 0;
};

CovarianceMode covariance_mode_for(Alignment alignment);

/// (1/T) Y Y^H per matrix, Hermitian-symmetrized. Stacked mode requires all
/// blocks to share the same snapshot count.
CovarianceStack sample_covariance(const std::vector<SnapshotBlock>& blocks,
                                  CovarianceMode mode);

/// Infinite-snapshot covariance built from model parameters: sum_k p_k
/// a(theta_k) a(theta_k)^H + noise_var * I on the stacked (or per-movement)
/// manifold of the design.
CovarianceStack exact_covariance(const GeometryDesign& design,
                                 CovarianceMode mode,
                                 const std::vector<double>& angles_deg,
                                 const std::vector<double>& powers,
                                 double noise_var, int snapshot_count = 1);

/// Co-array observation vector over consecutive lags -delta..delta;
/// values[delta + l] is the averaged covariance at spatial lag l.
/// Conjugate symmetry values[delta + l] == conj(values[delta - l]) is
/// enforced by averaging.
struct LagVector {
  std::int64_t delta = 0;
  CVec values;  // length 2*delta + 1
};

/// Map every covariance entry to its spatial lag (column position minus row
/// position on the design's lattice), average duplicates, and restrict to
/// the design's consecutive range. A lag in range with no contributing
/// entry is an internal-consistency failure.
LagVector rearrange_to_lags(const CovarianceStack& cov,
                            const GeometryDesign& design);

/// (delta+1) x (delta+1) Hermitian Toeplitz matrix of overlapping flipped
/// sub-vectors of r; entry (a, i) = r(i - a). Rank-K for K uncorrelated
/// sources, plus noise_var on the diagonal.
CMat toeplitz_covariance(const LagVector& r);

/// Text dump (one row per line, "re+imj" fields) for debugging.
void write_matrix(std::ostream& os, const CMat& m);

}  // namespace fadoa
