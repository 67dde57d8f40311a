#include "fadoa/covariance.hpp"

#include <ostream>

namespace fadoa {

namespace {

CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

CMat model_matrix(const std::vector<std::int64_t>& positions, double d,
                  double wavelength, const std::vector<double>& angles_deg,
                  const std::vector<double>& powers, double noise_var) {
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
  CMat r = noise_var * CMat::Identity(n, n);
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    const CVec a = steering_vector(positions, d, wavelength, angles_deg[k]);
    r += powers[k] * (a * a.adjoint());
  }
  return r;
}

}  // namespace

CovarianceMode covariance_mode_for(Alignment alignment) {
  return alignment == Alignment::Aligned ? CovarianceMode::Stacked
                                         : CovarianceMode::PerMovement;
}

CovarianceStack sample_covariance(const std::vector<SnapshotBlock>& blocks,
                                  CovarianceMode mode) {
  if (blocks.empty()) throw config_error("no snapshot blocks");

  CovarianceStack out;
  out.mode = mode;
  out.snapshot_count = static_cast<int>(blocks.front().samples.cols());

  if (mode == CovarianceMode::Stacked) {
    const Eigen::Index t = blocks.front().samples.cols();
    Eigen::Index rows = 0;
    for (const SnapshotBlock& b : blocks) {
      if (b.samples.cols() != t)
        throw config_error("stacked covariance needs equal snapshot counts");
      rows += b.samples.rows();
    }
    CMat y(rows, t);
    Eigen::Index at = 0;
    for (const SnapshotBlock& b : blocks) {
      y.middleRows(at, b.samples.rows()) = b.samples;
      at += b.samples.rows();
    }
    out.matrices.push_back(hermitize(y * y.adjoint() / static_cast<double>(t)));
    return out;
  }

  for (const SnapshotBlock& b : blocks) {
    const double t = static_cast<double>(b.samples.cols());
    out.matrices.push_back(hermitize(b.samples * b.samples.adjoint() / t));
  }
  return out;
}

CovarianceStack exact_covariance(const GeometryDesign& design,
                                 CovarianceMode mode,
                                 const std::vector<double>& angles_deg,
                                 const std::vector<double>& powers,
                                 double noise_var, int snapshot_count) {
  if (angles_deg.size() != powers.size())
    throw config_error("angles/powers size mismatch");

  CovarianceStack out;
  out.mode = mode;
  out.snapshot_count = snapshot_count;
  if (mode == CovarianceMode::Stacked) {
    out.matrices.push_back(model_matrix(design.stacked_positions(),
                                        design.unit_spacing, design.wavelength(),
                                        angles_deg, powers, noise_var));
  } else {
    for (const auto& coords : design.positions)
      out.matrices.push_back(model_matrix(coords, design.unit_spacing,
                                          design.wavelength(), angles_deg,
                                          powers, noise_var));
  }
  return out;
}

LagVector rearrange_to_lags(const CovarianceStack& cov,
                            const GeometryDesign& design) {
  const std::int64_t delta = design.delta();
  const std::int64_t n_lags = 2 * delta + 1;

  std::vector<std::vector<std::int64_t>> position_sets;
  if (cov.mode == CovarianceMode::Stacked) {
    if (cov.matrices.size() != 1)
      throw config_error("stacked covariance must hold exactly one matrix");
    position_sets.push_back(design.stacked_positions());
  } else {
    if (cov.matrices.size() != design.positions.size())
      throw config_error("per-movement covariance count does not match design");
    position_sets = design.positions;
  }

  CVec sums = CVec::Zero(n_lags);
  std::vector<std::int64_t> counts(n_lags, 0);
  for (std::size_t s = 0; s < cov.matrices.size(); ++s) {
    const CMat& m = cov.matrices[s];
    const auto& pos = position_sets[s];
    if (m.rows() != static_cast<Eigen::Index>(pos.size()) || m.rows() != m.cols())
      throw config_error("covariance dimension does not match design positions");
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        // Entry (r, c) observes lag x_c - x_r: R[r,c] = sum_k p_k
        // exp(+j (x_c - x_r) d w_k) for uncorrelated sources.
        const std::int64_t lag = pos[c] - pos[r];
        if (lag < -delta || lag > delta) continue;
        sums[lag + delta] += m(r, c);
        counts[lag + delta] += 1;
      }
    }
  }

  LagVector out;
  out.delta = delta;
  out.values = CVec(n_lags);
  for (std::int64_t i = 0; i < n_lags; ++i) {
    if (counts[i] == 0)
      throw numerical_error(
          "lag " + std::to_string(i - delta) +
          " in the consecutive range has no contributing covariance entry");
    out.values[i] = sums[i] / static_cast<double>(counts[i]);
  }
  // Conjugate symmetry across +/- lags.
  for (std::int64_t l = 1; l <= delta; ++l) {
    const cxd avg = 0.5 * (out.values[delta + l] + std::conj(out.values[delta - l]));
    out.values[delta + l] = avg;
    out.values[delta - l] = std::conj(avg);
  }
  out.values[delta] = cxd(out.values[delta].real(), 0.0);
  return out;
}

CMat toeplitz_covariance(const LagVector& r) {
  const std::int64_t delta = r.delta;
  if (r.values.size() != 2 * delta + 1)
    throw config_error("lag vector length does not match its delta");
  CMat rr(delta + 1, delta + 1);
  for (std::int64_t a = 0; a <= delta; ++a)
    for (std::int64_t i = 0; i <= delta; ++i) rr(a, i) = r.values[delta + (i - a)];
  return rr;
}

void write_matrix(std::ostream& os, const CMat& m) {
  os.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const cxd z = m(r, c);
      os << (c ? " " : "") << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
         << "j";
    }
    os << "\n";
  }
}

}  // namespace fadoa
