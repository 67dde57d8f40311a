#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fadoa/geometry.hpp"
#include "fadoa/types.hpp"

namespace fadoa {

enum class Alignment { Aligned, Misaligned };

const char* to_string(Alignment alignment);
Alignment alignment_from_string(const std::string& name);

struct Target {
  double los_angle_deg = 0.0;
  std::vector<double> nlos_angles_deg;
};

struct Scenario {
  std::vector<Target> targets;
  double snr_db = 0.0;
  int snapshots = 500;  // T per movement
  Alignment alignment = Alignment::Aligned;
  double nlos_attenuation_db = 10.0;
  std::uint64_t seed = 0;
};

/// One block of received samples: M rows (elements, in the order of
/// design.positions[movement]) by T snapshot columns.
struct SnapshotBlock {
  int movement = 0;
  CMat samples;
};

/// Plane-wave phase signature across the given lattice coordinates,
/// entry i = exp(-j * x_i * d * 2*pi*sin(theta)/lambda).
CVec steering_vector(const std::vector<std::int64_t>& positions, double d,
                     double wavelength, double angle_deg);

/// Noise power for a given per-LoS-path SNR, with unit LoS received power.
double noise_variance(double snr_db);

void validate(const Scenario& scenario);

/// Synthesize one snapshot block per movement. Path gains are drawn per
/// snapshot index and shared across movements (quasi-static coherence
/// block); symbol streams are shared across movements when the scenario is
/// Aligned and drawn independently per movement otherwise. Noise is fresh
/// per movement. Deterministic in (scenario, design, scenario.seed).
std::vector<SnapshotBlock> synthesize(const Scenario& scenario,
                                      const GeometryDesign& design);

/// Text dump of the raw snapshot matrices, one block per section.
void dump_blocks(std::ostream& os, const std::vector<SnapshotBlock>& blocks);

}  // namespace fadoa
