#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fadoa {

enum class ArrayKind { Aligned, Misaligned };

const char* to_string(ArrayKind kind);
ArrayKind array_kind_from_string(const std::string& name);

/// Blueprint of a fluid-antenna sparse array: subarray sizes, movement
/// schedule and the exact element coordinates (integer multiples of the
/// unit spacing d) after each movement.
///
/// positions[v][m] is the lattice coordinate of element m after the v-th
/// movement, v in [0, movements]; elements 0..m1-1 form subarray 1 and
/// m1..m1+m2-1 form subarray 2. Coordinates stay integral so co-array
/// arithmetic is exact.
struct GeometryDesign {
  ArrayKind kind = ArrayKind::Aligned;
  int m1 = 0;
  int m2 = 0;
  int movements = 0;          // G
  double unit_spacing = 0.5;  // d in meters (default lambda/2 with lambda = 1)
  std::vector<std::vector<std::int64_t>> positions;

  int total_elements() const { return m1 + m2; }
  std::int64_t delta1() const { return movements + 1; }
  std::int64_t delta2() const { return m1 * delta1() * delta1(); }

  /// Consecutive co-array half-range: lags [-delta(), delta()] are all
  /// observable for this design.
  std::int64_t delta() const;

  /// Per-movement coordinate lists concatenated in movement order
  /// (the row order of the stacked snapshot vector).
  std::vector<std::int64_t> stacked_positions() const;

  double wavelength() const { return 2.0 * unit_spacing; }
};

/// Two-subarray fluid array for phase-aligned reception. Subarray spacings
/// (G+1)d and m1(G+1)^2 d; both subarrays move, with subarray 2 stepping
/// m1(G+1) units per movement.
GeometryDesign design_aligned(int elements, int movements);

/// Hybrid array for misaligned reception: subarray 1 is a fixed half-wave
/// ULA, subarray 2 moves in steps of m1 units with spacing m1(G+1)d.
GeometryDesign design_misaligned(int elements, int movements);

/// Sorted union of the element coordinates over all movements.
std::vector<std::int64_t> virtual_positions(const GeometryDesign& design);

/// Difference co-array of a coordinate set.
struct LagSet {
  std::vector<std::int64_t> lags;  // sorted, symmetric, contains 0
  std::int64_t consecutive_lo = 0;
  std::int64_t consecutive_hi = 0;

  std::int64_t consecutive_count() const {
    return consecutive_hi - consecutive_lo + 1;
  }
};

LagSet difference_coarray(const std::vector<std::int64_t>& positions);

/// Closed-form maximum consecutive DoF for the optimal subarray split.
std::int64_t max_consecutive_dof(int elements, int movements, ArrayKind kind);

/// Structured text description: kind, split, movements, spacing and the
/// explicit per-movement coordinate lists.
std::string describe(const GeometryDesign& design);
std::ostream& operator<<(std::ostream& os, const GeometryDesign& design);

}  // namespace fadoa
