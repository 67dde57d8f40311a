#include "fadoa/geometry.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fadoa/types.hpp"

namespace fadoa {

namespace {

void check_design_args(int elements, int movements) {
  if (elements < 2)
    throw config_error(
        "invalid design: need at least 2 elements (one per subarray)");
  if (movements < 0)
    throw config_error("invalid design: movement count must be >= 0");
}

// Optimal split: equal halves for even M, subarray 1 takes the extra
// element for odd M.
std::pair<int, int> split_elements(int elements) {
  const int m1 = (elements + 1) / 2;
  return {m1, elements - m1};
}

void check_no_collisions(const GeometryDesign& design) {
  for (const auto& coords : design.positions) {
    std::unordered_set<std::int64_t> seen(coords.begin(), coords.end());
    if (seen.size() != coords.size())
      throw config_error(
          "invalid design: colliding element positions within one movement");
  }
}

}  // namespace

const char* to_string(ArrayKind kind) {
  return kind == ArrayKind::Aligned ? "aligned" : "misaligned";
}

ArrayKind array_kind_from_string(const std::string& name) {
  if (name == "aligned") return ArrayKind::Aligned;
  if (name == "misaligned") return ArrayKind::Misaligned;
  throw config_error("unknown array kind: " + name);
}

std::int64_t GeometryDesign::delta() const {
  const std::int64_t d1 = delta1();
  if (kind == ArrayKind::Aligned) return m1 * d1 - 1 + m1 * m2 * d1 * d1;
  return m1 - 1 + m1 * m2 * d1;
}

std::vector<std::int64_t> GeometryDesign::stacked_positions() const {
  std::vector<std::int64_t> out;
  out.reserve(positions.size() * total_elements());
  for (const auto& coords : positions)
    out.insert(out.end(), coords.begin(), coords.end());
  return out;
}

GeometryDesign design_aligned(int elements, int movements) {
  check_design_args(elements, movements);
  GeometryDesign design;
  design.kind = ArrayKind::Aligned;
  auto [m1, m2] = split_elements(elements);
  design.m1 = m1;
  design.m2 = m2;
  design.movements = movements;

  const std::int64_t d1 = design.delta1();
  const std::int64_t d2 = design.delta2();
  for (int v = 0; v <= movements; ++v) {
    std::vector<std::int64_t> coords;
    coords.reserve(elements);
    for (int i = 0; i < m1; ++i) coords.push_back(v + i * d1);
    // Subarray 2 start after v movements: (2*m1 - 1)*d1 + G + m1*v*d1.
    const std::int64_t start = (2 * m1 - 1) * d1 + movements + m1 * v * d1;
    for (int j = 0; j < m2; ++j) coords.push_back(start + j * d2);
    design.positions.push_back(std::move(coords));
  }
  check_no_collisions(design);
  return design;
}

GeometryDesign design_misaligned(int elements, int movements) {
  check_design_args(elements, movements);
  GeometryDesign design;
  design.kind = ArrayKind::Misaligned;
  auto [m1, m2] = split_elements(elements);
  design.m1 = m1;
  design.m2 = m2;
  design.movements = movements;

  const std::int64_t d1 = design.delta1();
  for (int g = 0; g <= movements; ++g) {
    std::vector<std::int64_t> coords;
    coords.reserve(elements);
    for (int i = 0; i < m1; ++i) coords.push_back(i);
    for (int j = 0; j < m2; ++j)
      coords.push_back((2 * m1 - 1) + j * m1 * d1 + static_cast<std::int64_t>(g) * m1);
    design.positions.push_back(std::move(coords));
  }
  check_no_collisions(design);
  return design;
}

std::vector<std::int64_t> virtual_positions(const GeometryDesign& design) {
  std::set<std::int64_t> uniq;
  for (const auto& coords : design.positions)
    uniq.insert(coords.begin(), coords.end());
  return {uniq.begin(), uniq.end()};
}

LagSet difference_coarray(const std::vector<std::int64_t>& positions) {
  if (positions.empty())
    throw config_error("difference co-array of an empty position set");

  std::set<std::int64_t> diffs;
  for (std::int64_t a : positions)
    for (std::int64_t b : positions) diffs.insert(a - b);

  LagSet out;
  out.lags.assign(diffs.begin(), diffs.end());
  std::int64_t hi = 0;
  while (diffs.count(hi + 1)) ++hi;
  std::int64_t lo = 0;
  while (diffs.count(lo - 1)) --lo;
  // The difference set is symmetric, so the run around 0 is too.
  out.consecutive_hi = hi;
  out.consecutive_lo = lo;
  return out;
}

std::int64_t max_consecutive_dof(int elements, int movements, ArrayKind kind) {
  check_design_args(elements, movements);
  const std::int64_t m = elements;
  const std::int64_t d1 = movements + 1;
  if (kind == ArrayKind::Aligned) {
    if (m % 2 == 0) return m * d1 + m * m * d1 * d1 / 2 - 1;
    return (m + 1) * d1 + (m * m - 1) * d1 * d1 / 2 - 1;
  }
  if (m % 2 == 0) return m - 1 + m * m * d1 / 2;
  return m + (m * m - 1) * d1 / 2;
}

std::string describe(const GeometryDesign& design) {
  std::ostringstream os;
  os << design;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const GeometryDesign& design) {
  os << "kind: " << to_string(design.kind) << "\n";
  os << "elements: " << design.total_elements() << " (subarray1 " << design.m1
     << ", subarray2 " << design.m2 << ")\n";
  os << "movements: " << design.movements << "\n";
  os << "unit_spacing: " << design.unit_spacing << "\n";
  os << "delta1: " << design.delta1() << "\n";
  if (design.kind == ArrayKind::Aligned) os << "delta2: " << design.delta2() << "\n";
  os << "delta: " << design.delta() << "\n";
  for (std::size_t v = 0; v < design.positions.size(); ++v) {
    os << "positions[" << v << "]:";
    for (std::int64_t p : design.positions[v]) os << ' ' << p;
    os << "\n";
  }
  return os;
}

}  // namespace fadoa
