#include "fadoa/signal.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "fadoa/rng.hpp"

namespace fadoa {

namespace {

// Stream role tags; every (seed, role, indices...) tuple is an independent
// deterministic stream.
enum StreamRole : std::uint64_t {
  kRolePathGain = 1,
  kRoleSymbols = 2,
  kRoleNoise = 3,
};

}  // namespace

const char* to_string(Alignment alignment) {
  return alignment == Alignment::Aligned ? "aligned" : "misaligned";
}

Alignment alignment_from_string(const std::string& name) {
  if (name == "aligned") return Alignment::Aligned;
  if (name == "misaligned") return Alignment::Misaligned;
  throw config_error("unknown alignment: " + name);
}

CVec steering_vector(const std::vector<std::int64_t>& positions, double d,
                     double wavelength, double angle_deg) {
  if (!(std::abs(angle_deg) < 90.0))
    throw config_error("steering angle outside (-90, 90) degrees");
  const double omega = 2.0 * kPi * std::sin(deg2rad(angle_deg)) / wavelength;
  CVec a(positions.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double phase = -static_cast<double>(positions[i]) * d * omega;
    a[i] = cxd(std::cos(phase), std::sin(phase));
  }
  return a;
}

double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

void validate(const Scenario& scenario) {
  if (scenario.snapshots < 1)
    throw config_error("scenario needs at least one snapshot");
  std::set<double> los;
  for (const Target& t : scenario.targets) {
    if (!(std::abs(t.los_angle_deg) < 90.0))
      throw config_error("LoS angle outside (-90, 90) degrees");
    los.insert(t.los_angle_deg);
    for (double a : t.nlos_angles_deg)
      if (!(std::abs(a) < 90.0))
        throw config_error("NLoS angle outside (-90, 90) degrees");
  }
  if (los.size() != scenario.targets.size())
    throw config_error("LoS angles must be distinct");
}

std::vector<SnapshotBlock> synthesize(const Scenario& scenario,
                                      const GeometryDesign& design) {
  validate(scenario);

  const int movements = design.movements;
  const int elements = design.total_elements();
  const int snapshots = scenario.snapshots;
  const double wavelength = design.wavelength();
  const double sigma2 = noise_variance(scenario.snr_db);
  const double nlos_var =
      std::pow(10.0, -scenario.nlos_attenuation_db / 10.0);

  const RandomStream root(scenario.seed);

  // Flatten (target, path) with path 0 = LoS. Gains are per snapshot index
  // and shared across movements.
  struct Path {
    std::size_t target;
    std::size_t path;  // 0 = LoS
    double angle_deg;
  };
  std::vector<Path> paths;
  for (std::size_t k = 0; k < scenario.targets.size(); ++k) {
    paths.push_back({k, 0, scenario.targets[k].los_angle_deg});
    const auto& nlos = scenario.targets[k].nlos_angles_deg;
    for (std::size_t l = 0; l < nlos.size(); ++l)
      paths.push_back({k, l + 1, nlos[l]});
  }

  CMat gains(paths.size(), snapshots);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    RandomStream gs = root.derive({kRolePathGain, paths[p].target, paths[p].path});
    const double var = paths[p].path == 0 ? 1.0 : nlos_var;
    for (int t = 0; t < snapshots; ++t) gains(p, t) = gs.complex_gaussian(var);
  }

  // Symbol stream of target k after movement v; aligned reception reuses
  // the v = 0 stream for every movement.
  auto symbols_for = [&](std::size_t k, int v) {
    const std::uint64_t vv =
        scenario.alignment == Alignment::Aligned ? 0u : static_cast<std::uint64_t>(v);
    RandomStream ss = root.derive({kRoleSymbols, k, vv});
    CVec s(snapshots);
    for (int t = 0; t < snapshots; ++t) s[t] = ss.complex_gaussian(1.0);
    return s;
  };

  std::vector<SnapshotBlock> blocks;
  blocks.reserve(movements + 1);
  for (int v = 0; v <= movements; ++v) {
    CMat manifold(elements, paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p)
      manifold.col(p) = steering_vector(design.positions[v], design.unit_spacing,
                                        wavelength, paths[p].angle_deg);

    CMat sources(paths.size(), snapshots);
    for (std::size_t k = 0; k < scenario.targets.size(); ++k) {
      const CVec s = symbols_for(k, v);
      for (std::size_t p = 0; p < paths.size(); ++p)
        if (paths[p].target == k)
          sources.row(p) = gains.row(p).cwiseProduct(s.transpose());
    }

    CMat samples = manifold * sources;
    RandomStream ns = root.derive({kRoleNoise, static_cast<std::uint64_t>(v)});
    for (int t = 0; t < snapshots; ++t)
      for (int m = 0; m < elements; ++m)
        samples(m, t) += ns.complex_gaussian(sigma2);

    blocks.push_back({v, std::move(samples)});
  }
  return blocks;
}

void dump_blocks(std::ostream& os, const std::vector<SnapshotBlock>& blocks) {
  os.precision(17);
  for (const SnapshotBlock& block : blocks) {
    os << "# movement " << block.movement << " (" << block.samples.rows()
       << " x " << block.samples.cols() << ")\n";
    for (Eigen::Index m = 0; m < block.samples.rows(); ++m) {
      for (Eigen::Index t = 0; t < block.samples.cols(); ++t) {
        const cxd z = block.samples(m, t);
        os << (t ? " " : "") << z.real() << (z.imag() < 0 ? "" : "+")
           << z.imag() << "j";
      }
      os << "\n";
    }
  }
}

}  // namespace fadoa
