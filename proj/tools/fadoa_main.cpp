// fadoa: fluid-antenna sparse array designer and DOA estimation simulator.
//
// Subcommands:
//   design    print a geometry and its co-array report
//   run       seeded Monte-Carlo campaign, CSV/JSON output
//   crb       bound curve for a campaign config, no trials
//   selftest  condensed oracle suite
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fadoa/covariance.hpp"
#include "fadoa/crb.hpp"
#include "fadoa/estimator.hpp"
#include "fadoa/harness.hpp"
#include "fadoa/types.hpp"

namespace {

using namespace fadoa;

void print_design_report(const GeometryDesign& design, bool as_json) {
  const auto virt = virtual_positions(design);
  const LagSet lags = difference_coarray(virt);
  const std::int64_t fmax =
      max_consecutive_dof(design.total_elements(), design.movements, design.kind);

  if (as_json) {
    std::string j = "{\n";
    j += "  \"kind\": \"" + std::string(to_string(design.kind)) + "\",\n";
    j += "  \"m1\": " + std::to_string(design.m1) + ",\n";
    j += "  \"m2\": " + std::to_string(design.m2) + ",\n";
    j += "  \"movements\": " + std::to_string(design.movements) + ",\n";
    j += "  \"unit_spacing\": " + std::to_string(design.unit_spacing) + ",\n";
    j += "  \"positions\": [";
    for (std::size_t v = 0; v < design.positions.size(); ++v) {
      j += v ? ", [" : "[";
      for (std::size_t m = 0; m < design.positions[v].size(); ++m)
        j += (m ? ", " : "") + std::to_string(design.positions[v][m]);
      j += "]";
    }
    j += "],\n";
    j += "  \"delta\": " + std::to_string(design.delta()) + ",\n";
    j += "  \"consecutive_dof\": " + std::to_string(lags.consecutive_count()) + "\n";
    j += "}\n";
    std::cout << j;
    return;
  }

  std::cout << design;
  std::cout << "virtual positions:";
  for (std::int64_t p : virt) std::cout << ' ' << p;
  std::cout << "\n";
  std::cout << "co-array consecutive range: [" << lags.consecutive_lo << ", "
            << lags.consecutive_hi << "]\n";
  std::cout << "consecutive DoF: " << lags.consecutive_count()
            << " (closed form " << fmax << ")\n";
}

int run_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
    if (!ok) ++failures;
  };

  // Closed-form consecutive DoF vs brute force over the design grid.
  {
    bool ok = true;
    for (int m = 2; m <= 12 && ok; ++m)
      for (int g = 0; g <= 4 && ok; ++g)
        for (ArrayKind kind : {ArrayKind::Aligned, ArrayKind::Misaligned}) {
          const GeometryDesign design = kind == ArrayKind::Aligned
                                            ? design_aligned(m, g)
                                            : design_misaligned(m, g);
          const LagSet lags = difference_coarray(virtual_positions(design));
          if (lags.consecutive_count() != max_consecutive_dof(m, g, kind)) {
            ok = false;
            break;
          }
        }
    check("geometry: co-array matches closed forms (M 2..12, G 0..4)", ok);
  }

  // Exact-covariance recovery through the full pipeline, both designs.
  {
    bool ok = true;
    for (ArrayKind kind : {ArrayKind::Aligned, ArrayKind::Misaligned}) {
      const GeometryDesign design =
          kind == ArrayKind::Aligned ? design_aligned(3, 1) : design_misaligned(4, 1);
      const CovarianceMode mode = kind == ArrayKind::Aligned
                                      ? CovarianceMode::Stacked
                                      : CovarianceMode::PerMovement;
      const std::vector<double> angles = {-41.5, -7.25, 13.0, 55.0};
      const CovarianceStack cov = exact_covariance(
          design, mode, angles, std::vector<double>(angles.size(), 1.0), 0.01);
      const EstimationResult est = estimate(cov, design);
      if (est.k_hat != static_cast<int>(angles.size())) ok = false;
      for (std::size_t i = 0; ok && i < angles.size(); ++i)
        if (std::abs(est.angles_deg[i] - angles[i]) > 1e-6) ok = false;
    }
    check("estimator: exact-covariance recovery to 1e-6 deg", ok);
  }

  // CRB consistency: Eq. 50 route vs the theta block of the full FIM inverse.
  {
    CrbInput input;
    input.design = design_aligned(3, 1);
    input.angles_deg = {-20.3, 10.7};
    input.powers = {1.0, 1.0};
    input.noise_var = 1.0;
    input.snapshots = 500;
    const CMat direct = crb_theta(input);
    const CMat f = fim(input);
    const CMat theta_block =
        f.inverse().topLeftCorner(direct.rows(), direct.cols());
    const double rel = (direct - theta_block).norm() / theta_block.norm();
    check("crb: closed form matches FIM-inverse theta block (1e-8)", rel < 1e-8);
  }

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluid-antenna sparse array DOA estimation simulator"};
  app.set_version_flag("--version", std::string("fadoa ") + fadoa::kVersion);
  app.require_subcommand(1);

  // design
  auto* design_cmd = app.add_subcommand("design", "print geometry + co-array report");
  std::string kind_name = "aligned";
  int elements = 3, movements = 1;
  double spacing = 0.5;
  bool as_json = false;
  design_cmd->add_option("--kind", kind_name, "aligned | misaligned");
  design_cmd->add_option("--elements,-M", elements, "physical antenna count");
  design_cmd->add_option("--movements,-G", movements, "movement count");
  design_cmd->add_option("--spacing", spacing, "unit spacing d in wavelengths");
  design_cmd->add_flag("--json", as_json, "emit JSON instead of text");

  // run
  auto* run_cmd = app.add_subcommand("run", "run a Monte-Carlo campaign");
  std::string config_path;
  std::uint64_t seed = 0;
  int trials_override = -1, threads_override = -1;
  std::string output_override, dump_prefix;
  bool emit_dat = false;
  run_cmd->add_option("--config,-c", config_path, "campaign config (JSON)")
      ->required();
  run_cmd->add_option("--seed", seed, "campaign seed")->required();
  run_cmd->add_option("--trials", trials_override, "override trial count");
  run_cmd->add_option("--threads", threads_override, "worker count (0 = auto)");
  run_cmd->add_option("--output,-o", output_override, "override output prefix");
  run_cmd->add_flag("--emit-dat", emit_dat, "also write gnuplot .dat");
  run_cmd->add_option("--dump-snapshots", dump_prefix,
                      "write trial-0 snapshot blocks to <prefix>.snapshots.txt");

  // crb
  auto* crb_cmd = app.add_subcommand("crb", "bound curve only");
  std::string crb_config_path, crb_output;
  crb_cmd->add_option("--config,-c", crb_config_path, "campaign config (JSON)")
      ->required();
  crb_cmd->add_option("--output,-o", crb_output, "output CSV path (default stdout)");

  // selftest
  auto* selftest_cmd = app.add_subcommand("selftest", "run the oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  using namespace fadoa;
  try {
    if (design_cmd->parsed()) {
      GeometryDesign design = array_kind_from_string(kind_name) == ArrayKind::Aligned
                                  ? design_aligned(elements, movements)
                                  : design_misaligned(elements, movements);
      design.unit_spacing = spacing;
      print_design_report(design, as_json);
      return 0;
    }

    if (run_cmd->parsed()) {
      CampaignConfig config = config_from_json_file(config_path);
      config.seed = seed;
      if (trials_override >= 0) config.trials = trials_override;
      if (threads_override >= 0) config.threads = threads_override;
      if (!output_override.empty()) config.output_prefix = output_override;
      if (emit_dat) config.emit_dat = true;
      if (config.output_prefix.empty())
        throw config_error("no output prefix (config \"output\" or --output)");
      validate(config);

      if (!dump_prefix.empty()) {
        std::ofstream out(dump_prefix + ".snapshots.txt", std::ios::binary);
        if (!out) throw config_error("cannot write snapshot dump");
        dump_blocks(out, preview_blocks(config, /*trial=*/0));
        std::cout << "wrote " << dump_prefix << ".snapshots.txt\n";
      }

      const CampaignResult result = run_campaign(config);
      for (const std::string& path : emit_results(result, config.output_prefix))
        std::cout << "wrote " << path << "\n";
      return 0;
    }

    if (crb_cmd->parsed()) {
      const CampaignConfig config = config_from_json_file(crb_config_path);
      const auto curve = crb_curve(config);
      std::string csv = "sweep_value,crb_sqrt_deg\n";
      for (const auto& [value, bound] : curve) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", value, bound);
        csv += buf;
      }
      if (crb_output.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(crb_output, std::ios::binary);
        if (!out) throw config_error("cannot write " + crb_output);
        out << csv;
        std::cout << "wrote " << crb_output << "\n";
      }
      return 0;
    }

    if (selftest_cmd->parsed()) return run_selftest();
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
