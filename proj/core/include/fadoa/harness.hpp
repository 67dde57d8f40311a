#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fadoa/estimator.hpp"
#include "fadoa/geometry.hpp"
#include "fadoa/signal.hpp"

namespace fadoa {

enum class SweepAxis { SnrDb, Snapshots, Movements };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

/// One target line in a campaign: a fixed LoS angle, optionally fixed NLoS
/// angles, optionally `nlos_random_count` extra NLoS angles redrawn per
/// trial uniformly within +/- nlos_max_offset_deg of the LoS angle.
struct TargetSpec {
  double los_deg = 0.0;
  std::vector<double> nlos_deg;
  int nlos_random_count = 0;
  double nlos_max_offset_deg = 5.0;
};

struct CampaignConfig {
  ArrayKind kind = ArrayKind::Aligned;
  int elements = 3;
  int movements = 1;
  double d_over_lambda = 0.5;

  std::vector<TargetSpec> targets;
  Alignment alignment = Alignment::Aligned;
  double snr_db = 0.0;
  int snapshots = 500;
  double nlos_attenuation_db = 10.0;

  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> sweep;  // sorted; integral values for Snapshots/Movements

  int trials = 500;
  std::uint64_t seed = 0;
  Detector detector = Detector::Ratio;
  int fixed_k = 0;

  std::string output_prefix;
  bool emit_dat = false;
  int threads = 0;  // 0 = hardware concurrency
};

struct SweepPointResult {
  double sweep_value = 0.0;
  int trials = 0;
  double rmse_deg = 0.0;          // over trials with k_hat == K
  double rmse_se_deg = 0.0;       // Monte-Carlo standard error of rmse_deg
  std::vector<double> bias_deg;   // per target, ascending-truth order
  std::map<int, int> khat_histogram;  // -1 bucket = estimator failure
  double detect_rate = 0.0;       // fraction of trials with k_hat == K
  double crb_sqrt_deg = 0.0;      // sqrt(mean CRB diagonal), degrees
  double wall_time_s = 0.0;
};

struct CampaignResult {
  CampaignConfig config;
  std::string version;
  std::vector<SweepPointResult> points;
};

CampaignConfig config_from_json(const std::string& text);
CampaignConfig config_from_json_file(const std::string& path);
void validate(const CampaignConfig& config);

/// Seeded Monte-Carlo sweep. Trials are independent tasks distributed over
/// a worker pool; per-trial seeds are derived from (seed, trial), so output
/// is identical for any worker count.
CampaignResult run_campaign(const CampaignConfig& config);

/// Test hook: same campaign wiring with the estimation step replaced.
using TrialEstimator = std::function<EstimationResult(
    const std::vector<SnapshotBlock>&, const GeometryDesign&, const Scenario&)>;
CampaignResult run_campaign(const CampaignConfig& config,
                            const TrialEstimator& trial_estimator);

/// CSV with header sweep_value,rmse_deg,crb_sqrt_deg,detect_rate,trials.
std::string to_csv(const CampaignResult& result);
/// Full metadata: resolved config, version, seed, per-point statistics.
std::string to_json(const CampaignResult& result);
CampaignResult result_from_json(const std::string& text);
/// gnuplot-ready whitespace columns: sweep_value rmse_deg crb_sqrt_deg.
std::string to_dat(const CampaignResult& result);

/// Write <prefix>.csv and <prefix>.json (and <prefix>.dat when configured),
/// creating parent directories. Returns the list of files written.
std::vector<std::string> emit_results(const CampaignResult& result,
                                      const std::string& prefix);

/// Per-point square-root CRB (degrees) without running trials.
std::vector<std::pair<double, double>> crb_curve(const CampaignConfig& config);

/// Synthesize the snapshot blocks one trial of the campaign would see at
/// the first sweep point (debugging aid).
std::vector<SnapshotBlock> preview_blocks(const CampaignConfig& config,
                                          int trial);

}  // namespace fadoa
