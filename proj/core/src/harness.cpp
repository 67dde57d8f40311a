#include "fadoa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "fadoa/crb.hpp"
#include "fadoa/rng.hpp"

namespace fadoa {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kRoleTrial = 101;
constexpr std::uint64_t kRoleScenarioDraw = 102;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

GeometryDesign build_design(ArrayKind kind, int elements, int movements,
                            double d_over_lambda) {
  GeometryDesign design = kind == ArrayKind::Aligned
                              ? design_aligned(elements, movements)
                              : design_misaligned(elements, movements);
  // Wavelength is normalized to 1; d_over_lambda sets the spacing.
  design.unit_spacing = d_over_lambda;
  return design;
}

struct PointSetup {
  double sweep_value;
  GeometryDesign design;
  double snr_db;
  int snapshots;
};

PointSetup point_setup(const CampaignConfig& config, double value) {
  PointSetup p;
  p.sweep_value = value;
  p.snr_db = config.snr_db;
  p.snapshots = config.snapshots;
  int movements = config.movements;
  switch (config.axis) {
    case SweepAxis::SnrDb: p.snr_db = value; break;
    case SweepAxis::Snapshots: p.snapshots = static_cast<int>(value); break;
    case SweepAxis::Movements: movements = static_cast<int>(value); break;
  }
  p.design = build_design(config.kind, config.elements, movements,
                          config.d_over_lambda);
  return p;
}

// Concrete per-trial scenario: fixed angles from the spec plus per-trial
// random NLoS draws. The draw stream depends only on (seed, trial), so a
// trial sees identical angles at every sweep point.
Scenario make_scenario(const CampaignConfig& config, const PointSetup& point,
                       std::uint64_t trial) {
  Scenario sc;
  sc.snr_db = point.snr_db;
  sc.snapshots = point.snapshots;
  sc.alignment = config.alignment;
  sc.nlos_attenuation_db = config.nlos_attenuation_db;
  sc.seed = RandomStream(config.seed).derive({kRoleTrial, trial}).next_u64();

  RandomStream draw = RandomStream(config.seed).derive({kRoleScenarioDraw, trial});
  for (const TargetSpec& spec : config.targets) {
    Target t;
    t.los_angle_deg = spec.los_deg;
    t.nlos_angles_deg = spec.nlos_deg;
    for (int i = 0; i < spec.nlos_random_count; ++i) {
      const double offset = (2.0 * draw.uniform() - 1.0) * spec.nlos_max_offset_deg;
      t.nlos_angles_deg.push_back(spec.los_deg + offset);
    }
    sc.targets.push_back(std::move(t));
  }
  return sc;
}

struct TrialRecord {
  int k_hat = -1;  // -1 = estimator failure
  std::vector<double> errors_deg;  // per target when k_hat == K
};

TrialRecord run_trial(const CampaignConfig& config, const PointSetup& point,
                      std::uint64_t trial, const TrialEstimator& trial_estimator,
                      const std::vector<double>& truth_sorted) {
  TrialRecord rec;
  const Scenario scenario = make_scenario(config, point, trial);
  const auto blocks = synthesize(scenario, point.design);
  EstimationResult est;
  try {
    est = trial_estimator(blocks, point.design, scenario);
  } catch (const numerical_error&) {
    return rec;
  }
  rec.k_hat = est.k_hat;
  if (est.k_hat != static_cast<int>(truth_sorted.size())) return rec;

  // Both lists ascending: order pairing is the optimal assignment for any
  // convex per-pair cost on the line.
  rec.errors_deg.resize(truth_sorted.size());
  for (std::size_t i = 0; i < truth_sorted.size(); ++i)
    rec.errors_deg[i] = est.angles_deg[i] - truth_sorted[i];
  return rec;
}

double point_crb_sqrt_deg(const CampaignConfig& config, const PointSetup& point,
                          const std::vector<double>& truth_sorted) {
  try {
    CrbInput input;
    input.design = point.design;
    input.angles_deg = truth_sorted;
    input.powers.assign(truth_sorted.size(), 1.0);
    input.noise_var = noise_variance(point.snr_db);
    input.snapshots = point.snapshots;
    const CMat crb = crb_theta(input);
    double mean_deg2 = 0.0;
    for (Eigen::Index i = 0; i < crb.rows(); ++i)
      mean_deg2 += crb(i, i).real() * rad2deg(1.0) * rad2deg(1.0);
    mean_deg2 /= static_cast<double>(crb.rows());
    return std::sqrt(mean_deg2);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

json config_to_json(const CampaignConfig& c) {
  json j;
  j["design"] = {{"kind", to_string(c.kind)},
                 {"elements", c.elements},
                 {"movements", c.movements},
                 {"d_over_lambda", c.d_over_lambda}};
  json targets = json::array();
  for (const TargetSpec& t : c.targets) {
    json jt;
    jt["los_deg"] = t.los_deg;
    if (!t.nlos_deg.empty()) jt["nlos_deg"] = t.nlos_deg;
    if (t.nlos_random_count > 0) {
      jt["nlos_random_count"] = t.nlos_random_count;
      jt["nlos_max_offset_deg"] = t.nlos_max_offset_deg;
    }
    targets.push_back(jt);
  }
  j["scenario"] = {{"alignment", to_string(c.alignment)},
                   {"targets", targets},
                   {"snr_db", c.snr_db},
                   {"snapshots", c.snapshots},
                   {"nlos_attenuation_db", c.nlos_attenuation_db}};
  j["sweep"] = {{"axis", to_string(c.axis)}, {"values", c.sweep}};
  j["estimator"] = {{"detector", to_string(c.detector)}, {"fixed_k", c.fixed_k}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["output"] = c.output_prefix;
  j["emit_dat"] = c.emit_dat;
  j["threads"] = c.threads;
  return j;
}

CampaignConfig config_from_json_value(const json& j) {
  CampaignConfig c;
  const json& design = j.at("design");
  c.kind = array_kind_from_string(design.at("kind").get<std::string>());
  c.elements = design.at("elements").get<int>();
  c.movements = design.at("movements").get<int>();
  c.d_over_lambda = design.value("d_over_lambda", 0.5);

  const json& scenario = j.at("scenario");
  c.alignment = scenario.contains("alignment")
                    ? alignment_from_string(scenario.at("alignment").get<std::string>())
                    : (c.kind == ArrayKind::Aligned ? Alignment::Aligned
                                                    : Alignment::Misaligned);
  if (scenario.contains("uniform_targets")) {
    const json& u = scenario.at("uniform_targets");
    const int count = u.at("count").get<int>();
    const double lo = u.at("lo_deg").get<double>();
    const double hi = u.at("hi_deg").get<double>();
    if (count < 1) throw config_error("uniform_targets.count must be >= 1");
    for (int i = 0; i < count; ++i) {
      TargetSpec t;
      t.los_deg = count == 1 ? 0.5 * (lo + hi)
                             : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(count - 1);
      c.targets.push_back(t);
    }
  }
  if (scenario.contains("targets")) {
    for (const json& jt : scenario.at("targets")) {
      TargetSpec t;
      t.los_deg = jt.at("los_deg").get<double>();
      if (jt.contains("nlos_deg"))
        t.nlos_deg = jt.at("nlos_deg").get<std::vector<double>>();
      t.nlos_random_count = jt.value("nlos_random_count", 0);
      t.nlos_max_offset_deg = jt.value("nlos_max_offset_deg", 5.0);
      c.targets.push_back(t);
    }
  }
  c.snr_db = scenario.value("snr_db", 0.0);
  c.snapshots = scenario.value("snapshots", 500);
  c.nlos_attenuation_db = scenario.value("nlos_attenuation_db", 10.0);

  if (j.contains("sweep")) {
    const json& sweep = j.at("sweep");
    c.axis = sweep_axis_from_string(sweep.at("axis").get<std::string>());
    c.sweep = sweep.at("values").get<std::vector<double>>();
  } else {
    c.axis = SweepAxis::SnrDb;
    c.sweep = {c.snr_db};
  }

  if (j.contains("estimator")) {
    const json& est = j.at("estimator");
    c.detector = detector_from_string(est.value("detector", std::string("ratio")));
    c.fixed_k = est.value("fixed_k", 0);
  }
  c.trials = j.value("trials", 500);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  c.output_prefix = j.value("output", std::string());
  c.emit_dat = j.value("emit_dat", false);
  c.threads = j.value("threads", 0);
  return c;
}

}  // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::Snapshots: return "snapshots";
    default: return "movements";
  }
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "snr_db") return SweepAxis::SnrDb;
  if (name == "snapshots") return SweepAxis::Snapshots;
  if (name == "movements") return SweepAxis::Movements;
  throw config_error("unknown sweep axis: " + name);
}

CampaignConfig config_from_json(const std::string& text) {
  try {
    return config_from_json_value(json::parse(text));
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
}

CampaignConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void validate(const CampaignConfig& config) {
  if (config.trials < 1) throw config_error("trials must be >= 1");
  if (config.targets.empty()) throw config_error("campaign needs targets");
  if (config.sweep.empty()) throw config_error("sweep values must be non-empty");
  for (double v : config.sweep)
    if (!std::isfinite(v)) throw config_error("sweep values must be finite");
  if (!std::is_sorted(config.sweep.begin(), config.sweep.end()))
    throw config_error("sweep values must be sorted ascending");
  if (config.axis != SweepAxis::SnrDb)
    for (double v : config.sweep)
      if (v != std::floor(v) || v < (config.axis == SweepAxis::Movements ? 0 : 1))
        throw config_error("sweep values must be non-negative integers");
  if (config.detector == Detector::FixedK && config.fixed_k < 1)
    throw config_error("fixed-K detector needs fixed_k >= 1");

  // Validate every sweep point up front: geometry must exist and the LoS
  // count must stay within the co-array capacity K <= delta.
  const auto k = static_cast<std::int64_t>(config.targets.size());
  for (double v : config.sweep) {
    const PointSetup p = point_setup(config, v);
    if (k > p.design.delta())
      throw config_error("capacity exceeded: " + std::to_string(k) +
                         " targets > delta " + std::to_string(p.design.delta()));
    if (config.detector == Detector::FixedK &&
        config.fixed_k > p.design.delta())
      throw config_error("fixed_k exceeds delta");
  }

  // Angle bounds must hold for every possible random NLoS draw.
  std::set<double> los;
  for (const TargetSpec& t : config.targets) {
    if (!(std::abs(t.los_deg) < 90.0))
      throw config_error("LoS angle outside (-90, 90) degrees");
    los.insert(t.los_deg);
    for (double a : t.nlos_deg)
      if (!(std::abs(a) < 90.0))
        throw config_error("NLoS angle outside (-90, 90) degrees");
    if (t.nlos_random_count > 0) {
      if (!(t.nlos_max_offset_deg >= 0.0))
        throw config_error("nlos_max_offset_deg must be non-negative");
      if (!(std::abs(t.los_deg) + t.nlos_max_offset_deg < 90.0))
        throw config_error("random NLoS offsets can leave (-90, 90) degrees");
    }
  }
  if (los.size() != config.targets.size())
    throw config_error("LoS angles must be distinct");
}

CampaignResult run_campaign(const CampaignConfig& config) {
  EstimatorOptions options{config.detector, config.fixed_k};
  return run_campaign(config, [options](const std::vector<SnapshotBlock>& blocks,
                                        const GeometryDesign& design,
                                        const Scenario& scenario) {
    const CovarianceStack cov =
        sample_covariance(blocks, covariance_mode_for(scenario.alignment));
    return estimate(cov, design, options);
  });
}

CampaignResult run_campaign(const CampaignConfig& config,
                            const TrialEstimator& trial_estimator) {
  validate(config);

  CampaignResult result;
  result.config = config;
  result.version = kVersion;

  std::vector<double> truth;
  for (const TargetSpec& t : config.targets) truth.push_back(t.los_deg);
  std::sort(truth.begin(), truth.end());
  const int k = static_cast<int>(truth.size());

  unsigned n_threads = config.threads > 0
                           ? static_cast<unsigned>(config.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(config.trials));

  for (double value : config.sweep) {
    const auto t0 = std::chrono::steady_clock::now();
    const PointSetup point = point_setup(config, value);

    std::vector<TrialRecord> records(config.trials);
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int trial = next.fetch_add(1);
        if (trial >= config.trials) break;
        records[trial] = run_trial(config, point,
                                   static_cast<std::uint64_t>(trial),
                                   trial_estimator, truth);
      }
    };
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
      for (std::thread& th : pool) th.join();
    }

    // Reduce in fixed trial order.
    SweepPointResult pr;
    pr.sweep_value = value;
    pr.trials = config.trials;
    pr.bias_deg.assign(k, 0.0);
    int n_ok = 0;
    double sq_sum = 0.0;
    std::vector<double> trial_mse;
    for (const TrialRecord& rec : records) {
      pr.khat_histogram[rec.k_hat] += 1;
      if (rec.errors_deg.empty()) continue;
      ++n_ok;
      double mse = 0.0;
      for (int i = 0; i < k; ++i) {
        sq_sum += rec.errors_deg[i] * rec.errors_deg[i];
        pr.bias_deg[i] += rec.errors_deg[i];
        mse += rec.errors_deg[i] * rec.errors_deg[i] / k;
      }
      trial_mse.push_back(mse);
    }
    pr.detect_rate = static_cast<double>(n_ok) / config.trials;
    if (n_ok > 0) {
      pr.rmse_deg = std::sqrt(sq_sum / (static_cast<double>(n_ok) * k));
      for (double& b : pr.bias_deg) b /= n_ok;
      if (n_ok > 1 && pr.rmse_deg > 0.0) {
        double var = 0.0;
        const double mean_mse = sq_sum / n_ok / k;
        for (double m : trial_mse) var += (m - mean_mse) * (m - mean_mse);
        var /= (n_ok - 1.0);
        const double se_mse = std::sqrt(var / n_ok);
        pr.rmse_se_deg = se_mse / (2.0 * pr.rmse_deg);
      }
    } else {
      pr.rmse_deg = std::numeric_limits<double>::quiet_NaN();
    }
    pr.crb_sqrt_deg = point_crb_sqrt_deg(config, point, truth);
    pr.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.points.push_back(std::move(pr));
  }
  return result;
}

std::string to_csv(const CampaignResult& result) {
  std::string out = "sweep_value,rmse_deg,crb_sqrt_deg,detect_rate,trials\n";
  for (const SweepPointResult& p : result.points) {
    out += fmt_double(p.sweep_value) + "," + fmt_double(p.rmse_deg) + "," +
           fmt_double(p.crb_sqrt_deg) + "," + fmt_double(p.detect_rate) + "," +
           std::to_string(p.trials) + "\n";
  }
  return out;
}

std::string to_dat(const CampaignResult& result) {
  std::string out = "# sweep_value rmse_deg crb_sqrt_deg\n";
  for (const SweepPointResult& p : result.points)
    out += fmt_double(p.sweep_value) + " " + fmt_double(p.rmse_deg) + " " +
           fmt_double(p.crb_sqrt_deg) + "\n";
  return out;
}

std::string to_json(const CampaignResult& result) {
  json j;
  j["version"] = result.version;
  j["config"] = config_to_json(result.config);
  json points = json::array();
  for (const SweepPointResult& p : result.points) {
    json jp;
    jp["sweep_value"] = p.sweep_value;
    jp["trials"] = p.trials;
    jp["rmse_deg"] = p.rmse_deg;
    jp["rmse_se_deg"] = p.rmse_se_deg;
    jp["bias_deg"] = p.bias_deg;
    json hist = json::object();
    for (const auto& [khat, count] : p.khat_histogram)
      hist[std::to_string(khat)] = count;
    jp["khat_histogram"] = hist;
    jp["detect_rate"] = p.detect_rate;
    jp["detection_failure_rate"] = 1.0 - p.detect_rate;
    jp["crb_sqrt_deg"] = p.crb_sqrt_deg;
    jp["crb_manifold"] = "aligned-stacked";
    jp["wall_time_s"] = p.wall_time_s;
    points.push_back(jp);
  }
  j["points"] = points;
  return j.dump(2) + "\n";
}

CampaignResult result_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    CampaignResult result;
    result.version = j.at("version").get<std::string>();
    result.config = config_from_json_value(j.at("config"));
    for (const json& jp : j.at("points")) {
      SweepPointResult p;
      p.sweep_value = jp.at("sweep_value").get<double>();
      p.trials = jp.at("trials").get<int>();
      p.rmse_deg = jp.at("rmse_deg").get<double>();
      p.rmse_se_deg = jp.at("rmse_se_deg").get<double>();
      p.bias_deg = jp.at("bias_deg").get<std::vector<double>>();
      for (const auto& [key, count] : jp.at("khat_histogram").items())
        p.khat_histogram[std::stoi(key)] = count.get<int>();
      p.detect_rate = jp.at("detect_rate").get<double>();
      p.crb_sqrt_deg = jp.at("crb_sqrt_deg").get<double>();
      p.wall_time_s = jp.at("wall_time_s").get<double>();
      result.points.push_back(std::move(p));
    }
    return result;
  } catch (const json::exception& e) {
    throw config_error(std::string("result parse error: ") + e.what());
  }
}

std::vector<std::string> emit_results(const CampaignResult& result,
                                      const std::string& prefix) {
  if (prefix.empty()) throw config_error("output prefix is empty");
  const std::filesystem::path base(prefix);
  if (base.has_parent_path())
    std::filesystem::create_directories(base.parent_path());

  std::vector<std::string> written;
  auto write = [&](const std::string& suffix, const std::string& content) {
    const std::string path = prefix + suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    out << content;
    written.push_back(path);
  };
  write(".csv", to_csv(result));
  write(".json", to_json(result));
  if (result.config.emit_dat) write(".dat", to_dat(result));
  return written;
}

std::vector<SnapshotBlock> preview_blocks(const CampaignConfig& config,
                                          int trial) {
  validate(config);
  const PointSetup point = point_setup(config, config.sweep.front());
  const Scenario scenario =
      make_scenario(config, point, static_cast<std::uint64_t>(trial));
  return synthesize(scenario, point.design);
}

std::vector<std::pair<double, double>> crb_curve(const CampaignConfig& config) {
  validate(config);
  std::vector<double> truth;
  for (const TargetSpec& t : config.targets) truth.push_back(t.los_deg);
  std::sort(truth.begin(), truth.end());

  std::vector<std::pair<double, double>> out;
  for (double value : config.sweep) {
    const PointSetup point = point_setup(config, value);
    out.emplace_back(value, point_crb_sqrt_deg(config, point, truth));
  }
  return out;
}

}  // namespace fadoa
