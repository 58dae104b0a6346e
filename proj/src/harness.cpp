#include "btherm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "btherm/errors.hpp"

namespace btherm {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kAbortFlagFraction = 0.01;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* to_string(Adaptation a) { return a == Adaptation::Adaptive ? "adaptive" : "non_adaptive"; }
const char* to_string(GapObjective o) {
  return o == GapObjective::SingleShotEmsle ? "single_shot_emsle" : "expected_heat_capacity";
}
const char* to_string(ErrorEstimator e) {
  return e == ErrorEstimator::PosteriorMsle ? "posterior_msle" : "raw_log_error";
}
const char* to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

template <typename T>
void read_if(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

double parse_alpha(const nlohmann::json& value) {
  if (value.is_string()) {
    if (value.get<std::string>() == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("prior.alpha: expected a number or \"-inf\"");
  }
  return value.get<double>();
}

// Streaming mean and variance.
struct Welford {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double standard_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

std::vector<TrajectoryRecord> simulate_on(const GridDistribution& prior, const ExperimentConfig& config) {
  const int count = config.trajectory_budget();
  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        RngStream rng(config.master_seed, static_cast<std::uint64_t>(i));
        const double theta_true = sample_temperature(prior, rng);
        records[static_cast<std::size_t>(i)] = run_trajectory(prior, theta_true, config.protocol, rng);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };

  const int workers = std::clamp(config.workers, 1, count);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

ordered_json bounds_to_json(const BoundsReport& b) {
  ordered_json j;
  j["n"] = b.n;
  j["m"] = b.m;
  j["d"] = b.d;
  j["q_prior"] = b.q_prior;
  j["c_d"] = b.c_d;
  j["f_prior"] = b.f_prior;
  j["g_prior"] = b.g_prior;
  j["ultimate_inverse"] = b.ultimate_inverse;
  j["heisenberg_inverse"] = b.heisenberg_inverse;
  j["no_go_inverse"] = b.no_go_inverse;
  j["alt_no_go_inverse"] = b.alt_no_go_inverse;
  j["operative_no_go_inverse"] = b.operative_no_go_inverse();
  j["warnings"] = b.warnings;
  return j;
}

ExperimentReport empty_report(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.trajectories_requested = config.trajectory_budget();
  return report;
}

}  // namespace

int ExperimentConfig::trajectory_budget() const {
  if (trajectories) return *trajectories;
  const int m = std::max(protocol.m, 1);
  return std::max(500, (1000 + m - 1) / m);
}

void ExperimentConfig::validate() const {
  prior.validate();
  protocol.validate();
  if (trajectories && *trajectories < 1) throw ConfigError("trajectories must be >= 1");
  if (grid_size < TemperatureGrid::kMinSize) throw ConfigError("grid_size must be >= 16");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (const auto& point : sweep) {
    if (point.n < 1 || point.m < 0) throw ConfigError("sweep points need n >= 1 and m >= 0");
    if (n_max_total && static_cast<long long>(point.n) * point.m > *n_max_total)
      throw ConfigError("sweep point n*m exceeds n_max_total");
  }
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig c;
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (doc.contains("prior")) {
      const auto& p = doc.at("prior");
      if (p.contains("alpha")) c.prior.alpha = parse_alpha(p.at("alpha"));
      read_if(p, "theta_min", c.prior.theta_min);
      read_if(p, "theta_max", c.prior.theta_max);
    }
    if (doc.contains("protocol")) {
      const auto& p = doc.at("protocol");
      read_if(p, "n", c.protocol.n);
      read_if(p, "m", c.protocol.m);
      read_if(p, "d", c.protocol.d);
      if (p.contains("adaptation")) {
        const auto s = p.at("adaptation").get<std::string>();
        if (s == "adaptive") c.protocol.adaptation = Adaptation::Adaptive;
        else if (s == "non_adaptive") c.protocol.adaptation = Adaptation::NonAdaptive;
        else throw ConfigError("protocol.adaptation: unknown value '" + s + "'");
      }
      if (p.contains("objective")) {
        const auto s = p.at("objective").get<std::string>();
        if (s == "single_shot_emsle") c.protocol.objective = GapObjective::SingleShotEmsle;
        else if (s == "expected_heat_capacity") c.protocol.objective = GapObjective::ExpectedHeatCapacity;
        else throw ConfigError("protocol.objective: unknown value '" + s + "'");
      }
      if (p.contains("gap_search")) {
        const auto& g = p.at("gap_search");
        read_if(g, "scan_points", c.protocol.gap_search.scan_points);
        read_if(g, "rel_tol", c.protocol.gap_search.rel_tol);
        read_if(g, "lower_factor", c.protocol.gap_search.lower_factor);
        read_if(g, "upper_factor", c.protocol.gap_search.upper_factor);
      }
    }
    if (doc.contains("trajectories") && !doc.at("trajectories").is_null())
      c.trajectories = doc.at("trajectories").get<int>();
    read_if(doc, "master_seed", c.master_seed);
    read_if(doc, "grid_size", c.grid_size);
    read_if(doc, "workers", c.workers);
    if (doc.contains("estimator")) {
      const auto s = doc.at("estimator").get<std::string>();
      if (s == "posterior_msle") c.estimator = ErrorEstimator::PosteriorMsle;
      else if (s == "raw_log_error") c.estimator = ErrorEstimator::RawLogError;
      else throw ConfigError("estimator: unknown value '" + s + "'");
    }
    if (doc.contains("sweep")) {
      for (const auto& point : doc.at("sweep"))
        c.sweep.push_back(SweepPoint{point.at("n").get<int>(), point.at("m").get<int>()});
    }
    if (doc.contains("n_max_total") && !doc.at("n_max_total").is_null())
      c.n_max_total = doc.at("n_max_total").get<long long>();
    if (doc.contains("output")) {
      const auto& o = doc.at("output");
      if (o.contains("path")) c.output_path = o.at("path").get<std::string>();
      if (o.contains("format")) {
        const auto s = o.at("format").get<std::string>();
        if (s == "csv") c.output_format = OutputFormat::Csv;
        else if (s == "json") c.output_format = OutputFormat::Json;
        else throw ConfigError("output.format: unknown value '" + s + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["prior"]["alpha"] = c.prior.is_uniform() ? ordered_json("-inf") : ordered_json(c.prior.alpha);
  j["prior"]["theta_min"] = c.prior.theta_min;
  j["prior"]["theta_max"] = c.prior.theta_max;
  auto& p = j["protocol"];
  p["n"] = c.protocol.n;
  p["m"] = c.protocol.m;
  p["d"] = c.protocol.d;
  p["adaptation"] = to_string(c.protocol.adaptation);
  p["objective"] = to_string(c.protocol.objective);
  p["gap_search"]["scan_points"] = c.protocol.gap_search.scan_points;
  p["gap_search"]["rel_tol"] = c.protocol.gap_search.rel_tol;
  p["gap_search"]["lower_factor"] = c.protocol.gap_search.lower_factor;
  p["gap_search"]["upper_factor"] = c.protocol.gap_search.upper_factor;
  j["trajectories"] = c.trajectories ? ordered_json(*c.trajectories) : ordered_json(nullptr);
  j["master_seed"] = c.master_seed;
  j["grid_size"] = c.grid_size;
  j["workers"] = c.workers;
  j["estimator"] = to_string(c.estimator);
  j["sweep"] = ordered_json::array();
  for (const auto& s : c.sweep) j["sweep"].push_back({{"n", s.n}, {"m", s.m}});
  j["n_max_total"] = c.n_max_total ? ordered_json(*c.n_max_total) : ordered_json(nullptr);
  j["output"]["path"] = c.output_path.string();
  j["output"]["format"] = to_string(c.output_format);
  return j;
}

std::vector<TrajectoryRecord> simulate_trajectories(const ExperimentConfig& config) {
  config.validate();
  return simulate_on(discretize(config.prior, config.grid_size), config);
}

ExperimentReport bounds_only(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report = empty_report(config);
  report.trajectories_requested = 0;
  const auto prior = discretize(config.prior, config.grid_size);
  report.bounds = compute_bounds(prior, config.protocol.n, config.protocol.m, config.protocol.d);
  report.emsle = posterior_msle(prior);
  report.emsle_inverse = 1.0 / report.emsle;
  return report;
}

ExperimentReport estimate_emsle(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = empty_report(config);
  const auto prior = discretize(config.prior, config.grid_size);
  report.bounds = compute_bounds(prior, config.protocol.n, config.protocol.m, config.protocol.d);

  const auto records = simulate_on(prior, config);
  Welford error;
  std::vector<Welford> per_round(static_cast<std::size_t>(config.protocol.m));
  int aborted = 0;
  for (const auto& r : records) {
    if (r.aborted) {
      ++aborted;
      continue;
    }
    if (r.under_resolved) ++report.trajectories_under_resolved;
    error.add(config.estimator == ErrorEstimator::PosteriorMsle ? r.final_posterior_msle
                                                                : r.final_log_error);
    for (std::size_t k = 0; k < r.rounds.size(); ++k) per_round[k].add(r.rounds[k].posterior_msle);
  }
  report.trajectories_completed = static_cast<int>(error.count);
  report.flagged = aborted > kAbortFlagFraction * static_cast<double>(records.size());
  report.emsle = error.count > 0 ? error.mean : std::numeric_limits<double>::quiet_NaN();
  report.emsle_se = error.standard_error();
  report.emsle_inverse = 1.0 / report.emsle;
  report.emsle_inverse_se = report.emsle_se / (report.emsle * report.emsle);
  report.round_mean_msle.reserve(per_round.size());
  for (const auto& w : per_round) report.round_mean_msle.push_back(w.mean);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<ExperimentReport> run_sweep(const ExperimentConfig& config,
                                        const std::function<void(const ExperimentReport&)>& on_report) {
  config.validate();
  if (config.sweep.empty()) throw ConfigError("sweep list is empty");
  auto points = config.sweep;
  std::stable_sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.n != b.n ? a.n < b.n : a.m < b.m;
  });

  std::vector<ExperimentReport> reports;
  reports.reserve(points.size());
  for (const auto& point : points) {
    ExperimentConfig point_config = config;
    point_config.sweep.clear();
    point_config.protocol.n = point.n;
    point_config.protocol.m = point.m;
    ExperimentReport report;
    try {
      report = estimate_emsle(point_config);
    } catch (const std::exception& e) {
      report = empty_report(point_config);
      report.emsle = report.emsle_se = report.emsle_inverse = report.emsle_inverse_se =
          std::numeric_limits<double>::quiet_NaN();
      report.error = e.what();
    }
    if (on_report) on_report(report);
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << "n,m,N,emsle,emsle_se,emsle_inverse,ultimate_tight,ultimate_heisenberg,no_go,alt_no_go,"
         "trajectories,seed\n";
  for (const auto& r : reports) {
    const auto& p = r.config.protocol;
    out << p.n << ',' << p.m << ',' << p.total_probes() << ',' << format_double(r.emsle) << ','
        << format_double(r.emsle_se) << ',' << format_double(r.emsle_inverse) << ','
        << format_double(r.bounds.ultimate_inverse) << ','
        << format_double(r.bounds.heisenberg_inverse) << ','
        << format_double(r.bounds.no_go_inverse) << ','
        << format_double(r.bounds.alt_no_go_inverse) << ',' << r.trajectories_completed << ','
        << r.config.master_seed << '\n';
  }
}

ordered_json report_to_json(const ExperimentReport& r) {
  ordered_json j;
  j["config"] = config_to_json(r.config);
  j["emsle"] = r.emsle;
  j["emsle_se"] = r.emsle_se;
  j["emsle_inverse"] = r.emsle_inverse;
  j["emsle_inverse_se"] = r.emsle_inverse_se;
  j["bounds"] = bounds_to_json(r.bounds);
  j["round_mean_msle"] = r.round_mean_msle;
  j["trajectories_requested"] = r.trajectories_requested;
  j["trajectories_completed"] = r.trajectories_completed;
  j["trajectories_under_resolved"] = r.trajectories_under_resolved;
  j["flagged"] = r.flagged;
  j["error"] = r.error;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

ordered_json reports_to_json(const std::vector<ExperimentReport>& reports) {
  ordered_json j;
  j["reports"] = ordered_json::array();
  for (const auto& r : reports) j["reports"].push_back(report_to_json(r));
  return j;
}

BoundsReport bounds_from_json(const nlohmann::json& doc) {
  try {
    BoundsReport b;
    b.n = doc.at("n").get<int>();
    b.m = doc.at("m").get<int>();
    b.d = doc.at("d").get<int>();
    b.q_prior = doc.at("q_prior").get<double>();
    b.c_d = doc.at("c_d").get<double>();
    b.f_prior = doc.at("f_prior").get<double>();
    b.g_prior = doc.at("g_prior").get<double>();
    b.ultimate_inverse = doc.at("ultimate_inverse").get<double>();
    b.heisenberg_inverse = doc.at("heisenberg_inverse").get<double>();
    b.no_go_inverse = doc.at("no_go_inverse").get<double>();
    b.alt_no_go_inverse = doc.at("alt_no_go_inverse").get<double>();
    b.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bounds report: ") + e.what());
  }
}

void emit(const std::vector<ExperimentReport>& reports, const std::filesystem::path& path,
          OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file " + path.string());
  if (format == OutputFormat::Csv) {
    write_csv(out, reports);
  } else {
    out << reports_to_json(reports).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing output file " + path.string());
}

}  // namespace btherm
