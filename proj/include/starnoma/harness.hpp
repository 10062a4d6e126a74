// Experiment orchestration: convergence runs, element and power sweeps, the
// optimal-configuration dump, CSV export, and trace re-validation against a
// replayed run.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "starnoma/checkpoint.hpp"
#include "starnoma/config.hpp"
#include "starnoma/train.hpp"

namespace starnoma {

struct RunRecord {
  std::string config_hash;
  std::string algorithm;
  std::uint64_t seed = 0;
  int elements = 0;         // per surface
  double p_max_dbm = 0.0;
  std::vector<EpisodeStats> trace;
  EvalSnapshot final_eval;
  double wall_clock_s = 0.0;
};

inline double tail_mean_reward(const std::vector<EpisodeStats>& trace, size_t window = 50) {
  if (trace.empty()) return 0.0;
  const size_t n = std::min(window, trace.size());
  double sum = 0.0;
  for (size_t i = trace.size() - n; i < trace.size(); ++i) sum += trace[i].mean_reward;
  return sum / static_cast<double>(n);
}

inline double tail_mean_sum_rate(const std::vector<EpisodeStats>& trace, size_t window = 50) {
  if (trace.empty()) return 0.0;
  const size_t n = std::min(window, trace.size());
  double sum = 0.0;
  for (size_t i = trace.size() - n; i < trace.size(); ++i) sum += trace[i].sum_rate;
  return sum / static_cast<double>(n);
}

inline RunRecord run_single(const ExperimentConfig& cfg, Algorithm algo, std::uint64_t seed) {
  const auto errors = validate_config(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += " [" + e + "]";
    throw std::invalid_argument(msg);
  }
  const EnvSettings env = make_env_settings(cfg);
  const auto start = std::chrono::steady_clock::now();
  TrainResult tr = train(algo, env, cfg.hp, seed);
  const auto stop = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.algorithm = algorithm_name(algo);
  rec.seed = seed;
  rec.elements = cfg.elements_h * cfg.elements_v;
  rec.p_max_dbm = cfg.p_max_dbm;
  rec.trace = std::move(tr.trace);
  rec.final_eval = std::move(tr.final_eval);
  rec.wall_clock_s = std::chrono::duration<double>(stop - start).count();
  return rec;
}

// One record per (algorithm, seed) cell, in config order.
inline std::vector<RunRecord> run_convergence(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  for (const std::string& algo : cfg.algorithms)
    for (std::uint64_t seed : cfg.seeds)
      records.push_back(run_single(cfg, algorithm_from_name(algo), seed));
  return records;
}

// Element counts factor into a grid of height 2 when even, height 1 otherwise.
inline std::pair<int, int> element_grid(int elements) {
  return elements % 2 == 0 ? std::pair<int, int>{elements / 2, 2}
                           : std::pair<int, int>{elements, 1};
}

inline std::vector<RunRecord> run_element_sweep(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  for (int m : cfg.element_sweep) {
    ExperimentConfig point = cfg;
    std::tie(point.elements_h, point.elements_v) = element_grid(m);
    for (const std::string& algo : cfg.algorithms)
      for (std::uint64_t seed : cfg.seeds)
        records.push_back(run_single(point, algorithm_from_name(algo), seed));
  }
  return records;
}

inline std::vector<RunRecord> run_power_sweep(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  for (double p_dbm : cfg.p_max_sweep_dbm) {
    ExperimentConfig point = cfg;
    point.p_max_dbm = p_dbm;
    for (const std::string& algo : cfg.algorithms)
      for (std::uint64_t seed : cfg.seeds)
        records.push_back(run_single(point, algorithm_from_name(algo), seed));
  }
  return records;
}

// ---- optimal-configuration report -----------------------------------------

struct SurfaceSideSums {
  double toward_ap = 0.0;
  double away_from_ap = 0.0;
};

struct OptimalReport {
  std::vector<std::vector<double>> beta_forward;   // [l][m]
  std::vector<std::vector<double>> beta_backward;  // [l][m]
  std::vector<SurfaceSideSums> side_sums;
  std::vector<double> cluster_power_mw;  // squared beam norms
  std::vector<bool> cluster_has_direct;  // any member with an AP link
  std::vector<double> user_rates;
};

inline OptimalReport optimal_report(const EvalSnapshot& snap, const Layout& layout) {
  OptimalReport rep;
  rep.beta_forward = snap.state.beta_f;
  rep.beta_backward = snap.state.beta_b;
  for (int l = 0; l < layout.surface_count(); ++l) {
    const Surface& s = layout.surfaces[l];
    const double toward = dot(s.forward_normal, xy(layout.ap) - xy(s.center));
    double forward_sum = 0.0, backward_sum = 0.0;
    for (size_t m = 0; m < snap.state.beta_f[l].size(); ++m) {
      forward_sum += snap.state.beta_f[l][m];
      backward_sum += snap.state.beta_b[l][m];
    }
    SurfaceSideSums sums;
    if (toward > 0.0) {
      sums.toward_ap = forward_sum;
      sums.away_from_ap = backward_sum;
    } else {
      sums.toward_ap = backward_sum;
      sums.away_from_ap = forward_sum;
    }
    rep.side_sums.push_back(sums);
  }
  for (const CMat& w : snap.beams.w) {
    const double n = frobenius_norm(w);
    rep.cluster_power_mw.push_back(n * n);
  }
  rep.cluster_has_direct.assign(snap.assignment.clusters, false);
  for (int u = 0; u < static_cast<int>(snap.assignment.of_user.size()); ++u)
    if (snap.adjacency.ap_mu[u])
      rep.cluster_has_direct[snap.assignment.of_user[u]] = true;
  rep.user_rates = snap.user_rates;
  return rep;
}

// Trains (or continues from a checkpoint elsewhere) and reports the final
// deterministic configuration on the fixture.
inline OptimalReport dump_optimal_config(const ExperimentConfig& cfg, std::uint64_t seed,
                                         RunRecord* record_out = nullptr) {
  RunRecord rec = run_single(cfg, Algorithm::mappo, seed);
  const EnvSettings env = make_env_settings(cfg);
  OptimalReport rep = optimal_report(rec.final_eval, env.layout);
  if (record_out != nullptr) *record_out = std::move(rec);
  return rep;
}

// ---- CSV export ------------------------------------------------------------

namespace detail {

// Twelve significant digits: enough that CSV rounding stays two orders of
// magnitude inside the 1e-9 re-validation tolerance.
inline std::string fmt_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& os, const RunRecord& rec) {
  os << "episode,mean_reward,min_rate,sum_rate\n";
  for (size_t e = 0; e < rec.trace.size(); ++e)
    os << e << ',' << detail::fmt_sig(rec.trace[e].mean_reward) << ','
       << detail::fmt_sig(rec.trace[e].min_rate) << ',' << detail::fmt_sig(rec.trace[e].sum_rate)
       << '\n';
}

inline std::string trace_csv_name(const RunRecord& rec) {
  return rec.algorithm + "_seed" + std::to_string(rec.seed) + ".csv";
}

inline void write_convergence_outputs(const std::filesystem::path& dir,
                                      const std::vector<RunRecord>& records) {
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "summary.csv");
  summary << "algorithm,seed,config_hash,episodes,final50_mean_reward,final50_mean_sum_rate,"
             "wall_clock_s\n";
  for (const RunRecord& rec : records) {
    std::ofstream trace(dir / trace_csv_name(rec));
    write_trace_csv(trace, rec);
    summary << rec.algorithm << ',' << rec.seed << ',' << rec.config_hash << ','
            << rec.trace.size() << ',' << detail::fmt_sig(tail_mean_reward(rec.trace)) << ','
            << detail::fmt_sig(tail_mean_sum_rate(rec.trace)) << ','
            << detail::fmt_sig(rec.wall_clock_s) << '\n';
  }
}

inline void write_element_sweep_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "elements,algorithm,seed,final50_mean_reward\n";
  for (const RunRecord& rec : records)
    os << rec.elements << ',' << rec.algorithm << ',' << rec.seed << ','
       << detail::fmt_sig(tail_mean_reward(rec.trace)) << '\n';
}

inline void write_power_sweep_csv(std::ostream& os, const std::vector<RunRecord>& records,
                                  int users) {
  os << "p_max_dbm,algorithm,seed,avg_throughput\n";
  for (const RunRecord& rec : records)
    os << detail::fmt_sig(rec.p_max_dbm) << ',' << rec.algorithm << ',' << rec.seed << ','
       << detail::fmt_sig(tail_mean_sum_rate(rec.trace) / users) << '\n';
}

inline void write_optimal_outputs(const std::filesystem::path& dir, const OptimalReport& rep) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "amplitudes.csv");
    os << "surface,element,beta_forward,beta_backward\n";
    for (size_t l = 0; l < rep.beta_forward.size(); ++l)
      for (size_t m = 0; m < rep.beta_forward[l].size(); ++m)
        os << l << ',' << m << ',' << detail::fmt_sig(rep.beta_forward[l][m]) << ','
           << detail::fmt_sig(rep.beta_backward[l][m]) << '\n';
  }
  {
    std::ofstream os(dir / "side_sums.csv");
    os << "surface,sum_away_from_ap,sum_toward_ap\n";
    for (size_t l = 0; l < rep.side_sums.size(); ++l)
      os << l << ',' << detail::fmt_sig(rep.side_sums[l].away_from_ap) << ','
         << detail::fmt_sig(rep.side_sums[l].toward_ap) << '\n';
  }
  {
    std::ofstream os(dir / "cluster_power.csv");
    os << "cluster,power_mw,has_direct_ap_link\n";
    for (size_t k = 0; k < rep.cluster_power_mw.size(); ++k)
      os << k << ',' << detail::fmt_sig(rep.cluster_power_mw[k]) << ','
         << (rep.cluster_has_direct[k] ? 1 : 0) << '\n';
  }
}

// ---- trace re-validation ----------------------------------------------------

// Replays (config, algorithm, seed) and checks the stored CSV against the
// recomputed trace at 1e-9 relative tolerance (the CSV rounds to 9
// significant digits).
inline bool validate_trace_file(const ExperimentConfig& cfg, Algorithm algo, std::uint64_t seed,
                                const std::filesystem::path& csv, std::string* message = nullptr) {
  const RunRecord rec = run_single(cfg, algo, seed);
  std::ifstream in(csv);
  if (!in) {
    if (message) *message = "cannot open " + csv.string();
    return false;
  }
  std::string header;
  std::getline(in, header);
  if (header != "episode,mean_reward,min_rate,sum_rate") {
    if (message) *message = "unexpected header";
    return false;
  }
  const auto close = [](double a, double b) {
    if (a == b) return true;
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
  };
  size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= rec.trace.size()) {
      if (message) *message = "trace has extra rows";
      return false;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<double> vals;
    std::getline(ls, field, ',');  // episode index
    const size_t episode = std::stoul(field);
    while (std::getline(ls, field, ',')) vals.push_back(std::stod(field));
    if (episode != row || vals.size() != 3) {
      if (message) *message = "malformed row " + std::to_string(row);
      return false;
    }
    if (!close(vals[0], rec.trace[row].mean_reward) || !close(vals[1], rec.trace[row].min_rate) ||
        !close(vals[2], rec.trace[row].sum_rate)) {
      if (message) *message = "mismatch at episode " + std::to_string(row);
      return false;
    }
    ++row;
  }
  if (row != rec.trace.size()) {
    if (message) *message = "trace is truncated";
    return false;
  }
  return true;
}

}  // namespace starnoma
