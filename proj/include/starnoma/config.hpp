// Experiment configuration: the JSON document shared by the CLI and the
// layout files, validation with per-field diagnostics, and a stable content
// hash over the canonicalized semantic fields.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "starnoma/env.hpp"
#include "starnoma/train.hpp"

namespace starnoma {

using json = nlohmann::json;

struct ExperimentConfig {
  std::string layout_source = "fixture";  // "fixture" or "random"
  std::string layout_file;                // optional explicit layout document
  int users = 10;
  int clusters = 4;
  int surfaces = 2;
  int ap_antennas = 4;
  int elements_h = 5;
  int elements_v = 2;
  double carrier_ghz = 6.0;
  double rician_kappa = 3.0;
  double noise_dbm_per_hz = -100.0;
  double bandwidth_hz = 1e7;
  double p_max_dbm = 20.0;
  std::vector<double> p_max_sweep_dbm{10.0, 15.0, 20.0, 25.0, 30.0};
  std::vector<int> element_sweep{5, 10, 20};
  double r_min = 0.1;
  double obs_channel_scale = 1e4;
  std::vector<std::string> algorithms{"mappo", "ppo", "a2c", "random"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  HyperParams hp;

  double sigma2_mw() const {
    return std::pow(10.0, (noise_dbm_per_hz + 10.0 * std::log10(bandwidth_hz)) / 10.0);
  }
  double p_max_mw() const { return std::pow(10.0, p_max_dbm / 10.0); }
};

// ---- layout (de)serialization --------------------------------------------

inline json layout_to_json(const Layout& ly) {
  json j;
  j["region"] = {{"width", ly.width}, {"depth", ly.depth}};
  j["ap"] = {ly.ap.x, ly.ap.y, ly.ap.z};
  j["walls"] = json::array();
  for (const Wall& w : ly.walls) {
    json jw;
    jw["a"] = {w.a.x, w.a.y};
    jw["b"] = {w.b.x, w.b.y};
    jw["kind"] = w.kind == WallKind::star_ris ? "star_ris" : "opaque";
    if (w.kind == WallKind::star_ris) jw["surface"] = w.surface;
    j["walls"].push_back(jw);
  }
  j["surfaces"] = json::array();
  for (const Surface& s : ly.surfaces) {
    json js;
    js["center"] = {s.center.x, s.center.y, s.center.z};
    js["forward_normal"] = {s.forward_normal.x, s.forward_normal.y};
    js["m_h"] = s.m_h;
    js["m_v"] = s.m_v;
    js["spacing_h"] = s.spacing_h;
    js["spacing_v"] = s.spacing_v;
    js["wall"] = s.wall;
    j["surfaces"].push_back(js);
  }
  j["mus"] = json::array();
  for (const Vec2& mu : ly.mus) j["mus"].push_back({mu.x, mu.y});
  return j;
}

inline Layout layout_from_json(const json& j) {
  Layout ly;
  ly.width = j.at("region").at("width").get<double>();
  ly.depth = j.at("region").at("depth").get<double>();
  const auto& ap = j.at("ap");
  ly.ap = {ap.at(0).get<double>(), ap.at(1).get<double>(), ap.at(2).get<double>()};
  for (const auto& jw : j.at("walls")) {
    Wall w;
    w.a = {jw.at("a").at(0).get<double>(), jw.at("a").at(1).get<double>()};
    w.b = {jw.at("b").at(0).get<double>(), jw.at("b").at(1).get<double>()};
    const std::string kind = jw.at("kind").get<std::string>();
    if (kind == "star_ris") {
      w.kind = WallKind::star_ris;
      w.surface = jw.at("surface").get<int>();
    } else if (kind == "opaque") {
      w.kind = WallKind::opaque;
    } else {
      throw std::runtime_error("layout: unknown wall kind '" + kind + "'");
    }
    ly.walls.push_back(w);
  }
  for (const auto& js : j.value("surfaces", json::array())) {
    Surface s;
    const auto& c = js.at("center");
    s.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    const auto& n = js.at("forward_normal");
    s.forward_normal = {n.at(0).get<double>(), n.at(1).get<double>()};
    s.m_h = js.at("m_h").get<int>();
    s.m_v = js.at("m_v").get<int>();
    s.spacing_h = js.value("spacing_h", 0.2);
    s.spacing_v = js.value("spacing_v", 0.1);
    s.wall = js.at("wall").get<int>();
    ly.surfaces.push_back(s);
  }
  for (const auto& jm : j.at("mus"))
    ly.mus.push_back({jm.at(0).get<double>(), jm.at(1).get<double>()});
  return ly;
}

// ---- config (de)serialization --------------------------------------------

inline json hyperparams_to_json(const HyperParams& hp) {
  return json{{"gamma", hp.gamma},
              {"gae_lambda", hp.gae_lambda},
              {"clip", hp.clip},
              {"value_coef", hp.value_coef},
              {"entropy_coef", hp.entropy_coef},
              {"learning_rate", hp.learning_rate},
              {"minibatch", hp.minibatch},
              {"epochs", hp.epochs},
              {"episodes", hp.episodes},
              {"steps", hp.steps},
              {"reward_scale", hp.reward_scale},
              {"log_std_init", hp.log_std_init},
              {"hidden", hp.hidden}};
}

inline HyperParams hyperparams_from_json(const json& j) {
  HyperParams hp;
  hp.gamma = j.value("gamma", hp.gamma);
  hp.gae_lambda = j.value("gae_lambda", hp.gae_lambda);
  hp.clip = j.value("clip", hp.clip);
  hp.value_coef = j.value("value_coef", hp.value_coef);
  hp.entropy_coef = j.value("entropy_coef", hp.entropy_coef);
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.minibatch = j.value("minibatch", hp.minibatch);
  hp.epochs = j.value("epochs", hp.epochs);
  hp.episodes = j.value("episodes", hp.episodes);
  hp.steps = j.value("steps", hp.steps);
  hp.reward_scale = j.value("reward_scale", hp.reward_scale);
  hp.log_std_init = j.value("log_std_init", hp.log_std_init);
  hp.hidden = j.value("hidden", hp.hidden);
  return hp;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["layout_source"] = c.layout_source;
  if (!c.layout_file.empty()) j["layout_file"] = c.layout_file;
  j["users"] = c.users;
  j["clusters"] = c.clusters;
  j["surfaces"] = c.surfaces;
  j["ap_antennas"] = c.ap_antennas;
  j["elements_h"] = c.elements_h;
  j["elements_v"] = c.elements_v;
  j["carrier_ghz"] = c.carrier_ghz;
  j["rician_kappa"] = c.rician_kappa;
  j["noise_dbm_per_hz"] = c.noise_dbm_per_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["p_max_dbm"] = c.p_max_dbm;
  j["p_max_sweep_dbm"] = c.p_max_sweep_dbm;
  j["element_sweep"] = c.element_sweep;
  j["r_min"] = c.r_min;
  j["obs_channel_scale"] = c.obs_channel_scale;
  j["algorithms"] = c.algorithms;
  j["seeds"] = c.seeds;
  j["hyperparams"] = hyperparams_to_json(c.hp);
  return j;
}

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "layout_source", "layout_file", "users", "clusters", "surfaces", "ap_antennas",
      "elements_h", "elements_v", "carrier_ghz", "rician_kappa", "noise_dbm_per_hz",
      "bandwidth_hz", "p_max_dbm", "p_max_sweep_dbm", "element_sweep", "r_min",
      "obs_channel_scale", "algorithms", "seeds", "hyperparams"};
  return keys;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  for (const auto& [key, value] : j.items())
    if (!known_config_keys().count(key))
      throw std::runtime_error("config: unknown key '" + key + "'");
  c.layout_source = j.value("layout_source", c.layout_source);
  c.layout_file = j.value("layout_file", c.layout_file);
  c.users = j.value("users", c.users);
  c.clusters = j.value("clusters", c.clusters);
  c.surfaces = j.value("surfaces", c.surfaces);
  c.ap_antennas = j.value("ap_antennas", c.ap_antennas);
  c.elements_h = j.value("elements_h", c.elements_h);
  c.elements_v = j.value("elements_v", c.elements_v);
  c.carrier_ghz = j.value("carrier_ghz", c.carrier_ghz);
  c.rician_kappa = j.value("rician_kappa", c.rician_kappa);
  c.noise_dbm_per_hz = j.value("noise_dbm_per_hz", c.noise_dbm_per_hz);
  c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
  c.p_max_dbm = j.value("p_max_dbm", c.p_max_dbm);
  c.p_max_sweep_dbm = j.value("p_max_sweep_dbm", c.p_max_sweep_dbm);
  c.element_sweep = j.value("element_sweep", c.element_sweep);
  c.r_min = j.value("r_min", c.r_min);
  c.obs_channel_scale = j.value("obs_channel_scale", c.obs_channel_scale);
  c.algorithms = j.value("algorithms", c.algorithms);
  c.seeds = j.value("seeds", c.seeds);
  if (j.contains("hyperparams")) c.hp = hyperparams_from_json(j.at("hyperparams"));
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  in >> j;
  return config_from_json(j);
}

// Field-level validation; returns one message per offending field.
inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  const auto bad = [&errors](const std::string& field, const std::string& why) {
    errors.push_back(field + ": " + why);
  };
  if (c.layout_source != "fixture" && c.layout_source != "random")
    bad("layout_source", "must be 'fixture' or 'random'");
  if (c.layout_source == "fixture" && c.layout_file.empty() && c.users != 10)
    bad("users", "the built-in fixture has exactly 10 MUs");
  if (c.users < 1) bad("users", "must be positive");
  if (c.clusters < 1 || c.clusters > c.users) bad("clusters", "need users >= clusters >= 1");
  if (c.layout_file.empty() && (c.surfaces < 1 || c.surfaces > 2))
    bad("surfaces", "built-in geometry provides 1 or 2 surfaces");
  if (c.ap_antennas < 1) bad("ap_antennas", "must be positive");
  if (c.elements_h < 1 || c.elements_v < 1) bad("elements_h/elements_v", "must be positive");
  if (!(c.carrier_ghz > 0)) bad("carrier_ghz", "must be positive");
  if (c.rician_kappa < 0) bad("rician_kappa", "must be nonnegative");
  if (!(c.bandwidth_hz > 0)) bad("bandwidth_hz", "must be positive");
  if (c.p_max_sweep_dbm.empty()) bad("p_max_sweep_dbm", "sweep list must be nonempty");
  if (c.element_sweep.empty()) bad("element_sweep", "sweep list must be nonempty");
  for (int m : c.element_sweep)
    if (m < 1) bad("element_sweep", "element counts must be positive");
  if (c.r_min < 0) bad("r_min", "must be nonnegative");
  if (c.algorithms.empty()) bad("algorithms", "must list at least one algorithm");
  for (const std::string& a : c.algorithms) {
    try {
      algorithm_from_name(a);
    } catch (const std::exception&) {
      bad("algorithms", "unknown algorithm '" + a + "'");
    }
  }
  if (c.seeds.empty()) bad("seeds", "must list at least one seed");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    bad("seeds", "seeds must be distinct");
  if (c.hp.gamma <= 0 || c.hp.gamma > 1) bad("hyperparams.gamma", "must be in (0, 1]");
  if (c.hp.gae_lambda <= 0 || c.hp.gae_lambda > 1) bad("hyperparams.gae_lambda", "must be in (0, 1]");
  if (c.hp.clip <= 0 || c.hp.clip >= 1) bad("hyperparams.clip", "must be in (0, 1)");
  if (c.hp.episodes < 1) bad("hyperparams.episodes", "must be positive");
  if (c.hp.steps < 1) bad("hyperparams.steps", "must be positive");
  if (c.hp.minibatch < 1) bad("hyperparams.minibatch", "must be positive");
  if (c.hp.epochs < 1) bad("hyperparams.epochs", "must be positive");
  if (!(c.hp.learning_rate > 0)) bad("hyperparams.learning_rate", "must be positive");
  return errors;
}

// Stable 64-bit FNV-1a over the canonical JSON dump; seeds are sorted so
// their order is not semantic.
inline std::string config_hash(const ExperimentConfig& c) {
  json j = config_to_json(c);
  auto seeds = c.seeds;
  std::sort(seeds.begin(), seeds.end());
  j["seeds"] = seeds;
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// Built-in geometry parameterized by surface and element counts: the
// verification rooms with the second surface's wall turned opaque when only
// one surface is requested.
inline Layout builtin_layout(int surfaces, int m_h, int m_v) {
  Layout ly = verification_layout(m_h, m_v);
  if (surfaces == 1) {
    ly.surfaces.pop_back();
    for (Wall& w : ly.walls)
      if (w.surface == 1) {
        w.kind = WallKind::opaque;
        w.surface = -1;
      }
  }
  return ly;
}

inline EnvSettings make_env_settings(const ExperimentConfig& c) {
  EnvSettings env;
  if (!c.layout_file.empty()) {
    std::ifstream in(c.layout_file);
    if (!in) throw std::runtime_error("layout_file: cannot open " + c.layout_file);
    json j;
    in >> j;
    env.layout = layout_from_json(j);
  } else {
    env.layout = builtin_layout(c.surfaces, c.elements_h, c.elements_v);
    if (c.layout_source == "random") {
      // Template MU count; positions are redrawn every episode.
      env.layout.mus.assign(c.users, Vec2{5.0, 5.5});
    }
  }
  env.randomize_positions = c.layout_source == "random";
  env.channel.path_loss.carrier_freq_ghz = c.carrier_ghz;
  env.channel.rician_kappa = c.rician_kappa;
  env.channel.ap_antennas = c.ap_antennas;
  env.clusters = c.clusters;
  env.sigma2_mw = c.sigma2_mw();
  env.p_max_mw = c.p_max_mw();
  env.r_min = c.r_min;
  env.obs_channel_scale = c.obs_channel_scale;
  return env;
}

}  // namespace starnoma
