#pragma once

// JSON config files. Every key is optional and falls back to the default
// scenario; unknown keys are errors. See the README for the schema.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "phy.hpp"

namespace cfsim {

using json = nlohmann::json;

namespace detail {

class JsonReader {
 public:
  std::vector<Violation> errors;

  void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      errors.push_back({path.empty() ? "<root>" : path, "must be an object"});
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!ok.contains(it.key())) errors.push_back({join(path, it.key()), "unknown key"});
    }
  }

  template <typename T>
  void get(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errors.push_back({join(path, key), e.what()});
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline std::string kind_name(OruKind k) { return k == OruKind::Macro ? "macro" : "micro"; }
inline std::string fading_name(FadingKind f) { return f == FadingKind::Rayleigh ? "rayleigh" : "none"; }

}  // namespace detail

/// Builds a SimConfig from a parsed JSON tree. Throws ConfigError listing
/// every problem found (schema and invariants).
inline SimConfig config_from_json(const json& root, const std::string& base_dir = ".") {
  detail::JsonReader r;
  SimConfig c = default_scenario();
  r.check_keys(root, "", {"seed", "mode", "delta", "epoch_slots", "total_slots", "redraw_users", "topology",
                          "channel", "bandit", "scheduler", "phy", "xapp", "ric"});
  if (!r.errors.empty() && !root.is_object()) throw ConfigError(r.errors);

  r.get(root, "", "seed", c.seed);
  r.get(root, "", "epoch_slots", c.epoch_slots);
  r.get(root, "", "total_slots", c.total_slots);
  r.get(root, "", "redraw_users", c.redraw_users);
  if (root.contains("mode")) {
    std::string name;
    r.get(root, "", "mode", name);
    if (auto kind = parse_mode_kind(name)) {
      c.mode.kind = *kind;
    } else if (!name.empty()) {
      r.errors.push_back({"mode", "unknown mode '" + name + "'"});
    }
  }
  if (root.contains("delta")) {
    r.get(root, "", "delta", c.mode.delta);
    if (c.mode.kind != Mode::Kind::FixedDelta) r.errors.push_back({"delta", "only valid with mode fixed_delta"});
  } else if (c.mode.kind == Mode::Kind::FixedDelta) {
    r.errors.push_back({"delta", "required with mode fixed_delta"});
  }
  if (c.mode.kind == Mode::Kind::Canonical) c.mode.delta = 1.0;

  if (root.contains("topology")) {
    const json& t = root.at("topology");
    const std::string tp = "topology";
    r.check_keys(t, tp, {"orus", "users", "num_rbs", "rb_bandwidth_hz", "slot_duration_s", "carrier_freq_hz",
                         "area_width_m", "area_height_m"});
    Topology& topo = c.topology;
    r.get(t, tp, "num_rbs", topo.num_rbs);
    r.get(t, tp, "rb_bandwidth_hz", topo.rb_bandwidth_hz);
    r.get(t, tp, "slot_duration_s", topo.slot_duration_s);
    r.get(t, tp, "carrier_freq_hz", topo.carrier_freq_hz);
    r.get(t, tp, "area_width_m", topo.area_width_m);
    r.get(t, tp, "area_height_m", topo.area_height_m);
    if (t.contains("orus")) {
      const json& orus = t.at("orus");
      if (!orus.is_array()) {
        r.errors.push_back({"topology.orus", "must be an array"});
      } else {
        topo.orus.clear();
        for (std::size_t i = 0; i < orus.size(); ++i) {
          const std::string p = detail::idx("topology.orus", i);
          const json& o = orus[i];
          r.check_keys(o, p, {"id", "x", "y", "antenna_height_m", "tx_power_dbm", "num_antennas", "kind"});
          OruConfig oru;
          oru.id = static_cast<int>(i);
          std::string kind = "micro";
          r.get(o, p, "id", oru.id);
          r.get(o, p, "x", oru.position.x);
          r.get(o, p, "y", oru.position.y);
          r.get(o, p, "kind", kind);
          if (kind == "macro") {
            oru.kind = OruKind::Macro;
          } else if (kind == "micro") {
            oru.kind = OruKind::Micro;
          } else {
            r.errors.push_back({p + ".kind", "must be 'macro' or 'micro'"});
          }
          const bool macro = oru.kind == OruKind::Macro;
          oru.antenna_height_m = macro ? kMacroHeightM : kMicroHeightM;
          oru.tx_power_dbm = macro ? kMacroPowerDbm : kMicroPowerDbm;
          oru.num_antennas = macro ? kMacroAntennas : kMicroAntennas;
          r.get(o, p, "antenna_height_m", oru.antenna_height_m);
          r.get(o, p, "tx_power_dbm", oru.tx_power_dbm);
          r.get(o, p, "num_antennas", oru.num_antennas);
          topo.orus.push_back(oru);
        }
      }
    }
    if (t.contains("users")) {
      const json& users = t.at("users");
      if (users.is_number_integer()) {
        topo.users = place_users(topo, users.get<int>(), c.seed);
      } else if (users.is_array()) {
        topo.users.clear();
        for (std::size_t i = 0; i < users.size(); ++i) {
          const std::string p = detail::idx("topology.users", i);
          r.check_keys(users[i], p, {"id", "x", "y"});
          UserConfig u{static_cast<int>(i), {}};
          r.get(users[i], p, "id", u.id);
          r.get(users[i], p, "x", u.position.x);
          r.get(users[i], p, "y", u.position.y);
          topo.users.push_back(u);
        }
      } else {
        r.errors.push_back({"topology.users", "must be a user count or an array of users"});
      }
    } else {
      topo.users = place_users(topo, kDefaultUsers, c.seed);
    }
  } else {
    c.topology.users = place_users(c.topology, kDefaultUsers, c.seed);
  }

  if (root.contains("channel")) {
    const json& j = root.at("channel");
    const std::string p = "channel";
    r.check_keys(j, p, {"pathloss_exponent_macro", "pathloss_exponent_micro", "reference_loss_db",
                        "shadowing_sigma_db", "noise_figure_db", "fading", "coherence_slots"});
    r.get(j, p, "pathloss_exponent_macro", c.channel.pathloss_exponent_macro);
    r.get(j, p, "pathloss_exponent_micro", c.channel.pathloss_exponent_micro);
    c.channel.reference_loss_db = default_reference_loss_db(c.topology.carrier_freq_hz);
    r.get(j, p, "reference_loss_db", c.channel.reference_loss_db);
    r.get(j, p, "shadowing_sigma_db", c.channel.shadowing_sigma_db);
    r.get(j, p, "noise_figure_db", c.channel.noise_figure_db);
    r.get(j, p, "coherence_slots", c.channel.coherence_slots);
    if (j.is_object() && j.contains("fading")) {
      std::string f;
      r.get(j, p, "fading", f);
      if (f == "rayleigh") c.channel.fading = FadingKind::Rayleigh;
      else if (f == "none") c.channel.fading = FadingKind::None;
      else r.errors.push_back({"channel.fading", "must be 'rayleigh' or 'none'"});
    }
  } else {
    c.channel.reference_loss_db = default_reference_loss_db(c.topology.carrier_freq_hz);
  }

  if (root.contains("bandit")) {
    const json& j = root.at("bandit");
    r.check_keys(j, "bandit", {"arms", "alpha", "optimistic_init"});
    r.get(j, "bandit", "arms", c.bandit.arms);
    r.get(j, "bandit", "alpha", c.bandit.alpha);
    r.get(j, "bandit", "optimistic_init", c.bandit.optimistic_init);
  }

  if (root.contains("scheduler")) {
    const json& j = root.at("scheduler");
    r.check_keys(j, "scheduler", {"max_users_per_rb", "discipline"});
    r.get(j, "scheduler", "max_users_per_rb", c.scheduler.max_users_per_rb);
    if (j.is_object() && j.contains("discipline")) {
      std::string d;
      r.get(j, "scheduler", "discipline", d);
      if (d != "round_robin") r.errors.push_back({"scheduler.discipline", "only 'round_robin' is supported"});
    }
  }

  if (root.contains("phy")) {
    const json& j = root.at("phy");
    r.check_keys(j, "phy", {"coherent_combining", "mcs_table", "mcs_table_file"});
    r.get(j, "phy", "coherent_combining", c.phy.coherent_combining);
    if (j.is_object() && j.contains("mcs_table") && j.contains("mcs_table_file")) {
      r.errors.push_back({"phy", "give either mcs_table or mcs_table_file, not both"});
    }
    if (j.is_object() && j.contains("mcs_table")) {
      const json& rows = j.at("mcs_table");
      c.phy.mcs_table.clear();
      if (!rows.is_array()) {
        r.errors.push_back({"phy.mcs_table", "must be an array of [threshold_db, efficiency] pairs"});
      } else {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const json& row = rows[i];
          if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
            r.errors.push_back({detail::idx("phy.mcs_table", i), "must be [threshold_db, efficiency]"});
            continue;
          }
          c.phy.mcs_table.push_back({row[0].get<double>(), row[1].get<double>()});
        }
      }
    }
    if (j.is_object() && j.contains("mcs_table_file")) {
      std::string file;
      r.get(j, "phy", "mcs_table_file", file);
      if (!file.empty() && file.front() != '/') file = base_dir + "/" + file;
      try {
        c.phy.mcs_table = load_mcs_table(file);
      } catch (const SimError& e) {
        r.errors.push_back({"phy.mcs_table_file", e.what()});
      }
    }
  }

  if (root.contains("xapp")) {
    const json& j = root.at("xapp");
    r.check_keys(j, "xapp", {"max_cluster_size"});
    if (j.is_object() && j.contains("max_cluster_size") && !j.at("max_cluster_size").is_null()) {
      int cap = 0;
      r.get(j, "xapp", "max_cluster_size", cap);
      c.xapp.max_cluster_size = cap;
    }
  }

  if (root.contains("ric")) {
    const json& j = root.at("ric");
    r.check_keys(j, "ric", {"e2_latency_slots", "a1_latency_slots", "rsrp_period_slots"});
    r.get(j, "ric", "e2_latency_slots", c.ric.e2_latency_slots);
    r.get(j, "ric", "a1_latency_slots", c.ric.a1_latency_slots);
    r.get(j, "ric", "rsrp_period_slots", c.ric.rsrp_period_slots);
  }

  auto v = validate(c);
  r.errors.insert(r.errors.end(), v.begin(), v.end());
  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return c;
}

/// Fully resolved config; reading it back yields an identical SimConfig.
inline json config_to_json(const SimConfig& c) {
  json root;
  root["seed"] = c.seed;
  root["mode"] = to_string(c.mode.kind);
  if (c.mode.kind == Mode::Kind::FixedDelta) root["delta"] = c.mode.delta;
  root["epoch_slots"] = c.epoch_slots;
  root["total_slots"] = c.total_slots;
  root["redraw_users"] = c.redraw_users;

  json t;
  t["num_rbs"] = c.topology.num_rbs;
  t["rb_bandwidth_hz"] = c.topology.rb_bandwidth_hz;
  t["slot_duration_s"] = c.topology.slot_duration_s;
  t["carrier_freq_hz"] = c.topology.carrier_freq_hz;
  t["area_width_m"] = c.topology.area_width_m;
  t["area_height_m"] = c.topology.area_height_m;
  t["orus"] = json::array();
  for (const auto& o : c.topology.orus) {
    t["orus"].push_back({{"id", o.id},
                         {"x", o.position.x},
                         {"y", o.position.y},
                         {"antenna_height_m", o.antenna_height_m},
                         {"tx_power_dbm", o.tx_power_dbm},
                         {"num_antennas", o.num_antennas},
                         {"kind", detail::kind_name(o.kind)}});
  }
  t["users"] = json::array();
  for (const auto& u : c.topology.users) t["users"].push_back({{"id", u.id}, {"x", u.position.x}, {"y", u.position.y}});
  root["topology"] = t;

  root["channel"] = {{"pathloss_exponent_macro", c.channel.pathloss_exponent_macro},
                     {"pathloss_exponent_micro", c.channel.pathloss_exponent_micro},
                     {"reference_loss_db", c.channel.reference_loss_db},
                     {"shadowing_sigma_db", c.channel.shadowing_sigma_db},
                     {"noise_figure_db", c.channel.noise_figure_db},
                     {"fading", detail::fading_name(c.channel.fading)},
                     {"coherence_slots", c.channel.coherence_slots}};
  root["bandit"] = {{"arms", c.bandit.arms}, {"alpha", c.bandit.alpha}, {"optimistic_init", c.bandit.optimistic_init}};
  root["scheduler"] = {{"max_users_per_rb", c.scheduler.max_users_per_rb}, {"discipline", "round_robin"}};
  json mcs = json::array();
  for (const auto& e : c.phy.mcs_table) mcs.push_back({e.min_sinr_db, e.efficiency});
  root["phy"] = {{"coherent_combining", c.phy.coherent_combining}, {"mcs_table", mcs}};
  root["xapp"] = {{"max_cluster_size", c.xapp.max_cluster_size ? json(*c.xapp.max_cluster_size) : json(nullptr)}};
  root["ric"] = {{"e2_latency_slots", c.ric.e2_latency_slots},
                 {"a1_latency_slots", c.ric.a1_latency_slots},
                 {"rsrp_period_slots", c.ric.rsrp_period_slots}};
  return root;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  json root;
  try {
    root = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  const auto slash = path.find_last_of('/');
  return config_from_json(root, slash == std::string::npos ? "." : path.substr(0, slash));
}

inline void save_config(const SimConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write '" + path + "'");
  out << config_to_json(c).dump(2) << '\n';
}

}  // namespace cfsim
