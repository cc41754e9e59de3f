#include "cspc/config.hpp"

#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "cspc/error.hpp"

namespace cspc {

using nlohmann::json;

namespace {

struct SettingRow {
  double spectrum;
  double efficiency;
  double mc;
};

ScenarioConfig build_setting(std::string name, const std::vector<SettingRow>& rows, std::size_t clients) {
  ScenarioConfig c;
  c.name = std::move(name);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    WnpSpec w;
    w.id = j;
    w.spectrum_mhz = rows[j].spectrum;
    w.efficiency = rows[j].efficiency;
    w.cost = ConstantMarginalCost{rows[j].mc};
    w.honesty = AlwaysHonest{};
    c.wnps.push_back(w);
  }
  ClientGenerator g;
  g.count = clients;
  c.generator = g;
  return c;
}

// --- typed accessors with field paths ------------------------------------

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) throw ConfigError(path, "expected a number");
  return node.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj.at(key), join(path, key));
}

int int_or(const json& obj, const std::string& key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

bool bool_or(const json& obj, const std::string& key, bool fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string string_at(const json& node, const std::string& path) {
  if (!node.is_string()) throw ConfigError(path, "expected a string");
  return node.get<std::string>();
}

std::vector<double> number_list(const json& node, const std::string& path) {
  if (!node.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(get_number(node[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::pair<double, double> range_or(const json& obj, const std::string& key, std::pair<double, double> fallback,
                                   const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto v = number_list(obj.at(key), join(path, key));
  if (v.size() != 2) throw ConfigError(join(path, key), "expected [low, high]");
  return {v[0], v[1]};
}

void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected a table/object");
}

// Rejects misspelt keys instead of silently ignoring them.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join(path, key), "unknown key");
  }
}

CostModel parse_cost(const json& node, double capacity, const std::string& path) {
  if (node.is_number()) return ConstantMarginalCost{node.get<double>()};
  require_object(node, path);
  const std::string model = node.contains("model") ? string_at(node.at("model"), join(path, "model")) : "constant";
  if (model == "constant") {
    check_keys(node, {"model", "c"}, path);
    if (!node.contains("c")) throw ConfigError(join(path, "c"), "required");
    return ConstantMarginalCost{get_number(node.at("c"), join(path, "c"))};
  }
  if (model == "quadratic") {
    check_keys(node, {"model", "a", "b", "q"}, path);
    return QuadraticTotalCost{number_or(node, "a", 0.0, path), number_or(node, "b", 0.0, path),
                              number_or(node, "q", 0.0, path)};
  }
  if (model == "quadratic_calibrated") {
    check_keys(node, {"model", "mc_at_capacity", "fixed", "slope_share"}, path);
    if (!node.contains("mc_at_capacity")) throw ConfigError(join(path, "mc_at_capacity"), "required");
    try {
      return calibrated_quadratic(get_number(node.at("mc_at_capacity"), join(path, "mc_at_capacity")), capacity,
                                  number_or(node, "fixed", 0.0, path), number_or(node, "slope_share", 0.5, path));
    } catch (const DomainError& e) {
      throw ConfigError(path, e.what());
    }
  }
  throw ConfigError(join(path, "model"), "unknown cost model '" + model + "'");
}

HonestyPolicy parse_honesty(const json& node, const std::string& path) {
  std::string kind;
  if (node.is_string()) {
    kind = node.get<std::string>();
  } else {
    require_object(node, path);
    if (!node.contains("kind")) throw ConfigError(join(path, "kind"), "required");
    kind = string_at(node.at("kind"), join(path, "kind"));
  }
  if (kind == "honest") return AlwaysHonest{};
  if (kind == "unfair") return AlwaysUnfair{};
  if (kind == "prob") {
    if (!node.is_object() || !node.contains("sigma")) throw ConfigError(join(path, "sigma"), "required");
    check_keys(node, {"kind", "sigma"}, path);
    return HonestWithProb{get_number(node.at("sigma"), join(path, "sigma"))};
  }
  if (kind == "until") {
    if (!node.is_object()) throw ConfigError(path, "'until' needs until_pcc and then");
    check_keys(node, {"kind", "until_pcc", "then"}, path);
    if (!node.contains("until_pcc")) throw ConfigError(join(path, "until_pcc"), "required");
    if (!node.contains("then")) throw ConfigError(join(path, "then"), "required");
    return HonestyPolicy::honest_until(int_or(node, "until_pcc", 0, path),
                                       parse_honesty(node.at("then"), join(path, "then")));
  }
  throw ConfigError(path, "unknown honesty kind '" + kind + "'");
}

json honesty_to_json(const HonestyPolicy& policy) {
  const auto& v = policy.variant();
  if (std::holds_alternative<AlwaysHonest>(v)) return "honest";
  if (std::holds_alternative<AlwaysUnfair>(v)) return "unfair";
  if (const auto* p = std::get_if<HonestWithProb>(&v)) return json{{"kind", "prob"}, {"sigma", p->sigma}};
  const auto& u = std::get<std::shared_ptr<const HonestUntilPcc>>(v);
  return json{{"kind", "until"}, {"until_pcc", u->last_honest_pcc}, {"then", honesty_to_json(u->then)}};
}

void parse_wnps(ScenarioConfig& c, const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) throw ConfigError(path, "expected a non-empty array of providers");
  c.wnps.clear();
  for (std::size_t j = 0; j < node.size(); ++j) {
    const std::string p = path + "[" + std::to_string(j) + "]";
    const auto& w = node[j];
    require_object(w, p);
    check_keys(w, {"spectrum_mhz", "efficiency", "cost", "honesty"}, p);
    WnpSpec spec;
    spec.id = j;
    if (!w.contains("spectrum_mhz")) throw ConfigError(join(p, "spectrum_mhz"), "required");
    if (!w.contains("efficiency")) throw ConfigError(join(p, "efficiency"), "required");
    if (!w.contains("cost")) throw ConfigError(join(p, "cost"), "required");
    spec.spectrum_mhz = get_number(w.at("spectrum_mhz"), join(p, "spectrum_mhz"));
    spec.efficiency = get_number(w.at("efficiency"), join(p, "efficiency"));
    spec.cost = parse_cost(w.at("cost"), spec.spectrum_mhz * spec.efficiency, join(p, "cost"));
    if (w.contains("honesty")) spec.honesty = parse_honesty(w.at("honesty"), join(p, "honesty"));
    c.wnps.push_back(spec);
  }
}

void parse_clients(ScenarioConfig& c, const json& node, const std::string& path) {
  require_object(node, path);
  if (node.contains("list")) {
    check_keys(node, {"list"}, path);
    const auto& list = node.at("list");
    if (!list.is_array()) throw ConfigError(join(path, "list"), "expected an array");
    c.generator.reset();
    c.clients.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = join(path, "list") + "[" + std::to_string(i) + "]";
      const auto& e = list[i];
      require_object(e, p);
      check_keys(e, {"budget", "requirement", "initial_weights", "srp"}, p);
      ClientSpec cs;
      cs.id = i;
      for (const char* k : {"budget", "requirement", "initial_weights", "srp"})
        if (!e.contains(k)) throw ConfigError(join(p, k), "required");
      cs.budget = get_number(e.at("budget"), join(p, "budget"));
      cs.requirement = get_number(e.at("requirement"), join(p, "requirement"));
      cs.initial_weights = number_list(e.at("initial_weights"), join(p, "initial_weights"));
      cs.srp = number_list(e.at("srp"), join(p, "srp"));
      c.clients.push_back(std::move(cs));
    }
    return;
  }
  check_keys(node, {"count", "demand_scale", "requirement", "budget", "weights", "tolerance",
                    "weight_calibration", "resample_srp_per_pcc"},
             path);
  ClientGenerator g = c.generator.value_or(ClientGenerator{});
  if (node.contains("count")) {
    const int count = int_or(node, "count", 0, path);
    if (count < 0) throw ConfigError(join(path, "count"), "must be >= 0");
    g.count = static_cast<std::size_t>(count);
  }
  g.demand_scale = number_or(node, "demand_scale", g.demand_scale, path);
  std::tie(g.req_low, g.req_high) = range_or(node, "requirement", {g.req_low, g.req_high}, path);
  std::tie(g.budget_low, g.budget_high) = range_or(node, "budget", {g.budget_low, g.budget_high}, path);
  std::tie(g.weight_low, g.weight_high) = range_or(node, "weights", {g.weight_low, g.weight_high}, path);
  g.tolerance = number_or(node, "tolerance", g.tolerance, path);
  if (node.contains("weight_calibration")) {
    const auto v = string_at(node.at("weight_calibration"), join(path, "weight_calibration"));
    if (v == "capacity") g.calibration = WeightCalibration::Capacity;
    else if (v == "none") g.calibration = WeightCalibration::None;
    else throw ConfigError(join(path, "weight_calibration"), "expected 'capacity' or 'none'");
  }
  c.resample_srp_per_pcc = bool_or(node, "resample_srp_per_pcc", c.resample_srp_per_pcc, path);
  c.generator = g;
  c.clients.clear();
}

void parse_mechanism(MechanismParams& m, const json& node, const std::string& path) {
  require_object(node, path);
  check_keys(node, {"xi", "gamma", "beta", "exponent", "weight_floor", "ratio_clamp", "reward_capacity_limited",
                    "prb_initial_weights"},
             path);
  m.xi = number_or(node, "xi", m.xi, path);
  m.gamma = number_or(node, "gamma", m.gamma, path);
  m.beta = number_or(node, "beta", m.beta, path);
  m.exponent = number_or(node, "exponent", m.exponent, path);
  m.weight_floor = number_or(node, "weight_floor", m.weight_floor, path);
  m.ratio_clamp = number_or(node, "ratio_clamp", m.ratio_clamp, path);
  m.reward_capacity_limited = bool_or(node, "reward_capacity_limited", m.reward_capacity_limited, path);
  m.prb_initial_weights = bool_or(node, "prb_initial_weights", m.prb_initial_weights, path);
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw ConfigError("", "unsupported TOML value type (dates and times are not used)");
}

}  // namespace

std::vector<std::string> preset_names() { return {"setting1", "setting2"}; }

ScenarioConfig preset(std::string_view name) {
  if (name == "setting1")
    return build_setting("setting1", {{30, 8, 19.68}, {48, 9, 38.68}, {60, 6, 28.73}}, 50);
  if (name == "setting2")
    return build_setting("setting2",
                         {{30, 8, 19.68}, {48, 9, 38.68}, {60, 6, 28.73}, {49, 5, 9.79}, {75, 4, 14.18}, {27, 7, 6.97}},
                         100);
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> scenario_names() {
  return {"scenario1-all-honest", "scenario2-one-honest", "scenario3-behavior-change", "scenario4-probabilistic"};
}

void apply_scenario(ScenarioConfig& c, std::string_view scenario, std::optional<double> sigma,
                    std::optional<int> switch_pcc) {
  const std::size_t n = c.wnps.size();
  if (sigma && !(*sigma >= 0.0 && *sigma <= 1.0)) throw ConfigError("sigma", "must lie in [0, 1]");
  if (switch_pcc && *switch_pcc < 0) throw ConfigError("switch_pcc", "must be >= 0");
  auto set_all = [&](HonestyPolicy p) {
    for (auto& w : c.wnps) w.honesty = p;
  };
  if (scenario == "scenario1-all-honest") {
    set_all(AlwaysHonest{});
  } else if (scenario == "scenario2-one-honest") {
    set_all(AlwaysUnfair{});
    c.wnps[0].honesty = AlwaysHonest{};
  } else if (scenario == "scenario3-behavior-change") {
    if (n < 2) throw ConfigError("scenario", "scenario3 needs at least two providers");
    const int k = switch_pcc.value_or(c.name.rfind("setting2", 0) == 0 ? 15 : 32);
    set_all(AlwaysUnfair{});
    c.wnps[0].honesty = AlwaysHonest{};
    c.wnps[1].honesty = HonestyPolicy::honest_until(k, AlwaysUnfair{});
  } else if (scenario == "scenario4-probabilistic") {
    set_all(AlwaysUnfair{});
    const HonestyPolicy coin = HonestWithProb{sigma.value_or(0.9)};
    const int k = switch_pcc.value_or(0);
    c.wnps[0].honesty = k > 0 ? HonestyPolicy::honest_until(k, coin) : coin;
  } else if (scenario == "custom") {
    return;
  } else {
    throw ConfigError("scenario", "unknown scenario '" + std::string(scenario) + "'");
  }
  const auto slash = c.name.find('/');
  c.name = (slash == std::string::npos ? c.name : c.name.substr(0, slash)) + "/" + std::string(scenario);
}

ScenarioConfig config_from_json(const json& tree) {
  require_object(tree, "");
  check_keys(tree,
             {"preset", "name", "scenario", "sigma", "switch_pcc", "seed", "max_pccs", "max_bais", "bai_stop_tol",
              "workers", "initial_caps", "mechanism", "wnps", "clients"},
             "");
  ScenarioConfig c;
  if (tree.contains("preset")) c = preset(string_at(tree.at("preset"), "preset"));
  if (tree.contains("name")) c.name = string_at(tree.at("name"), "name");
  if (tree.contains("wnps")) parse_wnps(c, tree.at("wnps"), "wnps");
  if (tree.contains("clients")) parse_clients(c, tree.at("clients"), "clients");
  if (tree.contains("mechanism")) parse_mechanism(c.mechanism, tree.at("mechanism"), "mechanism");

  if (tree.contains("seed")) {
    const auto& s = tree.at("seed");
    if (!s.is_number_integer()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
    if (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)
      throw ConfigError("seed", "expected a non-negative integer");
  }
  c.max_pccs = int_or(tree, "max_pccs", c.max_pccs, "");
  c.max_bais = int_or(tree, "max_bais", c.max_bais, "");
  c.bai_stop_tol = number_or(tree, "bai_stop_tol", c.bai_stop_tol, "");
  if (tree.contains("workers")) {
    const int w = int_or(tree, "workers", 1, "");
    if (w < 1) throw ConfigError("workers", "must be >= 1");
    c.workers = static_cast<unsigned>(w);
  }
  if (tree.contains("initial_caps")) {
    const auto& ic = tree.at("initial_caps");
    if (ic.is_array()) {
      c.initial_caps = number_list(ic, "initial_caps");
    } else {
      require_object(ic, "initial_caps");
      check_keys(ic, {"low", "high"}, "initial_caps");
      c.initial_cap_low = number_or(ic, "low", c.initial_cap_low, "initial_caps");
      c.initial_cap_high = number_or(ic, "high", c.initial_cap_high, "initial_caps");
    }
  }
  if (tree.contains("scenario")) {
    std::optional<double> sigma;
    std::optional<int> sw;
    if (tree.contains("sigma")) sigma = get_number(tree.at("sigma"), "sigma");
    if (tree.contains("switch_pcc")) sw = int_or(tree, "switch_pcc", 0, "");
    apply_scenario(c, string_at(tree.at("scenario"), "scenario"), sigma, sw);
  } else if (tree.contains("sigma") || tree.contains("switch_pcc")) {
    throw ConfigError("scenario", "sigma/switch_pcc need a scenario");
  }
  c.validate();
  return c;
}

ScenarioConfig parse_config(std::string_view text, std::string_view format) {
  if (format == "json") {
    json tree;
    try {
      tree = json::parse(text);
    } catch (const json::parse_error& e) {
      // nlohmann reports a byte offset; translate to a line number.
      std::size_t line = 1;
      for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
      throw ConfigError("", "JSON parse error at line " + std::to_string(line) + ": " + e.what());
    }
    return config_from_json(tree);
  }
  if (format == "toml") {
    toml::table table;
    try {
      table = toml::parse(text);
    } catch (const toml::parse_error& e) {
      throw ConfigError("", "TOML parse error at line " + std::to_string(e.source().begin.line) + ": " +
                                std::string(e.description()));
    }
    return config_from_json(toml_to_json(table));
  }
  throw ConfigError("", "unsupported config format '" + std::string(format) + "'");
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto ext = path.extension().string();
  const std::string format = ext == ".toml" ? "toml" : "json";
  try {
    return parse_config(buf.str(), format);
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), path.string() + ": " + e.what());
  }
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["max_pccs"] = c.max_pccs;
  j["max_bais"] = c.max_bais;
  j["bai_stop_tol"] = c.bai_stop_tol;
  j["workers"] = c.workers;
  if (c.initial_caps.empty())
    j["initial_caps"] = {{"low", c.initial_cap_low}, {"high", c.initial_cap_high}};
  else
    j["initial_caps"] = c.initial_caps;
  const auto& m = c.mechanism;
  j["mechanism"] = {{"xi", m.xi},
                    {"gamma", m.gamma},
                    {"beta", m.beta},
                    {"exponent", m.exponent},
                    {"weight_floor", m.weight_floor},
                    {"ratio_clamp", m.ratio_clamp},
                    {"reward_capacity_limited", m.reward_capacity_limited},
                    {"prb_initial_weights", m.prb_initial_weights}};
  j["wnps"] = json::array();
  for (const auto& w : c.wnps) {
    json e{{"spectrum_mhz", w.spectrum_mhz}, {"efficiency", w.efficiency}, {"honesty", honesty_to_json(w.honesty)}};
    if (const auto* cm = std::get_if<ConstantMarginalCost>(&w.cost))
      e["cost"] = {{"model", "constant"}, {"c", cm->c}};
    else {
      const auto& q = std::get<QuadraticTotalCost>(w.cost);
      e["cost"] = {{"model", "quadratic"}, {"a", q.a}, {"b", q.b}, {"q", q.q}};
    }
    j["wnps"].push_back(e);
  }
  if (c.generator) {
    const auto& g = *c.generator;
    j["clients"] = {{"count", g.count},
                    {"demand_scale", g.demand_scale},
                    {"requirement", {g.req_low, g.req_high}},
                    {"budget", {g.budget_low, g.budget_high}},
                    {"weights", {g.weight_low, g.weight_high}},
                    {"tolerance", g.tolerance},
                    {"weight_calibration", g.calibration == WeightCalibration::Capacity ? "capacity" : "none"},
                    {"resample_srp_per_pcc", c.resample_srp_per_pcc}};
  } else {
    json list = json::array();
    for (const auto& cl : c.clients)
      list.push_back({{"budget", cl.budget},
                      {"requirement", cl.requirement},
                      {"initial_weights", cl.initial_weights},
                      {"srp", cl.srp}});
    j["clients"] = {{"list", list}};
  }
  return j;
}

}  // namespace cspc
