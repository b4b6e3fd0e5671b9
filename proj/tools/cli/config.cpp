#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

#include "qbound/errors.hpp"

namespace qbound::cli {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void reject_unknown(const json& block, const std::set<std::string>& allowed, const std::string& where) {
  if (!block.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : block.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& block, const std::string& key, const std::string& where) {
  try {
    return block.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double get_number(const json& block, const std::string& key, const std::string& where) {
  if (!block.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return block.at(key).get<double>();
}

int get_int(const json& block, const std::string& key, const std::string& where) {
  if (!block.at(key).is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return block.at(key).get<int>();
}

std::string order_text(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<int>());
  if (value.is_array() && value.size() == 2 && value[0].is_number_integer() && value[1].is_number_integer()) {
    return std::to_string(value[0].get<int>()) + "," + std::to_string(value[1].get<int>());
  }
  throw ConfigError(where + ".order: expected \"r,s\" or [r, s]");
}

ModelConfig parse_model(const json& j) {
  const std::string where = "model";
  reject_unknown(j, {"kind", "entropy", "r0", "axis", "epsilon", "dim", "domain"}, where);
  ModelConfig m;
  if (j.contains("kind")) m.kind = lower(get<std::string>(j, "kind", where));
  if (m.kind != "qubit" && m.kind != "depolarized") {
    throw ConfigError("model.kind: expected qubit or depolarized, got '" + m.kind + "'");
  }
  if (j.contains("entropy")) m.entropy = get_number(j, "entropy", where);
  if (j.contains("r0")) {
    const auto& v = j.at("r0");
    if (v.is_number()) {
      m.r0 = std::vector<double>{v.get<double>()};
    } else if (v.is_array() && v.size() == 3 && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      m.r0 = v.get<std::vector<double>>();
    } else {
      throw ConfigError("model.r0: expected a number or a 3-vector");
    }
  }
  if (j.contains("axis")) {
    const auto& v = j.at("axis");
    if (!v.is_array() || v.size() != 3) throw ConfigError("model.axis: expected a 3-vector");
    m.axis = get<std::vector<double>>(j, "axis", where);
  }
  if (j.contains("epsilon")) m.epsilon = get_number(j, "epsilon", where);
  if (j.contains("dim")) m.dim = get_int(j, "dim", where);
  if (j.contains("domain")) {
    const auto& v = j.at("domain");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError("model.domain: expected [lower, upper]");
    }
    m.domain = std::pair{v[0].get<double>(), v[1].get<double>()};
    if (!(m.domain->first < m.domain->second)) throw ConfigError("model.domain: lower must be below upper");
  }

  if (m.kind == "qubit") {
    if (m.entropy && m.r0) throw ConfigError("model: give either entropy or r0, not both");
    if (!m.entropy && !m.r0) m.entropy = 0.6;
    if (m.entropy && !(*m.entropy >= 0.0 && *m.entropy <= std::log(2.0))) {
      throw ConfigError("model.entropy: must lie in [0, ln 2]");
    }
    if (m.r0) {
      double len = 0.0;
      for (double x : *m.r0) len += x * x;
      if (!(std::sqrt(len) <= 1.0)) throw ConfigError("model.r0: Bloch length must be <= 1");
    }
    const double n = std::hypot(m.axis[0], m.axis[1], m.axis[2]);
    if (!(std::abs(n - 1.0) <= 1e-9)) throw ConfigError("model.axis: must be a unit vector");
  } else {
    if (m.dim < 2) throw ConfigError("model.dim: must be >= 2");
    if (!(m.epsilon >= 0.0 && m.epsilon <= 1.0)) throw ConfigError("model.epsilon: must lie in [0, 1]");
  }
  return m;
}

BoundConfig parse_bound(const json& j) {
  const std::string where = "bound";
  reject_unknown(j, {"kind", "order", "m", "theta", "povm"}, where);
  BoundConfig b;
  const std::string kind = j.contains("kind") ? get<std::string>(j, "kind", where) : "qcrb";
  const std::string order = j.contains("order") ? order_text(j.at("order"), where) : "";
  const std::string povm = j.contains("povm") ? get<std::string>(j, "povm", where) : "optimal";
  b.spec = parse_kind(kind, order, povm);
  if (j.contains("m")) b.m = get_int(j, "m", where);
  if (b.m < 1 || b.m > 12) throw ConfigError("bound.m: must lie in 1..12");
  if (j.contains("theta")) b.theta = get_number(j, "theta", where);
  return b;
}

Backend parse_backend(const std::string& s) {
  if (s == "auto") return Backend::Auto;
  if (s == "generic") return Backend::Generic;
  if (s == "closed_form") return Backend::ClosedForm;
  throw ConfigError("optimizer.backend: expected auto, generic or closed_form, got '" + s + "'");
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Generic: return "generic";
    case Backend::ClosedForm: return "closed_form";
    case Backend::Auto: break;
  }
  return "auto";
}

OptimizerConfig parse_optimizer(const json& j) {
  const std::string where = "optimizer";
  reject_unknown(j,
                 {"grid_points", "coarse_grid_points", "refine_iterations", "refine_candidates",
                  "offset_exclusion_radius", "min_offset_separation", "max_evaluations", "threads", "regularize",
                  "regularization_epsilon", "support_tolerance", "null_tolerance", "derivative_step", "backend"},
                 where);
  OptimizerConfig c;
  if (j.contains("grid_points")) c.grid_points = get_int(j, "grid_points", where);
  if (j.contains("coarse_grid_points")) c.coarse_grid_points = get_int(j, "coarse_grid_points", where);
  if (j.contains("refine_iterations")) c.refine_iterations = get_int(j, "refine_iterations", where);
  if (j.contains("refine_candidates")) c.refine_candidates = get_int(j, "refine_candidates", where);
  if (j.contains("offset_exclusion_radius")) c.offset_exclusion_radius = get_number(j, "offset_exclusion_radius", where);
  if (j.contains("min_offset_separation")) c.min_offset_separation = get_number(j, "min_offset_separation", where);
  if (j.contains("max_evaluations")) {
    if (!j.at("max_evaluations").is_number_unsigned()) throw ConfigError("optimizer.max_evaluations: expected a positive integer");
    c.max_evaluations = j.at("max_evaluations").get<std::size_t>();
  }
  if (j.contains("threads")) {
    const int t = get_int(j, "threads", where);
    if (t < 0) throw ConfigError("optimizer.threads: must be >= 0");
    c.threads = static_cast<unsigned>(t);
  }
  if (j.contains("regularize")) c.regularize = get<bool>(j, "regularize", where);
  if (j.contains("regularization_epsilon")) c.regularization_epsilon = get_number(j, "regularization_epsilon", where);
  if (j.contains("support_tolerance")) c.support_tolerance = get_number(j, "support_tolerance", where);
  if (j.contains("null_tolerance")) c.null_tolerance = get_number(j, "null_tolerance", where);
  if (j.contains("derivative_step")) c.derivative_step = get_number(j, "derivative_step", where);
  if (j.contains("backend")) c.backend = parse_backend(lower(get<std::string>(j, "backend", where)));
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
  return c;
}

OutputConfig parse_output(const json& j) {
  reject_unknown(j, {"format", "path"}, "output");
  OutputConfig o;
  if (j.contains("format")) o.format = lower(get<std::string>(j, "format", "output"));
  if (!o.format.empty() && o.format != "csv" && o.format != "json") {
    throw ConfigError("output.format: expected csv or json, got '" + o.format + "'");
  }
  if (j.contains("path")) o.path = get<std::string>(j, "path", "output");
  return o;
}

SweepConfig parse_sweep(const json& j) {
  reject_unknown(j, {"m", "kinds"}, "sweep");
  SweepConfig s;
  if (j.contains("m")) {
    const auto& v = j.at("m");
    if (!v.is_array() || v.empty() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); })) {
      throw ConfigError("sweep.m: expected a non-empty list of integers");
    }
    s.m = v.get<std::vector<int>>();
    for (int m : s.m) {
      if (m < 1 || m > 12) throw ConfigError("sweep.m: entries must lie in 1..12");
    }
    std::sort(s.m.begin(), s.m.end());
    s.m.erase(std::unique(s.m.begin(), s.m.end()), s.m.end());
  }
  if (j.contains("kinds")) {
    const auto& v = j.at("kinds");
    if (!v.is_array() || v.empty()) throw ConfigError("sweep.kinds: expected a non-empty list");
    for (const auto& k : v) {
      if (!k.is_string()) throw ConfigError("sweep.kinds: entries must be strings");
      s.kinds.push_back(parse_kind(k.get<std::string>(), ""));
    }
  }
  return s;
}

}  // namespace

std::string BoundSpec::name() const {
  std::string out = std::string(quantum ? "qab(" : "cab(") + std::to_string(r) + "," + std::to_string(s) + ")";
  if (!quantum) out += "[" + povm + "]";
  return out;
}

std::pair<int, int> parse_order(const std::string& text) {
  static const std::regex pattern(R"(^\s*(\d{1,2})\s*,\s*(\d{1,2})\s*$)");
  std::smatch match;
  if (!std::regex_match(text, match, pattern)) {
    throw ConfigError("order: cannot parse '" + text + "', expected two integers as r,s");
  }
  return {std::stoi(match[1]), std::stoi(match[2])};
}

BoundSpec parse_kind(const std::string& kind_in, const std::string& order, const std::string& povm_in) {
  const std::string kind = lower(kind_in);
  static const std::regex explicit_form(R"(^([qc])ab\((\d{1,2}),(\d{1,2})\)$)");
  static const std::regex single(R"(^\s*(\d{1,2})\s*$)");
  BoundSpec spec;
  std::smatch match;
  std::string base = kind;
  if (std::regex_match(kind, match, explicit_form)) {
    if (!order.empty()) throw ConfigError("kind '" + kind_in + "' already fixes the order");
    spec.quantum = match[1] == "q";
    spec.r = std::stoi(match[2]);
    spec.s = std::stoi(match[3]);
  } else {
    if (kind.size() < 2 || (kind[0] != 'q' && kind[0] != 'c')) throw ConfigError("kind: unknown bound kind '" + kind_in + "'");
    spec.quantum = kind[0] == 'q';
    base = kind.substr(1);
    // Single-index kinds accept "n" or the full "r,s" form.
    auto one_index = [&](bool first) {
      if (order.empty()) return 1;
      std::smatch m;
      if (std::regex_match(order, m, single)) return std::stoi(m[1]);
      const auto [r, s] = parse_order(order);
      if ((first && s != 0) || (!first && r != 0)) throw ConfigError("order '" + order + "' does not fit kind '" + kind_in + "'");
      return first ? r : s;
    };
    if (base == "crb" || base == "hcrb") {
      spec.r = base == "crb" ? 0 : 1;
      spec.s = base == "crb" ? 1 : 0;
      if (!order.empty() && parse_order(order) != std::pair{spec.r, spec.s}) {
        throw ConfigError("order '" + order + "' does not fit kind '" + kind_in + "'");
      }
    } else if (base == "bab") {
      spec.r = one_index(true);
      spec.s = 0;
    } else if (base == "bhb") {
      spec.r = 0;
      spec.s = one_index(false);
    } else if (base == "ab") {
      if (order.empty()) throw ConfigError("kind '" + kind_in + "' needs an order r,s");
      std::tie(spec.r, spec.s) = parse_order(order);
    } else {
      throw ConfigError("kind: unknown bound kind '" + kind_in + "'");
    }
  }
  if (spec.r + spec.s < 1) throw ConfigError("order: r + s must be at least 1");
  if (spec.r > 3) throw ConfigError("order: at most 3 test points are supported");
  if (spec.s > 6) throw ConfigError("order: derivative order must be at most 6");
  if (!spec.quantum) {
    spec.povm = lower(povm_in);
    if (spec.povm != "x" && spec.povm != "y" && spec.povm != "z" && spec.povm != "optimal") {
      throw ConfigError("povm: expected x, y, z or optimal, got '" + povm_in + "'");
    }
  }
  return spec;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, {"model", "bound", "optimizer", "output", "sweep", "montecarlo", "check", "seed"}, "config");
  RunConfig cfg;
  cfg.model = parse_model(j.value("model", json::object()));
  cfg.bound = parse_bound(j.value("bound", json::object()));
  cfg.optimizer = parse_optimizer(j.value("optimizer", json::object()));
  cfg.output = parse_output(j.value("output", json::object()));
  cfg.sweep = parse_sweep(j.value("sweep", json::object()));
  if (cfg.sweep.kinds.empty()) {
    cfg.sweep.kinds = {parse_kind("qab(1,1)", ""), parse_kind("qhcrb", ""), parse_kind("qcrb", "")};
  }
  const json mc = j.value("montecarlo", json::object());
  reject_unknown(mc, {"n_samples"}, "montecarlo");
  if (mc.contains("n_samples")) {
    if (!mc.at("n_samples").is_number_integer()) throw ConfigError("montecarlo.n_samples: expected an integer");
    cfg.montecarlo.n_samples = mc.at("n_samples").get<std::int64_t>();
  }
  if (cfg.montecarlo.n_samples < 1) throw ConfigError("montecarlo.n_samples: must be >= 1");
  const json check = j.value("check", json::object());
  reject_unknown(check, {"filter", "mutate_omega"}, "check");
  if (check.contains("filter")) cfg.check.filter = get<std::string>(check, "filter", "check");
  if (check.contains("mutate_omega")) cfg.check.mutate_omega = get<bool>(check, "mutate_omega", "check");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

json canonical_json(const RunConfig& cfg) {
  json model{{"kind", cfg.model.kind}};
  if (cfg.model.kind == "qubit") {
    if (cfg.model.entropy) model["entropy"] = *cfg.model.entropy;
    if (cfg.model.r0) model["r0"] = *cfg.model.r0;
    model["axis"] = cfg.model.axis;
  } else {
    model["epsilon"] = cfg.model.epsilon;
    model["dim"] = cfg.model.dim;
  }
  if (cfg.model.domain) model["domain"] = {cfg.model.domain->first, cfg.model.domain->second};

  json bound{{"kind", cfg.bound.spec.name()}, {"m", cfg.bound.m}, {"theta", cfg.bound.theta}};

  const auto& o = cfg.optimizer;
  json optimizer{{"grid_points", o.grid_points},
                 {"coarse_grid_points", o.coarse_grid_points},
                 {"refine_iterations", o.refine_iterations},
                 {"refine_candidates", o.refine_candidates},
                 {"offset_exclusion_radius", o.offset_exclusion_radius},
                 {"min_offset_separation", o.min_offset_separation},
                 {"max_evaluations", o.max_evaluations},
                 {"regularize", o.regularize},
                 {"regularization_epsilon", o.regularization_epsilon},
                 {"support_tolerance", o.support_tolerance},
                 {"null_tolerance", o.null_tolerance},
                 {"derivative_step", o.derivative_step},
                 {"backend", backend_name(o.backend)}};

  json kinds = json::array();
  for (const auto& k : cfg.sweep.kinds) kinds.push_back(k.name());
  return json{{"model", model},
              {"bound", bound},
              {"optimizer", optimizer},
              {"sweep", {{"m", cfg.sweep.m}, {"kinds", kinds}}},
              {"montecarlo", {{"n_samples", cfg.montecarlo.n_samples}}},
              {"check", {{"filter", cfg.check.filter}, {"mutate_omega", cfg.check.mutate_omega}}},
              {"seed", cfg.seed}};
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = canonical_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qbound::cli
