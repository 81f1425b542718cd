#include "psgdwa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace psgdwa {

using Json = nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& key, const std::string& message)
    : std::invalid_argument(key + ": " + message), key_(key) {}

namespace {

/// Object reader that remembers which keys were consumed so leftovers can be
/// reported as unknown.
class Reader {
 public:
  Reader(const Json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(where(), "must be an object");
  }

  [[nodiscard]] std::string key(const std::string& name) const {
    return prefix_.empty() ? name : prefix_ + "." + name;
  }

  const Json* find(const std::string& name) {
    seen_.insert(name);
    const auto it = obj_.find(name);
    return it == obj_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& name) {
    const Json* v = find(name);
    if (v == nullptr) throw ConfigError(key(name), "required key is missing");
    return *v;
  }

  double number(const std::string& name, double fallback) {
    const Json* v = find(name);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(key(name), "must be a number");
    return v->get<double>();
  }

  std::uint64_t count(const std::string& name, std::uint64_t fallback) {
    const Json* v = find(name);
    if (v == nullptr) return fallback;
    return as_count(*v, key(name));
  }

  bool flag(const std::string& name, bool fallback) {
    const Json* v = find(name);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(key(name), "must be true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& name, const std::string& fallback) {
    const Json* v = find(name);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(key(name), "must be a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& name) {
    const Json* v = find(name);
    if (v == nullptr) return {};
    return as_numbers(*v, key(name));
  }

  /// Throws on the first key that was never looked up.
  void finish() const {
    for (const auto& [k, _] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

  static std::uint64_t as_count(const Json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(where, "must be a non-negative integer");
  }

  static std::vector<double> as_numbers(const Json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  [[nodiscard]] std::string where() const {
    return prefix_.empty() ? std::string("<root>") : prefix_;
  }

  const Json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

SyntheticSpec parse_synthetic(Reader& r) {
  SyntheticSpec spec;
  const auto d = r.count("d", 0);
  if (d < 1) throw ConfigError(r.key("d"), "must be >= 1");
  spec.d = static_cast<Eigen::Index>(d);
  spec.sigma2 = r.number("sigma2", 0.0);
  if (!(spec.sigma2 >= 0.0)) throw ConfigError(r.key("sigma2"), "must be >= 0");

  const Json* w = r.find("omega_star");
  if (w == nullptr || (w->is_string() && w->get<std::string>() == "ramp")) {
    spec.omega_star = ramp(spec.d);
  } else {
    const auto v = Reader::as_numbers(*w, r.key("omega_star"));
    if (v.size() != d) {
      throw ConfigError(r.key("omega_star"),
                        "expected " + std::to_string(d) + " entries or \"ramp\"");
    }
    spec.omega_star = Eigen::Map<const Vector>(v.data(), spec.d);
  }

  const Json* design = r.find("design");
  if (design == nullptr ||
      (design->is_string() && design->get<std::string>() == "identity")) {
    spec.design = IdentityCovariance{};
  } else if (design->is_object()) {
    Reader dr(*design, r.key("design"));
    if (dr.find("diagonal") != nullptr) {
      spec.design = DiagonalCovariance{dr.numbers("diagonal")};
    } else if (dr.find("fixed") != nullptr) {
      spec.design = FixedFeatures{dr.numbers("fixed")};
    } else {
      throw ConfigError(r.key("design"),
                        "expected \"identity\", {\"diagonal\": [...]} or "
                        "{\"fixed\": [...]}");
    }
    dr.finish();
  } else {
    throw ConfigError(r.key("design"),
                      "expected \"identity\", {\"diagonal\": [...]} or "
                      "{\"fixed\": [...]}");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.key("design"), e.what());
  }
  return spec;
}

DatasetConfig parse_dataset(Reader& r) {
  DatasetConfig ds;
  const Json& path = r.require("path");
  if (!path.is_string()) throw ConfigError(r.key("path"), "must be a string");
  ds.path = path.get<std::string>();
  ds.target_column = r.count("target_column", 0);
  ds.n_features = r.count("n_features", 90);
  ds.holdout_fraction = r.number("holdout_fraction", 0.0);
  ds.header = r.flag("header", false);
  const auto range = r.numbers("target_range");
  if (!range.empty()) {
    if (range.size() != 2 || !(range[1] > range[0])) {
      throw ConfigError(r.key("target_range"), "expected [lo, hi] with lo < hi");
    }
    ds.target_range = TargetRange{range[0], range[1]};
  }
  return ds;
}

ConstraintConfig parse_constraint(Reader& r) {
  ConstraintConfig c;
  const auto type = r.text("type", "unbounded");
  if (type == "unbounded") {
    c.kind = ConstraintConfig::Kind::Unbounded;
  } else if (type == "box") {
    c.kind = ConstraintConfig::Kind::Box;
    c.half_width = r.number("half_width", 100.0);
    c.lower = r.numbers("lower");
    c.upper = r.numbers("upper");
    if (c.lower.size() != c.upper.size()) {
      throw ConfigError(r.key("lower"), "lower and upper must both be given");
    }
    if (!(c.half_width > 0.0)) throw ConfigError(r.key("half_width"), "must be > 0");
  } else if (type == "ball") {
    c.kind = ConstraintConfig::Kind::Ball;
    c.radius = r.number("radius", 1.0);
    c.center = r.numbers("center");
    if (!(c.radius > 0.0)) throw ConfigError(r.key("radius"), "must be > 0");
  } else {
    throw ConfigError(r.key("type"), "expected unbounded, box or ball");
  }
  return c;
}

ScheduleParams parse_schedule(Reader& r) {
  ScheduleParams s;
  const auto variant = r.text("variant", "constrained");
  if (variant == "constrained") {
    s.kind = ScheduleKind::Constrained;
  } else if (variant == "scalar") {
    s.kind = ScheduleKind::ScalarUnconstrained;
  } else {
    throw ConfigError(r.key("variant"), "expected constrained or scalar");
  }
  s.gamma = r.number("gamma", s.gamma);
  s.mu = r.number("mu", s.mu);
  s.constant_step = r.number("constant_step", s.constant_step);
  return s;
}

ExperimentConfig from_json(const Json& root) {
  Reader r(root, "");
  ExperimentConfig cfg;

  {
    Reader pr(r.require("problem"), "problem");
    const auto type = pr.text("type", "synthetic");
    if (type == "synthetic") {
      cfg.problem = parse_synthetic(pr);
    } else if (type == "dataset") {
      cfg.problem = parse_dataset(pr);
    } else {
      throw ConfigError("problem.type", "expected synthetic or dataset");
    }
    pr.finish();
  }
  if (const Json* c = r.find("constraint")) {
    Reader cr(*c, "constraint");
    cfg.constraint = parse_constraint(cr);
    cr.finish();
  }
  {
    const Json& m = r.require("methods");
    if (!m.is_array()) throw ConfigError("methods", "must be an array of names");
    for (const auto& e : m) {
      const auto id = e.is_string() ? parse_method(e.get<std::string>())
                                    : std::nullopt;
      if (!id) {
        throw ConfigError("methods",
                          "unknown method " + e.dump() +
                              " (expected PSGD, PSGD-A, PSGD-WA or ERM)");
      }
      cfg.methods.push_back(*id);
    }
  }
  if (const Json* s = r.find("schedule")) {
    Reader sr(*s, "schedule");
    cfg.schedule = parse_schedule(sr);
    sr.finish();
  }
  cfg.n_steps = r.count("n_steps", 0);
  if (const Json* c = r.find("checkpoints")) {
    Reader cr(*c, "checkpoints");
    const Json* list = cr.find("list");
    const Json* log = cr.find("log_count");
    if (list != nullptr && log != nullptr) {
      throw ConfigError("checkpoints", "give either list or log_count, not both");
    }
    if (list != nullptr) {
      if (!list->is_array()) throw ConfigError("checkpoints.list", "must be an array");
      std::vector<std::uint64_t> ks;
      for (const auto& e : *list) ks.push_back(Reader::as_count(e, "checkpoints.list"));
      cfg.checkpoints = std::move(ks);
    } else if (log != nullptr) {
      cfg.checkpoints =
          LogSpacedCheckpoints{Reader::as_count(*log, "checkpoints.log_count")};
    }
    cr.finish();
  }
  cfg.replications = r.count("replications", 1);
  cfg.base_seed = r.count("base_seed", 0);
  cfg.workers = static_cast<unsigned>(r.count("workers", 0));
  cfg.output = r.text("output", "results.csv");
  cfg.rho_tail_fraction = r.number("rho_tail_fraction", 0.2);
  r.finish();

  cfg.validate();
  return cfg;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
}

void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }

  Json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos
                                                   ? std::string::npos
                                                   : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path segment");
    if (!node->is_object()) {
      throw ConfigError(key, "path goes through a non-object value");
    }
    if (dot == std::string::npos) {
      const auto it = node->find(part);
      if (it != node->end() && it->is_object() && !value.is_object()) {
        // Naming a section instead of a field is ambiguous.
        throw ConfigError(key, "names a section, not a single field");
      }
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

Json to_json(const ExperimentConfig& cfg) {
  Json root;
  Json problem;
  if (const auto* syn = std::get_if<SyntheticSpec>(&cfg.problem)) {
    problem["type"] = "synthetic";
    problem["d"] = syn->d;
    problem["sigma2"] = syn->sigma2;
    problem["omega_star"] =
        std::vector<double>(syn->omega_star.data(),
                            syn->omega_star.data() + syn->omega_star.size());
    if (const auto* diag = std::get_if<DiagonalCovariance>(&syn->design)) {
      problem["design"] = {{"diagonal", diag->variances}};
    } else if (const auto* fixed = std::get_if<FixedFeatures>(&syn->design)) {
      problem["design"] = {{"fixed", fixed->x}};
    } else {
      problem["design"] = "identity";
    }
  } else {
    const auto& ds = std::get<DatasetConfig>(cfg.problem);
    problem["type"] = "dataset";
    problem["path"] = ds.path.string();
    problem["target_column"] = ds.target_column;
    problem["n_features"] = ds.n_features;
    problem["holdout_fraction"] = ds.holdout_fraction;
    problem["header"] = ds.header;
    if (ds.target_range) {
      problem["target_range"] = {ds.target_range->lo, ds.target_range->hi};
    }
  }
  root["problem"] = std::move(problem);

  Json c;
  switch (cfg.constraint.kind) {
    case ConstraintConfig::Kind::Unbounded:
      c["type"] = "unbounded";
      break;
    case ConstraintConfig::Kind::Box:
      c["type"] = "box";
      if (!cfg.constraint.lower.empty()) {
        c["lower"] = cfg.constraint.lower;
        c["upper"] = cfg.constraint.upper;
      } else {
        c["half_width"] = cfg.constraint.half_width;
      }
      break;
    case ConstraintConfig::Kind::Ball:
      c["type"] = "ball";
      c["radius"] = cfg.constraint.radius;
      if (!cfg.constraint.center.empty()) c["center"] = cfg.constraint.center;
      break;
  }
  root["constraint"] = std::move(c);

  Json methods = Json::array();
  for (auto m : cfg.methods) methods.push_back(std::string(to_string(m)));
  root["methods"] = std::move(methods);

  root["schedule"] = {{"variant", to_string(cfg.schedule.kind)},
                      {"gamma", cfg.schedule.gamma},
                      {"mu", cfg.schedule.mu},
                      {"constant_step", cfg.schedule.constant_step}};
  root["n_steps"] = cfg.n_steps;
  if (const auto* log = std::get_if<LogSpacedCheckpoints>(&cfg.checkpoints)) {
    root["checkpoints"] = {{"log_count", log->count}};
  } else {
    root["checkpoints"] = {
        {"list", std::get<std::vector<std::uint64_t>>(cfg.checkpoints)}};
  }
  root["replications"] = cfg.replications;
  root["base_seed"] = cfg.base_seed;
  root["workers"] = cfg.workers;
  root["output"] = cfg.output.string();
  root["rho_tail_fraction"] = cfg.rho_tail_fraction;
  return root;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  return from_json(parse_json(json_text));
}

ExperimentConfig parse_config(std::string_view json_text,
                              std::span<const std::string> overrides) {
  Json root = parse_json(json_text);
  for (const auto& o : overrides) apply_override(root, o);
  return from_json(root);
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string config_to_json(const ExperimentConfig& config, int indent) {
  return to_json(config).dump(indent);
}

}  // namespace psgdwa
