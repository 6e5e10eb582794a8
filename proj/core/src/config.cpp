#include "spinflow/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace spinflow {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::config_error, "at " + path + ": " + what);
}

// Object view that tracks its JSON path and rejects keys outside the docs.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_error(path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& item : j_.items()) {
      if (ok.count(item.key()) == 0) schema_error(path_, "unknown key \"" + item.key() + "\"");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) const { return j_.at(key); }
  std::string sub_path(const char* key) const { return path_ + "." + key; }

  double num(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    return expect_number(key);
  }
  double req_num(const char* key) const {
    if (!has(key)) schema_error(path_, "missing required key \"" + std::string(key) + "\"");
    return expect_number(key);
  }
  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) schema_error(sub_path(key), "expected an integer");
    return v.get<long long>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) schema_error(sub_path(key), "expected a boolean");
    return v.get<bool>();
  }
  std::string str(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return req_str(key);
  }
  std::string req_str(const char* key) const {
    if (!has(key)) schema_error(path_, "missing required key \"" + std::string(key) + "\"");
    const json& v = j_.at(key);
    if (!v.is_string()) schema_error(sub_path(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  double expect_number(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_number()) schema_error(sub_path(key), "expected a number");
    return v.get<double>();
  }

  const json& j_;
  std::string path_;
};

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    // Recover line/column from the byte offset for a readable message.
    size_t line = 1, col = 1;
    const size_t stop = std::min(text.size(), err.byte > 0 ? err.byte - 1 : 0);
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::config_error, "parse error at line " + std::to_string(line) + ", column " +
                                      std::to_string(col) + ": " + err.what());
  }
}

TorusDomain parse_domain(const json& root, const std::string& base) {
  if (!root.contains("domain")) return TorusDomain{};
  const Obj d(root.at("domain"), base + ".domain");
  // Nx/Ny and N1/N2 are interchangeable spellings of the grid size.
  d.allow({"L1", "L2", "N1", "N2", "Nx", "Ny"});
  long long n1 = d.integer("N1", d.integer("Nx", 8));
  long long n2 = d.integer("N2", d.integer("Ny", 8));
  try {
    return TorusDomain(d.num("L1", 2.0 * M_PI), d.num("L2", 2.0 * M_PI), static_cast<int>(n1),
                       static_cast<int>(n2));
  } catch (const Error& err) {
    schema_error(base + ".domain", err.what());
  }
}

TargetSpec parse_target(const json& root, const std::string& base) {
  if (!root.contains("target")) schema_error(base, "missing required key \"target\"");
  const Obj t(root.at("target"), base + ".target");
  TargetSpec spec;
  spec.kind = t.req_str("kind");
  if (spec.kind == "sphere") {
    t.allow({"kind", "ambient"});
    spec.ambient = static_cast<int>(t.integer("ambient", 3));
  } else if (spec.kind == "clifford_torus") {
    t.allow({"kind", "r1", "r2"});
    spec.r1 = t.num("r1", 1.0);
    spec.r2 = t.num("r2", 1.0);
  } else {
    schema_error(base + ".target.kind", "unknown target \"" + spec.kind + "\"");
  }
  return spec;
}

SpinStructure parse_spin(const json& root, const std::string& base) {
  if (!root.contains("spin_structure")) {
    schema_error(base, "missing required key \"spin_structure\"");
  }
  const json& v = root.at("spin_structure");
  // Accepted forms: ["periodic", "antiperiodic"] or the joined label
  // "periodic-antiperiodic".
  if (v.is_array()) {
    if (v.size() != 2 || !v[0].is_string() || !v[1].is_string())
      schema_error(base + ".spin_structure", "expected two direction flags");
    auto flag = [&](const json& e) -> bool {
      const std::string word = e.get<std::string>();
      if (word == "periodic") return false;
      if (word == "antiperiodic") return true;
      schema_error(base + ".spin_structure", "unknown flag \"" + word + "\"");
    };
    return SpinStructure{flag(v[0]), flag(v[1])};
  }
  if (!v.is_string()) schema_error(base + ".spin_structure", "expected a string label or a pair");
  try {
    return parse_spin_structure(v.get<std::string>());
  } catch (const Error& err) {
    schema_error(base + ".spin_structure", err.what());
  }
}

MapSpec parse_map(const json& node, const std::string& path) {
  const Obj m(node, path);
  MapSpec spec;
  spec.kind = m.req_str("kind");
  if (spec.kind == "constant") {
    m.allow({"kind", "point"});
    if (m.has("point")) {
      const json& p = m.raw("point");
      if (!p.is_array() || p.empty()) schema_error(path + ".point", "expected a coordinate array");
      Eigen::VectorXd v(p.size());
      for (size_t i = 0; i < p.size(); ++i) {
        if (!p[i].is_number()) schema_error(path + ".point", "expected numbers");
        v(static_cast<int>(i)) = p[i].get<double>();
      }
      spec.point = v;
    }
  } else if (spec.kind == "wrap") {
    m.allow({"kind", "w", "phase"});
    if (m.has("w")) {
      const json& w = m.raw("w");
      if (!w.is_array() || w.size() != 2 || !w[0].is_array() || w[0].size() != 2 ||
          !w[1].is_array() || w[1].size() != 2) {
        schema_error(path + ".w", "expected a 2x2 integer matrix");
      }
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          const json& e = w[static_cast<size_t>(r)][static_cast<size_t>(c)];
          if (!e.is_number_integer()) schema_error(path + ".w", "expected integers");
          spec.w(r, c) = e.get<int>();
        }
      }
    }
    if (m.has("phase")) {
      const json& ph = m.raw("phase");
      if (!ph.is_array() || ph.size() != 2) schema_error(path + ".phase", "expected two numbers");
      for (int i = 0; i < 2; ++i) {
        if (!ph[static_cast<size_t>(i)].is_number()) {
          schema_error(path + ".phase", "expected two numbers");
        }
        spec.phase(i) = ph[static_cast<size_t>(i)].get<double>();
      }
    }
  } else if (spec.kind == "perturbed") {
    m.allow({"kind", "base", "amplitude", "band"});
    if (!m.has("base")) schema_error(path, "missing required key \"base\"");
    spec.base = std::make_shared<MapSpec>(parse_map(m.raw("base"), path + ".base"));
    if (spec.base->kind == "perturbed") schema_error(path + ".base", "nested perturbations");
    spec.amplitude = m.req_num("amplitude");
    spec.band = static_cast<int>(m.integer("band", 2));
  } else {
    schema_error(path + ".kind", "unknown map kind \"" + spec.kind + "\"");
  }
  return spec;
}

MapSpec parse_map_field(const json& root, const std::string& base) {
  if (!root.contains("map")) schema_error(base, "missing required key \"map\"");
  return parse_map(root.at("map"), base + ".map");
}

DiracBlock parse_block(const std::string& label, const std::string& path) {
  if (label == "full") return DiracBlock::full;
  if (label == "(1,0)" || label == "holomorphic") return DiracBlock::holomorphic;
  schema_error(path, "unknown block \"" + label + "\" (expected \"full\" or \"(1,0)\")");
}

std::uint64_t parse_seed(const json& root, const std::string& base) {
  if (!root.contains("seed")) return 0;
  const json& v = root.at("seed");
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    schema_error(base + ".seed", "expected a nonnegative integer");
  }
  if (v.is_number_integer() && v.get<long long>() < 0) {
    schema_error(base + ".seed", "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

json domain_json(const TorusDomain& d) {
  return json{{"L1", d.L1}, {"L2", d.L2}, {"N1", d.N1}, {"N2", d.N2}};
}

json target_json(const TargetSpec& t) {
  if (t.kind == "sphere") return json{{"kind", t.kind}, {"ambient", t.ambient}};
  return json{{"kind", t.kind}, {"r1", t.r1}, {"r2", t.r2}};
}

json map_json(const MapSpec& m) {
  json j{{"kind", m.kind}};
  if (m.kind == "constant") {
    if (m.point) {
      json arr = json::array();
      for (int i = 0; i < m.point->size(); ++i) arr.push_back((*m.point)(i));
      j["point"] = arr;
    }
  } else if (m.kind == "wrap") {
    j["w"] = json::array({json::array({m.w(0, 0), m.w(0, 1)}),
                          json::array({m.w(1, 0), m.w(1, 1)})});
    j["phase"] = json::array({m.phase(0), m.phase(1)});
  } else {
    j["base"] = map_json(*m.base);
    j["amplitude"] = m.amplitude;
    j["band"] = m.band;
  }
  return j;
}

const char* block_label(DiracBlock b) { return b == DiracBlock::full ? "full" : "(1,0)"; }

}  // namespace

std::shared_ptr<const EmbeddedTarget> TargetSpec::make() const {
  if (kind == "sphere") {
    if (ambient != 3 && ambient != 4) {
      fail(ErrorCode::config_error, "sphere ambient dimension must be 3 or 4");
    }
    return make_sphere(ambient);
  }
  if (r1 <= 0.0 || r2 <= 0.0) fail(ErrorCode::config_error, "torus radii must be positive");
  return make_clifford_torus(r1, r2);
}

MapField MapSpec::build(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> target,
                        std::uint64_t seed) const {
  if (kind == "constant") {
    Eigen::VectorXd p;
    if (point) {
      if (point->size() != target->ambient_dim()) {
        fail(ErrorCode::config_error, "constant point has the wrong ambient dimension");
      }
      try {
        p = target->project(*point);
      } catch (const Error&) {
        fail(ErrorCode::config_error, "constant point is outside the target's tube");
      }
      if ((p - *point).norm() > 1e-6) {
        fail(ErrorCode::config_error, "constant point is not on the target (residual " +
                                          std::to_string((p - *point).norm()) + ")");
      }
    } else if (const auto* torus = dynamic_cast<const CliffordTorus*>(target.get())) {
      p = torus->point_from_angles(0.0, 0.0);
    } else {
      p = Eigen::VectorXd::Unit(target->ambient_dim(), target->ambient_dim() - 1);
    }
    return constant_map(dom, std::move(target), p);
  }
  if (kind == "wrap") return wrap_map(dom, std::move(target), w, phase);
  return perturb_map(base->build(dom, std::move(target), seed), amplitude, seed, band);
}

SpectrumConfig parse_spectrum_config(const std::string& text) {
  const json root = parse_document(text);
  const Obj top(root, "$");
  top.allow({"domain", "target", "spin_structure", "map", "block", "lambda", "seed"});
  SpectrumConfig cfg;
  cfg.domain = parse_domain(root, "$");
  cfg.target = parse_target(root, "$");
  cfg.spin = parse_spin(root, "$");
  cfg.map = parse_map_field(root, "$");
  cfg.block = parse_block(top.str("block", "full"), "$.block");
  cfg.lambda = top.num("lambda", 0.0);
  cfg.seed = parse_seed(root, "$");
  return cfg;
}

FlowRunConfig parse_flow_config(const std::string& text) {
  const json root = parse_document(text);
  const Obj top(root, "$");
  top.allow({"domain", "target", "spin_structure", "map", "spinor", "alpha", "dt", "t_max",
             "max_steps", "lambda", "reproject", "convergence_eps", "gradient_bound",
             "kernel_block", "tangency_tol", "seed"});
  FlowRunConfig cfg;
  cfg.domain = parse_domain(root, "$");
  cfg.target = parse_target(root, "$");
  cfg.map = parse_map_field(root, "$");
  cfg.flow.spin = parse_spin(root, "$");
  cfg.flow.alpha = top.num("alpha", 1.0);
  cfg.flow.dt = top.num("dt", 1e-3);
  cfg.flow.t_max = top.num("t_max", 1.0);
  cfg.flow.max_steps = static_cast<int>(top.integer("max_steps", 1000));
  cfg.flow.lambda = top.num("lambda", 0.0);
  cfg.flow.reproject = top.boolean("reproject", true);
  cfg.flow.convergence_eps = top.num("convergence_eps", 1e-8);
  cfg.flow.gradient_bound = top.num("gradient_bound", 100.0);
  cfg.flow.tangency_tol = top.num("tangency_tol", 1e-9);
  cfg.flow.kernel_block = parse_block(top.str("kernel_block", "(1,0)"), "$.kernel_block");
  if (root.contains("spinor")) {
    const Obj sp(root.at("spinor"), "$.spinor");
    sp.allow({"kind", "index"});
    cfg.spinor.kind = sp.str("kind", "none");
    if (cfg.spinor.kind != "none" && cfg.spinor.kind != "kernel") {
      schema_error("$.spinor.kind", "unknown spinor kind \"" + cfg.spinor.kind + "\"");
    }
    cfg.spinor.index = static_cast<int>(sp.integer("index", 0));
  }
  cfg.seed = parse_seed(root, "$");
  if (cfg.flow.alpha < 1.0) schema_error("$.alpha", "alpha must be >= 1");
  if (cfg.flow.dt <= 0.0) schema_error("$.dt", "dt must be positive");
  if (cfg.flow.max_steps < 0) schema_error("$.max_steps", "max_steps must be nonnegative");
  return cfg;
}

IndexConfig parse_index_config(const std::string& text) {
  const json root = parse_document(text);
  const Obj top(root, "$");
  top.allow({"deg_min", "deg_max", "genus_min", "genus_max"});
  IndexConfig cfg;
  cfg.deg_min = static_cast<int>(top.integer("deg_min", cfg.deg_min));
  cfg.deg_max = static_cast<int>(top.integer("deg_max", cfg.deg_max));
  cfg.genus_min = static_cast<int>(top.integer("genus_min", cfg.genus_min));
  cfg.genus_max = static_cast<int>(top.integer("genus_max", cfg.genus_max));
  if (cfg.deg_min > cfg.deg_max) schema_error("$.deg_min", "empty degree range");
  if (cfg.genus_min < 0) schema_error("$.genus_min", "genus must be nonnegative");
  if (cfg.genus_min > cfg.genus_max) schema_error("$.genus_min", "empty genus range");
  return cfg;
}

std::string to_json(const SpectrumConfig& cfg) {
  json j;
  j["domain"] = domain_json(cfg.domain);
  j["target"] = target_json(cfg.target);
  j["spin_structure"] = cfg.spin.label();
  j["map"] = map_json(cfg.map);
  j["block"] = block_label(cfg.block);
  j["lambda"] = cfg.lambda;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

std::string to_json(const FlowRunConfig& cfg) {
  json j;
  j["domain"] = domain_json(cfg.domain);
  j["target"] = target_json(cfg.target);
  j["spin_structure"] = cfg.flow.spin.label();
  j["map"] = map_json(cfg.map);
  j["spinor"] = json{{"kind", cfg.spinor.kind}, {"index", cfg.spinor.index}};
  j["alpha"] = cfg.flow.alpha;
  j["dt"] = cfg.flow.dt;
  j["t_max"] = cfg.flow.t_max;
  j["max_steps"] = cfg.flow.max_steps;
  j["lambda"] = cfg.flow.lambda;
  j["reproject"] = cfg.flow.reproject;
  j["convergence_eps"] = cfg.flow.convergence_eps;
  j["gradient_bound"] = cfg.flow.gradient_bound;
  j["tangency_tol"] = cfg.flow.tangency_tol;
  j["kernel_block"] = block_label(cfg.flow.kernel_block);
  j["seed"] = cfg.seed;
  return j.dump(2);
}

std::string to_json(const IndexConfig& cfg) {
  json j;
  j["deg_min"] = cfg.deg_min;
  j["deg_max"] = cfg.deg_max;
  j["genus_min"] = cfg.genus_min;
  j["genus_max"] = cfg.genus_max;
  return j.dump(2);
}

}  // namespace spinflow
