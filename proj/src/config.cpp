#include "wplab/config.hpp"

#include <toml.hpp>

#include "wplab/parallel.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace wplab {

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& what) { throw ConfigError(source + ": " + what); }

void reject_unknown(const toml::table& t, const std::set<std::string>& allowed, const std::string& where,
                    const std::string& source) {
  for (const auto& [key, node] : t) {
    std::string k(key.str());
    if (!allowed.count(k)) fail(source, "unknown key '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

class Reader {
 public:
  Reader(const toml::table& t, std::string where, std::string source)
      : t_(t), where_(std::move(where)), source_(std::move(source)) {}

  std::string name(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void number(const std::string& key, double& out) const {
    const toml::node* n = t_.get(key);
    if (!n) return;
    if (auto v = n->value<double>()) {
      out = *v;
      return;
    }
    fail(source_, "'" + name(key) + "' must be a number");
  }

  template <class Int>
  void integer(const std::string& key, Int& out) const {
    const toml::node* n = t_.get(key);
    if (!n) return;
    if (!n->is_integer()) fail(source_, "'" + name(key) + "' must be an integer");
    const auto v = n->as_integer()->get();
    if (v < 0 && std::is_unsigned_v<Int>) fail(source_, "'" + name(key) + "' must be non-negative");
    out = static_cast<Int>(v);
  }

  void string(const std::string& key, std::string& out) const {
    const toml::node* n = t_.get(key);
    if (!n) return;
    if (!n->is_string()) fail(source_, "'" + name(key) + "' must be a string");
    out = n->as_string()->get();
  }

  template <class T>
  void list(const std::string& key, std::vector<T>& out) const {
    const toml::node* n = t_.get(key);
    if (!n) return;
    const toml::array* a = n->as_array();
    if (!a) fail(source_, "'" + name(key) + "' must be an array");
    std::vector<T> v;
    for (const auto& e : *a) {
      if constexpr (std::is_integral_v<T>) {
        if (!e.is_integer()) fail(source_, "'" + name(key) + "' must hold integers");
        v.push_back(static_cast<T>(e.as_integer()->get()));
      } else {
        auto d = e.value<double>();
        if (!d) fail(source_, "'" + name(key) + "' must hold numbers");
        v.push_back(*d);
      }
    }
    out = std::move(v);
  }

  /// A complex number written as [re, im].
  void complex(const std::string& key, cplx& out) const {
    std::vector<double> v;
    list(key, v);
    if (!t_.get(key)) return;
    if (v.size() != 2) fail(source_, "'" + name(key) + "' must be [re, im]");
    out = {v[0], v[1]};
  }

 private:
  const toml::table& t_;
  std::string where_, source_;
};

const toml::table* section(const toml::table& root, const std::string& key, const std::string& source) {
  const toml::node* n = root.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) fail(source, "'" + key + "' must be a table");
  return n->as_table();
}

bool power_of_two_in_range(int n) { return n >= 16 && n <= 1024 && (n & (n - 1)) == 0; }

std::string number_text(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ValidationSettings RunConfig::validation_settings() const {
  ValidationSettings v = validation;
  v.seed = seed;
  v.threads = resolve_threads(threads);
  v.fd_step = fd_step;
  return v;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " (line " << e.source().begin.line << ")";
    fail(source, os.str());
  }
  reject_unknown(root, {"schema", "seed", "threads", "out", "surface", "solver", "point", "validate", "scaling"}, "",
                 source);
  RunConfig c;
  Reader top(root, "", source);
  if (!root.get("schema")) fail(source, "missing 'schema'");
  top.integer("schema", c.schema);
  if (c.schema != kConfigSchema) fail(source, "unsupported schema " + std::to_string(c.schema));
  top.integer("seed", c.seed);
  top.integer("threads", c.threads);
  top.string("out", c.out);

  if (const toml::table* s = section(root, "surface", source)) {
    reject_unknown(*s, {"kind", "resolution", "ell", "tau"}, "surface", source);
    Reader r(*s, "surface", source);
    std::string kind = to_string(c.surface.kind);
    r.string("kind", kind);
    try {
      c.surface.kind = surface_kind_from_string(kind);
    } catch (const DomainError& e) {
      fail(source, e.what());
    }
    r.integer("resolution", c.surface.resolution);
    r.number("ell", c.surface.params.ell);
    r.complex("tau", c.surface.params.tau);
  }
  if (const toml::table* s = section(root, "solver", source)) {
    reject_unknown(*s, {"frame_tol", "curvature_tol", "fd_step"}, "solver", source);
    Reader r(*s, "solver", source);
    r.number("frame_tol", c.frame_tol);
    r.number("curvature_tol", c.curvature_tol);
    r.number("fd_step", c.fd_step);
  }
  if (const toml::table* s = section(root, "point", source)) {
    reject_unknown(*s, {"t"}, "point", source);
    std::vector<double> flat;
    Reader(*s, "point", source).list("t", flat);
    if (flat.size() % 2) fail(source, "'point.t' must list [re, im] pairs");
    c.point.clear();
    for (std::size_t i = 0; i < flat.size(); i += 2) c.point.emplace_back(flat[i], flat[i + 1]);
  }
  if (const toml::table* s = section(root, "validate", source)) {
    reject_unknown(*s,
                   {"checks", "refinement", "greens_resolution", "random_fields", "curvature_resolution",
                    "metric_resolution", "frame_resolution", "collar_lengths", "collar_resolution", "wp_resolution",
                    "wp_fine_resolution", "pinch_heights", "pinch_resolution"},
                   "validate", source);
    Reader r(*s, "validate", source);
    ValidationSettings& v = c.validation;
    r.list("checks", c.checks);
    r.list("refinement", v.refinement);
    r.integer("greens_resolution", v.greens_resolution);
    r.integer("random_fields", v.random_fields);
    r.integer("curvature_resolution", v.curvature_resolution);
    r.integer("metric_resolution", v.metric_resolution);
    r.integer("frame_resolution", v.frame_resolution);
    r.list("collar_lengths", v.collar_lengths);
    r.integer("collar_resolution", v.collar_resolution);
    r.integer("wp_resolution", v.wp_resolution);
    r.integer("wp_fine_resolution", v.wp_fine_resolution);
    r.list("pinch_heights", v.pinch_heights);
    r.integer("pinch_resolution", v.pinch_resolution);
  }
  if (const toml::table* s = section(root, "scaling", source)) {
    reject_unknown(*s, {"family", "values", "resolution"}, "scaling", source);
    Reader r(*s, "scaling", source);
    r.string("family", c.scaling.family);
    r.list("values", c.scaling.values);
    r.integer("resolution", c.scaling.resolution);
  }
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    fail(source, e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

void validate_config(const RunConfig& c) {
  auto resolution = [](const std::string& name, int n) {
    if (!power_of_two_in_range(n)) throw ConfigError("'" + name + "' must be a power of two in [16, 1024]");
  };
  auto positive = [](const std::string& name, double v) {
    if (!(v > 0)) throw ConfigError("'" + name + "' must be positive");
  };
  if (c.threads < 0) throw ConfigError("'threads' must be non-negative");
  if (c.out.empty()) throw ConfigError("'out' must not be empty");
  resolution("surface.resolution", c.surface.resolution);
  positive("surface.ell", c.surface.params.ell);
  positive("Im surface.tau", c.surface.params.tau.imag());
  positive("solver.frame_tol", c.frame_tol);
  positive("solver.curvature_tol", c.curvature_tol);
  positive("solver.fd_step", c.fd_step);
  for (int id : c.checks)
    if (id < 1 || id > 9) throw ConfigError("'validate.checks' entries must be in 1..9");
  const ValidationSettings& v = c.validation;
  if (v.refinement.size() < 2) throw ConfigError("'validate.refinement' needs at least two resolutions");
  for (int n : v.refinement) resolution("validate.refinement", n);
  resolution("validate.greens_resolution", v.greens_resolution);
  resolution("validate.curvature_resolution", v.curvature_resolution);
  resolution("validate.metric_resolution", v.metric_resolution);
  resolution("validate.frame_resolution", v.frame_resolution);
  resolution("validate.collar_resolution", v.collar_resolution);
  resolution("validate.wp_resolution", v.wp_resolution);
  resolution("validate.wp_fine_resolution", v.wp_fine_resolution);
  resolution("validate.pinch_resolution", v.pinch_resolution);
  if (v.random_fields < 1) throw ConfigError("'validate.random_fields' must be at least 1");
  if (v.collar_lengths.size() < 3) throw ConfigError("'validate.collar_lengths' needs at least three lengths");
  for (double l : v.collar_lengths) positive("validate.collar_lengths", l);
  if (v.pinch_heights.size() < 3) throw ConfigError("'validate.pinch_heights' needs at least three heights");
  for (double h : v.pinch_heights) positive("validate.pinch_heights", h);
  if (c.scaling.family != "collar" && c.scaling.family != "torus")
    throw ConfigError("'scaling.family' must be \"collar\" or \"torus\"");
  if (c.scaling.values.size() < 3) throw ConfigError("'scaling.values' needs at least three entries");
  for (double x : c.scaling.values) positive("scaling.values", x);
  resolution("scaling.resolution", c.scaling.resolution);
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.resolution) {
    c.surface.resolution = *o.resolution;
    c.scaling.resolution = *o.resolution;
  }
  if (o.out) c.out = *o.out;
  validate_config(c);
}

std::string canonical_form(const RunConfig& c) {
  std::ostringstream os;
  auto line = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  auto num = [&](const std::string& k, double v) { line(k, number_text(v)); };
  auto nums = [&](const std::string& k, const auto& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + number_text(static_cast<double>(xs[i]));
    line(k, s + "]");
  };
  // out and threads do not change results, so they stay out of the hash
  line("schema", std::to_string(c.schema));
  line("seed", std::to_string(c.seed));
  line("surface.kind", to_string(c.surface.kind));
  line("surface.resolution", std::to_string(c.surface.resolution));
  num("surface.ell", c.surface.params.ell);
  nums("surface.tau", std::vector<double>{c.surface.params.tau.real(), c.surface.params.tau.imag()});
  num("solver.frame_tol", c.frame_tol);
  num("solver.curvature_tol", c.curvature_tol);
  num("solver.fd_step", c.fd_step);
  std::vector<double> flat;
  for (cplx z : c.point) {
    flat.push_back(z.real());
    flat.push_back(z.imag());
  }
  nums("point.t", flat);
  const ValidationSettings& v = c.validation;
  nums("validate.checks", c.checks);
  nums("validate.refinement", v.refinement);
  line("validate.greens_resolution", std::to_string(v.greens_resolution));
  line("validate.random_fields", std::to_string(v.random_fields));
  line("validate.curvature_resolution", std::to_string(v.curvature_resolution));
  line("validate.metric_resolution", std::to_string(v.metric_resolution));
  line("validate.frame_resolution", std::to_string(v.frame_resolution));
  nums("validate.collar_lengths", v.collar_lengths);
  line("validate.collar_resolution", std::to_string(v.collar_resolution));
  line("validate.wp_resolution", std::to_string(v.wp_resolution));
  line("validate.wp_fine_resolution", std::to_string(v.wp_fine_resolution));
  nums("validate.pinch_heights", v.pinch_heights);
  line("validate.pinch_resolution", std::to_string(v.pinch_resolution));
  line("scaling.family", c.scaling.family);
  nums("scaling.values", c.scaling.values);
  line("scaling.resolution", std::to_string(c.scaling.resolution));
  return os.str();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_form(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wplab
