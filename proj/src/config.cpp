#include "sdapk/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace sdapk {

namespace {

using nlohmann::json;

// Key checker for one JSON object.
class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw ConfigError("unknown key '" + full(k) + "'");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const { return j_.at(k); }
  std::string full(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <class T>
  void get(const std::string& k, T& out) const {
    if (!has(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("bad value for '" + full(k) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config " : "'" + path_ + "' "; }
  const json& j_;
  std::string path_;
};

ApkParams read_params(const json& j, const std::string& path) {
  Section s(j, path, {"alpha", "beta", "gamma"});
  ApkParams p;
  s.get("alpha", p.alpha);
  s.get("beta", p.beta);
  s.get("gamma", p.gamma);
  if (!p.valid()) throw ConfigError("'" + path + "' is outside alpha>0, beta>0, gamma>alpha+beta-1");
  return p;
}

std::vector<ApkParams> read_tuples(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("'" + path + "' must be an array");
  std::vector<ApkParams> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_params(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

FilterProfile read_profile(const json& j, const std::string& path) {
  Section s(j, path, {"kind", "alpha_f", "p_f", "p", "epsilon", "dt", "gamma_filter", "approximate"});
  std::string kind = "cosine";
  s.get("kind", kind);
  FilterProfile f;
  if (kind == "cosine") {
    f = FilterProfile::cosine();
  } else if (kind == "exponential") {
    double a = 36.84, p = 2;
    s.get("alpha_f", a);
    s.get("p_f", p);
    f = FilterProfile::exponential(a, p);
  } else if (kind == "natural") {
    int p = 2;
    double eps = 0, dt = 0, g = 2;
    s.get("p", p);
    s.get("epsilon", eps);
    s.get("dt", dt);
    s.get("gamma_filter", g);
    f = FilterProfile::natural(p, eps, dt, g);
    s.get("approximate", f.approximate);
  } else if (kind == "identity" || kind == "none") {
    f = FilterProfile::identity();
  } else {
    throw ConfigError("unknown filter kind '" + kind + "' at '" + s.full("kind") + "'");
  }
  return f;
}

}  // namespace

Config parse_config(const json& root) {
  Config c;
  Section top(root, "", {"basis", "filter", "time", "mesh", "problem", "stability", "cond", "filter_error", "eoc",
                         "output"});

  if (top.has("basis")) {
    Section s(top.raw("basis"), "basis", {"alpha", "beta", "gamma", "N"});
    s.get("alpha", c.run.params.alpha);
    s.get("beta", c.run.params.beta);
    s.get("gamma", c.run.params.gamma);
    s.get("N", c.run.N);
    if (!c.run.params.valid()) throw ConfigError("'basis' is outside alpha>0, beta>0, gamma>alpha+beta-1");
    if (c.run.N < 1 || c.run.N > 10) throw ConfigError("'basis.N' must be in 1..10");
  }
  if (top.has("filter")) {
    Section s(top.raw("filter"), "filter",
              {"enabled", "p", "c", "gamma_filter", "use_indicator", "threshold", "approximate"});
    auto& f = c.run.filter;
    s.get("enabled", f.enabled);
    s.get("p", f.p);
    s.get("c", f.c);
    s.get("gamma_filter", f.gamma_filter);
    s.get("use_indicator", f.use_indicator);
    s.get("threshold", f.threshold);
    s.get("approximate", f.approximate);
    if (f.p < 1) throw ConfigError("'filter.p' must be >= 1");
    if (f.c < 0) throw ConfigError("'filter.c' must be >= 0");
  }
  if (top.has("time")) {
    Section s(top.raw("time"), "time", {"C_fix", "t_end", "blowup_bound", "tangential", "vertex_rule"});
    s.get("C_fix", c.run.C_fix);
    s.get("t_end", c.run.t_end);
    s.get("blowup_bound", c.run.blowup_bound);
    if (s.has("tangential")) {
      std::string m;
      s.get("tangential", m);
      if (m == "upwind") c.run.mode = TangentialMode::Upwind;
      else if (m == "own") c.run.mode = TangentialMode::Own;
      else throw ConfigError("'time.tangential' must be upwind or own");
    }
    if (s.has("vertex_rule")) {
      std::string m;
      s.get("vertex_rule", m);
      if (m == "conservative") c.run.vertex_rule = VertexRule::Conservative;
      else if (m == "selector") c.run.vertex_rule = VertexRule::Selector;
      else throw ConfigError("'time.vertex_rule' must be conservative or selector");
    }
    if (!(c.run.C_fix > 0)) throw ConfigError("'time.C_fix' must be positive");
    if (c.run.t_end < 0) throw ConfigError("'time.t_end' must be non-negative");
  }
  if (top.has("mesh")) {
    Section s(top.raw("mesh"), "mesh", {"n_blocks", "file"});
    s.get("n_blocks", c.mesh.n_blocks);
    s.get("file", c.mesh.file);
    if (c.mesh.file.empty() && c.mesh.n_blocks < 1) throw ConfigError("'mesh.n_blocks' must be >= 1");
  }
  if (top.has("problem")) {
    Section s(top.raw("problem"), "problem", {"name", "psi", "exact"});
    s.get("name", c.problem.name);
    s.get("psi", c.problem.psi);
    s.get("exact", c.problem.exact);
    if (c.problem.name != "advection" && c.problem.name != "burgers")
      throw ConfigError("'problem.name' must be advection or burgers");
  }
  c.run.with_exact = c.problem.exact;

  if (top.has("stability")) {
    Section s(top.raw("stability"), "stability",
              {"filtered", "tuples", "grid", "p", "c", "n_psi", "n_w", "h", "C_fix", "lambda_max", "gamma_filter",
               "approximate", "lagrange", "checkpoint"});
    auto& st = c.stability;
    s.get("filtered", st.filtered);
    if (s.has("tuples")) st.tuples = read_tuples(s.raw("tuples"), "stability.tuples");
    if (s.has("grid")) {
      Section g(s.raw("grid"), "stability.grid", {"ab_lo", "ab_hi", "ab_step", "gamma_max", "gamma_step"});
      double lo = 0.1, hi = 2, step = 0.1, gmax = 6, gstep = 0.1;
      g.get("ab_lo", lo);
      g.get("ab_hi", hi);
      g.get("ab_step", step);
      g.get("gamma_max", gmax);
      g.get("gamma_step", gstep);
      if (!(step > 0) || !(gstep > 0)) throw ConfigError("'stability.grid' steps must be positive");
      auto more = parameter_grid(lo, hi, step, gmax, gstep);
      st.tuples.insert(st.tuples.end(), more.begin(), more.end());
    }
    if (st.tuples.empty()) st.tuples.push_back(c.run.params);
    s.get("p", st.p);
    s.get("c", st.c);
    s.get("n_psi", st.n_psi);
    s.get("n_w", st.n_w);
    s.get("h", st.settings.h);
    s.get("C_fix", st.settings.C_fix);
    s.get("lambda_max", st.settings.lambda_max);
    s.get("gamma_filter", st.settings.gamma_filter);
    s.get("approximate", st.settings.approximate);
    s.get("lagrange", st.lagrange);
    s.get("checkpoint", st.checkpoint);
    if (st.n_psi < 1 || st.n_w < 1) throw ConfigError("'stability' case grid is empty");
    if (st.filtered && (st.p.empty() || st.c.empty())) throw ConfigError("'stability' filter grid is empty");
  }
  if (top.has("cond")) {
    Section s(top.raw("cond"), "cond", {"tuples", "N_min", "N_max", "lagrange_row"});
    if (s.has("tuples")) c.cond.tuples = read_tuples(s.raw("tuples"), "cond.tuples");
    s.get("N_min", c.cond.N_min);
    s.get("N_max", c.cond.N_max);
    s.get("lagrange_row", c.cond.lagrange_row);
    if (c.cond.N_min < 1 || c.cond.N_max > 10 || c.cond.N_min > c.cond.N_max)
      throw ConfigError("'cond' degree range must lie in 1..10");
  }
  if (top.has("filter_error")) {
    Section s(top.raw("filter_error"), "filter_error",
              {"function", "profile", "N", "grid", "quad_extra", "rate", "fit_from", "all_regions"});
    auto& fe = c.filter_error;
    s.get("function", fe.function);
    error_study_function(fe.function);
    if (s.has("profile")) fe.profile = read_profile(s.raw("profile"), "filter_error.profile");
    s.get("N", fe.N);
    s.get("grid", fe.options.grid);
    s.get("quad_extra", fe.options.quad_extra);
    s.get("rate", fe.options.rate);
    s.get("fit_from", fe.options.fit_from);
    s.get("all_regions", fe.options.all_regions);
    if (fe.N.empty()) throw ConfigError("'filter_error.N' is empty");
    for (int n : fe.N)
      if (n < 1 || n > 20) throw ConfigError("'filter_error.N' entries must be in 1..20");
    if (fe.options.grid < 10) throw ConfigError("'filter_error.grid' must be >= 10");
  }
  if (top.has("eoc")) {
    Section s(top.raw("eoc"), "eoc", {"n_blocks", "N", "psi"});
    s.get("n_blocks", c.eoc.n_blocks);
    s.get("N", c.eoc.N);
    s.get("psi", c.eoc.psi);
    if (c.eoc.n_blocks.empty() || c.eoc.N.empty()) throw ConfigError("'eoc' ladder is empty");
    for (int n : c.eoc.N)
      if (n < 1 || n > 10) throw ConfigError("'eoc.N' entries must be in 1..10");
    for (int b : c.eoc.n_blocks)
      if (b < 1) throw ConfigError("'eoc.n_blocks' entries must be >= 1");
  }
  if (top.has("output")) {
    Section s(top.raw("output"), "output", {"snapshot_every", "timing"});
    s.get("snapshot_every", c.output.snapshot_every);
    s.get("timing", c.output.timing);
    if (c.output.snapshot_every < 0) throw ConfigError("'output.snapshot_every' must be >= 0");
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

Field2 error_study_function(const std::string& name) {
  if (name == "sine") return [](double x, double y) { return std::sin(M_PI * (x + y)); };
  if (name == "quadratic") return [](double x, double y) { return x * x + x * y - y + 0.5; };
  throw ConfigError("unknown error-study function '" + name + "'");
}

Problem make_problem(const ProblemSpec& p) {
  if (p.name == "advection") return advection_problem(p.psi);
  if (p.name == "burgers") return burgers_problem();
  throw ConfigError("unknown problem '" + p.name + "'");
}

TriMesh make_mesh(const MeshSpec& m) {
  if (!m.file.empty()) return read_mesh_file(m.file);
  return build_pattern_grid(m.n_blocks);
}

}  // namespace sdapk
