#include "sdapk/vneumann.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sdapk/parallel.hpp"

namespace sdapk {

std::vector<StabilityCase> case_grid(int n_psi, int n_w) {
  if (n_psi < 1 || n_w < 1) throw std::invalid_argument("case grid needs at least one angle and wave number");
  std::vector<StabilityCase> out;
  auto lin = [](double a, double b, int n, int i) { return n == 1 ? a : a + (b - a) * i / (n - 1); };
  for (int i = 0; i < n_psi; ++i)
    for (int j = 0; j < n_w; ++j)
      for (int k = 0; k < n_w; ++k)
        out.push_back({lin(0, M_PI / 2, n_psi, i), lin(-M_PI, M_PI, n_w, j), lin(-M_PI, M_PI, n_w, k)});
  return out;
}

Connectivity connectivity_matrices(const RefNodeSets& nodes, TangentialMode mode, VertexRule rule) {
  const Point2 a{M_SQRT1_2, M_SQRT1_2};
  std::array<Point2, 3> nrm, tng;
  for (int e = 0; e < 3; ++e) {
    nrm[e] = ref_edge_normal(e);
    tng[e] = ref_edge_tangent(e);
  }
  // neighbour across reference edge e
  static const int edge_code[3] = {kBottom, kTop, kLeft};
  const std::size_t K = nodes.Kf();
  Connectivity cn;
  for (int nu = 0; nu < 2; ++nu) {
    cn.src[nu].assign(K, -1);
    for (auto& v : cn.M[nu]) v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  }
  for (std::size_t k = 0; k < K; ++k) {
    const FluxStencil s = linear_flux_stencil(nodes.tags[k], a, nrm, tng, mode, rule);
    for (int nu = 0; nu < 2; ++nu) {
      const double want = nu == 0 ? a.x : a.y;
      int found = -1;
      for (int j = 0; j < 3; ++j) {
        const double c = s.C(nu, j);
        if (std::abs(c) < 1e-12) continue;
        if (found >= 0 || std::abs(c - want) > 1e-12) {
          std::ostringstream os;
          os << "flux point " << k << " component " << nu << " is not a pure selection";
          throw std::runtime_error(os.str());
        }
        found = j;
      }
      if (found < 0) {
        std::ostringstream os;
        os << "flux point " << k << " component " << nu << " is unattributed";
        throw std::runtime_error(os.str());
      }
      const int code = found == 0 ? kOwn : edge_code[s.edges[found - 1]];
      if (code == kTop) throw std::runtime_error("flux sourced across the hypotenuse for an inflow from the lower left");
      cn.src[nu][k] = code;
      cn.M[nu][code](static_cast<Eigen::Index>(k)) = 1;
    }
  }
  return cn;
}

PhaseMatrices phase_matrices(const StabilityCase& c, const std::vector<Point2>& fp) {
  PhaseMatrices T;
  T.left.resize(static_cast<Eigen::Index>(fp.size()));
  T.bottom.resize(static_cast<Eigen::Index>(fp.size()));
  const cplx I(0, 1);
  for (std::size_t k = 0; k < fp.size(); ++k) {
    const double xi = fp[k].x, eta = fp[k].y;
    T.left(k) = std::exp(I * (-c.wx * (xi + eta) + c.wy * (xi - eta)));
    T.bottom(k) = std::exp(I * (c.wx * (eta - xi) - c.wy * (xi + eta)));
  }
  return T;
}

StabilityOps stability_ops(const DiscretizationOps& ops, bool lagrange) {
  StabilityOps so;
  if (lagrange) {
    so.Bxi = ops.DxiLag;
    so.Beta = ops.DetaLag;
  } else {
    so.Bxi = ops.Dxi * ops.Vinv;
    so.Beta = ops.Deta * ops.Vinv;
  }
  so.E = ops.E;
  so.conn = connectivity_matrices(ops.nodes);
  so.flux_points = ops.nodes.flux_points;
  return so;
}

std::vector<double> stability_filter_sigma(const DiscretizationOps& ops, const FilteredStabilitySettings& s) {
  const double gf = std::isnan(s.gamma_filter) ? ops.params.gamma : s.gamma_filter;
  const double eps = viscosity_strength(s.c, s.h, ops.N, s.p);
  const double dt = time_step(s.C_fix, ops.N, s.h, s.lambda_max);
  FilterProfile prof = FilterProfile::natural(s.p, eps, dt, gf);
  prof.approximate = s.approximate;
  return build_filter_matrix(ApkBasis(ops.params, ops.N + 1), prof);
}

StabilityOps filtered_stability_ops(const DiscretizationOps& ops, const FilteredStabilitySettings& s) {
  StabilityOps so;
  const FilteredOps f = filtered_operators(ops, stability_filter_sigma(ops, s));
  so.Bxi = f.Bxi;
  so.Beta = f.Beta;
  so.E = ops.E;
  so.conn = connectivity_matrices(ops.nodes);
  so.flux_points = ops.nodes.flux_points;
  return so;
}

Eigen::MatrixXcd assemble_S(const StabilityCase& c, const StabilityOps& so) {
  const PhaseMatrices T = phase_matrices(c, so.flux_points);
  const Eigen::Index K = static_cast<Eigen::Index>(so.flux_points.size());
  Eigen::VectorXcd combo[2];
  for (int nu = 0; nu < 2; ++nu) {
    combo[nu].resize(K);
    for (Eigen::Index k = 0; k < K; ++k)
      combo[nu](k) = so.conn.M[nu][kOwn](k) + so.conn.M[nu][kLeft](k) * T.left(k) +
                     so.conn.M[nu][kBottom](k) * T.bottom(k);
  }
  const Eigen::MatrixXcd A = std::cos(c.psi) * (so.Bxi.cast<cplx>() * combo[0].asDiagonal()) +
                             std::sin(c.psi) * (so.Beta.cast<cplx>() * combo[1].asDiagonal());
  return -A * so.E.cast<cplx>();
}

EigMax max_real_eig(const Eigen::MatrixXcd& S) {
  const std::vector<cplx> ev = eigenvalues(S);
  EigMax best{-std::numeric_limits<double>::infinity(), {}};
  for (const cplx& z : ev)
    if (z.real() > best.L) best = {z.real(), z};
  return best;
}

StabilityResult stability_L(const StabilityOps& so, const std::vector<StabilityCase>& cases) {
  StabilityResult r;
  for (const auto& c : cases) {
    const EigMax m = max_real_eig(assemble_S(c, so));
    if (m.L > r.L) {
      r.L = m.L;
      r.argmax = c;
      r.lambda = m.lambda;
    }
  }
  return r;
}

std::vector<ApkParams> parameter_grid(double ab_lo, double ab_hi, double ab_step, double gamma_max,
                                      double gamma_step) {
  if (ab_step <= 0 || gamma_step <= 0) throw std::invalid_argument("grid steps must be positive");
  const int nab = static_cast<int>(std::floor((ab_hi - ab_lo) / ab_step + 1e-9)) + 1;
  std::vector<ApkParams> out;
  for (int i = 0; i < nab; ++i)
    for (int j = 0; j < nab; ++j) {
      const double a = ab_lo + i * ab_step, b = ab_lo + j * ab_step;
      const int ng = static_cast<int>(std::floor((gamma_max - a - b) / gamma_step + 1e-9)) + 1;
      for (int k = 0; k < ng; ++k) out.push_back({a, b, a + b + k * gamma_step});
    }
  return out;
}

std::string sweep_csv_header() { return "alpha,beta,gamma,p,c,L,argmax_psi,argmax_wx,argmax_wy"; }

std::string sweep_csv_line(const SweepRow& r) {
  return fmt::format("{:.6g},{:.6g},{:.6g},{},{:.6g},{:.9e},{:.6f},{:.6f},{:.6f}", r.alpha, r.beta, r.gamma, r.p, r.c,
                     r.L, r.psi, r.wx, r.wy);
}

namespace {

using RowKey = std::tuple<std::string, std::string, std::string, int, std::string>;

RowKey key_of(double a, double b, double g, int p, double c) {
  return {fmt::format("{:.6g}", a), fmt::format("{:.6g}", b), fmt::format("{:.6g}", g), p, fmt::format("{:.6g}", c)};
}

std::map<RowKey, SweepRow> read_checkpoint(const std::string& path) {
  std::map<RowKey, SweepRow> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'a') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    SweepRow r;
    if (!(is >> r.alpha >> r.beta >> r.gamma >> r.p >> r.c >> r.L >> r.psi >> r.wx >> r.wy)) continue;  // torn line
    done[key_of(r.alpha, r.beta, r.gamma, r.p, r.c)] = r;
  }
  return done;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  if (spec.cases.empty()) throw std::invalid_argument("empty case grid");
  if (spec.tuples.empty()) throw std::invalid_argument("empty parameter grid");
  struct Task {
    ApkParams prm;
    int p;
    double c;
  };
  std::vector<Task> tasks;
  for (const auto& t : spec.tuples) {
    if (!spec.filtered) {
      tasks.push_back({t, 0, 0});
      continue;
    }
    for (int p : spec.p_values)
      for (double c : spec.c_values) tasks.push_back({t, p, c});
  }

  std::map<RowKey, SweepRow> done;
  std::ofstream ck;
  if (!spec.checkpoint.empty()) {
    done = read_checkpoint(spec.checkpoint);
    const bool fresh = done.empty();
    ck.open(spec.checkpoint, fresh ? std::ios::trunc : std::ios::app);
    if (!ck) throw std::runtime_error("cannot open checkpoint " + spec.checkpoint);
    if (fresh) ck << sweep_csv_header() << '\n' << std::flush;
  }

  std::vector<SweepRow> rows(tasks.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    auto it = done.find(key_of(t.prm.alpha, t.prm.beta, t.prm.gamma, t.p, t.c));
    if (it != done.end()) {
      rows[i] = it->second;
    } else {
      todo.push_back(i);
    }
  }

  std::mutex mu;
  parallel_for(todo.size(), [&](std::size_t q) {
    const Task& t = tasks[todo[q]];
    const DiscretizationOps ops = build_ops(t.prm, spec.N);
    StabilityOps so;
    if (spec.filtered) {
      FilteredStabilitySettings s = spec.base;
      s.p = t.p;
      s.c = t.c;
      so = filtered_stability_ops(ops, s);
    } else {
      so = stability_ops(ops, spec.lagrange);
    }
    const StabilityResult r = stability_L(so, spec.cases);
    SweepRow row{t.prm.alpha, t.prm.beta, t.prm.gamma, t.p, t.c, r.L, r.argmax.psi, r.argmax.wx, r.argmax.wy};
    rows[todo[q]] = row;
    if (ck.is_open()) {
      std::lock_guard<std::mutex> lock(mu);
      ck << sweep_csv_line(row) << '\n' << std::flush;
    }
  });
  return rows;
}

}  // namespace sdapk
