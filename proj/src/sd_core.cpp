#include "sdapk/sd_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sdapk/parallel.hpp"

namespace sdapk {

MatrixXd apk_vandermonde(const ApkBasis& basis, const std::vector<Point2>& pts) {
  MatrixXd V(pts.size(), basis.size());
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (std::size_t k = 0; k < basis.size(); ++k) V(j, k) = apk_jet(basis.params(), basis.at(k), pts[j].x, pts[j].y).v;
  return V;
}

namespace {

void grad_matrices(const ApkBasis& basis, const std::vector<Point2>& pts, MatrixXd& Dx, MatrixXd& Dy) {
  Dx.resize(pts.size(), basis.size());
  Dy.resize(pts.size(), basis.size());
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Jet2 a = apk_jet(basis.params(), basis.at(k), pts[j].x, pts[j].y);
      Dx(j, k) = a.x;
      Dy(j, k) = a.y;
    }
}

double cond2(const MatrixXd& V) {
  Eigen::JacobiSVD<MatrixXd> svd(V);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

MatrixXd checked_inverse(const MatrixXd& V, const char* what) {
  Eigen::JacobiSVD<MatrixXd> svd(V);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) < 1e-14 * s(0)) {
    std::ostringstream os;
    os << what << ": singular Vandermonde (smallest singular value " << s(s.size() - 1) << ")";
    throw std::runtime_error(os.str());
  }
  return V.partialPivLu().inverse();
}

const ApkParams kDubiner{1, 1, 2};

}  // namespace

DiscretizationOps build_ops(const ApkParams& prm, int N) {
  prm.validate();
  DiscretizationOps o;
  o.N = N;
  o.params = prm;
  o.nodes = build_ref_nodes(N);
  const auto& sp = o.nodes.solution_points;
  const auto& fp = o.nodes.flux_points;

  const ApkBasis fb(prm, N + 1);
  o.V = apk_vandermonde(fb, fp);
  o.Vinv = checked_inverse(o.V, "build_ops");
  o.cond = cond2(o.V);
  grad_matrices(fb, sp, o.Dxi, o.Deta);

  const ApkBasis db(kDubiner, N + 1);
  const MatrixXd Vd = apk_vandermonde(db, fp);
  MatrixXd Ddx, Ddy;
  grad_matrices(db, sp, Ddx, Ddy);
  const MatrixXd Vdi = checked_inverse(Vd, "build_ops");
  o.DxiLag = Ddx * Vdi;
  o.DetaLag = Ddy * Vdi;

  const ApkBasis ds(kDubiner, N);
  o.E = apk_vandermonde(ds, fp) * checked_inverse(apk_vandermonde(ds, sp), "build_ops");
  o.Vsol_inv = checked_inverse(apk_vandermonde(ApkBasis(prm, N), sp), "build_ops");
  return o;
}

double vandermonde_condition(const ApkParams& prm, int N) {
  const ApkBasis fb(prm, N + 1);
  return cond2(apk_vandermonde(fb, lobatto_nodes_triangle(N + 1)));
}

double lagrange_reference_condition(int N) {
  const std::vector<Point2> pts = lobatto_nodes_triangle(N + 1);
  const int d = N + 1;
  MatrixXd V(pts.size(), pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    int k = 0;
    for (int deg = 0; deg <= d; ++deg)
      for (int b = 0; b <= deg; ++b) V(j, k++) = std::pow(pts[j].x, deg - b) * std::pow(pts[j].y, b);
  }
  return cond2(V);
}

Point2 Flux::operator()(double u) const {
  if (kind == Kind::General) return general(u);
  return {c2.x * u * u + c1.x * u + c0.x, c2.y * u * u + c1.y * u + c0.y};
}

Flux Flux::linear(Point2 a) {
  Flux f;
  f.c1 = a;
  return f;
}

Flux Flux::burgers() {
  Flux f;
  f.c2 = {0.5, 0.5};
  return f;
}

Flux Flux::from_function(std::function<Point2(double)> fn, int samples) {
  Flux f;
  f.kind = Kind::General;
  f.general = std::move(fn);
  f.samples = std::max(samples, 3);
  return f;
}

GodunovResult godunov_flux(double u_minus, double u_plus, Point2 n, const Flux& F) {
  auto g = [&](double u) { return dot(F(u), n); };
  GodunovResult best{g(u_minus), u_minus, true};
  if (u_minus == u_plus) return best;
  const bool want_min = u_minus <= u_plus;
  auto better = [&](double v) { return want_min ? v < best.H : v > best.H; };
  auto consider = [&](double u) {
    const double v = g(u);
    if (better(v)) best = {v, u, false};
  };
  consider(u_plus);
  const double lo = std::min(u_minus, u_plus), hi = std::max(u_minus, u_plus);
  if (F.kind == Flux::Kind::Quadratic) {
    const double q2 = dot(F.c2, n), q1 = dot(F.c1, n);
    if (q2 != 0) {
      const double us = -q1 / (2 * q2);
      if (us > lo && us < hi) consider(us);
    }
    return best;
  }
  // general flux: sample, then golden-section refinement around the best sample
  const int ns = F.samples;
  double bu = lo, bv = g(lo);
  int bi = 0;
  for (int i = 1; i < ns - 1; ++i) {
    const double u = lo + (hi - lo) * i / (ns - 1);
    const double v = g(u);
    if (want_min ? v < bv : v > bv) {
      bu = u;
      bv = v;
      bi = i;
    }
  }
  if (bi > 0) {
    double a = lo + (hi - lo) * (bi - 1) / (ns - 1), b = lo + (hi - lo) * (bi + 1) / (ns - 1);
    const double r = 0.5 * (std::sqrt(5.0) - 1);
    auto key = [&](double u) { return want_min ? g(u) : -g(u); };
    double c = b - r * (b - a), d = a + r * (b - a), fc = key(c), fd = key(d);
    for (int it = 0; it < 200 && b - a > 1e-14 * (1 + std::abs(a)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = key(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = key(d);
      }
    }
    bu = 0.5 * (a + b);
    consider(bu);
  }
  return best;
}

Point2 edge_numerical_flux(double u_own, double u_nb, Point2 n, Point2 t, const Flux& F, TangentialMode mode) {
  const GodunovResult G = godunov_flux(u_own, u_nb, n, F);
  if (G.own) return F(u_own);
  if (mode == TangentialMode::Upwind) return F(G.u_star);
  return G.H * n + dot(F(u_own), t) * t;
}

namespace {

Point2 solve_normals(Point2 na, double ha, Point2 nb, double hb) {
  const double det = na.x * nb.y - na.y * nb.x;
  if (std::abs(det) < 1e-12) throw std::runtime_error("vertex flux: parallel edge normals");
  return {(ha * nb.y - na.y * hb) / det, (na.x * hb - ha * nb.x) / det};
}

}  // namespace

Point2 vertex_numerical_flux(double u_own, double u_a, Point2 n_a, Point2 t_a, double u_b, Point2 n_b, Point2 t_b,
                             const Flux& F, VertexRule rule) {
  const GodunovResult Ga = godunov_flux(u_own, u_a, n_a, F);
  const GodunovResult Gb = godunov_flux(u_own, u_b, n_b, F);
  if (rule == VertexRule::Conservative) return solve_normals(n_a, Ga.H, n_b, Gb.H);
  if (!Ga.own && !Gb.own) return solve_normals(n_a, Ga.H, n_b, Gb.H);
  const Point2 Fo = F(u_own);
  if (!Ga.own) return Ga.H * n_a + dot(Fo, t_a) * t_a;
  if (!Gb.own) return Gb.H * n_b + dot(Fo, t_b) * t_b;
  return Fo;
}

FluxStencil linear_flux_stencil(const FluxPointTag& tag, Point2 a, const std::array<Point2, 3>& normals,
                                const std::array<Point2, 3>& tangents, TangentialMode mode, VertexRule rule) {
  FluxStencil s;
  int ne = 0;
  for (int e = 0; e < 3; ++e)
    if (tag.on_edge[e]) s.edges[ne++] = e;
  auto put = [&](int j, Point2 v) {
    s.C(0, j) += v.x;
    s.C(1, j) += v.y;
  };
  if (ne == 0) {
    put(0, a);
    return s;
  }
  if (ne == 1) {
    const Point2 n = normals[s.edges[0]], t = tangents[s.edges[0]];
    const double an = dot(a, n);
    if (an >= 0) {
      put(0, a);
    } else if (mode == TangentialMode::Upwind) {
      put(1, a);
    } else {
      put(1, an * n);
      put(0, dot(a, t) * t);
    }
    return s;
  }
  const Point2 na = normals[s.edges[0]], nb = normals[s.edges[1]];
  const double ana = dot(a, na), anb = dot(a, nb);
  const bool act_a = ana < 0, act_b = anb < 0;
  if (rule == VertexRule::Conservative || (act_a && act_b)) {
    // F = M^{-1} (ana u_a or own, anb u_b or own)
    put(act_a ? 1 : 0, solve_normals(na, ana, nb, 0));
    put(act_b ? 2 : 0, solve_normals(na, 0, nb, anb));
    return s;
  }
  if (act_a || act_b) {
    const int j = act_a ? 1 : 2;
    const Point2 n = act_a ? na : nb, t = tangents[s.edges[act_a ? 0 : 1]];
    put(j, dot(a, n) * n);
    put(0, dot(a, t) * t);
    return s;
  }
  put(0, a);
  return s;
}

FilteredOps filtered_operators(const DiscretizationOps& ops, const std::vector<double>& sigma) {
  const Eigen::Map<const VectorXd> s(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
  const MatrixXd MV = s.asDiagonal() * ops.Vinv;
  return {ops.Dxi * MV, ops.Deta * MV};
}

VectorXd cell_residual(const DiscretizationOps& ops, const AffineMap& T, const VectorXd& F1, const VectorXd& F2,
                       const FilteredOps* filter) {
  const VectorXd G1 = T.xi_x() * F1 + T.xi_y() * F2;
  const VectorXd G2 = T.eta_x() * F1 + T.eta_y() * F2;
  if (filter) return -(filter->Bxi * G1 + filter->Beta * G2);
  return -(ops.DxiLag * G1 + ops.DetaLag * G2);
}

double indicator_value(const DiscretizationOps& ops, const VectorXd& u) {
  const VectorXd c = ops.Vsol_inv * u;
  const double all = c.squaredNorm();
  if (all == 0) return -std::numeric_limits<double>::infinity();
  const Eigen::Index top = ops.N + 1;
  return std::log10(c.tail(top).squaredNorm() / all);
}

double default_indicator_threshold(int N) { return -4.0 * std::log10(static_cast<double>(N)); }

bool shock_indicator(const DiscretizationOps& ops, const VectorXd& u, double threshold) {
  return indicator_value(ops, u) > threshold;
}

double time_step(double C_fix, int N, double h, double lambda_max) {
  return C_fix / ((N + 1.0) * (N + 1.0)) * h / lambda_max;
}

void rk_step(MatrixXd& u, double t, double dt, const RhsFn& rhs) {
  // Carpenter-Kennedy five-stage, fourth-order, 2N-storage coefficients
  static const double A[5] = {0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
                              -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0};
  static const double B[5] = {1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0,
                              1720146321549.0 / 2090206949498.0, 3134564353537.0 / 4481467310338.0,
                              2277821191437.0 / 14882151754819.0};
  static const double C[5] = {0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363183890.0,
                              2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0};
  MatrixXd k = MatrixXd::Zero(u.rows(), u.cols());
  MatrixXd r(u.rows(), u.cols());
  for (int s = 0; s < 5; ++s) {
    rhs(u, t + C[s] * dt, r);
    k = A[s] * k + dt * r;
    u += B[s] * k;
  }
}

Problem advection_problem(double psi) {
  Problem p;
  p.name = "advection";
  const Point2 a{std::cos(psi), std::sin(psi)};
  p.flux = Flux::linear(a);
  p.u0 = [](double x, double y) { return std::sin(M_PI * (x + y)); };
  p.exact = [a](double x, double y, double t) { return std::sin(M_PI * (x - a.x * t + y - a.y * t)); };
  p.lambda_max = 1.0;
  return p;
}

Problem burgers_problem() {
  Problem p;
  p.name = "burgers";
  p.flux = Flux::burgers();
  p.u0 = [](double x, double y) { return 0.25 + 0.5 * std::sin(M_PI * (x + y)); };
  p.lambda_max = std::sqrt(2.0) * 0.75;
  return p;
}

SdSolver::SdSolver(const TriMesh& mesh, Problem problem, RunConfig cfg)
    : mesh_(mesh), problem_(std::move(problem)), cfg_(cfg), ops_(build_ops(cfg.params, cfg.N)) {
  if (cfg_.C_fix <= 0) throw std::invalid_argument("C_fix must be positive");
  if (mesh_.size() == 0) throw std::invalid_argument("empty mesh");
  const double h = mesh_.min_shortest_edge();
  dt_ = time_step(cfg_.C_fix, cfg_.N, h, problem_.lambda_max);
  if (cfg_.t_end > 0) dt_ = cfg_.t_end / std::ceil(cfg_.t_end / dt_ - 1e-9);

  const std::size_t nc = mesh_.size();
  normals_.resize(nc);
  tangents_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c)
    for (int e = 0; e < 3; ++e) {
      const Point2 d = mesh_.cell_xy[c][(e + 1) % 3] - mesh_.cell_xy[c][e];
      const double len = std::sqrt(dot(d, d));
      tangents_[c][e] = (1.0 / len) * d;
      normals_[c][e] = {d.y / len, -d.x / len};
    }

  const auto& fp = ops_.nodes.flux_points;
  const auto& tags = ops_.nodes.tags;
  const std::size_t Kf = fp.size();
  nb_index_.assign(nc, std::vector<std::array<int, 3>>(Kf, {-1, -1, -1}));
  for (std::size_t c = 0; c < nc; ++c) {
    const double tol = 1e-8 * mesh_.shortest_edge(c);
    for (std::size_t k = 0; k < Kf; ++k) {
      if (tags[k].interior()) continue;
      const Point2 P = mesh_.maps[c].to_phys(fp[k]);
      for (int e = 0; e < 3; ++e) {
        if (!tags[k].on_edge[e]) continue;
        const NeighborLink& L = mesh_.nbr[c][e];
        for (std::size_t q = 0; q < Kf; ++q) {
          if (!tags[q].on_edge[L.edge]) continue;
          const Point2 Q = mesh_.maps[L.cell].to_phys(fp[q]) + L.shift;
          const Point2 d = Q - P;
          if (std::abs(d.x) < tol && std::abs(d.y) < tol) {
            nb_index_[c][k][e] = static_cast<int>(q);
            break;
          }
        }
        if (nb_index_[c][k][e] < 0) {
          std::ostringstream os;
          os << "flux point " << k << " of cell " << c << " has no partner across edge " << e;
          throw std::runtime_error(os.str());
        }
      }
    }
  }

  if (cfg_.filter.enabled) {
    const double gf = std::isnan(cfg_.filter.gamma_filter) ? cfg_.params.gamma : cfg_.filter.gamma_filter;
    const ApkBasis fb(cfg_.params, cfg_.N + 1);
    std::map<long long, int> groups;
    filter_group_.assign(nc, 0);
    for (std::size_t c = 0; c < nc; ++c) {
      const double hc = mesh_.shortest_edge(c);
      const long long key = std::llround(hc * 1e12);
      auto it = groups.find(key);
      if (it == groups.end()) {
        const double eps = viscosity_strength(cfg_.filter.c, hc, cfg_.N, cfg_.filter.p);
        FilterProfile prof = FilterProfile::natural(cfg_.filter.p, eps, dt_, gf);
        prof.approximate = cfg_.filter.approximate;
        filtered_.push_back(filtered_operators(ops_, build_filter_matrix(fb, prof)));
        it = groups.emplace(key, static_cast<int>(filtered_.size()) - 1).first;
      }
      filter_group_[c] = it->second;
    }
  }
  threshold_ = std::isnan(cfg_.filter.threshold) ? default_indicator_threshold(cfg_.N) : cfg_.filter.threshold;

  quad_ = weighted_quadrature(ApkParams{1, 1, 2}, 2 * cfg_.N + 4);
  std::vector<Point2> qp(quad_.w.size());
  for (std::size_t i = 0; i < qp.size(); ++i) qp[i] = {quad_.x[i], quad_.y[i]};
  const ApkBasis ds(ApkParams{1, 1, 2}, cfg_.N);
  quad_interp_ = apk_vandermonde(ds, qp) * apk_vandermonde(ds, ops_.nodes.solution_points).inverse();
}

Point2 SdSolver::solution_point(std::size_t cell, std::size_t j) const {
  return mesh_.maps[cell].to_phys(ops_.nodes.solution_points[j]);
}

MatrixXd SdSolver::interpolate(const Field2& f) const {
  MatrixXd U(ops_.Ks(), mesh_.size());
  for (std::size_t c = 0; c < mesh_.size(); ++c)
    for (std::size_t j = 0; j < ops_.Ks(); ++j) {
      const Point2 p = solution_point(c, j);
      U(j, c) = f(p.x, p.y);
    }
  return U;
}

MatrixXd SdSolver::initial_state() const { return interpolate(problem_.u0); }

void SdSolver::residual(const MatrixXd& U, MatrixXd& R) const {
  const std::size_t nc = mesh_.size();
  const std::size_t Kf = ops_.Kf();
  const MatrixXd UF = ops_.E * U;
  MatrixXd G1(Kf, nc), G2(Kf, nc);
  const auto& tags = ops_.nodes.tags;
  const Flux& F = problem_.flux;
  parallel_for(nc, [&](std::size_t c) {
    const AffineMap& T = mesh_.maps[c];
    for (std::size_t k = 0; k < Kf; ++k) {
      const double u = UF(k, c);
      Point2 f;
      const FluxPointTag& tg = tags[k];
      if (tg.interior()) {
        f = F(u);
      } else {
        int es[2] = {0, 0}, ne = 0;
        for (int e = 0; e < 3; ++e)
          if (tg.on_edge[e]) es[ne++] = e;
        auto nbval = [&](int e) { return UF(nb_index_[c][k][e], mesh_.nbr[c][e].cell); };
        if (ne == 1) {
          f = edge_numerical_flux(u, nbval(es[0]), normals_[c][es[0]], tangents_[c][es[0]], F, cfg_.mode);
        } else {
          f = vertex_numerical_flux(u, nbval(es[0]), normals_[c][es[0]], tangents_[c][es[0]], nbval(es[1]),
                                    normals_[c][es[1]], tangents_[c][es[1]], F, cfg_.vertex_rule);
        }
      }
      G1(k, c) = T.xi_x() * f.x + T.xi_y() * f.y;
      G2(k, c) = T.eta_x() * f.x + T.eta_y() * f.y;
    }
  });
  if (!cfg_.filter.enabled) {
    R.noalias() = -(ops_.DxiLag * G1 + ops_.DetaLag * G2);
    return;
  }
  if (!cfg_.filter.use_indicator && filtered_.size() == 1) {
    R.noalias() = -(filtered_[0].Bxi * G1 + filtered_[0].Beta * G2);
    return;
  }
  R.resize(ops_.Ks(), nc);
  parallel_for(nc, [&](std::size_t c) {
    const bool on = !cfg_.filter.use_indicator || shock_indicator(ops_, U.col(c), threshold_);
    if (on) {
      const FilteredOps& fo = filtered_[filter_group_[c]];
      R.col(c) = -(fo.Bxi * G1.col(c) + fo.Beta * G2.col(c));
    } else {
      R.col(c) = -(ops_.DxiLag * G1.col(c) + ops_.DetaLag * G2.col(c));
    }
  });
}

SdSolver::Norms SdSolver::error_norms(const MatrixXd& U, const Field2& exact) const {
  Norms n;
  const MatrixXd Uq = quad_interp_ * U;
  for (std::size_t c = 0; c < mesh_.size(); ++c) {
    const double jac = 1.0 / std::abs(mesh_.maps[c].det);
    for (std::size_t q = 0; q < quad_.w.size(); ++q) {
      const Point2 p = mesh_.maps[c].to_phys({quad_.x[q], quad_.y[q]});
      const double e = std::abs(Uq(q, c) - exact(p.x, p.y));
      n.L1 += jac * quad_.w[q] * e;
      n.L2 += jac * quad_.w[q] * e * e;
      n.Linf = std::max(n.Linf, e);
    }
    for (std::size_t j = 0; j < ops_.Ks(); ++j) {
      const Point2 p = solution_point(c, j);
      n.Linf = std::max(n.Linf, std::abs(U(j, c) - exact(p.x, p.y)));
    }
  }
  n.L2 = std::sqrt(n.L2);
  return n;
}

SdSolver::Norms SdSolver::error_norms(const MatrixXd& U, double t) const {
  if (!problem_.exact) return {};
  const auto& ex = problem_.exact;
  return error_norms(U, [&](double x, double y) { return ex(x, y, t); });
}

double SdSolver::integral(const MatrixXd& U) const {
  const MatrixXd Uq = quad_interp_ * U;
  double s = 0;
  for (std::size_t c = 0; c < mesh_.size(); ++c) {
    const double jac = 1.0 / std::abs(mesh_.maps[c].det);
    for (std::size_t q = 0; q < quad_.w.size(); ++q) s += jac * quad_.w[q] * Uq(q, c);
  }
  return s;
}

SolveResult SdSolver::run(const std::function<void(const DiagnosticsRow&)>& on_step) const {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  SolveResult res;
  res.U = initial_state();
  res.dt = dt_;
  const bool exact = cfg_.with_exact && static_cast<bool>(problem_.exact);
  auto record = [&](double t) {
    DiagnosticsRow d;
    d.t = t;
    d.min = res.U.minCoeff();
    d.max = res.U.maxCoeff();
    if (exact) {
      const Norms n = error_norms(res.U, t);
      d.L1 = n.L1;
      d.L2 = n.L2;
      d.Linf = n.Linf;
    } else {
      d.L1 = d.L2 = d.Linf = std::numeric_limits<double>::quiet_NaN();
    }
    d.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    res.diagnostics.push_back(d);
    if (on_step) on_step(d);
  };
  record(0);
  const RhsFn rhs = [this](const MatrixXd& u, double, MatrixXd& du) { residual(u, du); };
  const int nsteps = cfg_.t_end > 0 ? static_cast<int>(std::llround(cfg_.t_end / dt_)) : 0;
  double t = 0;
  for (int s = 0; s < nsteps; ++s) {
    rk_step(res.U, t, dt_, rhs);
    const double tn = (s + 1 == nsteps) ? cfg_.t_end : (s + 1) * dt_;
    int bad = -1;
    for (Eigen::Index c = 0; c < res.U.cols() && bad < 0; ++c) {
      const auto col = res.U.col(c);
      if (!col.allFinite() || col.cwiseAbs().maxCoeff() > cfg_.blowup_bound) bad = static_cast<int>(c);
    }
    if (bad >= 0) {
      res.blew_up = true;
      res.last_finite_t = t;
      res.offending_cell = bad;
      res.t = tn;
      res.steps = s + 1;
      return res;
    }
    t = tn;
    res.steps = s + 1;
    record(t);
  }
  res.t = t;
  res.last_finite_t = t;
  return res;
}

double eoc(double e_coarse, double e_fine, double r_coarse, double r_fine) {
  if (e_coarse == e_fine) return 0.0;
  return std::log(e_coarse / e_fine) / std::log(r_fine / r_coarse);
}

}  // namespace sdapk
