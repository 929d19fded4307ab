#include "sdapk/mod_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sdapk {

FilterProfile FilterProfile::exponential(double alpha_f, double p_f) {
  FilterProfile f;
  f.kind = FilterKind::Exponential;
  f.alpha_f = alpha_f;
  f.p_f = p_f;
  return f;
}

FilterProfile FilterProfile::cosine() {
  FilterProfile f;
  f.kind = FilterKind::Cosine;
  return f;
}

FilterProfile FilterProfile::natural(int p, double epsilon, double dt, double gamma_filter) {
  if (p < 1) throw std::invalid_argument("natural filter order must be >= 1");
  if (epsilon < 0 || dt < 0) throw std::invalid_argument("natural filter needs epsilon, dt >= 0");
  FilterProfile f;
  f.kind = FilterKind::Natural;
  f.p = p;
  f.epsilon = epsilon;
  f.dt = dt;
  f.gamma_filter = gamma_filter;
  return f;
}

double sigma_exponential(double eta, double alpha_f, double p_f) {
  return std::exp(-alpha_f * std::pow(eta, p_f));
}

double sigma_cosine(double eta) { return 0.5 * (1 + std::cos(M_PI * eta)); }

double natural_filter(MultiIndex idx, double epsilon, double dt, int p, double gamma_filter) {
  const double lam = eigenvalue(idx, gamma_filter);
  return std::exp(-epsilon * dt * std::pow(lam, p));
}

double viscosity_strength(double c, double h, int N, int p) {
  if (h <= 0 || N < 1) throw std::invalid_argument("viscosity_strength: need h > 0 and N >= 1");
  return c / (h * std::pow(static_cast<double>(N), 2 * p - 1));
}

double FilterProfile::sigma(MultiIndex idx, int basis_degree) const {
  const double eta = basis_degree > 0 ? static_cast<double>(idx.degree()) / basis_degree : 0.0;
  switch (kind) {
    case FilterKind::Identity: return 1.0;
    case FilterKind::Exponential: return sigma_exponential(eta, alpha_f, p_f);
    case FilterKind::Cosine: return sigma_cosine(eta);
    case FilterKind::Natural:
      if (approximate) return std::exp(-epsilon * dt * std::pow(static_cast<double>(idx.degree()), 2 * p));
      return natural_filter(idx, epsilon, dt, p, gamma_filter);
  }
  return 1.0;
}

std::vector<double> build_filter_matrix(const ApkBasis& basis, const FilterProfile& profile) {
  std::vector<double> s(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) s[k] = profile.sigma(basis.at(k), basis.degree());
  s[0] = 1.0;
  return s;
}

double SeriesExpansion::eval(double x, double y) const {
  double s = 0;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    if (coeffs[k] != 0) s += coeffs[k] * apk_jet(basis.params(), basis.at(k), x, y).v;
  return s;
}

SeriesExpansion project(const Field2& f, const ApkBasis& basis, const QuadRule& quad) {
  SeriesExpansion u{basis, std::vector<double>(basis.size(), 0.0)};
  std::vector<double> fv(quad.w.size());
  for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = f(quad.x[i], quad.y[i]);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < fv.size(); ++i) {
      const double a = apk_jet(basis.params(), basis.at(k), quad.x[i], quad.y[i]).v;
      num += quad.w[i] * fv[i] * a;
      den += quad.w[i] * a * a;
    }
    u.coeffs[k] = num / den;
  }
  return u;
}

SeriesExpansion apply_filter(const SeriesExpansion& u, const FilterProfile& profile) {
  SeriesExpansion r = u;
  const std::vector<double> s = build_filter_matrix(u.basis, profile);
  for (std::size_t k = 0; k < s.size(); ++k) r.coeffs[k] *= s[k];
  return r;
}

double weighted_norm_sq(const SeriesExpansion& u, int quad_order) {
  double s = 0;
  for (std::size_t k = 0; k < u.coeffs.size(); ++k)
    s += u.coeffs[k] * u.coeffs[k] * norm_squared(u.basis.params(), u.basis.at(k), quad_order);
  return s;
}

PowerFit fit_power_law(const std::vector<int>& Ns, const std::vector<double>& errs) {
  const std::size_t n = Ns.size();
  if (n < 2 || errs.size() != n) return {};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(static_cast<double>(Ns[i])), ly = std::log(std::max(errs[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  return {-slope, std::exp(icpt)};
}

double envelope_constant(const std::vector<int>& Ns, const std::vector<double>& errs, double rate) {
  double k = 0;
  for (std::size_t i = 0; i < Ns.size(); ++i) k = std::max(k, errs[i] * std::pow(Ns[i], rate));
  return k;
}

namespace {

bool inside_open(double x, double y) { return x > 0 && y > 0 && x + y < 1; }

// coordinate ascent with halving steps; y moves are tried before x moves and
// a move must improve by a relative 1e-9 to count
ErrorPeak climb(const Field2& g, double x, double y, double h0) {
  double best = std::abs(g(x, y));
  const double dirs[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
  for (double h = h0; h > 1e-11; h *= 0.5) {
    bool moved = true;
    int guard = 0;
    while (moved && guard++ < 100000) {
      moved = false;
      for (const auto& d : dirs) {
        const double nx = x + h * d[0], ny = y + h * d[1];
        if (!inside_open(nx, ny)) continue;
        const double v = std::abs(g(nx, ny));
        if (v > best + 1e-9 * best) {
          best = v;
          x = nx;
          y = ny;
          moved = true;
          break;
        }
      }
    }
  }
  return {best, x, y};
}

ErrorPeak edge_peak(const Field2& g, Point2 a, Point2 b, int samples) {
  ErrorPeak best{-1, a.x, a.y};
  int ib = 0;
  for (int i = 0; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    const double x = a.x + s * (b.x - a.x), y = a.y + s * (b.y - a.y);
    const double v = std::abs(g(x, y));
    if (v > best.value) {
      best = {v, x, y};
      ib = i;
    }
  }
  // golden section on the bracketing interval
  double lo = std::max(0, ib - 1) / static_cast<double>(samples);
  double hi = std::min(samples, ib + 1) / static_cast<double>(samples);
  auto at = [&](double s) { return std::abs(g(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))); };
  const double r = 0.5 * (std::sqrt(5.0) - 1);
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
  double fc = at(c), fd = at(d);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - r * (hi - lo);
      fc = at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + r * (hi - lo);
      fd = at(d);
    }
  }
  const double s = 0.5 * (lo + hi);
  const double v = at(s);
  if (v > best.value) best = {v, a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
  return best;
}

}  // namespace

ErrorPeak interior_peak(const Field2& g, int n) {
  // incumbent: climb from the centroid
  ErrorPeak best = climb(g, 1.0 / 3, 1.0 / 3, 1.0 / n);
  if (std::min({best.x, best.y, 1 - best.x - best.y}) < 2.0 / n) best = {-1, 1.0 / 3, 1.0 / 3};
  std::vector<double> E((n + 1) * (n + 1), -1.0);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 1; j < n; ++j)
    for (int i = 1; i + j < n; ++i) E[id(i, j)] = std::abs(g(static_cast<double>(i) / n, static_cast<double>(j) / n));
  std::vector<std::pair<double, std::pair<int, int>>> seeds;
  for (int j = 2; j < n - 1; ++j)
    for (int i = 2; i + j < n - 1; ++i) {
      const double v = E[id(i, j)];
      bool peak = true;
      for (int a = -1; a <= 1 && peak; ++a)
        for (int b = -1; b <= 1; ++b) {
          if (a == 0 && b == 0) continue;
          if (E[id(i + a, j + b)] > v) {
            peak = false;
            break;
          }
        }
      if (peak) seeds.push_back({v, {i, j}});
    }
  std::stable_sort(seeds.begin(), seeds.end(), [](const auto& p, const auto& q) { return p.first > q.first; });
  // one seed per distinct peak height is enough; ridges produce many equal seeds
  std::vector<double> heights;
  for (const auto& s : seeds) {
    bool dup = false;
    for (double h : heights)
      if (std::abs(h - s.first) <= 1e-9 * std::max(h, 1e-300)) dup = true;
    if (dup) continue;
    heights.push_back(s.first);
    if (heights.size() > 8) break;
    const ErrorPeak c = climb(g, static_cast<double>(s.second.first) / n, static_cast<double>(s.second.second) / n, 1.0 / n);
    if (c.value > best.value + 1e-9 * best.value) best = c;
  }
  return best;
}

std::vector<ErrorStudyRow> error_study(const Field2& f, const ApkParams& prm, const FilterProfile& profile,
                                       const std::vector<int>& Ns, const ErrorStudyOptions& opt) {
  std::map<std::string, std::vector<ErrorStudyRow>> by_region;
  const std::vector<std::string> order = opt.all_regions
                                             ? std::vector<std::string>{"interior", "edge_y0", "edge_hyp", "edge_x0", "vertex_10"}
                                             : std::vector<std::string>{"interior"};
  for (int N : Ns) {
    const ApkBasis basis(prm, N);
    const QuadRule q = weighted_quadrature(prm, 2 * N + opt.quad_extra);
    const SeriesExpansion u = apply_filter(project(f, basis, q), profile);
    const Field2 err = [&](double x, double y) { return f(x, y) - u.eval(x, y); };
    const ErrorPeak in = interior_peak(err, opt.grid);
    by_region["interior"].push_back({N, "interior", in.value, in.x, in.y, 0, 0});
    if (!opt.all_regions) continue;
    const int es = 4 * opt.grid;
    const ErrorPeak e0 = edge_peak(err, {0, 0}, {1, 0}, es);
    const ErrorPeak e1 = edge_peak(err, {1, 0}, {0, 1}, es);
    const ErrorPeak e2 = edge_peak(err, {0, 1}, {0, 0}, es);
    by_region["edge_y0"].push_back({N, "edge_y0", e0.value, e0.x, e0.y, 0, 0});
    by_region["edge_hyp"].push_back({N, "edge_hyp", e1.value, e1.x, e1.y, 0, 0});
    by_region["edge_x0"].push_back({N, "edge_x0", e2.value, e2.x, e2.y, 0, 0});
    by_region["vertex_10"].push_back({N, "vertex_10", std::abs(err(1, 0)), 1, 0, 0, 0});
  }
  std::vector<ErrorStudyRow> out;
  for (const std::string& r : order) {
    auto& rows = by_region[r];
    std::vector<int> fn;
    std::vector<double> fe, ae;
    std::vector<int> an;
    for (const auto& row : rows) {
      an.push_back(row.N);
      ae.push_back(row.max_error);
      if (row.N >= opt.fit_from) {
        fn.push_back(row.N);
        fe.push_back(row.max_error);
      }
    }
    const PowerFit fit = fit_power_law(fn, fe);
    const double k = envelope_constant(an, ae, opt.rate);
    for (auto& row : rows) {
      row.fitted_exponent = fit.exponent;
      row.fitted_constant = k;
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace sdapk
