// Acceptance runner: one PASS/FAIL line per criterion, exit code 1 if any fails.
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sdapk/apk_basis.hpp"
#include "sdapk/eigsolve.hpp"
#include "sdapk/mod_filter.hpp"
#include "sdapk/ref_geom.hpp"
#include "sdapk/sd_core.hpp"
#include "sdapk/vneumann.hpp"

using namespace sdapk;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[x] ") + std::move(note));
  }
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> body;
};

bool rel_close(double got, double want, double tol) { return std::abs(got - want) <= tol * std::abs(want); }

double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0;
  for (const cplx& z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cplx p, cplx q) { return std::abs(p - z) < std::abs(q - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

void orthogonality(Outcome& o) {
  for (const ApkParams& prm : {ApkParams{1, 1, 2}, ApkParams{2, 2, 5}, ApkParams{1, 2, 3}}) {
    const ApkBasis b(prm, 8);
    const QuadRule q = weighted_quadrature(prm, 18);
    Eigen::MatrixXd A(q.w.size(), b.size());
    for (std::size_t i = 0; i < q.w.size(); ++i)
      for (std::size_t k = 0; k < b.size(); ++k) A(i, k) = apk_eval(prm, b.at(k), q.x[i], q.y[i]);
    const Eigen::Map<const Eigen::VectorXd> w(q.w.data(), static_cast<Eigen::Index>(q.w.size()));
    const Eigen::MatrixXd G = A.transpose() * w.asDiagonal() * A;
    double worst = 0;
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) worst = std::max(worst, std::abs(G(i, j)) / std::sqrt(G(i, i) * G(j, j)));
    o.require(worst < 1e-10, fmt::format("({:g},{:g},{:g}) off-diagonal {:.2e}", prm.alpha, prm.beta, prm.gamma, worst));
  }
}

void eigenrelation(Outcome& o) {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> u(0, 1);
  for (const ApkParams& prm : {ApkParams{1, 1, 2}, ApkParams{2, 2, 5}}) {
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      double x = u(rng), y = u(rng);
      if (x + y >= 1) {
        x = 1 - x;
        y = 1 - y;
      }
      x = 0.02 + 0.96 * x;
      y = 0.02 + 0.96 * y;
      for (int d = 0; d <= 6; ++d)
        for (int l = 0; l <= d; ++l) {
          const MultiIndex idx{d - l, l};
          const double la = eigenvalue(idx, prm.gamma) * apk_eval(prm, idx, x, y);
          worst = std::max(worst, std::abs(apply_D(prm, idx, x, y) - la) / (1 + std::abs(la)));
        }
    }
    o.require(worst < 1e-8, fmt::format("({:g},{:g},{:g}) relative {:.2e}", prm.alpha, prm.beta, prm.gamma, worst));
  }
}

void point_value(Outcome& o) {
  double worst = 0;
  for (const ApkParams& prm : {ApkParams{1, 1, 2}, ApkParams{2, 2, 5}, ApkParams{1, 2, 3}, ApkParams{1, 1, 6}})
    for (int m = 0; m <= 6; ++m) {
      const int k = static_cast<int>(prm.gamma - prm.alpha);
      const double binom = std::tgamma(m + k + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(k + 1.0));
      worst = std::max(worst, std::abs(std::abs(apk_eval(prm, {m, 0}, 1.0, 0.0)) - binom) / binom);
    }
  o.require(worst < 1e-10, fmt::format("max relative deviation {:.2e}", worst));
}

void condition_numbers(Outcome& o) {
  const std::vector<double> t112{12, 20, 39, 53, 71, 94, 121}, t225{17, 44, 96, 161, 244, 450, 662};
  std::vector<double> k112, k225, lag;
  for (int N = 2; N <= 8; ++N) {
    k112.push_back(vandermonde_condition({1, 1, 2}, N));
    k225.push_back(vandermonde_condition({2, 2, 5}, N));
    lag.push_back(lagrange_reference_condition(N));
  }
  auto band = [&](const std::vector<double>& got, const std::vector<double>& want, const char* name) {
    double lo = 1e300, hi = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      lo = std::min(lo, got[i] / want[i]);
      hi = std::max(hi, got[i] / want[i]);
    }
    o.require(lo >= 0.5 && hi <= 2.0, fmt::format("{} ratio to table in [{:.2f}, {:.2f}]", name, lo, hi));
  };
  band(k112, t112, "(1,1,2)");
  band(k225, t225, "(2,2,5)");
  bool mono = true, dom = true;
  for (std::size_t i = 1; i < k112.size(); ++i) mono = mono && k112[i] > k112[i - 1] && k225[i] > k225[i - 1];
  for (std::size_t i = 0; i < k112.size(); ++i) dom = dom && lag[i] > k112[i] && lag[i] > k225[i];
  o.require(mono, "both rows increase with N");
  o.require(dom, "Lagrange row dominates");
}

void unfiltered_stability(Outcome& o) {
  const std::vector<double> table{5.228025, 7.671293, 13.60921, 20.10942};
  const auto cases = case_grid();
  for (int N = 2; N <= 5; ++N) {
    const double L = stability_L(stability_ops(build_ops({2, 2, 5}, N)), cases).L;
    o.require(rel_close(L, table[N - 2], 1e-2), fmt::format("N={} L={:.6g} table {:.7g}", N, L, table[N - 2]));
  }
  const std::vector<ApkParams> tuples{{1, 1, 2}, {2, 2, 5}, {1, 2, 3}, {0.5, 0.5, 1}, {1, 1, 6}, {2, 1, 3}};
  for (int N = 2; N <= 5; ++N) {
    double lo = 1e300, hi = -1e300;
    for (const auto& prm : tuples) {
      const double L = stability_L(stability_ops(build_ops(prm, N), false), cases).L;
      lo = std::min(lo, L);
      hi = std::max(hi, L);
    }
    o.require(hi - lo <= 1e-8 * std::max(1.0, std::abs(hi)),
              fmt::format("N={} spread over {} bases {:.2e}", N, tuples.size(), hi - lo));
  }
}

void filtered_stability(Outcome& o) {
  const std::vector<double> series{2.502, 2.000, 1.825, 1.639, 1.459, 1.291, 1.136};
  const auto cases = case_grid();
  const auto ops = build_ops({2, 2, 5}, 3);
  double prev = std::numeric_limits<double>::infinity();
  bool mono = true;
  for (int c = 2; c <= 8; ++c) {
    FilteredStabilitySettings fs;
    fs.p = 2;
    fs.c = c;
    const double L = stability_L(filtered_stability_ops(ops, fs), cases).L;
    o.require(rel_close(L, series[c - 2], 1e-2), fmt::format("c={} L={:.4f} table {:.3f}", c, L, series[c - 2]));
    mono = mono && L < prev;
    prev = L;
  }
  o.require(mono, "strictly decreasing in c");
  FilteredStabilitySettings fs;
  fs.p = 3;
  fs.c = 8;
  const double L3 = stability_L(filtered_stability_ops(build_ops({1, 1, 6}, 3), fs), cases).L;
  o.require(rel_close(L3, 0.9383, 1e-2), fmt::format("p=3 c=8 (1,1,6) L={:.4f} table 0.9383", L3));
}

void filter_error(Outcome& o) {
  const Field2 f = [](double x, double y) { return std::sin(M_PI * (x + y)); };
  ErrorStudyOptions opt;
  opt.all_regions = false;
  const std::vector<int> Ns{1, 2, 3, 4, 5, 6, 7, 8};
  const auto c = error_study(f, {1, 1, 2}, FilterProfile::cosine(), Ns, opt);
  const auto g = error_study(f, {2, 2, 5}, FilterProfile::cosine(), Ns, opt);
  const auto& c1 = c.front();
  o.require(std::abs(c1.max_error - 0.36338) <= 1e-3, fmt::format("(1,1,2) N=1 max error {:.5f}", c1.max_error));
  const double dist = std::hypot(c1.x - 0.331, c1.y - 0.169);
  o.require(dist <= 5e-3, fmt::format("(1,1,2) N=1 at ({:.3f},{:.3f}), distance {:.1e}", c1.x, c1.y, dist));
  const auto& g8 = g.back();
  o.require(std::abs(g8.max_error - 0.0219375) <= 5e-4, fmt::format("(2,2,5) N=8 max error {:.5f}", g8.max_error));
  o.require(std::abs(c1.fitted_exponent - 1.25) <= 0.25, fmt::format("decay exponent {:.3f}", c1.fitted_exponent));
  o.require(std::abs(c1.fitted_constant - 0.867) <= 0.05, fmt::format("constant {:.4f}", c1.fitted_constant));
}

SdSolver advection_solver(int nb, int N, double t_end) {
  RunConfig rc;
  rc.params = {2, 2, 5};
  rc.N = N;
  rc.t_end = t_end;
  return SdSolver(build_pattern_grid(nb), advection_problem(M_PI / 4), rc);
}

void advection(Outcome& o) {
  // 72, 288, 1152 cells, the counts closest to the published ladder
  const std::vector<int> ladder{3, 6, 12};
  std::vector<std::vector<double>> linf(ladder.size(), std::vector<double>(6, 0));
  for (std::size_t i = 0; i < ladder.size(); ++i)
    for (int N = 1; N <= 5; ++N) {
      const SdSolver s = advection_solver(ladder[i], N, 0.5);
      const SolveResult r = s.run();
      linf[i][N] = r.blew_up ? std::numeric_limits<double>::infinity() : s.error_norms(r.U, r.t).Linf;
    }
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double ratio = linf[i][2] / linf[i][4];
    o.require(ratio >= 5, fmt::format("{} cells: Linf N=2 / N=4 = {:.1f}", 8 * ladder[i] * ladder[i], ratio));
  }
  std::string rates;
  double worst = 1e300;
  for (int N = 2; N <= 5; ++N) {
    const double e = eoc(linf[1][N - 1], linf[1][N], N - 1, N);
    rates += fmt::format(" {:.2f}", e);
    worst = std::min(worst, e);
  }
  o.require(worst > 3, "288 cells: EOC(N) for N=2..5:" + rates);
  for (int N = 2; N <= 4; ++N) {
    const SdSolver s = advection_solver(6, N, std::sqrt(2.0));
    const double proj = s.error_norms(s.initial_state(), 0.0).Linf;
    const SolveResult r = s.run();
    const double back = r.blew_up ? std::numeric_limits<double>::infinity() : s.error_norms(r.U, r.t).Linf;
    o.require(back <= 2 * proj,
              fmt::format("full period N={}: error {:.3e}, projection {:.3e}, ratio {:.2f}", N, back, proj, back / proj));
  }
}

SolveResult burgers_run(const ApkParams& prm, bool filtered, double gamma_filter, double t_end) {
  RunConfig rc;
  rc.params = prm;
  rc.N = 3;
  rc.t_end = t_end;
  rc.with_exact = false;
  rc.filter.enabled = filtered;
  rc.filter.p = 2;
  rc.filter.c = 8;
  rc.filter.gamma_filter = gamma_filter;
  return SdSolver(build_pattern_grid(12), burgers_problem(), rc).run();
}

void burgers(Outcome& o) {
  const SolveResult plain = burgers_run({2, 2, 5}, false, NAN, 0.5);
  o.require(plain.blew_up && plain.last_finite_t < 0.5,
            fmt::format("1152 cells unfiltered: blow-up {} at t={:.4f}", plain.blew_up, plain.last_finite_t));
  auto check = [&](const SolveResult& r, const char* name) {
    const bool finite = !r.blew_up && r.U.allFinite();
    const double m = r.U.cwiseAbs().maxCoeff();
    o.require(finite && std::abs(r.t - 0.45) < 1e-12 && m < 10,
              fmt::format("{}: t={:.4f} min {:.3f} max {:.3f}", name, r.t, r.U.minCoeff(), r.U.maxCoeff()));
  };
  check(burgers_run({2, 2, 5}, true, NAN, 0.45), "filtered (2,2,5) p=2 c=8");
  check(burgers_run({1, 1, 2}, true, 5, 0.45), "(1,1,2) with filter gamma 5");
}

void oracles(Outcome& o) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> size(3, 21);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    std::vector<cplx> roots(n);
    for (auto& r : roots) r = cplx(g(rng), g(rng));
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      T(i, i) = roots[i];
      for (int j = i + 1; j < n; ++j) T(i, j) = 0.2 * cplx(g(rng), g(rng));
    }
    Eigen::MatrixXcd R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = cplx(g(rng), g(rng));
    const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(R).householderQ();
    worst = std::max(worst, multiset_distance(eigenvalues(Q * T * Q.adjoint()), roots));
  }
  o.require(worst < 1e-8, fmt::format("eigenvalues vs prescribed characteristic roots {:.2e}", worst));

  double gworst = 0;
  std::uniform_real_distribution<double> u(0.05, 0.45);
  for (const ApkParams& prm : {ApkParams{1, 1, 2}, ApkParams{2, 2, 5}})
    for (int d = 0; d <= 6; ++d)
      for (int l = 0; l <= d; ++l)
        for (int k = 0; k < 10; ++k) {
          const double x = u(rng), y = u(rng), h = 1e-6;
          const MultiIndex idx{d - l, l};
          auto [gx, gy] = apk_grad(prm, idx, x, y);
          const double fx = (apk_eval(prm, idx, x + h, y) - apk_eval(prm, idx, x - h, y)) / (2 * h);
          const double fy = (apk_eval(prm, idx, x, y + h) - apk_eval(prm, idx, x, y - h)) / (2 * h);
          gworst = std::max(gworst, std::max(std::abs(gx - fx), std::abs(gy - fy)) / (1 + std::abs(gx) + std::abs(gy)));
        }
  o.require(gworst < 1e-6, fmt::format("gradient vs finite differences {:.2e}", gworst));

  const Flux quad = Flux::burgers();
  const Flux gquad = Flux::from_function([](double v) { return Point2{0.5 * v * v, 0.5 * v * v}; });
  const Flux lin = Flux::linear({0.3, -1.1});
  const Flux glin = Flux::from_function([](double v) { return Point2{0.3 * v, -1.1 * v}; });
  double fworst = 0;
  std::uniform_real_distribution<double> s(-2, 2);
  for (int k = 0; k < 500; ++k) {
    const double a = s(rng), b = s(rng), th = s(rng) * M_PI;
    const Point2 n{std::cos(th), std::sin(th)};
    fworst = std::max(fworst, std::abs(godunov_flux(a, b, n, quad).H - godunov_flux(a, b, n, gquad).H));
    fworst = std::max(fworst, std::abs(godunov_flux(a, b, n, lin).H - godunov_flux(a, b, n, glin).H));
  }
  o.require(fworst < 1e-12, fmt::format("Godunov sampler vs closed forms {:.2e}", fworst));
}

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {"orthogonality", 10, orthogonality},
      {"eigenrelation", 5, eigenrelation},
      {"point value at (1,0)", 60, point_value},
      {"condition numbers", 30, condition_numbers},
      {"unfiltered stability", 120, unfiltered_stability},
      {"filtered stability", 300, filtered_stability},
      {"filter-error study", 120, filter_error},
      {"advection EOC", 600, advection},
      {"Burgers robustness", 1200, burgers},
      {"oracle equivalence", 60, oracles},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs <= c.budget_s, fmt::format("runtime {:.2f} s (budget {:g} s)", secs, c.budget_s));
    if (!o.pass) ++failed;
    fmt::print("{} {}\n", o.pass ? "PASS" : "FAIL", c.name);
    for (const auto& n : o.notes) fmt::print("     {}\n", n);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", all.size() - failed, all.size());
  return failed == 0 ? 0 : 1;
}
