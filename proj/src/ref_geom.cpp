#include "sdapk/ref_geom.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sdapk {

Rule1D gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
  // Golub-Welsch on the symmetric Jacobi matrix
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    if (k == 0)
      J(0, 0) = (b - a) / (ab + 2);
    else
      J(k, k) = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2));
  }
  for (int k = 1; k < n; ++k) {
    double beta;
    if (k == 1) {
      beta = 4 * (1 + a) * (1 + b) / ((2 + ab) * (2 + ab) * (3 + ab));
    } else {
      const double s = 2 * k + ab;
      beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1) * (s - 1));
    }
    J(k, k - 1) = J(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((ab + 1) * std::log(2.0) + std::lgamma(a + 1) + std::lgamma(b + 1) -
                              std::lgamma(ab + 2));
  Rule1D r;
  r.t.resize(n);
  r.w.resize(n);
  for (int k = 0; k < n; ++k) {
    r.t[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    r.w[k] = mu0 * v * v;
  }
  return r;
}

std::vector<double> gauss_lobatto_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_lobatto_01: need n >= 1");
  std::vector<double> v{0.0};
  if (n >= 2) {
    // interior nodes are the zeros of P_{n-1}^{1,1}
    const Rule1D g = gauss_jacobi(n - 1, 1, 1);
    for (double t : g.t) v.push_back(0.5 * (1 + t));
  }
  v.push_back(1.0);
  std::sort(v.begin(), v.end());
  // exact symmetry about 1/2
  for (int i = 0; i <= n / 2; ++i) {
    const double s = 0.5 * (v[i] + 1 - v[n - i]);
    v[i] = s;
    v[n - i] = 1 - s;
  }
  if (n % 2 == 0) v[n / 2] = 0.5;
  return v;
}

std::vector<Point2> lobatto_nodes_triangle(int d) {
  if (d < 1) throw std::invalid_argument("lobatto_nodes_triangle: degree must be >= 1");
  const std::vector<double> v = gauss_lobatto_01(d);
  std::vector<Point2> pts;
  for (int i = 1; i <= d + 1; ++i)
    for (int j = 1; j <= d + 1; ++j) {
      const int k = d + 3 - i - j;
      if (k < 1 || k > d + 1) continue;
      const double vi = v[i - 1], vj = v[j - 1], vk = v[k - 1];
      double x = (1 + 2 * vj - vk - vi) / 3;
      double y = (1 + 2 * vk - vi - vj) / 3;
      if (std::abs(x) < 1e-14) x = 0;
      if (std::abs(y) < 1e-14) y = 0;
      pts.push_back({x, y});
    }
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    if (std::abs(a.x - b.x) > 1e-12) return a.x < b.x;
    return a.y < b.y;
  });
  return pts;
}

Point2 ref_edge_normal(int edge) {
  const double r = std::sqrt(0.5);
  switch (edge) {
    case 0: return {0, -1};
    case 1: return {r, r};
    case 2: return {-1, 0};
  }
  throw std::out_of_range("ref_edge_normal");
}

Point2 ref_edge_tangent(int edge) {
  const double r = std::sqrt(0.5);
  switch (edge) {
    case 0: return {1, 0};
    case 1: return {-r, r};
    case 2: return {0, -1};
  }
  throw std::out_of_range("ref_edge_tangent");
}

RefNodeSets build_ref_nodes(int N) {
  if (N < 1 || N > 10) throw std::invalid_argument("build_ref_nodes: N must be in 1..10");
  RefNodeSets r;
  r.N = N;
  r.solution_points = lobatto_nodes_triangle(N);
  r.flux_points = lobatto_nodes_triangle(N + 1);
  const double tol = 1e-12;
  for (Point2 p : r.flux_points) {
    FluxPointTag t;
    t.on_edge[0] = std::abs(p.y) < tol;
    t.on_edge[1] = std::abs(p.x + p.y - 1) < tol;
    t.on_edge[2] = std::abs(p.x) < tol;
    for (int e = 0; e < 3; ++e)
      if (t.on_edge[e]) {
        t.owner_edge = e;
        break;
      }
    r.tags.push_back(t);
  }
  return r;
}

Point2 AffineMap::to_ref(Point2 p) const {
  return {A[0] * p.x + A[1] * p.y + b.x, A[2] * p.x + A[3] * p.y + b.y};
}

Point2 AffineMap::to_phys(Point2 r) const {
  const double q = r.x - b.x, s = r.y - b.y;
  return {(A[3] * q - A[1] * s) / det, (-A[2] * q + A[0] * s) / det};
}

AffineMap affine_map(Point2 v0, Point2 v1, Point2 v2) {
  const Point2 e1 = v1 - v0, e2 = v2 - v0;
  const double dm = e1.x * e2.y - e2.x * e1.y;
  const double scale = std::max({dot(e1, e1), dot(e2, e2), 1e-300});
  if (std::abs(dm) < 1e-14 * scale) throw std::invalid_argument("affine_map: degenerate triangle");
  if (dm < 0) throw std::invalid_argument("affine_map: triangle is clockwise");
  AffineMap m;
  m.A = {e2.y / dm, -e2.x / dm, -e1.y / dm, e1.x / dm};
  m.det = 1.0 / dm;
  m.b = {-(m.A[0] * v0.x + m.A[1] * v0.y), -(m.A[2] * v0.x + m.A[3] * v0.y)};
  return m;
}

double TriMesh::shortest_edge(std::size_t c) const {
  const auto& v = cell_xy[c];
  double h = 1e300;
  for (int e = 0; e < 3; ++e) {
    const Point2 d = v[(e + 1) % 3] - v[e];
    h = std::min(h, std::sqrt(dot(d, d)));
  }
  return h;
}

double TriMesh::min_shortest_edge() const {
  double h = 1e300;
  for (std::size_t c = 0; c < size(); ++c) h = std::min(h, shortest_edge(c));
  return h;
}

namespace {

double wrap(double v, double L) {
  if (L <= 0) return v;
  double w = std::fmod(v, L);
  if (w < 0) w += L;
  if (L - w < 1e-9 * L) w = 0;
  return w;
}

}  // namespace

void TriMesh::finalize() {
  const std::size_t nc = cells.size();
  maps.resize(nc);
  nbr.assign(nc, {});
  for (std::size_t c = 0; c < nc; ++c) maps[c] = affine_map(cell_xy[c][0], cell_xy[c][1], cell_xy[c][2]);

  double scale = std::max(Lx, Ly);
  if (scale <= 0) {
    for (const Point2& p : vertices) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    scale = std::max(scale, 1.0);
  }
  const double q = 1e-9 * scale;
  std::map<std::pair<long long, long long>, std::vector<std::pair<int, int>>> edges;
  for (std::size_t c = 0; c < nc; ++c)
    for (int e = 0; e < 3; ++e) {
      const Point2 m = 0.5 * (cell_xy[c][e] + cell_xy[c][(e + 1) % 3]);
      const auto key = std::make_pair(std::llround(wrap(m.x - origin.x, Lx) / q),
                                      std::llround(wrap(m.y - origin.y, Ly) / q));
      edges[key].push_back({static_cast<int>(c), e});
    }
  for (const auto& [key, list] : edges) {
    if (list.size() != 2) {
      std::ostringstream os;
      os << "mesh is not conforming/periodic: edge of cell " << list[0].first << " has "
         << list.size() - 1 << " neighbours";
      throw std::runtime_error(os.str());
    }
    for (int s = 0; s < 2; ++s) {
      const auto [c, e] = list[s];
      const auto [cn, en] = list[1 - s];
      const Point2 mo = 0.5 * (cell_xy[c][e] + cell_xy[c][(e + 1) % 3]);
      const Point2 mn = 0.5 * (cell_xy[cn][en] + cell_xy[cn][(en + 1) % 3]);
      NeighborLink& L = nbr[c][e];
      L.cell = cn;
      L.edge = en;
      L.shift = mo - mn;
      L.periodic = std::sqrt(dot(L.shift, L.shift)) > 1e-9 * scale;
    }
  }
}

TriMesh build_pattern_grid(int n_blocks, double x0, double y0, double L) {
  if (n_blocks < 1) throw std::invalid_argument("build_pattern_grid: n_blocks must be >= 1");
  const int n = 2 * n_blocks;
  const double s = L / n;
  TriMesh m;
  m.origin = {x0, y0};
  m.Lx = m.Ly = L;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m.vertices.push_back({x0 + i * s, y0 + j * s});
  auto vid = [n](int i, int j) { return (j % n) * n + (i % n); };
  auto xy = [&](int i, int j) { return Point2{x0 + i * s, y0 + j * s}; };
  auto add = [&](std::array<int, 2> a, std::array<int, 2> b, std::array<int, 2> c) {
    m.cells.push_back({vid(a[0], a[1]), vid(b[0], b[1]), vid(c[0], c[1])});
    m.cell_xy.push_back({xy(a[0], a[1]), xy(b[0], b[1]), xy(c[0], c[1])});
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::array<int, 2> a{i, j}, b{i + 1, j}, c{i + 1, j + 1}, d{i, j + 1};
      // first vertex is the right angle; right angles meet at even lattice points
      if ((i + j) % 2 == 0) {
        add(a, b, d);
        add(c, d, b);
      } else {
        add(b, c, a);
        add(d, a, c);
      }
    }
  m.finalize();
  return m;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os.precision(17);
  os << "period " << mesh.origin.x << ' ' << mesh.origin.y << ' ' << mesh.Lx << ' ' << mesh.Ly << '\n';
  os << "vertices " << mesh.vertices.size() << '\n';
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    os << i << ' ' << mesh.vertices[i].x << ' ' << mesh.vertices[i].y << '\n';
  os << "cells " << mesh.cells.size() << '\n';
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    os << c << ' ' << mesh.cells[c][0] << ' ' << mesh.cells[c][1] << ' ' << mesh.cells[c][2] << '\n';
  std::vector<std::array<int, 4>> pairs;
  for (std::size_t c = 0; c < mesh.nbr.size(); ++c)
    for (int e = 0; e < 3; ++e) {
      const NeighborLink& L = mesh.nbr[c][e];
      if (L.periodic && std::make_pair(static_cast<int>(c), e) < std::make_pair(L.cell, L.edge))
        pairs.push_back({static_cast<int>(c), e, L.cell, L.edge});
    }
  os << "periodic " << pairs.size() << '\n';
  for (const auto& p : pairs) os << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << p[3] << '\n';
}

namespace {

void expect_word(std::istream& is, const char* w) {
  std::string s;
  if (!(is >> s) || s != w) throw std::runtime_error(std::string("mesh file: expected '") + w + "'");
}

}  // namespace

TriMesh read_mesh(std::istream& is) {
  TriMesh m;
  expect_word(is, "period");
  is >> m.origin.x >> m.origin.y >> m.Lx >> m.Ly;
  std::size_t nv = 0, nc = 0, np = 0;
  expect_word(is, "vertices");
  is >> nv;
  m.vertices.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::size_t id;
    is >> id;
    if (!is || id >= nv) throw std::runtime_error("mesh file: bad vertex record");
    is >> m.vertices[id].x >> m.vertices[id].y;
  }
  expect_word(is, "cells");
  is >> nc;
  if (!is || nc == 0) throw std::runtime_error("mesh file: no cells");
  m.cells.resize(nc);
  m.cell_xy.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    std::size_t id;
    is >> id;
    if (!is || id >= nc) throw std::runtime_error("mesh file: bad cell record");
    for (int k = 0; k < 3; ++k) {
      is >> m.cells[id][k];
      if (!is || m.cells[id][k] < 0 || static_cast<std::size_t>(m.cells[id][k]) >= nv)
        throw std::runtime_error("mesh file: bad vertex index in cell record");
    }
    // unwrap corners next to the first one
    const Point2 p0 = m.vertices[m.cells[id][0]];
    m.cell_xy[id][0] = p0;
    for (int k = 1; k < 3; ++k) {
      Point2 p = m.vertices[m.cells[id][k]];
      if (m.Lx > 0) p.x -= m.Lx * std::round((p.x - p0.x) / m.Lx);
      if (m.Ly > 0) p.y -= m.Ly * std::round((p.y - p0.y) / m.Ly);
      m.cell_xy[id][k] = p;
    }
  }
  expect_word(is, "periodic");
  is >> np;
  std::vector<std::array<int, 4>> pairs(np);
  for (auto& p : pairs) is >> p[0] >> p[1] >> p[2] >> p[3];
  if (!is) throw std::runtime_error("mesh file: truncated");
  m.finalize();
  for (const auto& p : pairs) {
    if (p[0] < 0 || static_cast<std::size_t>(p[0]) >= nc || p[1] < 0 || p[1] > 2)
      throw std::runtime_error("mesh file: bad periodic record");
    const NeighborLink& L = m.nbr[p[0]][p[1]];
    if (L.cell != p[2] || L.edge != p[3])
      throw std::runtime_error("mesh file: periodic pair does not match geometry");
  }
  return m;
}

TriMesh read_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open mesh file " + path);
  return read_mesh(f);
}

QuadRule weighted_quadrature(const ApkParams& prm, int exactness) {
  prm.validate();
  if (exactness < 0 || exactness > 80) throw std::invalid_argument("weighted_quadrature: exactness out of range");
  const int n = exactness / 2 + 1;
  const double p = prm.p();
  const Rule1D rx = gauss_jacobi(n, prm.beta + p, prm.alpha - 1);
  const Rule1D rt = gauss_jacobi(n, p, prm.beta - 1);
  const double sx = std::pow(2.0, -(prm.alpha + prm.beta + p));
  const double st = std::pow(2.0, -(prm.beta + p));
  QuadRule q;
  q.exactness = exactness;
  for (int i = 0; i < n; ++i) {
    const double X = 0.5 * (1 + rx.t[i]);
    for (int j = 0; j < n; ++j) {
      const double T = 0.5 * (1 + rt.t[j]);
      q.x.push_back(X);
      q.y.push_back((1 - X) * T);
      q.w.push_back(rx.w[i] * sx * rt.w[j] * st);
    }
  }
  return q;
}

}  // namespace sdapk
