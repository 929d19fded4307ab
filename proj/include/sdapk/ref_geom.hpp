#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdapk/apk_basis.hpp"

namespace sdapk {

struct Point2 {
  double x = 0;
  double y = 0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

// Gauss-Jacobi rule on [-1,1] for the weight (1-t)^a (1+t)^b.
struct Rule1D {
  std::vector<double> t;
  std::vector<double> w;
};
Rule1D gauss_jacobi(int n, double a, double b);

// n+1 Gauss-Lobatto nodes on [0,1], ascending.
std::vector<double> gauss_lobatto_01(int n);

// Lobatto nodes on the unit triangle, sorted by x then y.
std::vector<Point2> lobatto_nodes_triangle(int d);

// Reference edges: 0 is y=0, 1 is x+y=1, 2 is x=0.
constexpr int kNoEdge = -1;

struct FluxPointTag {
  int owner_edge = kNoEdge;       // lower-indexed edge for bookkeeping
  std::array<bool, 3> on_edge{};  // every edge the point lies on
  int edge_count() const { return on_edge[0] + on_edge[1] + on_edge[2]; }
  bool interior() const { return edge_count() == 0; }
};

Point2 ref_edge_normal(int edge);
Point2 ref_edge_tangent(int edge);

struct RefNodeSets {
  int N = 0;
  std::vector<Point2> solution_points;
  std::vector<Point2> flux_points;
  std::vector<FluxPointTag> tags;

  std::size_t Ks() const { return solution_points.size(); }
  std::size_t Kf() const { return flux_points.size(); }
};

RefNodeSets build_ref_nodes(int N);

// T(p) = A p + b maps the cell onto the unit triangle; A holds
// (xi_x, xi_y; eta_x, eta_y).
struct AffineMap {
  std::array<double, 4> A{1, 0, 0, 1};
  Point2 b{};
  double det = 1;

  double xi_x() const { return A[0]; }
  double xi_y() const { return A[1]; }
  double eta_x() const { return A[2]; }
  double eta_y() const { return A[3]; }
  Point2 to_ref(Point2 p) const;
  Point2 to_phys(Point2 r) const;
};

AffineMap affine_map(Point2 v0, Point2 v1, Point2 v2);

struct NeighborLink {
  int cell = -1;
  int edge = -1;
  bool periodic = false;
  Point2 shift{};  // neighbour coordinates + shift = own coordinates
};

struct TriMesh {
  Point2 origin{};
  double Lx = 0, Ly = 0;  // period; zero means not periodic
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<Point2, 3>> cell_xy;  // unwrapped corner coordinates
  std::vector<AffineMap> maps;
  std::vector<std::array<NeighborLink, 3>> nbr;

  std::size_t size() const { return cells.size(); }
  double shortest_edge(std::size_t c) const;
  double min_shortest_edge() const;
  // fills maps and nbr from vertices/cells/period
  void finalize();
};

// Periodic mesh of [x0, x0+L]^2 made of 2*n_blocks unit squares per side.
TriMesh build_pattern_grid(int n_blocks, double x0 = -1.0, double y0 = -1.0, double L = 2.0);

void write_mesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_mesh(std::istream& is);
TriMesh read_mesh_file(const std::string& path);

struct QuadRule {
  std::vector<double> x, y, w;
  int exactness = 0;
};

// Collapsed Gauss-Jacobi rule for the APK weight, exact up to the given degree.
QuadRule weighted_quadrature(const ApkParams& prm, int exactness);

}  // namespace sdapk
