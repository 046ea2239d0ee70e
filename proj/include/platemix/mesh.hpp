#pragma once

// Triangulations of multiply-connected polygonal domains: structured
// generation, uniform red refinement, boundary bookkeeping and validation.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace platemix {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// Axis-aligned box, used for the structured hole description.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Polygonal domain with J holes. Component 0 is the outer boundary,
// components 1..J are the holes.
struct Domain {
  double outer_side = 3.0;
  std::vector<Box> holes;

  int hole_count() const { return static_cast<int>(holes.size()); }
};

inline Domain canonical_domain() { return Domain{3.0, {Box{1, 1, 2, 2}}}; }
inline Domain two_hole_domain() { return Domain{5.0, {Box{1, 1, 2, 2}, Box{3, 3, 4, 4}}}; }

constexpr int kInteriorTag = -1;

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(std::string msg) {
    ok = false;
    violations.push_back(std::move(msg));
  }
};

// Flat indexed triangulation. Edges carry a fixed global orientation from the
// lower vertex index to the higher one; t_e follows that orientation. All
// topology arrays are filled at construction and the mesh is immutable
// afterwards, so concurrent reads are safe.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;   // counterclockwise
  std::vector<std::array<int, 2>> edges;       // v0 < v1
  std::vector<int> vertex_tag;                 // -1 interior, k = boundary component
  std::vector<int> edge_tag;
  std::vector<std::array<int, 3>> tri_edges;   // edge id of local edge i (opposite vertex i)
  std::vector<std::array<int, 2>> edge_tris;   // incident triangles, second = -1 on boundary
  // +1 when the global edge direction agrees with the counterclockwise
  // traversal of the triangle boundary, -1 otherwise.
  std::vector<std::array<int, 3>> tri_edge_sign;
  std::vector<int> parent_tri;                 // empty unless produced by refinement
  int num_holes = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  int num_interior_vertices() const {
    int n = 0;
    for (int t : vertex_tag) n += (t == kInteriorTag);
    return n;
  }
  int num_interior_edges() const {
    int n = 0;
    for (int t : edge_tag) n += (t == kInteriorTag);
    return n;
  }

  double area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * cross2(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
  }
  double edge_length(int e) const { return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm(); }
  Vec2 edge_tangent(int e) const {
    Vec2 d = vertices[edges[e][1]] - vertices[edges[e][0]];
    return d / d.norm();
  }
  double total_area() const {
    double a = 0;
    for (int t = 0; t < num_triangles(); ++t) a += area(t);
    return a;
  }
  double mesh_size() const {
    double h = 0;
    for (int e = 0; e < num_edges(); ++e) h = std::max(h, edge_length(e));
    return h;
  }

  // Builds the derived topology (edges, incidences, signs) from vertices,
  // triangles and vertex tags. Does not reject broken meshes; validate() is
  // the reporter for those.
  static Mesh from_cells(std::vector<Vec2> verts, std::vector<std::array<int, 3>> tris,
                         std::vector<int> vtags, int num_holes);
};

inline Mesh Mesh::from_cells(std::vector<Vec2> verts, std::vector<std::array<int, 3>> tris,
                             std::vector<int> vtags, int num_holes) {
  Mesh m;
  m.vertices = std::move(verts);
  m.triangles = std::move(tris);
  m.vertex_tag = std::move(vtags);
  m.num_holes = num_holes;

  std::map<std::array<int, 2>, int> edge_id;
  for (const auto& tri : m.triangles) {
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      edge_id.emplace(std::array<int, 2>{std::min(a, b), std::max(a, b)}, 0);
    }
  }
  int id = 0;
  for (auto& [key, val] : edge_id) val = id++;  // lexicographic numbering

  m.edges.resize(edge_id.size());
  m.edge_tris.assign(edge_id.size(), {-1, -1});
  for (const auto& [key, val] : edge_id) m.edges[val] = key;

  m.tri_edges.resize(m.triangles.size());
  m.tri_edge_sign.resize(m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      int e = edge_id.at({std::min(a, b), std::max(a, b)});
      m.tri_edges[t][i] = e;
      m.tri_edge_sign[t][i] = (a < b) ? +1 : -1;
      if (m.edge_tris[e][0] < 0)
        m.edge_tris[e][0] = t;
      else
        m.edge_tris[e][1] = t;
    }
  }

  m.edge_tag.assign(m.num_edges(), kInteriorTag);
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge_tris[e][1] >= 0) continue;  // interior
    int ta = m.vertex_tag[m.edges[e][0]], tb = m.vertex_tag[m.edges[e][1]];
    m.edge_tag[e] = (ta == tb) ? ta : -2;  // -2 flags an inconsistency for validate()
  }
  return m;
}

// Structured criss-cross triangulation of [0,L]^2 with grid-aligned square
// holes. Each grid cell is split by its bottom-left to top-right diagonal.
inline Mesh generate_square_hole_mesh(double outer_side, const std::vector<Box>& hole_boxes,
                                      int n) {
  if (n < 1) throw std::invalid_argument("subdivision count must be >= 1");
  double nd = outer_side * n;
  int N = static_cast<int>(std::lround(nd));
  if (std::abs(nd - N) > 1e-9 || N < 1)
    throw std::invalid_argument("outer side is not aligned to the 1/n grid");

  auto to_grid = [&](double x) {
    double g = x * n;
    int gi = static_cast<int>(std::lround(g));
    if (std::abs(g - gi) > 1e-9) throw std::invalid_argument("hole is not aligned to the 1/n grid");
    return gi;
  };

  struct GridBox {
    int x0, y0, x1, y1;
  };
  std::vector<GridBox> gb;
  for (const auto& h : hole_boxes) {
    GridBox g{to_grid(h.x0), to_grid(h.y0), to_grid(h.x1), to_grid(h.y1)};
    if (g.x0 >= g.x1 || g.y0 >= g.y1) throw std::invalid_argument("hole box is empty");
    if (g.x0 < 1 || g.y0 < 1 || g.x1 > N - 1 || g.y1 > N - 1)
      throw std::invalid_argument("hole touches or crosses the outer boundary");
    gb.push_back(g);
  }
  for (size_t i = 0; i < gb.size(); ++i)
    for (size_t j = i + 1; j < gb.size(); ++j) {
      bool separated = gb[i].x1 < gb[j].x0 || gb[j].x1 < gb[i].x0 || gb[i].y1 < gb[j].y0 ||
                       gb[j].y1 < gb[i].y0;
      if (!separated) throw std::invalid_argument("holes overlap or touch each other");
    }

  auto inside_hole = [&](double x, double y) {
    for (const auto& g : gb)
      if (x > g.x0 && x < g.x1 && y > g.y0 && y < g.y1) return true;
    return false;
  };
  auto hole_tag = [&](int i, int j) {
    for (size_t k = 0; k < gb.size(); ++k) {
      const auto& g = gb[k];
      bool on_perimeter = (i == g.x0 || i == g.x1) ? (j >= g.y0 && j <= g.y1)
                                                   : (i > g.x0 && i < g.x1 && (j == g.y0 || j == g.y1));
      if (on_perimeter) return static_cast<int>(k) + 1;
    }
    return kInteriorTag;
  };

  double h = 1.0 / n;
  std::vector<int> grid_to_vertex((N + 1) * (N + 1), -1);
  std::vector<Vec2> verts;
  std::vector<int> vtags;
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) {
      if (inside_hole(i, j)) continue;  // strictly inside a hole: not part of the mesh
      grid_to_vertex[j * (N + 1) + i] = static_cast<int>(verts.size());
      verts.emplace_back(i * h, j * h);
      int tag = (i == 0 || i == N || j == 0 || j == N) ? 0 : hole_tag(i, j);
      vtags.push_back(tag);
    }

  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      if (inside_hole(i + 0.5, j + 0.5)) continue;
      int a = grid_to_vertex[j * (N + 1) + i];
      int b = grid_to_vertex[j * (N + 1) + i + 1];
      int c = grid_to_vertex[(j + 1) * (N + 1) + i + 1];
      int d = grid_to_vertex[(j + 1) * (N + 1) + i];
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }

  return Mesh::from_cells(std::move(verts), std::move(tris), std::move(vtags),
                          static_cast<int>(gb.size()));
}

inline Mesh generate_mesh(const Domain& d, int n) {
  return generate_square_hole_mesh(d.outer_side, d.holes, n);
}

// Red refinement: every triangle is split into 4 congruent children. The
// children of triangle t are 4t..4t+3 (three corner triangles, then the
// medial one); the midpoint of edge e becomes vertex V + e.
inline Mesh refine_uniform(const Mesh& m) {
  int V = m.num_vertices();
  std::vector<Vec2> verts = m.vertices;
  std::vector<int> vtags = m.vertex_tag;
  verts.resize(V + m.num_edges());
  vtags.resize(V + m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) {
    verts[V + e] = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);
    vtags[V + e] = m.edge_tag[e];
  }

  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    int m0 = V + m.tri_edges[t][0];
    int m1 = V + m.tri_edges[t][1];
    int m2 = V + m.tri_edges[t][2];
    tris.push_back({tri[0], m2, m1});
    tris.push_back({tri[1], m0, m2});
    tris.push_back({tri[2], m1, m0});
    tris.push_back({m0, m1, m2});
  }

  Mesh out = Mesh::from_cells(std::move(verts), std::move(tris), std::move(vtags), m.num_holes);
  out.parent_tri.resize(out.num_triangles());
  for (int t = 0; t < out.num_triangles(); ++t) out.parent_tri[t] = t / 4;
  return out;
}

// Mesh for refinement level ell of a domain (level 0 = coarse grid, n per unit).
inline Mesh mesh_at_level(const Domain& d, int level, int n = 1) {
  Mesh m = generate_mesh(d, n);
  for (int i = 0; i < level; ++i) m = refine_uniform(m);
  return m;
}

// Ordered vertex cycles of the boundary components. Component 0 is the outer
// boundary (largest bounding box); holes follow in bounding-box order.
inline std::vector<std::vector<int>> boundary_components(const Mesh& m) {
  std::vector<std::vector<int>> incident(m.num_vertices());
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge_tris[e][1] >= 0) continue;
    incident[m.edges[e][0]].push_back(e);
    incident[m.edges[e][1]].push_back(e);
  }
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!incident[v].empty() && incident[v].size() != 2)
      throw std::runtime_error("non-manifold boundary at vertex " + std::to_string(v));

  std::vector<bool> used(m.num_edges(), false);
  std::vector<std::vector<int>> cycles;
  for (int v0 = 0; v0 < m.num_vertices(); ++v0) {
    if (incident[v0].empty() || used[incident[v0][0]]) continue;
    if (used[incident[v0][1]]) continue;
    std::vector<int> cycle;
    int v = v0, e = incident[v0][0];
    while (true) {
      cycle.push_back(v);
      used[e] = true;
      v = (m.edges[e][0] == v) ? m.edges[e][1] : m.edges[e][0];
      if (v == v0) break;
      e = (incident[v][0] == e) ? incident[v][1] : incident[v][0];
    }
    cycles.push_back(std::move(cycle));
  }

  auto bbox_key = [&](const std::vector<int>& c) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (int v : c) {
      lo_x = std::min(lo_x, m.vertices[v].x());
      lo_y = std::min(lo_y, m.vertices[v].y());
      hi_x = std::max(hi_x, m.vertices[v].x());
      hi_y = std::max(hi_y, m.vertices[v].y());
    }
    return std::array<double, 4>{-(hi_x - lo_x) * (hi_y - lo_y), lo_x, lo_y, hi_x};
  };
  std::sort(cycles.begin(), cycles.end(), [&](const auto& a, const auto& b) {
    return bbox_key(a) < bbox_key(b);
  });
  return cycles;
}

// Checks every structural invariant; pure, never throws on bad meshes.
inline ValidationReport validate(const Mesh& m) {
  ValidationReport rep;

  for (int t = 0; t < m.num_triangles(); ++t)
    if (m.area(t) <= 0)
      rep.fail("triangle " + std::to_string(t) + " has non-positive area");

  int boundary_edges = 0;
  for (int e = 0; e < m.num_edges(); ++e) {
    int cnt = (m.edge_tris[e][0] >= 0) + (m.edge_tris[e][1] >= 0);
    if (cnt == 0) rep.fail("edge " + std::to_string(e) + " has no incident triangle");
    if (cnt == 1) {
      ++boundary_edges;
      if (m.edge_tag[e] < 0) rep.fail("boundary edge " + std::to_string(e) + " lacks a component tag");
    } else if (m.edge_tag[e] != kInteriorTag) {
      rep.fail("interior edge " + std::to_string(e) + " carries a boundary tag");
    }
  }

  int V = m.num_vertices(), E = m.num_edges(), T = m.num_triangles(), J = m.num_holes;
  if (V - E + T != 1 - J)
    rep.fail("Euler identity violated: V-E+T = " + std::to_string(V - E + T) +
             ", expected " + std::to_string(1 - J));
  int V_int = m.num_interior_vertices();
  int E_int = m.num_interior_edges();
  if (E_int != V_int + T + J - 1)
    rep.fail("interior identity violated: E_int = " + std::to_string(E_int) + ", expected " +
             std::to_string(V_int + T + J - 1));

  try {
    auto cycles = boundary_components(m);
    if (static_cast<int>(cycles.size()) != J + 1)
      rep.fail("expected " + std::to_string(J + 1) + " boundary components, found " +
               std::to_string(cycles.size()));
    size_t cycle_vertices = 0;
    for (const auto& c : cycles) cycle_vertices += c.size();
    if (static_cast<int>(cycle_vertices) != boundary_edges)
      rep.fail("boundary cycles do not cover all boundary edges");
  } catch (const std::exception& ex) {
    rep.fail(ex.what());
  }

  std::vector<char> vertex_on_boundary(m.num_vertices(), 0);
  for (int e = 0; e < m.num_edges(); ++e)
    if (m.edge_tris[e][1] < 0) {
      vertex_on_boundary[m.edges[e][0]] = 1;
      vertex_on_boundary[m.edges[e][1]] = 1;
    }
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (vertex_on_boundary[v] && m.vertex_tag[v] < 0)
      rep.fail("boundary vertex " + std::to_string(v) + " tagged interior");
    if (!vertex_on_boundary[v] && m.vertex_tag[v] != kInteriorTag)
      rep.fail("interior vertex " + std::to_string(v) + " carries a boundary tag");
  }

  return rep;
}

// ---- JSON schema (version 1) ------------------------------------------------
// {"version":1,"vertices":[[x,y],...],"triangles":[[i,j,k],...],
//  "boundary_tags":{"vertices":[t0,...]}}

inline nlohmann::json mesh_to_json(const Mesh& m) {
  nlohmann::json j;
  j["version"] = 1;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : m.vertices) verts.push_back({v.x(), v.y()});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
  j["boundary_tags"]["vertices"] = m.vertex_tag;
  return j;
}

inline Mesh mesh_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw std::invalid_argument("unsupported mesh file version");
  std::vector<Vec2> verts;
  for (const auto& v : j.at("vertices")) verts.emplace_back(v[0].get<double>(), v[1].get<double>());
  std::vector<std::array<int, 3>> tris;
  for (const auto& t : j.at("triangles"))
    tris.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
  std::vector<int> vtags = j.at("boundary_tags").at("vertices").get<std::vector<int>>();
  if (vtags.size() != verts.size())
    throw std::invalid_argument("boundary tag array size mismatch");
  int J = 0;
  for (int t : vtags) J = std::max(J, t);
  return Mesh::from_cells(std::move(verts), std::move(tris), std::move(vtags), J);
}

inline void save_mesh(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << mesh_to_json(m).dump(2) << "\n";
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return mesh_from_json(j);
}

}  // namespace platemix
