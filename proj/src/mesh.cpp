#include "fpi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace fpi {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::uint64_t face_key(std::array<int, 3> f) {
  std::sort(f.begin(), f.end());
  return (static_cast<std::uint64_t>(f[0]) << 42) |
         (static_cast<std::uint64_t>(f[1]) << 21) | static_cast<std::uint64_t>(f[2]);
}

constexpr std::array<std::array<int, 2>, 6> kTetEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
constexpr std::array<std::array<int, 3>, 4> kTetFaces{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

}  // namespace

// ---------------------------------------------------------------------------
// Mesh3D

Mesh3D::Mesh3D(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets)
    : vertices_(std::move(vertices)), tets_(std::move(tets)) {
  const int nv = num_vertices();
  if (nv >= (1 << 21)) throw std::invalid_argument("Mesh3D: too many vertices");
  for (int t = 0; t < num_tets(); ++t) {
    for (int v : tets_[t])
      if (v < 0 || v >= nv) throw std::invalid_argument("Mesh3D: vertex index out of range");
    if (!(signed_volume(t) > 0.0))
      throw std::invalid_argument("Mesh3D: tet " + std::to_string(t) + " is not positively oriented");
  }

  tet_edges_.resize(tets_.size());
  for (int t = 0; t < num_tets(); ++t) {
    for (int e = 0; e < 6; ++e) {
      const int a = tets_[t][kTetEdges[e][0]];
      const int b = tets_[t][kTetEdges[e][1]];
      auto [it, inserted] = edge_lookup_.try_emplace(edge_key(a, b), num_edges());
      if (inserted) edges_.push_back({std::min(a, b), std::max(a, b)});
      tet_edges_[t][e] = it->second;
    }
    for (const auto& f : kTetFaces) ++face_count_[face_key({tets_[t][f[0]], tets_[t][f[1]], tets_[t][f[2]]})];
  }

  for (int t = 0; t < num_tets(); ++t) {
    for (const auto& f : kTetFaces) {
      std::array<int, 3> face{tets_[t][f[0]], tets_[t][f[1]], tets_[t][f[2]]};
      if (face_count_.at(face_key(face)) != 1) continue;
      const bool on_plate = std::all_of(face.begin(), face.end(), [&](int v) {
        return std::abs(vertices_[v].z()) <= kGeomTol;
      });
      boundary_faces_.push_back({face, on_plate ? BoundaryTag::Plate : BoundaryTag::S});
    }
  }
}

int Mesh3D::edge_index(int a, int b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  return it == edge_lookup_.end() ? -1 : it->second;
}

int Mesh3D::face_multiplicity(std::array<int, 3> face) const {
  auto it = face_count_.find(face_key(face));
  return it == face_count_.end() ? 0 : it->second;
}

double Mesh3D::signed_volume(int t) const {
  const auto& tet = tets_[t];
  Mat3 j;
  j.col(0) = vertices_[tet[1]] - vertices_[tet[0]];
  j.col(1) = vertices_[tet[2]] - vertices_[tet[0]];
  j.col(2) = vertices_[tet[3]] - vertices_[tet[0]];
  return j.determinant() / 6.0;
}

double Mesh3D::total_volume() const {
  double sum = 0.0;
  for (int t = 0; t < num_tets(); ++t) sum += signed_volume(t);
  return sum;
}

// ---------------------------------------------------------------------------
// Mesh2D

Mesh2D::Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t) {
    for (int v : triangles_[t])
      if (v < 0 || v >= nv) throw std::invalid_argument("Mesh2D: vertex index out of range");
    if (!(signed_area(t) > 0.0))
      throw std::invalid_argument("Mesh2D: triangle " + std::to_string(t) + " is not positively oriented");
  }

  std::vector<int> edge_count;
  tri_edges_.resize(triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      auto [it, inserted] = edge_lookup_.try_emplace(edge_key(a, b), num_edges());
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_count.push_back(0);
      }
      ++edge_count[it->second];
      tri_edges_[t][i] = it->second;
    }
  }

  boundary_vertex_.assign(nv, 0);
  boundary_edge_.assign(edges_.size(), 0);
  for (int e = 0; e < num_edges(); ++e) {
    if (edge_count[e] != 1) continue;
    boundary_edge_[e] = 1;
    boundary_edges_.push_back(edges_[e]);
    boundary_vertex_[edges_[e][0]] = 1;
    boundary_vertex_[edges_[e][1]] = 1;
  }
}

int Mesh2D::edge_index(int a, int b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  return it == edge_lookup_.end() ? -1 : it->second;
}

double Mesh2D::signed_area(int t) const {
  const auto& tri = triangles_[t];
  const Vec2 a = vertices_[tri[1]] - vertices_[tri[0]];
  const Vec2 b = vertices_[tri[2]] - vertices_[tri[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double Mesh2D::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t) sum += signed_area(t);
  return sum;
}

// ---------------------------------------------------------------------------
// Builders

Mesh3D build_unit_cube_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_unit_cube_mesh: n must be >= 1");
  const int m = n + 1;
  auto index = [m](int i, int j, int k) { return (i * m + j) * m + k; };

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(m) * m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        vertices.emplace_back(double(i) / n, double(j) / n, -1.0 + double(k) / n);
  // Exact top layer so the x3 = 0 classification is not subject to rounding.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) vertices[index(i, j, n)].z() = 0.0;

  // Kuhn subdivision: one tet per monotone lattice path along the main diagonal.
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> paths;
  do paths.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<std::array<int, 4>> tets;
  tets.reserve(6 * static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (const auto& path : paths) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = index(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[path[s]];
            tet[s + 1] = index(c[0], c[1], c[2]);
          }
          Mat3 jac;
          for (int s = 0; s < 3; ++s) jac.col(s) = vertices[tet[s + 1]] - vertices[tet[0]];
          if (jac.determinant() < 0.0) std::swap(tet[2], tet[3]);
          tets.push_back(tet);
        }
  return Mesh3D(std::move(vertices), std::move(tets));
}

BoundaryTag classify_boundary_face(const Mesh3D& mesh, std::array<int, 3> face) {
  const int mult = mesh.face_multiplicity(face);
  if (mult == 0) throw std::invalid_argument("classify_boundary_face: not a mesh face");
  if (mult != 1) throw std::invalid_argument("classify_boundary_face: interior face");
  for (int v : face)
    if (std::abs(mesh.vertices()[v].z()) > kGeomTol) return BoundaryTag::S;
  return BoundaryTag::Plate;
}

std::vector<BoundaryFace> classify_boundary(const Mesh3D& mesh) {
  std::vector<BoundaryFace> out;
  out.reserve(mesh.boundary_faces().size());
  for (const auto& f : mesh.boundary_faces())
    out.push_back({f.vertices, classify_boundary_face(mesh, f.vertices)});
  return out;
}

PlateExtraction extract_plate_mesh(const Mesh3D& mesh) {
  const auto& faces = mesh.boundary_faces();
  const auto& x = mesh.vertices();

  std::vector<int> plate_faces;
  std::vector<int> plate_vertices;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    if (faces[f].tag != BoundaryTag::Plate) continue;
    for (int v : faces[f].vertices) {
      if (std::abs(x[v].z()) > kGeomTol)
        throw std::invalid_argument("extract_plate_mesh: PLATE face is not planar at x3 = 0");
      plate_vertices.push_back(v);
    }
    plate_faces.push_back(f);
  }
  if (plate_faces.empty()) throw std::invalid_argument("extract_plate_mesh: mesh has no PLATE face");

  std::sort(plate_vertices.begin(), plate_vertices.end());
  plate_vertices.erase(std::unique(plate_vertices.begin(), plate_vertices.end()), plate_vertices.end());
  std::sort(plate_vertices.begin(), plate_vertices.end(), [&](int a, int b) {
    if (x[a].x() != x[b].x()) return x[a].x() < x[b].x();
    return x[a].y() < x[b].y();
  });

  TraceMap trace;
  trace.vertex3_to_vertex2.assign(mesh.num_vertices(), -1);
  std::vector<Vec2> vertices2;
  for (int v3 : plate_vertices) {
    trace.vertex3_to_vertex2[v3] = static_cast<int>(vertices2.size());
    trace.vertex2_to_vertex3.push_back(v3);
    vertices2.emplace_back(x[v3].x(), x[v3].y());
  }

  std::vector<std::array<int, 3>> triangles;
  for (int f : plate_faces) {
    std::array<int, 3> tri{};
    for (int i = 0; i < 3; ++i) tri[i] = trace.vertex3_to_vertex2[faces[f].vertices[i]];
    const Vec2 a = vertices2[tri[1]] - vertices2[tri[0]];
    const Vec2 b = vertices2[tri[2]] - vertices2[tri[0]];
    if (a.x() * b.y() - a.y() * b.x() < 0.0) std::swap(tri[1], tri[2]);
    trace.face_to_triangle.push_back(static_cast<int>(triangles.size()));
    trace.triangle_to_face.push_back(f);
    triangles.push_back(tri);
  }
  trace.plate_faces = std::move(plate_faces);
  return {Mesh2D(std::move(vertices2), std::move(triangles)), std::move(trace)};
}

FsiMesh make_fsi_mesh(int n) {
  auto fluid = std::make_shared<const Mesh3D>(build_unit_cube_mesh(n));
  auto extracted = extract_plate_mesh(*fluid);
  FsiMesh out;
  out.n = n;
  out.fluid = std::move(fluid);
  out.plate = std::make_shared<const Mesh2D>(std::move(extracted.plate));
  out.trace = std::move(extracted.trace);
  return out;
}

namespace {
void check_permutation(std::span<const int> perm, int size) {
  if (static_cast<int>(perm.size()) != size) throw std::invalid_argument("permutation has wrong size");
  std::vector<char> seen(size, 0);
  for (int p : perm) {
    if (p < 0 || p >= size || seen[p]) throw std::invalid_argument("not a permutation");
    seen[p] = 1;
  }
}
}  // namespace

Mesh3D permute_vertices(const Mesh3D& mesh, std::span<const int> perm) {
  check_permutation(perm, mesh.num_vertices());
  std::vector<Vec3> vertices(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) vertices[perm[v]] = mesh.vertices()[v];
  auto tets = mesh.tets();
  for (auto& tet : tets)
    for (int& v : tet) v = perm[v];
  return Mesh3D(std::move(vertices), std::move(tets));
}

PlateExtraction permute_vertices(const Mesh2D& mesh, const TraceMap& trace, std::span<const int> perm) {
  check_permutation(perm, mesh.num_vertices());
  std::vector<Vec2> vertices(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) vertices[perm[v]] = mesh.vertices()[v];
  auto triangles = mesh.triangles();
  for (auto& tri : triangles)
    for (int& v : tri) v = perm[v];

  TraceMap out = trace;
  for (int& v2 : out.vertex3_to_vertex2)
    if (v2 >= 0) v2 = perm[v2];
  for (int v = 0; v < mesh.num_vertices(); ++v) out.vertex2_to_vertex3[perm[v]] = trace.vertex2_to_vertex3[v];
  return {Mesh2D(std::move(vertices), std::move(triangles)), std::move(out)};
}

void write_mesh_text(std::ostream& os, const Mesh3D& mesh) {
  os << "vertices " << mesh.num_vertices() << " tets " << mesh.num_tets() << '\n';
  os.precision(17);
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.tets()) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

}  // namespace fpi
