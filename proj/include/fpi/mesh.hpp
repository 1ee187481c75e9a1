#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace fpi {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Coordinate tolerance used for every geometric classification.
inline constexpr double kGeomTol = 1e-12;

enum class BoundaryTag { S, Plate };

struct BoundaryFace {
  std::array<int, 3> vertices;
  BoundaryTag tag;
};

/// Conforming tetrahedral mesh of the fluid box with tagged boundary faces.
///
/// Edges are numbered in order of first appearance when sweeping the tets;
/// local tet edges follow (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
class Mesh3D {
 public:
  Mesh3D(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 4>>& tets() const { return tets_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::array<int, 6>& tet_edges(int t) const { return tet_edges_[t]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_tets() const { return static_cast<int>(tets_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Global edge index of the edge joining a and b, or -1.
  int edge_index(int a, int b) const;
  /// Number of tets sharing the (unordered) face, 0 if it is not a face.
  int face_multiplicity(std::array<int, 3> face) const;

  double signed_volume(int t) const;
  double total_volume() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> tets_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::vector<BoundaryFace> boundary_faces_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
  std::unordered_map<std::uint64_t, int> face_count_;
};

/// Triangulation of the plate. Edge i of a triangle is opposite vertex i.
class Mesh2D {
 public:
  Mesh2D(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::array<int, 3>& tri_edges(int t) const { return tri_edges_[t]; }
  const std::vector<std::array<int, 2>>& boundary_edges() const { return boundary_edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool is_boundary_edge(int e) const { return boundary_edge_[e] != 0; }
  int edge_index(int a, int b) const;

  double signed_area(int t) const;
  double total_area() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 2>> boundary_edges_;
  std::vector<char> boundary_vertex_;
  std::vector<char> boundary_edge_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
};

/// Correspondence between PLATE faces of the fluid mesh and plate triangles.
struct TraceMap {
  std::vector<int> plate_faces;       ///< indices into Mesh3D::boundary_faces()
  std::vector<int> face_to_triangle;  ///< parallel to plate_faces
  std::vector<int> triangle_to_face;  ///< plate triangle -> boundary face index
  std::vector<int> vertex3_to_vertex2;  ///< -1 off the plate
  std::vector<int> vertex2_to_vertex3;
};

/// Fluid mesh, plate mesh and their trace map, shared by every solver.
struct FsiMesh {
  int n = 0;
  std::shared_ptr<const Mesh3D> fluid;
  std::shared_ptr<const Mesh2D> plate;
  TraceMap trace;
};

/// Unit-cube box [0,1]^2 x [-1,0] with n^3 cubes, six Kuhn tets each.
Mesh3D build_unit_cube_mesh(int n);

/// Tag a single boundary face; throws if the face is interior or absent.
BoundaryTag classify_boundary_face(const Mesh3D& mesh, std::array<int, 3> face);
/// Tags of every boundary face, in Mesh3D::boundary_faces() order.
std::vector<BoundaryFace> classify_boundary(const Mesh3D& mesh);

struct PlateExtraction {
  Mesh2D plate;
  TraceMap trace;
};
PlateExtraction extract_plate_mesh(const Mesh3D& mesh);

FsiMesh make_fsi_mesh(int n);

/// Relabel vertices: vertex v becomes perm[v].
Mesh3D permute_vertices(const Mesh3D& mesh, std::span<const int> perm);
/// Relabel plate vertices and keep the trace map consistent with the new labels.
PlateExtraction permute_vertices(const Mesh2D& mesh, const TraceMap& trace,
                                 std::span<const int> perm);

/// Debug dump: `vertices N tets M`, then coordinates, then tet indices.
void write_mesh_text(std::ostream& os, const Mesh3D& mesh);

}  // namespace fpi
