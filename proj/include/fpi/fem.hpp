#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fpi/mesh.hpp"

namespace fpi {

// ---------------------------------------------------------------------------
// Quadrature

enum class CellType { Tet, Tri };

/// Rule on the reference simplex (unit right-angled corner simplex).
/// Triangle points carry a zero third coordinate.
struct QuadratureRule {
  CellType cell = CellType::Tri;
  int degree = 0;
  std::vector<Vec3> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Collapsed-coordinate Gauss-Jacobi product rule, exact to `degree`, all weights positive.
QuadratureRule make_quadrature(CellType cell, int degree);

/// Gauss-Jacobi nodes/weights on [-1,1] for the weight (1-t)^alpha (1+t)^beta.
void gauss_jacobi(int points, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Elements

enum class ElementKind { P1Tet, P2Tet, P1Tri, P2Tri, MorleyTri };

CellType cell_type(ElementKind kind);
int cell_dim(ElementKind kind);
int dof_count(ElementKind kind);
bool is_lagrange(ElementKind kind);

/// Basis functions and derivatives at one point. Row i belongs to basis i;
/// Hessians are stored row-major, dim*dim entries per row.
struct BasisValues {
  Eigen::VectorXd values;
  Eigen::MatrixXd gradients;
  Eigen::MatrixXd hessians;
};

/// Morley basis on an arbitrary triangle. DOFs: the three vertex values, then
/// the normal derivative at the midpoint of edge i (opposite vertex i) along
/// `normals[i]`.
class MorleyBasis {
 public:
  MorleyBasis(const std::array<Vec2, 3>& vertices, const std::array<Vec2, 3>& normals);
  BasisValues evaluate(const Vec2& x) const;
  /// Hessians are constant on the cell.
  const Eigen::Matrix<double, 6, 4>& hessians() const { return hessians_; }

 private:
  Vec2 center_;
  double scale_;
  Eigen::Matrix<double, 6, 6> coeffs_;  // row j: monomial coefficients of basis j
  Eigen::Matrix<double, 6, 4> hessians_;
};

class ReferenceElement {
 public:
  explicit ReferenceElement(ElementKind kind);

  ElementKind kind() const { return kind_; }
  int dof_count() const { return fpi::dof_count(kind_); }
  int dim() const { return cell_dim(kind_); }

  /// Evaluate at a reference point (third coordinate ignored on triangles).
  BasisValues evaluate(const Vec3& ref_point) const;
  /// Lagrange nodes; for Morley, the vertices followed by the edge midpoints.
  const std::vector<Vec3>& nodes() const { return nodes_; }
  /// Morley only: outward unit normals of the reference edges.
  const std::array<Vec2, 3>& edge_normals() const { return normals_; }

 private:
  ElementKind kind_;
  std::vector<Vec3> nodes_;
  std::array<Vec2, 3> normals_{};
};

ReferenceElement make_element(ElementKind kind);

/// Local edge vertex pairs, matching Mesh3D::tet_edges / Mesh2D::tri_edges.
inline constexpr std::array<std::array<int, 2>, 6> kTetEdgeVertices{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 2>, 3> kTriEdgeVertices{{{1, 2}, {2, 0}, {0, 1}}};

// ---------------------------------------------------------------------------
// Function spaces and fields

/// Global DOF numbering. Nodes are vertices first, then edges (P2, Morley).
/// Vector spaces interleave components: dof = node * components + component.
class FunctionSpace {
 public:
  static std::shared_ptr<const FunctionSpace> create(std::shared_ptr<const Mesh3D> mesh,
                                                     ElementKind kind, int components = 1);
  static std::shared_ptr<const FunctionSpace> create(std::shared_ptr<const Mesh2D> mesh,
                                                     ElementKind kind);

  ElementKind kind() const { return kind_; }
  CellType cell_type() const { return fpi::cell_type(kind_); }
  int cell_dim() const { return fpi::cell_dim(kind_); }
  int components() const { return components_; }
  int num_nodes() const { return num_nodes_; }
  int dim() const { return num_nodes_ * components_; }
  int num_cells() const { return num_cells_; }
  int nodes_per_cell() const { return nodes_per_cell_; }
  int dof(int node, int comp = 0) const { return node * components_ + comp; }

  std::span<const int> cell_nodes(int cell) const {
    return {cell_nodes_.data() + static_cast<std::size_t>(cell) * nodes_per_cell_,
            static_cast<std::size_t>(nodes_per_cell_)};
  }
  /// Nodal point: vertex position or edge midpoint (z = 0 on the plate).
  const Vec3& node_point(int node) const { return node_points_[node]; }

  const Mesh3D* mesh3d() const { return mesh3_.get(); }
  const Mesh2D* mesh2d() const { return mesh2_.get(); }
  const std::shared_ptr<const Mesh3D>& shared_mesh3d() const { return mesh3_; }
  const std::shared_ptr<const Mesh2D>& shared_mesh2d() const { return mesh2_; }

  /// 3D spaces: nodes lying on a boundary face with the given tag.
  const std::vector<int>& tagged_nodes(BoundaryTag tag) const;
  /// 2D spaces: nodes on the plate boundary (vertices and edges).
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  bool is_boundary_node(int node) const { return boundary_flag_[node] != 0; }

  /// Morley: unit normal of an edge, oriented from its lower to higher vertex
  /// index and rotated clockwise.
  Vec2 edge_normal(int edge) const;

  /// Physical vertices of a cell (z = 0 for triangles).
  std::vector<Vec3> cell_vertices(int cell) const;

 private:
  FunctionSpace() = default;
  void finish_boundary_sets();

  ElementKind kind_ = ElementKind::P1Tet;
  int components_ = 1;
  int num_nodes_ = 0;
  int num_cells_ = 0;
  int nodes_per_cell_ = 0;
  std::shared_ptr<const Mesh3D> mesh3_;
  std::shared_ptr<const Mesh2D> mesh2_;
  std::vector<int> cell_nodes_;
  std::vector<Vec3> node_points_;
  std::vector<int> s_nodes_, plate_nodes_;
  std::vector<int> boundary_nodes_;
  std::vector<char> boundary_flag_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

struct FeField {
  SpacePtr space;
  Eigen::VectorXd coeffs;

  FeField() = default;
  explicit FeField(SpacePtr s);
  FeField(SpacePtr s, Eigen::VectorXd c);
};

/// Analytic scalar field with optional derivatives (empty std::function = absent).
template <int Dim>
struct ScalarFunction {
  using Point = Eigen::Matrix<double, Dim, 1>;
  using Hessian = Eigen::Matrix<double, Dim, Dim>;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
  std::function<Hessian(const Point&)> hessian;
};
using ScalarFunction2 = ScalarFunction<2>;
using ScalarFunction3 = ScalarFunction<3>;

struct VectorFunction3 {
  std::array<ScalarFunction3, 3> component;
};

/// Lagrange: nodal values; Morley: vertex values and midpoint normal derivatives.
FeField interpolate(SpacePtr space, const ScalarFunction3& f);
FeField interpolate(SpacePtr space, const ScalarFunction2& f);
FeField interpolate(SpacePtr space, const VectorFunction3& f);

// ---------------------------------------------------------------------------
// Cell evaluation

/// Physical basis values on one cell at the points of a quadrature rule.
class CellEvaluator {
 public:
  CellEvaluator(SpacePtr space, QuadratureRule rule, bool with_hessians = false);

  void reinit(int cell);

  int cell() const { return cell_; }
  int n_qp() const { return rule_.size(); }
  int n_basis() const { return n_basis_; }
  double jxw(int q) const { return jxw_[q]; }
  const Vec3& point(int q) const { return points_[q]; }
  double value(int i, int q) const { return values_(i, q); }
  /// n_basis x n_qp
  const Eigen::MatrixXd& values() const { return values_; }
  /// n_basis x dim
  const Eigen::MatrixXd& gradients(int q) const { return grads_[q]; }
  /// n_basis x dim*dim, row-major
  const Eigen::MatrixXd& hessians(int q) const { return hess_[q]; }
  const FunctionSpace& space() const { return *space_; }

 private:
  SpacePtr space_;
  QuadratureRule rule_;
  bool with_hessians_;
  int n_basis_;
  int cell_ = -1;
  std::vector<BasisValues> reference_;
  std::vector<double> jxw_;
  std::vector<Vec3> points_;
  Eigen::MatrixXd values_;
  std::vector<Eigen::MatrixXd> grads_;
  std::vector<Eigen::MatrixXd> hess_;
};

/// Affine data of a cell: x = origin + jacobian * xi.
struct CellMap {
  Vec3 origin = Vec3::Zero();
  Eigen::MatrixXd jacobian;
  Eigen::MatrixXd inverse;
  double det = 0.0;
};
CellMap cell_map(const FunctionSpace& space, int cell);

/// Basis (physical derivatives) of one cell at a physical point.
BasisValues cell_basis_at(const FunctionSpace& space, int cell, const Eigen::VectorXd& x);

/// Brute-force point location; throws std::out_of_range outside the mesh.
int locate_cell(const FunctionSpace& space, const Eigen::VectorXd& x);

/// Value (order 0), gradient (order 1) or row-major Hessian (order 2) of one component.
Eigen::VectorXd evaluate(const FeField& field, const Eigen::VectorXd& x, int order, int comp = 0);
/// Same, restricted to one cell (broken evaluation for nonconforming fields).
Eigen::VectorXd evaluate_in_cell(const FeField& field, int cell, const Eigen::VectorXd& x,
                                 int order, int comp = 0);

/// Local coefficient gather: entry (i, c) = coefficient of node i, component c.
Eigen::MatrixXd local_coefficients(const FeField& field, int cell);

/// L2 norm of a finite element field (all components), degree-4 quadrature.
double l2_norm(const FeField& field);
/// Integral of a scalar field over its domain.
double integral(const FeField& field);

}  // namespace fpi
