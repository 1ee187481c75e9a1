#include "fpi/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fpi {

// ---------------------------------------------------------------------------
// Quadrature

void gauss_jacobi(int points, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  if (points < 1) throw std::invalid_argument("gauss_jacobi: need at least one point");
  const double ab = alpha + beta;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 0; k < points; ++k) {
    const double two_k = 2.0 * k + ab;
    jacobi(k, k) = k == 0 ? (beta - alpha) / (ab + 2.0)
                          : (beta * beta - alpha * alpha) / (two_k * (two_k + 2.0));
    if (k + 1 < points) {
      const double kk = k + 1.0;
      const double t = 2.0 * kk + ab;
      const double b = std::sqrt(4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) /
                                 (t * t * (t + 1.0) * (t - 1.0)));
      jacobi(k, k + 1) = b;
      jacobi(k + 1, k) = b;
    }
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                              std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes.resize(points);
  weights.resize(points);
  for (int i = 0; i < points; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

QuadratureRule make_quadrature(CellType cell, int degree) {
  if (degree < 1 || degree > 8)
    throw std::invalid_argument("make_quadrature: unsupported degree " + std::to_string(degree));
  const int m = degree / 2 + 1;

  // 1D factors on [0,1]: weight (1-s)^alpha absorbed into the rule.
  auto factor = [m](double alpha, std::vector<double>& x, std::vector<double>& w) {
    gauss_jacobi(m, alpha, 0.0, x, w);
    const double scale = std::pow(0.5, alpha + 1.0);
    for (int i = 0; i < m; ++i) {
      x[i] = 0.5 * (1.0 + x[i]);
      w[i] *= scale;
    }
  };

  QuadratureRule rule;
  rule.cell = cell;
  rule.degree = degree;
  std::vector<double> xa, wa, xb, wb, xc, wc;
  factor(0.0, xa, wa);
  factor(1.0, xb, wb);
  if (cell == CellType::Tri) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        rule.points.emplace_back(xa[i] * (1.0 - xb[j]), xb[j], 0.0);
        rule.weights.push_back(wa[i] * wb[j]);
      }
  } else {
    factor(2.0, xc, wc);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const double c = xc[k];
          rule.points.emplace_back(xa[i] * (1.0 - xb[j]) * (1.0 - c), xb[j] * (1.0 - c), c);
          rule.weights.push_back(wa[i] * wb[j] * wc[k]);
        }
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Element kinds

CellType cell_type(ElementKind kind) {
  return (kind == ElementKind::P1Tet || kind == ElementKind::P2Tet) ? CellType::Tet : CellType::Tri;
}

int cell_dim(ElementKind kind) { return cell_type(kind) == CellType::Tet ? 3 : 2; }

int dof_count(ElementKind kind) {
  switch (kind) {
    case ElementKind::P1Tet: return 4;
    case ElementKind::P2Tet: return 10;
    case ElementKind::P1Tri: return 3;
    case ElementKind::P2Tri: return 6;
    case ElementKind::MorleyTri: return 6;
  }
  throw std::invalid_argument("unknown element kind");
}

bool is_lagrange(ElementKind kind) { return kind != ElementKind::MorleyTri; }

namespace {

bool is_quadratic(ElementKind kind) { return kind == ElementKind::P2Tet || kind == ElementKind::P2Tri; }

// Lagrange basis on the reference simplex through barycentric coordinates.
BasisValues lagrange_reference(ElementKind kind, const Vec3& xi) {
  const int d = cell_dim(kind);
  const int nv = d + 1;
  Eigen::VectorXd lam(nv);
  Eigen::MatrixXd dlam = Eigen::MatrixXd::Zero(nv, d);
  lam(0) = 1.0;
  for (int k = 0; k < d; ++k) {
    lam(k + 1) = xi(k);
    lam(0) -= xi(k);
    dlam(0, k) = -1.0;
    dlam(k + 1, k) = 1.0;
  }

  const int n = dof_count(kind);
  BasisValues out;
  out.values.resize(n);
  out.gradients.setZero(n, d);
  out.hessians.setZero(n, d * d);
  if (!is_quadratic(kind)) {
    out.values = lam;
    out.gradients = dlam;
    return out;
  }
  for (int i = 0; i < nv; ++i) {
    out.values(i) = lam(i) * (2.0 * lam(i) - 1.0);
    out.gradients.row(i) = (4.0 * lam(i) - 1.0) * dlam.row(i);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) out.hessians(i, a * d + b) = 4.0 * dlam(i, a) * dlam(i, b);
  }
  auto add_edge = [&](int row, int i, int j) {
    out.values(row) = 4.0 * lam(i) * lam(j);
    out.gradients.row(row) = 4.0 * (lam(i) * dlam.row(j) + lam(j) * dlam.row(i));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.hessians(row, a * d + b) = 4.0 * (dlam(i, a) * dlam(j, b) + dlam(j, a) * dlam(i, b));
  };
  if (d == 3)
    for (int e = 0; e < 6; ++e) add_edge(nv + e, kTetEdgeVertices[e][0], kTetEdgeVertices[e][1]);
  else
    for (int e = 0; e < 3; ++e) add_edge(nv + e, kTriEdgeVertices[e][0], kTriEdgeVertices[e][1]);
  return out;
}

Eigen::Matrix<double, 6, 1> monomials(const Vec2& s) {
  Eigen::Matrix<double, 6, 1> m;
  m << 1.0, s.x(), s.y(), s.x() * s.x(), s.x() * s.y(), s.y() * s.y();
  return m;
}

Eigen::Matrix<double, 6, 2> monomial_gradients(const Vec2& s) {
  Eigen::Matrix<double, 6, 2> g;
  g << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0 * s.x(), 0.0, s.y(), s.x(), 0.0, 2.0 * s.y();
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Morley

MorleyBasis::MorleyBasis(const std::array<Vec2, 3>& vertices, const std::array<Vec2, 3>& normals) {
  center_ = (vertices[0] + vertices[1] + vertices[2]) / 3.0;
  scale_ = std::max({(vertices[1] - vertices[0]).norm(), (vertices[2] - vertices[1]).norm(),
                     (vertices[0] - vertices[2]).norm()});
  Eigen::Matrix<double, 6, 6> dofs;
  for (int i = 0; i < 3; ++i) dofs.row(i) = monomials((vertices[i] - center_) / scale_).transpose();
  for (int i = 0; i < 3; ++i) {
    const Vec2 mid = 0.5 * (vertices[kTriEdgeVertices[i][0]] + vertices[kTriEdgeVertices[i][1]]);
    dofs.row(3 + i) = (monomial_gradients((mid - center_) / scale_) * normals[i]).transpose() / scale_;
  }
  // dofs * C = I with basis j = sum_k C(k, j) m_k.
  coeffs_ = dofs.fullPivLu().inverse().transpose();

  // Second derivatives of s1^2, s1 s2, s2^2 in row-major (xx, xy, yx, yy) layout.
  Eigen::Matrix<double, 6, 4> mono_hess = Eigen::Matrix<double, 6, 4>::Zero();
  mono_hess.row(3) << 2.0, 0.0, 0.0, 0.0;
  mono_hess.row(4) << 0.0, 1.0, 1.0, 0.0;
  mono_hess.row(5) << 0.0, 0.0, 0.0, 2.0;
  hessians_ = coeffs_ * mono_hess / (scale_ * scale_);
}

BasisValues MorleyBasis::evaluate(const Vec2& x) const {
  const Vec2 s = (x - center_) / scale_;
  BasisValues out;
  out.values = coeffs_ * monomials(s);
  out.gradients = coeffs_ * monomial_gradients(s) / scale_;
  out.hessians = hessians_;
  return out;
}

// ---------------------------------------------------------------------------
// Reference elements

ReferenceElement::ReferenceElement(ElementKind kind) : kind_(kind) {
  const int d = cell_dim(kind);
  std::vector<Vec3> vertices;
  vertices.push_back(Vec3::Zero());
  for (int k = 0; k < d; ++k) vertices.push_back(Vec3::Unit(k));
  nodes_ = vertices;
  if (kind == ElementKind::P1Tet || kind == ElementKind::P1Tri) return;
  if (d == 3) {
    for (const auto& e : kTetEdgeVertices) nodes_.push_back(0.5 * (vertices[e[0]] + vertices[e[1]]));
  } else {
    for (const auto& e : kTriEdgeVertices) nodes_.push_back(0.5 * (vertices[e[0]] + vertices[e[1]]));
  }
  if (kind == ElementKind::MorleyTri)
    normals_ = {Vec2(1.0, 1.0).normalized(), Vec2(-1.0, 0.0), Vec2(0.0, -1.0)};
}

BasisValues ReferenceElement::evaluate(const Vec3& ref_point) const {
  if (kind_ == ElementKind::MorleyTri) {
    static const MorleyBasis reference(
        {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)},
        {Vec2(1.0, 1.0).normalized(), Vec2(-1.0, 0.0), Vec2(0.0, -1.0)});
    return reference.evaluate(ref_point.head<2>());
  }
  return lagrange_reference(kind_, ref_point);
}

ReferenceElement make_element(ElementKind kind) {
  switch (kind) {
    case ElementKind::P1Tet:
    case ElementKind::P2Tet:
    case ElementKind::P1Tri:
    case ElementKind::P2Tri:
    case ElementKind::MorleyTri:
      return ReferenceElement(kind);
  }
  throw std::invalid_argument("make_element: unknown element kind");
}

// ---------------------------------------------------------------------------
// Function spaces

std::shared_ptr<const FunctionSpace> FunctionSpace::create(std::shared_ptr<const Mesh3D> mesh,
                                                           ElementKind kind, int components) {
  if (fpi::cell_type(kind) != CellType::Tet) throw std::invalid_argument("FunctionSpace: element needs a 2D mesh");
  if (components != 1 && components != 3) throw std::invalid_argument("FunctionSpace: components must be 1 or 3");
  auto* space = new FunctionSpace();
  space->kind_ = kind;
  space->components_ = components;
  space->mesh3_ = mesh;
  const int nv = mesh->num_vertices();
  const bool quadratic = kind == ElementKind::P2Tet;
  space->num_nodes_ = nv + (quadratic ? mesh->num_edges() : 0);
  space->num_cells_ = mesh->num_tets();
  space->nodes_per_cell_ = dof_count(kind);
  space->cell_nodes_.reserve(static_cast<std::size_t>(space->num_cells_) * space->nodes_per_cell_);
  for (int t = 0; t < mesh->num_tets(); ++t) {
    for (int v : mesh->tets()[t]) space->cell_nodes_.push_back(v);
    if (quadratic)
      for (int e : mesh->tet_edges(t)) space->cell_nodes_.push_back(nv + e);
  }
  space->node_points_ = mesh->vertices();
  if (quadratic)
    for (const auto& e : mesh->edges())
      space->node_points_.push_back(0.5 * (mesh->vertices()[e[0]] + mesh->vertices()[e[1]]));

  for (const auto& face : mesh->boundary_faces()) {
    auto& target = face.tag == BoundaryTag::S ? space->s_nodes_ : space->plate_nodes_;
    for (int v : face.vertices) target.push_back(v);
    if (quadratic)
      for (const auto& e : kTriEdgeVertices)
        target.push_back(nv + mesh->edge_index(face.vertices[e[0]], face.vertices[e[1]]));
  }
  for (auto* set : {&space->s_nodes_, &space->plate_nodes_}) {
    std::sort(set->begin(), set->end());
    set->erase(std::unique(set->begin(), set->end()), set->end());
  }
  space->boundary_nodes_ = space->s_nodes_;
  space->boundary_nodes_.insert(space->boundary_nodes_.end(), space->plate_nodes_.begin(),
                                space->plate_nodes_.end());
  space->finish_boundary_sets();
  return std::shared_ptr<const FunctionSpace>(space);
}

std::shared_ptr<const FunctionSpace> FunctionSpace::create(std::shared_ptr<const Mesh2D> mesh,
                                                           ElementKind kind) {
  if (fpi::cell_type(kind) != CellType::Tri) throw std::invalid_argument("FunctionSpace: element needs a 3D mesh");
  auto* space = new FunctionSpace();
  space->kind_ = kind;
  space->components_ = 1;
  space->mesh2_ = mesh;
  const int nv = mesh->num_vertices();
  const bool with_edges = kind != ElementKind::P1Tri;
  space->num_nodes_ = nv + (with_edges ? mesh->num_edges() : 0);
  space->num_cells_ = mesh->num_triangles();
  space->nodes_per_cell_ = dof_count(kind);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    for (int v : mesh->triangles()[t]) space->cell_nodes_.push_back(v);
    if (with_edges)
      for (int e : mesh->tri_edges(t)) space->cell_nodes_.push_back(nv + e);
  }
  for (const auto& p : mesh->vertices()) space->node_points_.emplace_back(p.x(), p.y(), 0.0);
  if (with_edges)
    for (const auto& e : mesh->edges()) {
      const Vec2 mid = 0.5 * (mesh->vertices()[e[0]] + mesh->vertices()[e[1]]);
      space->node_points_.emplace_back(mid.x(), mid.y(), 0.0);
    }
  for (int v = 0; v < nv; ++v)
    if (mesh->is_boundary_vertex(v)) space->boundary_nodes_.push_back(v);
  if (with_edges)
    for (int e = 0; e < mesh->num_edges(); ++e)
      if (mesh->is_boundary_edge(e)) space->boundary_nodes_.push_back(nv + e);
  space->finish_boundary_sets();
  return std::shared_ptr<const FunctionSpace>(space);
}

void FunctionSpace::finish_boundary_sets() {
  std::sort(boundary_nodes_.begin(), boundary_nodes_.end());
  boundary_nodes_.erase(std::unique(boundary_nodes_.begin(), boundary_nodes_.end()), boundary_nodes_.end());
  boundary_flag_.assign(num_nodes_, 0);
  for (int node : boundary_nodes_) boundary_flag_[node] = 1;
}

const std::vector<int>& FunctionSpace::tagged_nodes(BoundaryTag tag) const {
  if (!mesh3_) throw std::logic_error("tagged_nodes: only defined on fluid spaces");
  return tag == BoundaryTag::S ? s_nodes_ : plate_nodes_;
}

Vec2 FunctionSpace::edge_normal(int edge) const {
  if (!mesh2_) throw std::logic_error("edge_normal: only defined on plate spaces");
  const auto& e = mesh2_->edges()[edge];
  const Vec2 t = (mesh2_->vertices()[e[1]] - mesh2_->vertices()[e[0]]).normalized();
  return {t.y(), -t.x()};
}

std::vector<Vec3> FunctionSpace::cell_vertices(int cell) const {
  std::vector<Vec3> out;
  if (mesh3_) {
    for (int v : mesh3_->tets()[cell]) out.push_back(mesh3_->vertices()[v]);
  } else {
    for (int v : mesh2_->triangles()[cell]) {
      const Vec2& p = mesh2_->vertices()[v];
      out.emplace_back(p.x(), p.y(), 0.0);
    }
  }
  return out;
}

namespace {
// Pull reference Hessians (row-major rows) back to physical ones: J^-T H J^-1.
Eigen::MatrixXd map_hessians(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& inv) {
  const int d = static_cast<int>(inv.rows());
  Eigen::MatrixXd out(ref.rows(), d * d);
  Eigen::MatrixXd h(d, d);
  for (int i = 0; i < ref.rows(); ++i) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) h(a, b) = ref(i, a * d + b);
    const Eigen::MatrixXd hp = inv.transpose() * h * inv;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) out(i, a * d + b) = hp(a, b);
  }
  return out;
}

MorleyBasis morley_for_cell(const FunctionSpace& space, int cell) {
  const Mesh2D& mesh = *space.mesh2d();
  const auto& tri = mesh.triangles()[cell];
  std::array<Vec2, 3> vertices{mesh.vertices()[tri[0]], mesh.vertices()[tri[1]], mesh.vertices()[tri[2]]};
  std::array<Vec2, 3> normals;
  for (int i = 0; i < 3; ++i) normals[i] = space.edge_normal(mesh.tri_edges(cell)[i]);
  return MorleyBasis(vertices, normals);
}
}  // namespace

// ---------------------------------------------------------------------------
// Fields

FeField::FeField(SpacePtr s) : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(space->dim())) {}

FeField::FeField(SpacePtr s, Eigen::VectorXd c) : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space->dim()) throw std::invalid_argument("FeField: coefficient length mismatch");
}

FeField interpolate(SpacePtr space, const ScalarFunction3& f) {
  if (space->cell_type() != CellType::Tet || space->components() != 1)
    throw std::invalid_argument("interpolate: scalar 3D function needs a scalar fluid space");
  if (!f.value) throw std::invalid_argument("interpolate: missing value");
  FeField out(space);
  for (int node = 0; node < space->num_nodes(); ++node) out.coeffs(node) = f.value(space->node_point(node));
  return out;
}

FeField interpolate(SpacePtr space, const VectorFunction3& f) {
  if (space->cell_type() != CellType::Tet || space->components() != 3)
    throw std::invalid_argument("interpolate: vector function needs a vector fluid space");
  FeField out(space);
  for (int c = 0; c < 3; ++c) {
    if (!f.component[c].value) throw std::invalid_argument("interpolate: missing component value");
    for (int node = 0; node < space->num_nodes(); ++node)
      out.coeffs(space->dof(node, c)) = f.component[c].value(space->node_point(node));
  }
  return out;
}

FeField interpolate(SpacePtr space, const ScalarFunction2& f) {
  if (space->cell_type() != CellType::Tri) throw std::invalid_argument("interpolate: 2D function needs a plate space");
  if (!f.value) throw std::invalid_argument("interpolate: missing value");
  FeField out(space);
  const int nv = space->mesh2d()->num_vertices();
  if (space->kind() == ElementKind::MorleyTri && !f.gradient)
    throw std::invalid_argument("interpolate: Morley interpolation needs the gradient");
  for (int node = 0; node < space->num_nodes(); ++node) {
    const Vec2 p = space->node_point(node).head<2>();
    if (space->kind() == ElementKind::MorleyTri && node >= nv)
      out.coeffs(node) = f.gradient(p).dot(space->edge_normal(node - nv));
    else
      out.coeffs(node) = f.value(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cell evaluation

CellMap cell_map(const FunctionSpace& space, int cell) {
  const auto vertices = space.cell_vertices(cell);
  const int d = space.cell_dim();
  CellMap map;
  map.origin = vertices[0];
  map.jacobian.resize(d, d);
  for (int k = 0; k < d; ++k) map.jacobian.col(k) = (vertices[k + 1] - vertices[0]).head(d);
  map.det = map.jacobian.determinant();
  map.inverse = map.jacobian.inverse();
  return map;
}

CellEvaluator::CellEvaluator(SpacePtr space, QuadratureRule rule, bool with_hessians)
    : space_(std::move(space)), rule_(std::move(rule)), with_hessians_(with_hessians) {
  if (rule_.cell != space_->cell_type()) throw std::invalid_argument("CellEvaluator: rule/space cell mismatch");
  n_basis_ = space_->nodes_per_cell();
  if (is_lagrange(space_->kind())) {
    const ReferenceElement element(space_->kind());
    for (const auto& p : rule_.points) reference_.push_back(element.evaluate(p));
  }
  jxw_.resize(rule_.size());
  points_.resize(rule_.size());
  values_.resize(n_basis_, rule_.size());
  grads_.resize(rule_.size());
  hess_.resize(rule_.size());
}

void CellEvaluator::reinit(int cell) {
  cell_ = cell;
  const CellMap map = cell_map(*space_, cell);
  const int d = space_->cell_dim();
  const double measure = std::abs(map.det);
  for (int q = 0; q < rule_.size(); ++q) {
    jxw_[q] = rule_.weights[q] * measure;
    points_[q] = map.origin;
    points_[q].head(d) += map.jacobian * rule_.points[q].head(d);
  }

  if (space_->kind() == ElementKind::MorleyTri) {
    const MorleyBasis basis = morley_for_cell(*space_, cell);
    for (int q = 0; q < rule_.size(); ++q) {
      BasisValues b = basis.evaluate(points_[q].head<2>());
      values_.col(q) = b.values;
      grads_[q] = std::move(b.gradients);
      if (with_hessians_) hess_[q] = std::move(b.hessians);
    }
    return;
  }

  const Eigen::MatrixXd& inv = map.inverse;
  for (int q = 0; q < rule_.size(); ++q) {
    const BasisValues& ref = reference_[q];
    values_.col(q) = ref.values;
    grads_[q].noalias() = ref.gradients * inv;
    if (with_hessians_) hess_[q] = map_hessians(ref.hessians, inv);
  }
}

BasisValues cell_basis_at(const FunctionSpace& space, int cell, const Eigen::VectorXd& x) {
  const int d = space.cell_dim();
  if (x.size() < d) throw std::invalid_argument("cell_basis_at: point dimension mismatch");
  if (space.kind() == ElementKind::MorleyTri) return morley_for_cell(space, cell).evaluate(x.head<2>());

  const CellMap map = cell_map(space, cell);
  Vec3 xi = Vec3::Zero();
  xi.head(d) = map.inverse * (x.head(d) - map.origin.head(d));
  BasisValues ref = ReferenceElement(space.kind()).evaluate(xi);
  BasisValues out;
  out.values = ref.values;
  out.gradients = ref.gradients * map.inverse;
  out.hessians = map_hessians(ref.hessians, map.inverse);
  return out;
}

int locate_cell(const FunctionSpace& space, const Eigen::VectorXd& x) {
  const int d = space.cell_dim();
  if (x.size() < d) throw std::invalid_argument("locate_cell: point dimension mismatch");
  for (int c = 0; c < space.num_cells(); ++c) {
    const CellMap map = cell_map(space, c);
    const Eigen::VectorXd xi = map.inverse * (x.head(d) - map.origin.head(d));
    if (xi.minCoeff() >= -1e-12 && xi.sum() <= 1.0 + 1e-12) return c;
  }
  throw std::out_of_range("locate_cell: point outside the mesh");
}

Eigen::MatrixXd local_coefficients(const FeField& field, int cell) {
  const FunctionSpace& space = *field.space;
  const auto nodes = space.cell_nodes(cell);
  Eigen::MatrixXd out(nodes.size(), space.components());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (int c = 0; c < space.components(); ++c) out(i, c) = field.coeffs(space.dof(nodes[i], c));
  return out;
}

Eigen::VectorXd evaluate_in_cell(const FeField& field, int cell, const Eigen::VectorXd& x, int order,
                                 int comp) {
  const FunctionSpace& space = *field.space;
  if (comp < 0 || comp >= space.components()) throw std::invalid_argument("evaluate: bad component");
  if (order < 0 || order > 2) throw std::invalid_argument("evaluate: order must be 0, 1 or 2");
  if (order == 2 && (space.kind() == ElementKind::P1Tet || space.kind() == ElementKind::P1Tri))
    throw std::invalid_argument("evaluate: Hessians need a quadratic space");
  const BasisValues basis = cell_basis_at(space, cell, x);
  const Eigen::VectorXd local = local_coefficients(field, cell).col(comp);
  switch (order) {
    case 0: return Eigen::VectorXd::Constant(1, basis.values.dot(local));
    case 1: return basis.gradients.transpose() * local;
    default: return basis.hessians.transpose() * local;
  }
}

Eigen::VectorXd evaluate(const FeField& field, const Eigen::VectorXd& x, int order, int comp) {
  return evaluate_in_cell(field, locate_cell(*field.space, x), x, order, comp);
}

double l2_norm(const FeField& field) {
  CellEvaluator ev(field.space, make_quadrature(field.space->cell_type(), 4));
  double sum = 0.0;
  for (int c = 0; c < field.space->num_cells(); ++c) {
    ev.reinit(c);
    const Eigen::MatrixXd local = local_coefficients(field, c);
    for (int q = 0; q < ev.n_qp(); ++q)
      for (int k = 0; k < local.cols(); ++k) {
        double v = 0.0;
        for (int i = 0; i < ev.n_basis(); ++i) v += local(i, k) * ev.value(i, q);
        sum += ev.jxw(q) * v * v;
      }
  }
  return std::sqrt(sum);
}

double integral(const FeField& field) {
  if (field.space->components() != 1) throw std::invalid_argument("integral: scalar field expected");
  CellEvaluator ev(field.space, make_quadrature(field.space->cell_type(), 2));
  double sum = 0.0;
  for (int c = 0; c < field.space->num_cells(); ++c) {
    ev.reinit(c);
    const Eigen::MatrixXd local = local_coefficients(field, c);
    for (int q = 0; q < ev.n_qp(); ++q) {
      double v = 0.0;
      for (int i = 0; i < ev.n_basis(); ++i) v += local(i, 0) * ev.value(i, q);
      sum += ev.jxw(q) * v;
    }
  }
  return sum;
}

}  // namespace fpi
