#include "fpi/forms.hpp"

#include <stdexcept>

namespace fpi {

namespace {

void require_scalar(const SpacePtr& space, const char* who) {
  if (space->components() != 1) throw std::invalid_argument(std::string(who) + ": scalar space expected");
}

// Element matrix accumulation over all cells: local(i, j) += kernel(ev, i, j, q).
template <typename Kernel>
CsrMatrix assemble_bilinear(const SpacePtr& space, int degree, bool hessians, Kernel kernel) {
  CellEvaluator ev(space, make_quadrature(space->cell_type(), degree), hessians);
  const int nb = space->nodes_per_cell();
  TripletBuffer t(space->dim(), space->dim());
  t.reserve(static_cast<std::size_t>(space->num_cells()) * nb * nb);
  Eigen::MatrixXd local(nb, nb);
  for (int c = 0; c < space->num_cells(); ++c) {
    ev.reinit(c);
    local.setZero();
    for (int q = 0; q < ev.n_qp(); ++q) kernel(ev, q, local);
    const auto nodes = space->cell_nodes(c);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) t.add(nodes[i], nodes[j], local(i, j));
  }
  return to_csr(t);
}

template <typename Point, typename Fn>
Eigen::VectorXd assemble_linear(const SpacePtr& space, int degree, Fn f) {
  CellEvaluator ev(space, make_quadrature(space->cell_type(), degree));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space->dim());
  for (int c = 0; c < space->num_cells(); ++c) {
    ev.reinit(c);
    const auto nodes = space->cell_nodes(c);
    for (int q = 0; q < ev.n_qp(); ++q) {
      const double fq = f(Point(ev.point(q).head(Point::RowsAtCompileTime))) * ev.jxw(q);
      for (int i = 0; i < ev.n_basis(); ++i) b(nodes[i]) += fq * ev.value(i, q);
    }
  }
  return b;
}

}  // namespace

CsrMatrix assemble_mass(const SpacePtr& space) {
  require_scalar(space, "assemble_mass");
  return assemble_bilinear(space, 4, false, [](const CellEvaluator& ev, int q, Eigen::MatrixXd& local) {
    const auto v = ev.values().col(q);
    local.noalias() += ev.jxw(q) * v * v.transpose();
  });
}

CsrMatrix assemble_stiffness(const SpacePtr& space) {
  require_scalar(space, "assemble_stiffness");
  return assemble_bilinear(space, 2, false, [](const CellEvaluator& ev, int q, Eigen::MatrixXd& local) {
    const Eigen::MatrixXd& g = ev.gradients(q);
    local.noalias() += ev.jxw(q) * g * g.transpose();
  });
}

CsrMatrix assemble_hessian_form(const SpacePtr& space) {
  require_scalar(space, "assemble_hessian_form");
  return assemble_bilinear(space, 2, true, [](const CellEvaluator& ev, int q, Eigen::MatrixXd& local) {
    const Eigen::MatrixXd& h = ev.hessians(q);
    local.noalias() += ev.jxw(q) * h * h.transpose();
  });
}

CsrMatrix assemble_mixed_mass(const SpacePtr& rows, const SpacePtr& cols) {
  require_scalar(rows, "assemble_mixed_mass");
  require_scalar(cols, "assemble_mixed_mass");
  if (rows->cell_type() != cols->cell_type() || rows->num_cells() != cols->num_cells() ||
      rows->mesh2d() != cols->mesh2d() || rows->mesh3d() != cols->mesh3d())
    throw std::invalid_argument("assemble_mixed_mass: spaces live on different meshes");
  const QuadratureRule rule = make_quadrature(rows->cell_type(), 4);
  CellEvaluator er(rows, rule), ec(cols, rule);
  TripletBuffer t(rows->dim(), cols->dim());
  for (int c = 0; c < rows->num_cells(); ++c) {
    er.reinit(c);
    ec.reinit(c);
    const auto rn = rows->cell_nodes(c);
    const auto cn = cols->cell_nodes(c);
    for (int i = 0; i < er.n_basis(); ++i)
      for (int j = 0; j < ec.n_basis(); ++j) {
        double s = 0.0;
        for (int q = 0; q < er.n_qp(); ++q) s += er.jxw(q) * er.value(i, q) * ec.value(j, q);
        t.add(rn[i], cn[j], s);
      }
  }
  return to_csr(t);
}

Eigen::VectorXd assemble_mean_vector(const SpacePtr& space) {
  require_scalar(space, "assemble_mean_vector");
  if (space->cell_type() == CellType::Tri)
    return assemble_linear<Vec2>(space, 2, [](const Vec2&) { return 1.0; });
  return assemble_linear<Vec3>(space, 2, [](const Vec3&) { return 1.0; });
}

Eigen::VectorXd assemble_load(const SpacePtr& space, const ScalarFunction2& f, int degree) {
  require_scalar(space, "assemble_load");
  if (space->cell_type() != CellType::Tri) throw std::invalid_argument("assemble_load: plate space expected");
  if (!f.value) return Eigen::VectorXd::Zero(space->dim());
  return assemble_linear<Vec2>(space, degree, f.value);
}

Eigen::VectorXd assemble_load(const SpacePtr& space, const ScalarFunction3& f, int degree) {
  require_scalar(space, "assemble_load");
  if (space->cell_type() != CellType::Tet) throw std::invalid_argument("assemble_load: fluid space expected");
  if (!f.value) return Eigen::VectorXd::Zero(space->dim());
  return assemble_linear<Vec3>(space, degree, f.value);
}

Eigen::VectorXd assemble_load(const SpacePtr& space, const VectorFunction3& f, int degree) {
  if (space->components() != 3 || space->cell_type() != CellType::Tet)
    throw std::invalid_argument("assemble_load: vector fluid space expected");
  CellEvaluator ev(space, make_quadrature(CellType::Tet, degree));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space->dim());
  for (int c = 0; c < space->num_cells(); ++c) {
    ev.reinit(c);
    const auto nodes = space->cell_nodes(c);
    for (int q = 0; q < ev.n_qp(); ++q)
      for (int k = 0; k < 3; ++k) {
        if (!f.component[k].value) continue;
        const double fq = f.component[k].value(ev.point(q)) * ev.jxw(q);
        for (int i = 0; i < ev.n_basis(); ++i) b(space->dof(nodes[i], k)) += fq * ev.value(i, q);
      }
  }
  return b;
}

Eigen::VectorXd assemble_hessian_load(const SpacePtr& space, const ScalarFunction2& f, int degree) {
  require_scalar(space, "assemble_hessian_load");
  if (!f.hessian) throw std::invalid_argument("assemble_hessian_load: Hessian of the datum required");
  CellEvaluator ev(space, make_quadrature(CellType::Tri, degree), true);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space->dim());
  for (int c = 0; c < space->num_cells(); ++c) {
    ev.reinit(c);
    const auto nodes = space->cell_nodes(c);
    for (int q = 0; q < ev.n_qp(); ++q) {
      const Mat2 h = f.hessian(ev.point(q).head<2>());
      const Eigen::Vector4d hv(h(0, 0), h(0, 1), h(1, 0), h(1, 1));
      const Eigen::VectorXd contrib = ev.hessians(q) * hv * ev.jxw(q);
      for (int i = 0; i < ev.n_basis(); ++i) b(nodes[i]) += contrib(i);
    }
  }
  return b;
}

std::vector<int> trace_node_map(const FsiMesh& mesh, const FunctionSpace& fluid_space,
                                const FunctionSpace& plate_space) {
  const Mesh3D& m3 = *mesh.fluid;
  const Mesh2D& m2 = *mesh.plate;
  const bool quadratic = fluid_space.kind() == ElementKind::P2Tet;
  if (fluid_space.mesh3d() != &m3 || plate_space.mesh2d() != &m2)
    throw std::invalid_argument("trace_node_map: spaces do not live on the given meshes");
  if (quadratic != (plate_space.kind() == ElementKind::P2Tri))
    throw std::invalid_argument("trace_node_map: fluid and plate spaces differ in degree");

  const int nv3 = m3.num_vertices();
  const int nv2 = m2.num_vertices();
  std::vector<int> map(fluid_space.num_nodes(), -1);
  for (int node : fluid_space.tagged_nodes(BoundaryTag::Plate)) {
    int image = -1;
    if (node < nv3) {
      image = mesh.trace.vertex3_to_vertex2[node];
    } else {
      const auto& e = m3.edges()[node - nv3];
      const int a = mesh.trace.vertex3_to_vertex2[e[0]];
      const int b = mesh.trace.vertex3_to_vertex2[e[1]];
      const int e2 = (a >= 0 && b >= 0) ? m2.edge_index(a, b) : -1;
      image = e2 >= 0 ? nv2 + e2 : -1;
    }
    if (image < 0)
      throw std::runtime_error("trace_node_map: plate node " + std::to_string(node) + " has no trace image");
    map[node] = image;
  }
  return map;
}

}  // namespace fpi
