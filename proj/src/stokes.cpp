#include "fpi/stokes.hpp"

#include <algorithm>
#include <stdexcept>

#include "fpi/forms.hpp"

namespace fpi {

namespace {

void add_scaled_blocks(TripletBuffer& t, const CsrMatrix& m, double scale, int components) {
  for (int r = 0; r < m.rows(); ++r)
    for (int k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
      for (int c = 0; c < components; ++c)
        t.add(components * r + c, components * m.col_idx()[k] + c, scale * m.values()[k]);
}

}  // namespace

CsrMatrix assemble_velocity_block(const SpacePtr& velocity, double lambda, double nu) {
  if (velocity->kind() != ElementKind::P2Tet || velocity->components() != 3)
    throw std::invalid_argument("assemble_velocity_block: vector P2 velocity expected");
  const SpacePtr scalar = FunctionSpace::create(velocity->shared_mesh3d(), ElementKind::P2Tet);
  const CsrMatrix mass = assemble_mass(scalar);
  const CsrMatrix stiff = assemble_stiffness(scalar);
  TripletBuffer t(velocity->dim(), velocity->dim());
  t.reserve(3 * (mass.nnz() + stiff.nnz()));
  add_scaled_blocks(t, mass, lambda, 3);
  add_scaled_blocks(t, stiff, nu, 3);
  return to_csr(t);
}

CsrMatrix assemble_divergence(const SpacePtr& velocity, const SpacePtr& pressure) {
  if (velocity->kind() != ElementKind::P2Tet || velocity->components() != 3)
    throw std::invalid_argument("assemble_divergence: vector P2 velocity expected");
  if (pressure->kind() != ElementKind::P1Tet || pressure->components() != 1)
    throw std::invalid_argument("assemble_divergence: P1 pressure expected");
  if (velocity->mesh3d() != pressure->mesh3d())
    throw std::invalid_argument("assemble_divergence: velocity and pressure live on different meshes");
  const QuadratureRule rule = make_quadrature(CellType::Tet, 2);
  CellEvaluator ev(velocity, rule), eq(pressure, rule);
  TripletBuffer t(pressure->dim(), velocity->dim());
  Eigen::MatrixXd local(4, 30);
  for (int c = 0; c < velocity->num_cells(); ++c) {
    ev.reinit(c);
    eq.reinit(c);
    local.setZero();
    for (int q = 0; q < ev.n_qp(); ++q) {
      const Eigen::MatrixXd& g = ev.gradients(q);
      for (int a = 0; a < 4; ++a) {
        const double w = ev.jxw(q) * eq.value(a, q);
        for (int i = 0; i < 10; ++i)
          for (int k = 0; k < 3; ++k) local(a, 3 * i + k) += w * g(i, k);
      }
    }
    const auto vn = velocity->cell_nodes(c);
    const auto pn = pressure->cell_nodes(c);
    for (int a = 0; a < 4; ++a)
      for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 3; ++k) t.add(pn[a], velocity->dof(vn[i], k), local(a, 3 * i + k));
  }
  return to_csr(t);
}

StokesBlocks assemble_stokes(const SpacePtr& velocity, const SpacePtr& pressure, double lambda, double nu) {
  if (!(lambda > 0.0) || !(nu > 0.0)) throw std::invalid_argument("assemble_stokes: lambda and nu must be positive");
  StokesBlocks blocks;
  blocks.b = assemble_divergence(velocity, pressure);
  blocks.a = assemble_velocity_block(velocity, lambda, nu);
  blocks.mean = assemble_mean_vector(pressure);

  const int nu_dofs = velocity->dim();
  const int np = pressure->dim();
  TripletBuffer t(nu_dofs + np + 1, nu_dofs + np + 1);
  t.reserve(blocks.a.nnz() + 2 * blocks.b.nnz() + 2 * np);
  for (int r = 0; r < nu_dofs; ++r)
    for (int k = blocks.a.row_ptr()[r]; k < blocks.a.row_ptr()[r + 1]; ++k)
      t.add(r, blocks.a.col_idx()[k], blocks.a.values()[k]);
  for (int r = 0; r < np; ++r)
    for (int k = blocks.b.row_ptr()[r]; k < blocks.b.row_ptr()[r + 1]; ++k) {
      t.add(nu_dofs + r, blocks.b.col_idx()[k], -blocks.b.values()[k]);
      t.add(blocks.b.col_idx()[k], nu_dofs + r, -blocks.b.values()[k]);
    }
  for (int r = 0; r < np; ++r) {
    t.add(nu_dofs + r, nu_dofs + np, blocks.mean(r));
    t.add(nu_dofs + np, nu_dofs + r, blocks.mean(r));
  }
  blocks.full = to_csr(t);
  return blocks;
}

VelocityConstraints velocity_constraints(const FsiMesh& mesh, const SpacePtr& velocity,
                                         const SpacePtr& plate_p2) {
  const std::vector<int> trace = trace_node_map(mesh, *velocity, *plate_p2);
  const auto& s_nodes = velocity->tagged_nodes(BoundaryTag::S);
  std::vector<char> on_s(velocity->num_nodes(), 0);
  for (int node : s_nodes) on_s[node] = 1;

  VelocityConstraints bc;
  for (int node : s_nodes)
    for (int k = 0; k < 3; ++k) bc.fixed_dofs.push_back(velocity->dof(node, k));
  for (int node : velocity->tagged_nodes(BoundaryTag::Plate)) {
    if (on_s[node]) continue;
    bc.fixed_dofs.push_back(velocity->dof(node, 0));
    bc.fixed_dofs.push_back(velocity->dof(node, 1));
    bc.fixed_dofs.push_back(velocity->dof(node, 2));
    bc.plate_dofs.push_back({velocity->dof(node, 2), trace[node]});
  }
  std::sort(bc.fixed_dofs.begin(), bc.fixed_dofs.end());
  return bc;
}

Eigen::VectorXd apply_velocity_bc(const VelocityConstraints& bc, int size, const FeField* plate_trace) {
  Eigen::VectorXd values = Eigen::VectorXd::Zero(size);
  if (!plate_trace) return values;
  if (plate_trace->space->kind() != ElementKind::P2Tri)
    throw std::invalid_argument("apply_velocity_bc: plate datum must be P2 on the plate mesh");
  for (const auto& [dof, node] : bc.plate_dofs) values(dof) = plate_trace->coeffs(node);
  return values;
}

StokesSolver::StokesSolver(const FsiMesh& mesh, double lambda, double nu) : lambda_(lambda) {
  velocity_ = FunctionSpace::create(mesh.fluid, ElementKind::P2Tet, 3);
  pressure_ = FunctionSpace::create(mesh.fluid, ElementKind::P1Tet);
  plate_p2_ = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);
  blocks_ = assemble_stokes(velocity_, pressure_, lambda, nu);
  bc_ = velocity_constraints(mesh, velocity_, plate_p2_);
  system_ = std::make_unique<EliminatedSystem>(blocks_.full, bc_.fixed_dofs);
}

Eigen::VectorXd StokesSolver::load_vector(const VectorFunction3& f1) const {
  return assemble_load(velocity_, f1);
}

StokesSolution StokesSolver::solve(const Eigen::VectorXd& velocity_load, const FeField* plate_trace) const {
  const int nu_dofs = velocity_->dim();
  const int np = pressure_->dim();
  const int n = nu_dofs + np + 1;
  if (velocity_load.size() != nu_dofs) throw std::invalid_argument("StokesSolver::solve: load size mismatch");
  if (plate_trace && plate_trace->space->mesh2d() != plate_p2_->mesh2d())
    throw std::invalid_argument("StokesSolver::solve: plate datum lives on another mesh");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.head(nu_dofs) = velocity_load;
  const Eigen::VectorXd x = system_->solve(rhs, apply_velocity_bc(bc_, n, plate_trace));
  return {FeField(velocity_, x.head(nu_dofs)), FeField(pressure_, x.segment(nu_dofs, np)), x(n - 1)};
}

StokesSolution solve_stokes(const FsiMesh& mesh, const StokesProblem& problem) {
  const StokesSolver solver(mesh, problem.lambda, problem.nu);
  return solver.solve(solver.load_vector(problem.f1), problem.plate_trace);
}

Eigen::VectorXd divergence_functional(const StokesBlocks& blocks, const FeField& u) {
  return blocks.b.multiply(u.coeffs);
}

}  // namespace fpi
