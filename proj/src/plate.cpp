#include "fpi/plate.hpp"

#include <stdexcept>

#include "fpi/forms.hpp"

namespace fpi {

namespace {

CsrMatrix add(const CsrMatrix& a, double sa, const CsrMatrix& b, double sb) {
  TripletBuffer t(a.rows(), a.cols());
  t.reserve(a.nnz() + b.nnz());
  for (const auto& [m, s] : {std::pair{&a, sa}, std::pair{&b, sb}})
    for (int r = 0; r < m->rows(); ++r)
      for (int k = m->row_ptr()[r]; k < m->row_ptr()[r + 1]; ++k) t.add(r, m->col_idx()[k], s * m->values()[k]);
  return to_csr(t);
}

}  // namespace

CsrMatrix assemble_morley(const SpacePtr& morley, double lambda) {
  if (morley->kind() != ElementKind::MorleyTri) throw std::invalid_argument("assemble_morley: Morley space expected");
  if (!(lambda > 0.0)) throw std::invalid_argument("assemble_morley: lambda must be positive");
  return add(assemble_mass(morley), lambda * lambda, assemble_hessian_form(morley), 1.0);
}

FeField pressure_trace(const FsiMesh& mesh, const SpacePtr& plate_p1, const FeField& pressure) {
  if (pressure.space->kind() != ElementKind::P1Tet || pressure.space->mesh3d() != mesh.fluid.get())
    throw std::invalid_argument("pressure_trace: P1 pressure on the fluid mesh expected");
  if (plate_p1->kind() != ElementKind::P1Tri || plate_p1->mesh2d() != mesh.plate.get())
    throw std::invalid_argument("pressure_trace: P1 space on the plate mesh expected");
  FeField trace(plate_p1);
  for (int v = 0; v < plate_p1->num_nodes(); ++v) trace.coeffs(v) = pressure.coeffs(mesh.trace.vertex2_to_vertex3[v]);
  return trace;
}

PlateSolver::PlateSolver(const FsiMesh& mesh, double lambda, W2Recovery recovery)
    : mesh_(&mesh), lambda_(lambda), recovery_(recovery) {
  morley_ = FunctionSpace::create(mesh.plate, ElementKind::MorleyTri);
  p2_ = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);
  p1_ = FunctionSpace::create(mesh.plate, ElementKind::P1Tri);
  morley_p1_ = assemble_mixed_mass(morley_, p1_);
  p2_morley_ = assemble_mixed_mass(p2_, morley_);
  system_ = std::make_unique<EliminatedSystem>(assemble_morley(morley_, lambda), morley_->boundary_nodes());

  p2_mean_ = assemble_mean_vector(p2_);
  interior_ = Eigen::VectorXd::Ones(p2_->dim());
  for (int node : p2_->boundary_nodes()) interior_(node) = 0.0;

  std::vector<int> share(p2_->num_nodes(), 0);
  for (int c = 0; c < p2_->num_cells(); ++c)
    for (int node : p2_->cell_nodes(c)) ++share[node];
  TripletBuffer avg(p2_->dim(), morley_->dim());
  for (int c = 0; c < p2_->num_cells(); ++c) {
    const auto zn = morley_->cell_nodes(c);
    for (int node : p2_->cell_nodes(c)) {
      const Eigen::VectorXd x = p2_->node_point(node).head<2>();
      const BasisValues basis = cell_basis_at(*morley_, c, x);
      for (int i = 0; i < basis.values.size(); ++i) avg.add(node, zn[i], basis.values(i) / share[node]);
    }
  }
  nodal_ = to_csr(avg);

  // [[M, m], [m^T, 0]] on P2, boundary nodes eliminated; the last unknown enforces zero mean.
  const CsrMatrix mass = assemble_mass(p2_);
  const Eigen::VectorXd& mean = p2_mean_;
  const int n = p2_->dim();
  TripletBuffer t(n + 1, n + 1);
  for (int r = 0; r < n; ++r) {
    for (int k = mass.row_ptr()[r]; k < mass.row_ptr()[r + 1]; ++k) t.add(r, mass.col_idx()[k], mass.values()[k]);
    t.add(r, n, mean(r));
    t.add(n, r, mean(r));
  }
  projection_ = std::make_unique<EliminatedSystem>(to_csr(t), p2_->boundary_nodes());
}

PlateLoad PlateSolver::load(const ScalarFunction2& f2, const ScalarFunction2& f3) const {
  PlateLoad l;
  l.morley = assemble_load(morley_, f3) + lambda_ * assemble_load(morley_, f2);
  l.f2_p2 = assemble_load(p2_, f2);
  l.f2_nodes = f2.value ? interpolate(p2_, f2).coeffs : Eigen::VectorXd::Zero(p2_->dim());
  return l;
}

Eigen::VectorXd PlateSolver::rhs(const PlateLoad& load, const FeField* pressure) const {
  Eigen::VectorXd b = load.morley;
  if (pressure) b += morley_p1_.multiply(pressure_trace(*mesh_, p1_, *pressure).coeffs);
  return b;
}

PlateSolution PlateSolver::solve(const PlateLoad& load, const FeField* pressure) const {
  if (load.morley.size() != morley_->dim() || load.f2_p2.size() != p2_->dim() ||
      load.f2_nodes.size() != p2_->dim())
    throw std::invalid_argument("PlateSolver::solve: load sizes do not match the plate spaces");
  FeField w1(morley_, system_->solve(rhs(load, pressure)));

  if (recovery_ == W2Recovery::Interpolation) {
    Eigen::VectorXd v = (lambda_ * nodal_.multiply(w1.coeffs) - load.f2_nodes).cwiseProduct(interior_);
    v -= (p2_mean_.dot(v) / p2_mean_.dot(interior_)) * interior_;
    return {std::move(w1), FeField(p2_, std::move(v))};
  }

  const int n = p2_->dim();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b.head(n) = lambda_ * p2_morley_.multiply(w1.coeffs) - load.f2_p2;
  FeField w2(p2_, projection_->solve(b).head(n));
  return {std::move(w1), std::move(w2)};
}

PlateSolution solve_plate(const FsiMesh& mesh, const PlateProblem& problem) {
  const PlateSolver solver(mesh, problem.lambda, problem.recovery);
  return solver.solve(solver.load(problem.f2, problem.f3), problem.pressure);
}

}  // namespace fpi
