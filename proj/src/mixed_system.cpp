#include "fpi/mixed_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "fpi/forms.hpp"
#include "fpi/stokes.hpp"
#include "fpi/verification.hpp"

namespace fpi {

MixedSpaces::MixedSpaces(const FsiMesh& mesh) : mesh_(&mesh) {
  velocity_ = FunctionSpace::create(mesh.fluid, ElementKind::P2Tet, 3);
  pressure_ = FunctionSpace::create(mesh.fluid, ElementKind::P1Tet);
  morley_ = FunctionSpace::create(mesh.plate, ElementKind::MorleyTri);
  plate_p2_ = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);

  const VelocityConstraints bc = velocity_constraints(mesh, velocity_, plate_p2_);
  trace_pairs_ = bc.plate_dofs;
  std::vector<char> is_u3(velocity_->dim(), 0);
  for (const auto& pr : trace_pairs_) is_u3[pr[0]] = 1;
  for (int d : bc.fixed_dofs)
    if (!is_u3[d]) fixed_.push_back(d);
  for (int node : morley_->boundary_nodes()) fixed_.push_back(velocity_->dim() + node);
  std::sort(fixed_.begin(), fixed_.end());

  std::vector<char> flag(sigma_dofs(), 0);
  for (int d : fixed_) flag[d] = 1;
  for (int d = 0; d < sigma_dofs(); ++d)
    if (!flag[d]) free_.push_back(d);

  std::vector<int> g_index(plate_p2_->num_nodes(), -1);
  int ng = 0;
  for (int node = 0; node < plate_p2_->num_nodes(); ++node)
    if (!plate_p2_->is_boundary_node(node)) g_index[node] = ng++;
  std::vector<std::vector<int>> touching(plate_p2_->num_nodes());
  for (int c = 0; c < plate_p2_->num_cells(); ++c) {
    const auto nodes = plate_p2_->cell_nodes(c);
    for (int b : nodes) {
      if (g_index[b] >= 0) continue;
      for (int i : nodes)
        if (g_index[i] >= 0 && std::find(touching[b].begin(), touching[b].end(), i) == touching[b].end())
          touching[b].push_back(i);
    }
  }
  TripletBuffer gb(ng, plate_p2_->dim());
  for (int node = 0; node < plate_p2_->num_nodes(); ++node) {
    if (g_index[node] >= 0) {
      gb.add(g_index[node], node, 1.0);
      continue;
    }
    if (touching[node].empty()) throw std::invalid_argument("MixedSpaces: plate mesh too coarse for the g basis");
    for (int i : touching[node]) gb.add(g_index[i], node, 1.0 / static_cast<double>(touching[node].size()));
  }
  g_basis_ = to_csr(gb);
  pressure_mean_ = assemble_mean_vector(pressure_);
}

Eigen::VectorXd MixedSpaces::q0_to_p1(const Eigen::VectorXd& q0) const {
  const int last = pressure_->dim() - 1;
  if (q0.size() != last) throw std::invalid_argument("q0_to_p1: size mismatch");
  Eigen::VectorXd p(last + 1);
  p.head(last) = q0;
  p(last) = -pressure_mean_.head(last).dot(q0) / pressure_mean_(last);
  return p;
}

Eigen::VectorXd MixedSpaces::g_to_p2(const Eigen::VectorXd& g) const {
  if (g.size() != g_dofs()) throw std::invalid_argument("g_to_p2: size mismatch");
  return g_basis_.multiply_transpose(g);
}

CsrMatrix assemble_a_lambda(const MixedSpaces& spaces, double lambda, double rho) {
  if (!(lambda > 0.0) || !(rho >= 0.0)) throw std::invalid_argument("assemble_a_lambda: need lambda > 0, rho >= 0");
  const int nu = spaces.velocity_dofs();
  const CsrMatrix vel = assemble_velocity_block(spaces.velocity(), lambda, 1.0);
  const CsrMatrix mass = assemble_mass(spaces.morley());
  const CsrMatrix hess = assemble_hessian_form(spaces.morley());

  TripletBuffer t(spaces.sigma_dofs(), spaces.sigma_dofs());
  auto put = [&t](const CsrMatrix& m, int offset, double s) {
    for (int r = 0; r < m.rows(); ++r)
      for (int k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
        t.add(offset + r, offset + m.col_idx()[k], s * m.values()[k]);
  };
  put(vel, 0, 1.0);
  put(mass, nu, lambda);
  if (rho != 0.0) put(assemble_stiffness(spaces.morley()), nu, lambda * rho);
  put(hess, nu, 1.0 / lambda);
  return to_csr(t);
}

CsrMatrix assemble_b(const MixedSpaces& spaces) {
  const int nu = spaces.velocity_dofs();
  const int nq = spaces.q0_dofs();
  const int ng = spaces.g_dofs();
  const int last = nq;
  const CsrMatrix div = assemble_divergence(spaces.velocity(), spaces.pressure());
  const Eigen::VectorXd& pm = spaces.pressure_mean();
  const CsrMatrix p2_mass = assemble_mass(spaces.plate_p2());
  const CsrMatrix p2_morley = assemble_mixed_mass(spaces.plate_p2(), spaces.morley());
  const Eigen::VectorXd morley_mean = assemble_mean_vector(spaces.morley());

  TripletBuffer t(spaces.multiplier_dofs(), spaces.sigma_dofs());
  // -(psi_a, div v), psi_a = phi_a - (m_a / m_last) phi_last
  for (int a = 0; a < nq; ++a) {
    for (int k = div.row_ptr()[a]; k < div.row_ptr()[a + 1]; ++k) t.add(a, div.col_idx()[k], -div.values()[k]);
    const double s = pm(a) / pm(last);
    for (int k = div.row_ptr()[last]; k < div.row_ptr()[last + 1]; ++k)
      t.add(a, div.col_idx()[k], s * div.values()[k]);
  }

  // <h, v3> - <h, z> for each g basis function, then -(r, z).
  std::vector<int> plate_to_u3(spaces.plate_p2()->num_nodes(), -1);
  for (const auto& [dof, node] : spaces.trace_pairs()) plate_to_u3[node] = dof;
  const CsrMatrix& basis = spaces.g_basis();
  for (int j = 0; j < ng; ++j)
    for (int kb = basis.row_ptr()[j]; kb < basis.row_ptr()[j + 1]; ++kb) {
      const int node = basis.col_idx()[kb];
      const double w = basis.values()[kb];
      for (int k = p2_mass.row_ptr()[node]; k < p2_mass.row_ptr()[node + 1]; ++k) {
        const int dof = plate_to_u3[p2_mass.col_idx()[k]];
        if (dof >= 0) t.add(nq + j, dof, w * p2_mass.values()[k]);
      }
      for (int k = p2_morley.row_ptr()[node]; k < p2_morley.row_ptr()[node + 1]; ++k)
        t.add(nq + j, nu + p2_morley.col_idx()[k], -w * p2_morley.values()[k]);
    }
  for (int i = 0; i < morley_mean.size(); ++i) t.add(nq + ng, nu + i, -morley_mean(i));
  return to_csr(t);
}

MonolithicSolution solve_monolithic(const FsiMesh& mesh, double lambda, double rho, const FsiLoads& loads) {
  const MixedSpaces spaces(mesh);
  const CsrMatrix a = assemble_a_lambda(spaces, lambda, rho);
  const CsrMatrix b = assemble_b(spaces);
  const int ns = spaces.sigma_dofs();
  const int nm = spaces.multiplier_dofs();
  const int nu = spaces.velocity_dofs();

  TripletBuffer t(ns + nm, ns + nm);
  t.reserve(a.nnz() + 2 * b.nnz());
  for (int r = 0; r < ns; ++r)
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) t.add(r, a.col_idx()[k], a.values()[k]);
  for (int r = 0; r < nm; ++r)
    for (int k = b.row_ptr()[r]; k < b.row_ptr()[r + 1]; ++k) {
      t.add(ns + r, b.col_idx()[k], b.values()[k]);
      t.add(b.col_idx()[k], ns + r, b.values()[k]);
    }
  const EliminatedSystem system(to_csr(t), spaces.fixed_sigma());

  // F(v, z) = (f1, v) + (f3, z) - (1/lambda) sum_T (D^2 f2 : D^2 z)_T
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns + nm);
  rhs.head(nu) = assemble_load(spaces.velocity(), loads.f1);
  rhs.segment(nu, ns - nu) = assemble_load(spaces.morley(), loads.f3);
  if (loads.f2.value) rhs.segment(nu, ns - nu) -= assemble_hessian_load(spaces.morley(), loads.f2) / lambda;
  const Eigen::VectorXd x = system.solve(rhs);

  MonolithicSolution sol;
  sol.u = FeField(spaces.velocity(), x.head(nu));
  sol.w2 = FeField(spaces.morley(), x.segment(nu, ns - nu));
  Eigen::VectorXd f2i = Eigen::VectorXd::Zero(spaces.morley()->dim());
  if (loads.f2.value) f2i = interpolate(spaces.morley(), loads.f2).coeffs;
  sol.w1 = FeField(spaces.morley(), (sol.w2.coeffs + f2i) / lambda);
  sol.q0 = FeField(spaces.pressure(), spaces.q0_to_p1(x.segment(ns, spaces.q0_dofs())));
  sol.g = FeField(spaces.plate_p2(), spaces.g_to_p2(x.segment(ns + spaces.q0_dofs(), spaces.g_dofs())));
  sol.c0 = x(ns + nm - 1);
  sol.constraint_residual = b.multiply(x.head(ns)).cwiseAbs().maxCoeff();
  return sol;
}

namespace {

Eigen::MatrixXd dense_symmetric(const CsrMatrix& m, std::span<const int> idx) {
  Eigen::MatrixXd d = m.dense_block(idx, idx);
  return 0.5 * (d + d.transpose());
}

}  // namespace

InfSupReport estimate_infsup(const FsiMesh& mesh, const InfSupOptions& options) {
  const MixedSpaces spaces(mesh);
  const int nu = spaces.velocity_dofs();
  const int nq = spaces.q0_dofs();
  const int ng = spaces.g_dofs();
  const std::vector<int>& free = spaces.free_sigma();

  // Sigma norm: lambda M + K on the velocity, broken Hessian + mass on the plate.
  TripletBuffer tx(spaces.sigma_dofs(), spaces.sigma_dofs());
  {
    const CsrMatrix vel = assemble_velocity_block(spaces.velocity(), options.lambda, 1.0);
    const CsrMatrix plate_h = assemble_hessian_form(spaces.morley());
    const CsrMatrix plate_m = assemble_mass(spaces.morley());
    for (const auto& [m, off] : {std::pair{&vel, 0}, std::pair{&plate_h, nu}, std::pair{&plate_m, nu}})
      for (int r = 0; r < m->rows(); ++r)
        for (int k = m->row_ptr()[r]; k < m->row_ptr()[r + 1]; ++k) tx.add(off + r, off + m->col_idx()[k], m->values()[k]);
  }
  const Eigen::MatrixXd x = dense_symmetric(to_csr(tx), free);

  std::vector<int> rows(options.pressure_rows_only ? nq : spaces.multiplier_dofs());
  std::iota(rows.begin(), rows.end(), 0);
  const Eigen::MatrixXd b = assemble_b(spaces).dense_block(rows, free);

  // Multiplier norm: L2 on the psi basis, H^{-1/2} realization on G_h, |plate| on r.
  const int nm = static_cast<int>(rows.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nm, nm);
  {
    const Eigen::MatrixXd mq = assemble_mass(spaces.pressure()).to_dense();
    const Eigen::VectorXd& pm = spaces.pressure_mean();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(nq, nq + 1);
    p.leftCols(nq).setIdentity();
    p.col(nq) = -pm.head(nq) / pm(nq);
    gram.topLeftCorner(nq, nq) = p * mq * p.transpose();
  }
  if (!options.pressure_rows_only) {
    const SpacePtr& p2 = spaces.plate_p2();
    const Eigen::MatrixXd basis = spaces.g_basis().to_dense().transpose();
    const Eigen::MatrixXd mg = basis.transpose() * assemble_mass(p2).to_dense() * basis;
    const Eigen::MatrixXd kg = basis.transpose() * assemble_stiffness(p2).to_dense() * basis;
    gram.block(nq, nq, ng, ng) = fractional_gram(0.5 * (mg + mg.transpose()), 0.5 * (kg + kg.transpose()), -0.5);
    gram(nm - 1, nm - 1) = mesh.plate->total_area();
  }
  gram = 0.5 * (gram + gram.transpose());

  InfSupReport report;
  report.n = mesh.n;
  if (options.path == InfSupPath::Schur) {
    const Eigen::LLT<Eigen::MatrixXd> chol(x);
    if (chol.info() != Eigen::Success) throw std::runtime_error("estimate_infsup: Sigma Gram not positive definite");
    const Eigen::MatrixXd y = chol.matrixL().solve(b.transpose());
    Eigen::MatrixXd schur = y.transpose() * y;
    schur = 0.5 * (schur + schur.transpose());
    const GeneralizedEigen eig = generalized_eig(schur, gram);
    report.beta = std::sqrt(std::max(eig.values(0), 0.0));
    for (int i = 0; i < std::min<int>(5, eig.values.size()); ++i) report.eigs_tail.push_back(eig.values(i));
  } else {
    const int nf = static_cast<int>(free.size());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nf + nm, nf + nm);
    aug.topRightCorner(nf, nm) = b.transpose();
    aug.bottomLeftCorner(nm, nf) = b;
    Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(nf + nm, nf + nm);
    weight.topLeftCorner(nf, nf) = x;
    weight.bottomRightCorner(nm, nm) = gram;
    const GeneralizedEigen eig = generalized_eig(aug, weight);
    // Eigenvalues are +-sigma_i and zeros; the nm largest are the singular values.
    const int n = static_cast<int>(eig.values.size());
    report.beta = std::max(eig.values(n - nm), 0.0);
    for (int i = 0; i < std::min(5, nm); ++i) {
      const double s = eig.values(n - nm + i);
      report.eigs_tail.push_back(s * s);
    }
  }
  return report;
}

std::string infsup_json(const std::vector<InfSupReport>& reports, const std::string& comment) {
  auto round6 = [](double v) { return std::stod(format_sci(v)); };
  nlohmann::ordered_json root;
  root["config"] = comment;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["beta"] = round6(r.beta);
    nlohmann::ordered_json tail = nlohmann::ordered_json::array();
    for (double e : r.eigs_tail) tail.push_back(round6(e));
    j["eigs_tail"] = tail;
    runs.push_back(j);
  }
  root["runs"] = runs;
  return root.dump(2) + "\n";
}

}  // namespace fpi
