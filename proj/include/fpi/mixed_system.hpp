#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpi/coupling.hpp"
#include "fpi/fem.hpp"
#include "fpi/linalg.hpp"

namespace fpi {

/// Sigma = (vector P2 velocity, Morley plate) and the multiplier spaces
/// (zero-mean P1, one plate function per interior P2 node, one scalar).
/// Sigma unknowns: [u (velocity dofs), z (Morley dofs)].
/// Multiplier unknowns: [q0 (np - 1), g (interior P2 nodes), r].
///
/// The g basis function of interior node i is phi_i plus an equal share of
/// every boundary basis function phi_b whose cells touch i, so the basis sums
/// to 1 and has as many members as the velocity trace.
class MixedSpaces {
 public:
  explicit MixedSpaces(const FsiMesh& mesh);

  const FsiMesh& mesh() const { return *mesh_; }
  const SpacePtr& velocity() const { return velocity_; }
  const SpacePtr& pressure() const { return pressure_; }
  const SpacePtr& morley() const { return morley_; }
  const SpacePtr& plate_p2() const { return plate_p2_; }

  int velocity_dofs() const { return velocity_->dim(); }
  int sigma_dofs() const { return velocity_->dim() + morley_->dim(); }
  int q0_dofs() const { return pressure_->dim() - 1; }
  int g_dofs() const { return g_basis_.rows(); }
  int multiplier_dofs() const { return q0_dofs() + g_dofs() + 1; }

  /// Constrained Sigma dofs: velocity on S, u1/u2 on the plate, clamped Morley dofs.
  const std::vector<int>& fixed_sigma() const { return fixed_; }
  /// Complement of fixed_sigma, ascending.
  const std::vector<int>& free_sigma() const { return free_; }
  /// Row j: P2 plate coefficients of g basis function j.
  const CsrMatrix& g_basis() const { return g_basis_; }
  /// Fluid u3 dof -> plate P2 node for velocity nodes on the plate.
  const std::vector<std::array<int, 2>>& trace_pairs() const { return trace_pairs_; }
  /// Mean weights of the P1 pressure basis; psi_a = phi_a - (m_a / m_last) phi_last.
  const Eigen::VectorXd& pressure_mean() const { return pressure_mean_; }

  /// P1 pressure coefficients of a q0 vector in the psi basis.
  Eigen::VectorXd q0_to_p1(const Eigen::VectorXd& q0) const;
  /// P2 plate coefficients of a g vector.
  Eigen::VectorXd g_to_p2(const Eigen::VectorXd& g) const;

 private:
  const FsiMesh* mesh_;
  SpacePtr velocity_, pressure_, morley_, plate_p2_;
  std::vector<int> fixed_, free_;
  CsrMatrix g_basis_;
  std::vector<std::array<int, 2>> trace_pairs_;
  Eigen::VectorXd pressure_mean_;
};

/// Block diagonal: lambda M + K on the velocity;
/// lambda M + lambda rho K + (1/lambda) sum_T D^2 : D^2 on the Morley plate.
CsrMatrix assemble_a_lambda(const MixedSpaces& spaces, double lambda, double rho);

/// Rows [q0, g, r], columns Sigma:
/// b([v, z], [l, h, r]) = -(l, div v) + <h, v3> - <h, z> - (r, z).
CsrMatrix assemble_b(const MixedSpaces& spaces);

struct MonolithicSolution {
  FeField u;
  FeField w2;  ///< Morley
  FeField w1;  ///< Morley, lambda w1 = w2 + I f2
  FeField q0;  ///< P1 with zero mean
  FeField g;   ///< P2 on the plate
  double c0 = 0.0;
  double constraint_residual = 0.0;  ///< max |B (u, w2)|
};

MonolithicSolution solve_monolithic(const FsiMesh& mesh, double lambda, double rho, const FsiLoads& loads);

struct InfSupReport {
  int n = 0;
  double beta = 0.0;
  std::vector<double> eigs_tail;  ///< five smallest eigenvalues of the Schur pencil
};

enum class InfSupPath { Schur, Augmented };

struct InfSupOptions {
  double lambda = 1.0;
  InfSupPath path = InfSupPath::Schur;
  /// Keep only the q0 rows (velocity-pressure pair alone).
  bool pressure_rows_only = false;
};

InfSupReport estimate_infsup(const FsiMesh& mesh, const InfSupOptions& options = {});

/// JSON object with fields n, beta, eigs_tail.
std::string infsup_json(const std::vector<InfSupReport>& reports, const std::string& comment);

}  // namespace fpi
