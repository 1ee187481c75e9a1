#pragma once

#include <memory>

#include <Eigen/Core>

#include "fpi/fem.hpp"
#include "fpi/linalg.hpp"

namespace fpi {

/// lambda^2 (Morley mass) + sum_T (D^2 w : D^2 z)_T
CsrMatrix assemble_morley(const SpacePtr& morley, double lambda);

/// How w2 = lambda w1 - f2 is carried from the Morley space into P2.
/// Interpolation averages the broken Morley values at each P2 node, then removes
/// the mean on interior nodes; Projection is the zero-mean L2 projection.
/// Both vanish on the boundary.
enum class W2Recovery { Interpolation, Projection };

struct PlateSolution {
  FeField w1;  ///< Morley
  FeField w2;  ///< P2, zero on the boundary
};

struct PlateProblem {
  double lambda = 1.0;
  W2Recovery recovery = W2Recovery::Interpolation;
  ScalarFunction2 f2;
  ScalarFunction2 f3;
  const FeField* pressure = nullptr;  ///< P1 pressure on the fluid mesh, may be null
};

/// Analytic part of the plate data, assembled once per load set.
struct PlateLoad {
  Eigen::VectorXd morley;     ///< (f3 + lambda f2, z)
  Eigen::VectorXd f2_p2;      ///< (f2, phi) over the P2 space
  Eigen::VectorXd f2_nodes;   ///< f2 at the P2 nodes
};

/// Restriction of a P1 fluid pressure to the plate, as a P1 field on the plate mesh.
FeField pressure_trace(const FsiMesh& mesh, const SpacePtr& plate_p1, const FeField& pressure);

/// Clamped Morley solve for w1 with w2 = lambda w1 - f2 eliminated, then w2
/// recovered in P2 with zero boundary values and zero mean.
class PlateSolver {
 public:
  PlateSolver(const FsiMesh& mesh, double lambda, W2Recovery recovery = W2Recovery::Interpolation);

  const SpacePtr& morley_space() const { return morley_; }
  const SpacePtr& p2_space() const { return p2_; }
  const SpacePtr& p1_space() const { return p1_; }
  const CsrMatrix& matrix() const { return system_->matrix(); }
  double lambda() const { return lambda_; }
  W2Recovery recovery() const { return recovery_; }

  PlateLoad load(const ScalarFunction2& f2, const ScalarFunction2& f3) const;
  /// `pressure` is a P1 fluid field or null.
  PlateSolution solve(const PlateLoad& load, const FeField* pressure) const;
  /// Morley right-hand side actually used by `solve`.
  Eigen::VectorXd rhs(const PlateLoad& load, const FeField* pressure) const;

 private:
  const FsiMesh* mesh_;
  double lambda_;
  W2Recovery recovery_;
  SpacePtr morley_, p2_, p1_;
  CsrMatrix morley_p1_;  ///< (z_i, psi_j), Morley x P1 on the plate
  CsrMatrix p2_morley_;  ///< (phi_i, z_j)
  CsrMatrix nodal_;      ///< Morley coefficients -> cell-averaged values at P2 nodes
  Eigen::VectorXd p2_mean_;
  Eigen::VectorXd interior_;  ///< 1 on interior P2 nodes
  std::unique_ptr<EliminatedSystem> system_;
  std::unique_ptr<EliminatedSystem> projection_;
};

PlateSolution solve_plate(const FsiMesh& mesh, const PlateProblem& problem);

}  // namespace fpi
