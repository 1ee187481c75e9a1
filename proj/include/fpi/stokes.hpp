#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "fpi/fem.hpp"
#include "fpi/linalg.hpp"

namespace fpi {

/// Velocity-pressure blocks of the time-discretized Stokes operator.
/// Unknowns of the full system are ordered [u, p, c0].
struct StokesBlocks {
  CsrMatrix a;           ///< lambda M + nu K, per component
  CsrMatrix b;           ///< (B u)_q = (div u, q)
  Eigen::VectorXd mean;  ///< (q, 1)
  CsrMatrix full;        ///< [[A, -B^T, 0], [-B, 0, m], [0, m^T, 0]]
};

/// lambda M + nu K on each component of a vector P2 space.
CsrMatrix assemble_velocity_block(const SpacePtr& velocity, double lambda, double nu);
/// (div v_i, q_a): rows pressure, columns velocity.
CsrMatrix assemble_divergence(const SpacePtr& velocity, const SpacePtr& pressure);

StokesBlocks assemble_stokes(const SpacePtr& velocity, const SpacePtr& pressure, double lambda, double nu);

/// Strongly imposed velocity data: zero on S, u1 = u2 = 0 on the plate,
/// u3 = plate datum on plate nodes not on S.
struct VelocityConstraints {
  std::vector<int> fixed_dofs;
  /// (fluid u3 dof, plate P2 node) pairs that receive the plate datum
  std::vector<std::array<int, 2>> plate_dofs;
};

VelocityConstraints velocity_constraints(const FsiMesh& mesh, const SpacePtr& velocity,
                                         const SpacePtr& plate_p2);

/// Full-length vector of fixed values; `plate_trace` may be null (homogeneous data).
Eigen::VectorXd apply_velocity_bc(const VelocityConstraints& bc, int size, const FeField* plate_trace);

struct StokesSolution {
  FeField u;
  FeField p;
  double c0 = 0.0;
};

struct StokesProblem {
  double lambda = 1.0;
  double nu = 1.0;
  VectorFunction3 f1;
  const FeField* plate_trace = nullptr;  ///< P2 on the plate mesh, may be null
};

/// Taylor-Hood spaces on the fluid mesh and the constrained system, factored once.
class StokesSolver {
 public:
  StokesSolver(const FsiMesh& mesh, double lambda, double nu = 1.0);

  const SpacePtr& velocity_space() const { return velocity_; }
  const SpacePtr& pressure_space() const { return pressure_; }
  const SpacePtr& plate_space() const { return plate_p2_; }
  const StokesBlocks& blocks() const { return blocks_; }
  const VelocityConstraints& constraints() const { return bc_; }
  double lambda() const { return lambda_; }

  /// (f1, v) over the velocity space.
  Eigen::VectorXd load_vector(const VectorFunction3& f1) const;
  StokesSolution solve(const Eigen::VectorXd& velocity_load, const FeField* plate_trace) const;

 private:
  double lambda_;
  SpacePtr velocity_, pressure_, plate_p2_;
  StokesBlocks blocks_;
  VelocityConstraints bc_;
  std::unique_ptr<EliminatedSystem> system_;
};

StokesSolution solve_stokes(const FsiMesh& mesh, const StokesProblem& problem);

/// (div u, q) for every pressure basis function q.
Eigen::VectorXd divergence_functional(const StokesBlocks& blocks, const FeField& u);

}  // namespace fpi
