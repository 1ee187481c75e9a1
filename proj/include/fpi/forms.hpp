#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "fpi/fem.hpp"
#include "fpi/linalg.hpp"

namespace fpi {

// Scalar bilinear forms over one space (components must be 1).

/// (phi_i, phi_j)
CsrMatrix assemble_mass(const SpacePtr& space);
/// (grad phi_i, grad phi_j), broken for Morley
CsrMatrix assemble_stiffness(const SpacePtr& space);
/// sum_T (D^2 phi_i : D^2 phi_j)_T
CsrMatrix assemble_hessian_form(const SpacePtr& space);
/// (psi_i, phi_j) for two scalar spaces on the same plate or fluid mesh.
CsrMatrix assemble_mixed_mass(const SpacePtr& rows, const SpacePtr& cols);

/// (phi_i, 1)
Eigen::VectorXd assemble_mean_vector(const SpacePtr& space);

/// (f, phi_i) with a rule of the given degree.
Eigen::VectorXd assemble_load(const SpacePtr& space, const ScalarFunction2& f, int degree = 6);
Eigen::VectorXd assemble_load(const SpacePtr& space, const ScalarFunction3& f, int degree = 6);
/// (f, v_i) on a 3-component fluid space.
Eigen::VectorXd assemble_load(const SpacePtr& space, const VectorFunction3& f, int degree = 6);
/// sum_T (D^2 f : D^2 phi_i)_T ; needs f.hessian.
Eigen::VectorXd assemble_hessian_load(const SpacePtr& space, const ScalarFunction2& f, int degree = 6);

/// Node of a quadratic (or linear) fluid space on the plate -> node of the
/// plate space of the same degree, -1 elsewhere. Throws if a plate node of
/// the fluid space has no image.
std::vector<int> trace_node_map(const FsiMesh& mesh, const FunctionSpace& fluid_space,
                                const FunctionSpace& plate_space);

}  // namespace fpi
