#include <gtest/gtest.h>

#include "fpi/forms.hpp"

using namespace fpi;

namespace {

ScalarFunction2 plate_quadratic() {
  ScalarFunction2 f;
  f.value = [](const Vec2& x) { return x.x() * x.x() - 0.5 * x.x() * x.y() + x.y(); };
  f.gradient = [](const Vec2& x) { return Vec2(2.0 * x.x() - 0.5 * x.y(), -0.5 * x.x() + 1.0); };
  f.hessian = [](const Vec2&) { return (Mat2() << 2.0, -0.5, -0.5, 0.0).finished(); };
  return f;
}

}  // namespace

class Spaces : public ::testing::Test {
 protected:
  FsiMesh mesh = make_fsi_mesh(3);
};

TEST_F(Spaces, MassSumsToMeasure) {
  for (ElementKind k : {ElementKind::P1Tet, ElementKind::P2Tet}) {
    const auto s = FunctionSpace::create(mesh.fluid, k);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s->dim());
    EXPECT_NEAR(ones.dot(assemble_mass(s).multiply(ones)), 1.0, 1e-12);
    EXPECT_NEAR(assemble_mean_vector(s).sum(), 1.0, 1e-12);
    EXPECT_LT(assemble_mass(s).asymmetry(), 1e-15);
  }
  for (ElementKind k : {ElementKind::P1Tri, ElementKind::P2Tri}) {
    const auto s = FunctionSpace::create(mesh.plate, k);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s->dim());
    EXPECT_NEAR(ones.dot(assemble_mass(s).multiply(ones)), 1.0, 1e-12);
  }
}

TEST_F(Spaces, StiffnessAnnihilatesConstants) {
  for (ElementKind k : {ElementKind::P1Tet, ElementKind::P2Tet}) {
    const auto s = FunctionSpace::create(mesh.fluid, k);
    EXPECT_LT(assemble_stiffness(s).multiply(Eigen::VectorXd::Ones(s->dim())).cwiseAbs().maxCoeff(), 1e-12);
  }
  const auto p2 = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);
  EXPECT_LT(assemble_stiffness(p2).multiply(Eigen::VectorXd::Ones(p2->dim())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(Spaces, EnergiesOfAQuadraticAreExact) {
  const ScalarFunction2 q = plate_quadratic();
  const auto morley = FunctionSpace::create(mesh.plate, ElementKind::MorleyTri);
  const Eigen::VectorXd z = interpolate(morley, q).coeffs;
  // |D^2 q|^2 = 4 + 2 * 0.25 on the unit square.
  EXPECT_NEAR(z.dot(assemble_hessian_form(morley).multiply(z)), 4.5, 1e-10);
  EXPECT_NEAR(assemble_hessian_load(morley, q).dot(z), 4.5, 1e-10);
  EXPECT_LT(assemble_hessian_form(morley).asymmetry(), 1e-12);

  const auto p2 = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);
  const Eigen::VectorXd c = interpolate(p2, q).coeffs;
  // int (2x - y/2)^2 + (1 - x/2)^2 = 11/12 + 7/12
  EXPECT_NEAR(c.dot(assemble_stiffness(p2).multiply(c)), 1.5, 1e-12);
}

TEST_F(Spaces, LoadOfOneIsTheMeanVector) {
  ScalarFunction3 one3;
  one3.value = [](const Vec3&) { return 1.0; };
  const auto p2 = FunctionSpace::create(mesh.fluid, ElementKind::P2Tet);
  EXPECT_LT((assemble_load(p2, one3) - assemble_mean_vector(p2)).norm(), 1e-13);

  ScalarFunction2 one2;
  one2.value = [](const Vec2&) { return 1.0; };
  const auto morley = FunctionSpace::create(mesh.plate, ElementKind::MorleyTri);
  EXPECT_LT((assemble_load(morley, one2) - assemble_mean_vector(morley)).norm(), 1e-13);
}

TEST_F(Spaces, MixedMassAgreesWithSquareMassAndLoads) {
  const auto p1 = FunctionSpace::create(mesh.plate, ElementKind::P1Tri);
  const auto p2 = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);
  const auto morley = FunctionSpace::create(mesh.plate, ElementKind::MorleyTri);
  EXPECT_LT((assemble_mixed_mass(p2, p2).to_dense() - assemble_mass(p2).to_dense()).norm(), 1e-14);
  // (z, psi) applied to the P1 interpolant of a linear function equals the load of that function.
  ScalarFunction2 lin;
  lin.value = [](const Vec2& x) { return 1.0 + 2.0 * x.x() - x.y(); };
  const Eigen::VectorXd c = interpolate(p1, lin).coeffs;
  EXPECT_LT((assemble_mixed_mass(morley, p1).multiply(c) - assemble_load(morley, lin)).norm(), 1e-13);
}

TEST_F(Spaces, TraceMapMatchesPoints) {
  const auto fluid = FunctionSpace::create(mesh.fluid, ElementKind::P2Tet, 3);
  const auto plate = FunctionSpace::create(mesh.plate, ElementKind::P2Tri);
  const std::vector<int> map = trace_node_map(mesh, *fluid, *plate);
  int mapped = 0;
  for (int i = 0; i < fluid->num_nodes(); ++i) {
    if (map[i] < 0) continue;
    ++mapped;
    EXPECT_LT((fluid->node_point(i) - plate->node_point(map[i])).norm(), 1e-14);
  }
  EXPECT_EQ(mapped, plate->num_nodes());
}
