#include <gtest/gtest.h>

#include <sstream>

#include "fpi/coupling.hpp"
#include "fpi/verification.hpp"

using namespace fpi;

namespace {

FsiLoads exact_loads(double lambda = 1.0) {
  const LoadSet l = build_loads(lambda);
  return {l.f1, l.f2, l.f3};
}

/// Fields from two solver instances share the layout but not the space object.
double distance(const FeField& a, const FeField& b) { return l2_norm(FeField(a.space, a.coeffs - b.coeffs)); }

}  // namespace

TEST(SuccessiveError, NormOfTheDifference) {
  const FsiMesh mesh = make_fsi_mesh(2);
  const auto p1 = FunctionSpace::create(mesh.fluid, ElementKind::P1Tet);
  const FeField zero(p1);
  const FeField one(p1, Eigen::VectorXd::Ones(p1->dim()));
  EXPECT_EQ(successive_error(one, one), 0.0);
  EXPECT_NEAR(successive_error(zero, one), 1.0, 1e-13);
  const auto other = FunctionSpace::create(mesh.fluid, ElementKind::P1Tet);
  EXPECT_THROW(successive_error(zero, FeField(other)), std::invalid_argument);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(CouplingConfig{}.validate());
  EXPECT_THROW((CouplingConfig{0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((CouplingConfig{1.0, 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((CouplingConfig{1.0, 1e-10, 0}).validate(), std::invalid_argument);
  EXPECT_THROW((CouplingConfig{1.0, 1e-10, 20, 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((CouplingConfig{1.0, 1e-10, 20, 1.5}).validate(), std::invalid_argument);
}

TEST(Partitioned, ZeroDataConvergesImmediately) {
  const FsiMesh mesh = make_fsi_mesh(2);
  const PartitionedResult r = run_partitioned(mesh, {}, FsiLoads{});
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.iterations, 1);
  EXPECT_EQ(r.state.u.coeffs.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.state.w1.coeffs.cwiseAbs().maxCoeff(), 0.0);
}

class PartitionedRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    mesh_ = new FsiMesh(make_fsi_mesh(3));
    result_ = new PartitionedResult(run_partitioned(*mesh_, {}, exact_loads()));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete mesh_;
  }
  static FsiMesh* mesh_;
  static PartitionedResult* result_;
};

FsiMesh* PartitionedRun::mesh_ = nullptr;
PartitionedResult* PartitionedRun::result_ = nullptr;

TEST_F(PartitionedRun, ConvergesWithDecreasingIncrements) {
  const IterationTrace& t = result_->trace;
  ASSERT_TRUE(t.converged);
  EXPECT_LE(t.iterations, 10);
  for (int k = 2; k < t.iterations; ++k) {
    EXPECT_LT(t.err_u[k], t.err_u[k - 1]);
    EXPECT_LT(t.err_w1[k], t.err_w1[k - 1]);
  }
  EXPECT_LT(std::max({t.err_u.back(), t.err_p.back(), t.err_w1.back()}), 1e-10);
}

TEST_F(PartitionedRun, LimitIsAFixedPoint) {
  const StokesSolver stokes(*mesh_, 1.0);
  const StokesSolution fluid = stokes.solve(stokes.load_vector(exact_loads().f1), &result_->state.w2);
  EXPECT_LT(distance(result_->state.u, fluid.u), 1e-9);
  EXPECT_LT(distance(result_->state.p, fluid.p), 1e-9);
}

TEST_F(PartitionedRun, Deterministic) {
  const PartitionedResult again = run_partitioned(*mesh_, {}, exact_loads());
  EXPECT_EQ(again.trace.err_u, result_->trace.err_u);
  EXPECT_EQ(again.trace.err_p, result_->trace.err_p);
  EXPECT_EQ(again.trace.err_w1, result_->trace.err_w1);
}

TEST_F(PartitionedRun, IterationCapAndRelaxation) {
  CouplingConfig capped;
  capped.max_iter = 1;
  const PartitionedResult one = run_partitioned(*mesh_, capped, exact_loads());
  EXPECT_FALSE(one.trace.converged);
  EXPECT_EQ(one.trace.iterations, 1);
  EXPECT_EQ(one.trace.err_u.front(), result_->trace.err_u.front());

  CouplingConfig relaxed;
  relaxed.omega = 0.5;
  relaxed.eps = 1e-8;
  const PartitionedResult r = run_partitioned(*mesh_, relaxed, exact_loads());
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LT(distance(r.state.w1, result_->state.w1), 1e-7);
}

TEST(IterationCsv, Format) {
  IterationTrace t;
  t.err_u = {1.0, 0.5};
  t.err_p = {2.0, 0.25};
  t.err_w1 = {3.0, 1e-12};
  t.iterations = 2;
  std::ostringstream os;
  write_iteration_csv(os, t, "run");
  EXPECT_EQ(os.str(),
            "# run\nk,err_u,err_p,err_w1\n"
            "1,1.00000e+00,2.00000e+00,3.00000e+00\n"
            "2,5.00000e-01,2.50000e-01,1.00000e-12\n");
}
