#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fpi/verification.hpp"

using namespace fpi;

namespace {

/// Gauss-Legendre on [0,1]^2 with m points per direction.
template <typename F>
double integrate_square(const F& f, int m) {
  std::vector<double> t, w;
  gauss_jacobi(m, 0.0, 0.0, t, w);
  double s = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) s += 0.25 * w[i] * w[j] * f(Vec2(0.5 * (t[i] + 1.0), 0.5 * (t[j] + 1.0)));
  return s;
}

}  // namespace

TEST(PolynomialTest, Algebra) {
  const Polynomial p({1.0, -2.0, 3.0});  // 1 - 2t + 3t^2
  EXPECT_DOUBLE_EQ(p(2.0), 9.0);
  EXPECT_EQ(p.derivative().coeffs(), (std::vector<double>{-2.0, 6.0}));
  EXPECT_EQ(p.derivative(3).coeffs(), (std::vector<double>{0.0}));
  EXPECT_EQ(Polynomial({1.0, 0.0, 0.0}).degree(), 0);
  const Polynomial q = p * Polynomial({0.0, 1.0}) + 2.0 * p;
  EXPECT_DOUBLE_EQ(q(1.5), (1.5 + 2.0) * p(1.5));
  EXPECT_EQ(Polynomial::monomial(3, 2.0)(2.0), 16.0);
  const Polynomial f = from_factors(2.0, {{1.0, 2}, {-0.5, 1}});
  EXPECT_EQ(f.degree(), 3);
  EXPECT_DOUBLE_EQ(f(1.0), 0.0);
  EXPECT_DOUBLE_EQ(f(-0.5), 0.0);
  EXPECT_DOUBLE_EQ(f.derivative()(1.0), 0.0);
  EXPECT_DOUBLE_EQ(f(0.0), 2.0 * 1.0 * 0.5);
}

TEST(SeparableFieldTest, DerivativesAndSums) {
  const SeparableField a({{Polynomial({0.0, 1.0}), Polynomial({0.0, 0.0, 1.0}), Polynomial({1.0})}});  // x y^2
  const SeparableField b({{Polynomial({1.0}), Polynomial({1.0}), Polynomial({0.0, 3.0})}});             // 3 z
  const SeparableField s = a + b.scaled(2.0);
  const Vec3 p(0.5, 2.0, -1.0);
  EXPECT_DOUBLE_EQ(s(p), 0.5 * 4.0 - 6.0);
  EXPECT_DOUBLE_EQ(s.derivative(1, 1, 0)(p), 4.0);
  EXPECT_DOUBLE_EQ(s.derivative(0, 0, 1)(p), 6.0);
  EXPECT_DOUBLE_EQ(s.derivative(0, 3, 0)(p), 0.0);
}

TEST(ExactSolution, BoundaryAndCompatibilityConditions) {
  const ExactEvaluators& ev = exact_fields();
  for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    for (const Vec2& x : {Vec2(t, 0.0), Vec2(t, 1.0), Vec2(0.0, t), Vec2(1.0, t)}) {
      EXPECT_EQ(ev.w1(x), 0.0);
      EXPECT_LT(ev.w1_gradient(x).norm(), 1e-15);
      EXPECT_EQ(ev.w2(x), 0.0);
    }
    for (double s : {0.1, 0.6}) {
      // No slip on the walls and the bottom.
      for (const Vec3& y : {Vec3(0.0, t, -s), Vec3(1.0, t, -s), Vec3(t, 0.0, -s), Vec3(t, 1.0, -s), Vec3(t, s, -1.0)})
        EXPECT_LT(ev.u(y).norm(), 1e-15);
      // Plate velocity is (0, 0, w2).
      const Vec3 top(t, s, 0.0);
      EXPECT_LT((ev.u(top) - Vec3(0.0, 0.0, ev.w2(Vec2(t, s)))).norm(), 1e-15);
    }
  }
  for (const Vec3& y : {Vec3(0.3, 0.4, -0.2), Vec3(0.9, 0.15, -0.7)}) EXPECT_NEAR(ev.u_jacobian(y).trace(), 0.0, 1e-14);
  const Vec2 x(0.31, 0.62);
  EXPECT_NEAR(ev.w2(x), -ev.w1_hessian(x).trace(), 1e-15);
  EXPECT_NEAR(integrate_square(ev.w2, 10), 0.0, 1e-16);
  EXPECT_GT(integrate_square([&ev](const Vec2& p) { return ev.w2(p) * ev.w2(p); }, 10), 0.0);
}

TEST(ExactSolution, SymmetryLinePlateTraceAndWallLaplacian) {
  const ExactEvaluators& ev = exact_fields();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> in(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    EXPECT_EQ(ev.w1(Vec2(0.5, in(rng))), 0.0);
    const Vec2 x(in(rng), in(rng));
    EXPECT_NEAR(ev.u(Vec3(x.x(), x.y(), 0.0))(2), ev.w2(x), 1e-15);
    // Normal component of the Laplacian of u on the walls and the bottom.
    const double a = in(rng), b = in(rng);
    const std::pair<Vec3, Vec3> wall[] = {{Vec3(0.0, a, -b), Vec3(-1, 0, 0)}, {Vec3(1.0, a, -b), Vec3(1, 0, 0)},
                                          {Vec3(a, 0.0, -b), Vec3(0, -1, 0)}, {Vec3(a, 1.0, -b), Vec3(0, 1, 0)},
                                          {Vec3(a, b, -1.0), Vec3(0, 0, -1)}};
    for (const auto& [y, nu] : wall) EXPECT_LT(std::abs(ev.u_laplacian(y).dot(nu)), 1e-12);
  }
  const LoadSet l = build_loads(1.0);
  for (const Vec2& x : {Vec2(0.0, 0.3), Vec2(1.0, 0.8), Vec2(0.45, 0.0), Vec2(0.2, 1.0)}) EXPECT_EQ(l.f2.value(x), 0.0);
}

TEST(Gate, ClosedFormPassesAndTamperingIsCaught) {
  EXPECT_NO_THROW(validate_evaluators(closed_form_evaluators()));

  ExactEvaluators flipped = closed_form_evaluators();
  const auto h = flipped.w1_hessian;
  flipped.w1_hessian = [h](const Vec2& p) -> Mat2 { return -h(p); };
  try {
    validate_evaluators(flipped);
    FAIL() << "sign flip not detected";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("w1_hessian"), std::string::npos);
  }

  ExactEvaluators shifted = closed_form_evaluators();
  const auto lap = shifted.u_laplacian;
  shifted.u_laplacian = [lap](const Vec3& p) -> Vec3 { return lap(p) * (1.0 + 1e-3); };
  EXPECT_THROW(validate_evaluators(shifted), ValidationError);
}

TEST(Gate, LoadsAreConsistent) {
  for (double lambda : {1.0, 4.0}) EXPECT_NO_THROW(validate_loads(build_loads(lambda)));
  LoadSet bad = build_loads(1.0);
  const auto f3 = bad.f3.value;
  bad.f3.value = [f3](const Vec2& p) { return f3(p) + 1e-2; };
  EXPECT_THROW(validate_loads(bad), ValidationError);
  EXPECT_THROW(build_loads(0.0), std::invalid_argument);
}

TEST(Errors, NormsOfInterpolantsShrink) {
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {2, 4, 8}) {
    const FsiMesh mesh = make_fsi_mesh(n);
    const auto morley = FunctionSpace::create(mesh.plate, ElementKind::MorleyTri);
    const double e = error_norm(interpolate(morley, exact_w1()), exact_w1(), Norm::L2);
    EXPECT_LT(e, prev);
    prev = e;
  }
  const FsiMesh mesh = make_fsi_mesh(2);
  const auto p2 = FunctionSpace::create(mesh.fluid, ElementKind::P2Tet);
  ScalarFunction3 q;
  q.value = [](const Vec3& x) { return x.x() * x.z() - x.y(); };
  q.gradient = [](const Vec3& x) { return Vec3(x.z(), -1.0, x.x()); };
  EXPECT_LT(error_norm(interpolate(p2, q), q, Norm::L2), 1e-13);
  EXPECT_LT(error_norm(interpolate(p2, q), q, Norm::H1), 1e-12);
  EXPECT_THROW(error_norm(interpolate(p2, q), q, Norm::H2Broken), std::invalid_argument);
}

TEST(Rates, ObservedOrder) {
  EXPECT_DOUBLE_EQ(rate(4.0, 1.0, 0.5, 0.25), 2.0);
  EXPECT_NEAR(rate(1.0, 1.0 / 27.0, 0.3, 0.1), 3.0, 1e-14);
  EXPECT_NEAR(rate(1.17e-05, 5.05e-06, 1.0 / 4, 1.0 / 6), 2.07, 0.02);
  EXPECT_NEAR(rate(8.82e-05, 2.94e-05, 1.0 / 4, 1.0 / 6), 2.71, 0.02);
  EXPECT_EQ(rate(3e-4, 3e-4, 0.5, 0.25), 0.0);
  EXPECT_THROW(rate(1.0, 0.0, 0.5, 0.25), std::invalid_argument);
  EXPECT_THROW(rate(1.0, 0.5, 0.25, 0.5), std::invalid_argument);
}

TEST(Report, CsvAndSeries) {
  ConvergenceReport r;
  ConvergenceRow a, b;
  a.n = 2;
  a.h = 0.5;
  a.elements = 48;
  a.l2_u = 4.0;
  a.h1_u = 2.0;
  a.l2_p = 1.0;
  a.l2_w1 = a.h1_w1 = a.h2_w1 = std::numeric_limits<double>::quiet_NaN();
  b = a;
  b.n = 4;
  b.h = 0.25;
  b.elements = 384;
  b.l2_u = 0.5;
  b.h1_u = 0.5;
  b.l2_p = 0.25;
  r.rows = {a, b};
  std::ostringstream os;
  write_convergence_csv(os, r, "x");
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# x");
  std::getline(in, line);
  EXPECT_EQ(line, "h,L2_u,rate_L2_u,H1_u,rate_H1_u,L2_p,rate_L2_p,L2_w1,rate_L2_w1,H1_w1,rate_H1_w1,H2_w1,rate_H2_w1");
  std::getline(in, line);
  EXPECT_EQ(line, "5.00000e-01,4.00000e+00,,2.00000e+00,,1.00000e+00,,nan,,nan,,nan,");
  std::getline(in, line);
  EXPECT_EQ(line,
            "2.50000e-01,5.00000e-01,3.00000e+00,5.00000e-01,2.00000e+00,2.50000e-01,2.00000e+00,nan,nan,nan,nan,nan,nan");

  std::ostringstream g;
  write_gnuplot_series(g, r, "L2_u", "x");
  EXPECT_EQ(g.str(), "# x\n# elements L2_u\n48 4.00000e+00\n384 5.00000e-01\n");
  EXPECT_THROW(column_value(a, "L3_u"), std::invalid_argument);
}

TEST(Report, ModeNamesAndArguments) {
  for (StudyMode m : {StudyMode::Partitioned, StudyMode::Monolithic, StudyMode::StokesOnly, StudyMode::PlateOnly})
    EXPECT_EQ(parse_study_mode(to_string(m)), m);
  EXPECT_THROW(parse_study_mode("coupled"), std::invalid_argument);
  EXPECT_THROW(run_convergence_study({4, 2}, StudyMode::PlateOnly), std::invalid_argument);
  EXPECT_EQ(format_sci(1234.5), "1.23450e+03");
  EXPECT_EQ(format_sci(std::nan("")), "nan");
}

TEST(Study, SingleRowHasNoRates) {
  const ConvergenceReport r = run_convergence_study({4}, StudyMode::PlateOnly);
  ASSERT_EQ(r.rows.size(), 1u);
  std::ostringstream os;
  write_convergence_csv(os, r, "one");
  const std::string last = os.str().substr(os.str().rfind('\n', os.str().size() - 2) + 1);
  EXPECT_NE(last.find(",,"), std::string::npos);
  EXPECT_EQ(last.find("e+00,"), std::string::npos);
}

class PartitionedStudy : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { report_ = new ConvergenceReport(run_convergence_study({4, 6, 8}, StudyMode::Partitioned)); }
  static void TearDownTestSuite() { delete report_; }
  static ConvergenceReport* report_;
};

ConvergenceReport* PartitionedStudy::report_ = nullptr;

TEST_F(PartitionedStudy, PublishedValuesAtTheCoarsestMesh) {
  const ConvergenceRow& r = report_->rows.front();
  EXPECT_NEAR(r.l2_p, 8.82e-05, 0.05 * 8.82e-05);
  // Plate errors get the same factor-2 window as the plate table.
  EXPECT_GT(r.h1_w1, 6.79e-06 / 2.0);
  EXPECT_LT(r.h1_w1, 6.79e-06 * 2.0);
  const double ru = rate(r.l2_u, report_->rows[1].l2_u, r.h, report_->rows[1].h);
  EXPECT_GE(ru, 1.7);
  EXPECT_LE(ru, 2.4);
}

TEST_F(PartitionedStudy, AllErrorColumnsDecrease) {
  for (const char* col : {"L2_u", "H1_u", "L2_p", "L2_w1", "H1_w1", "H2_w1"})
    for (std::size_t i = 1; i < report_->rows.size(); ++i)
      EXPECT_LT(column_value(report_->rows[i], col), column_value(report_->rows[i - 1], col))
          << col << " at n=" << report_->rows[i].n;
}

TEST_F(PartitionedStudy, Deterministic) {
  const ConvergenceReport again = run_convergence_study({4}, StudyMode::Partitioned);
  EXPECT_EQ(again.rows.front().l2_u, report_->rows.front().l2_u);
  EXPECT_EQ(again.rows.front().h2_w1, report_->rows.front().h2_w1);
}

TEST(Study, PlateOnlyRowsCarryPlateErrors) {
  const ConvergenceReport r = run_convergence_study({2, 4}, StudyMode::PlateOnly);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_TRUE(std::isnan(r.rows[0].l2_u));
  EXPECT_LT(r.rows[1].l2_w1, r.rows[0].l2_w1);
  EXPECT_EQ(r.rows[1].elements, 6 * 64);
}
