#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpi/fem.hpp"
#include "fpi/plate.hpp"

namespace fpi {

// ---------------------------------------------------------------------------
// Polynomial algebra for separable closed forms

/// Dense univariate polynomial, coefficient k multiplies t^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  static Polynomial monomial(int degree, double c = 1.0);

  double operator()(double t) const;
  Polynomial derivative(int order = 1) const;
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, const Polynomial& a);

 private:
  std::vector<double> c_;
};

/// Product of powers: prod_k (t - r_k)^{m_k}, times a scale.
Polynomial from_factors(double scale, const std::vector<std::pair<double, int>>& factors);

/// sum_i A_i(x) B_i(y) C_i(z)
class SeparableField {
 public:
  struct Term {
    Polynomial x, y, z;
  };

  SeparableField() = default;
  explicit SeparableField(std::vector<Term> terms) : terms_(std::move(terms)) {}

  double operator()(const Vec3& p) const;
  /// Partial derivative of orders (a, b, c).
  SeparableField derivative(int a, int b, int c) const;
  SeparableField scaled(double s) const;
  const std::vector<Term>& terms() const { return terms_; }

  friend SeparableField operator+(const SeparableField& a, const SeparableField& b);

 private:
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Manufactured solution

/// Evaluators of the manufactured fields and the derivatives the solvers need.
/// Plate quantities take (x, y); fluid quantities take (x, y, z).
struct ExactEvaluators {
  std::function<double(const Vec2&)> w1;
  std::function<Vec2(const Vec2&)> w1_gradient;
  std::function<Mat2(const Vec2&)> w1_hessian;
  std::function<Vec2(const Vec2&)> w1_grad_laplacian;
  std::function<double(const Vec2&)> w1_bilaplacian;

  std::function<double(const Vec2&)> w2;
  std::function<Vec2(const Vec2&)> w2_gradient;
  std::function<Mat2(const Vec2&)> w2_hessian;

  std::function<Vec3(const Vec3&)> u;
  std::function<Mat3(const Vec3&)> u_jacobian;  ///< (i, j) = d u_i / d x_j
  std::function<Vec3(const Vec3&)> u_laplacian;

  std::function<double(const Vec3&)> p;
  std::function<Vec3(const Vec3&)> p_gradient;
};

/// Closed-form evaluators from the polynomial algebra, no validation.
ExactEvaluators closed_form_evaluators();

/// Thrown by the validation gate; names the failing evaluator.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidationOptions {
  double step = 1e-5;
  int points = 20;
  double rel_tol = 1e-6;
  unsigned seed = 12345;
};

/// Each derivative evaluator against central differences of the evaluator one
/// order below, at random interior points. Throws ValidationError on mismatch.
void validate_evaluators(const ExactEvaluators& ev, const ValidationOptions& options = {});

/// Validated evaluators (the gate runs once per process).
const ExactEvaluators& exact_fields();

/// Analytic fields in the form consumed by assembly and error routines.
ScalarFunction2 exact_w1();
ScalarFunction2 exact_w2();
VectorFunction3 exact_u();
ScalarFunction3 exact_p();

struct LoadSet {
  double lambda = 1.0;
  VectorFunction3 f1;  ///< lambda u - Laplace u + grad p
  ScalarFunction2 f2;  ///< lambda w1 - w2 (value, gradient, Hessian)
  ScalarFunction2 f3;  ///< lambda w2 + biharmonic w1 - p on the plate
};

LoadSet build_loads(double lambda);

/// The gate for the loads: f1 against lambda u minus a finite-difference Laplacian,
/// f3 against lambda w2 plus a finite-difference bilaplacian of w1.
void validate_loads(const LoadSet& loads, const ValidationOptions& options = {});

// ---------------------------------------------------------------------------
// Errors and rates

enum class Norm { L2, H1, H2Broken };

/// Error norm between a finite element field and the exact field, degree-8 quadrature.
/// H1 is the gradient seminorm; H2Broken is the elementwise Hessian seminorm (plate fields).
double error_norm(const FeField& field, const ScalarFunction2& exact, Norm norm);
double error_norm(const FeField& field, const ScalarFunction3& exact, Norm norm);
double error_norm(const FeField& field, const VectorFunction3& exact, Norm norm);

double rate(double e_coarse, double e_fine, double h_coarse, double h_fine);

// ---------------------------------------------------------------------------
// Convergence study

enum class StudyMode { Partitioned, Monolithic, StokesOnly, PlateOnly };

const char* to_string(StudyMode mode);
StudyMode parse_study_mode(const std::string& name);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  int elements = 0;  ///< fluid tetrahedra
  double l2_u = 0.0, h1_u = 0.0, l2_p = 0.0;
  double l2_w1 = 0.0, h1_w1 = 0.0, h2_w1 = 0.0;
  int iterations = 0;
};

struct ConvergenceReport {
  StudyMode mode = StudyMode::Partitioned;
  std::vector<ConvergenceRow> rows;
};

struct StudyOptions {
  double lambda = 1.0;
  double eps = 1e-10;
  int max_iter = 20;
  double omega = 1.0;
  W2Recovery recovery = W2Recovery::Interpolation;
};

ConvergenceReport run_convergence_study(const std::vector<int>& ns, StudyMode mode,
                                        const StudyOptions& options = {});

/// Column names of the report CSV, in order.
const std::vector<std::string>& convergence_columns();
/// One line per row; rate cells empty on the first row; `comment` is written as `# comment`.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report, const std::string& comment);
/// `elements error` pairs for one error column (e.g. "L2_u").
void write_gnuplot_series(std::ostream& os, const ConvergenceReport& report, const std::string& column,
                          const std::string& comment);
double column_value(const ConvergenceRow& row, const std::string& column);

/// %.5e
std::string format_sci(double v);

}  // namespace fpi
