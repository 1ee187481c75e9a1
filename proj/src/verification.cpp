#include "fpi/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "fpi/coupling.hpp"
#include "fpi/mixed_system.hpp"
#include "fpi/plate.hpp"
#include "fpi/stokes.hpp"

namespace fpi {

// ---------------------------------------------------------------------------
// Polynomials

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::monomial(int degree, double c) {
  std::vector<double> v(degree + 1, 0.0);
  v[degree] = c;
  return Polynomial(std::move(v));
}

double Polynomial::operator()(double t) const {
  double s = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * t + *it;
  return s;
}

Polynomial Polynomial::derivative(int order) const {
  std::vector<double> d = c_;
  for (int o = 0; o < order; ++o) {
    if (d.size() <= 1) return Polynomial({0.0});
    for (std::size_t k = 1; k < d.size(); ++k) d[k - 1] = static_cast<double>(k) * d[k];
    d.pop_back();
  }
  return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c_.empty() || b.c_.empty()) return Polynomial({0.0});
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& a) {
  std::vector<double> c = a.c_;
  for (double& v : c) v *= s;
  return Polynomial(std::move(c));
}

Polynomial from_factors(double scale, const std::vector<std::pair<double, int>>& factors) {
  Polynomial p({scale});
  for (const auto& [root, mult] : factors)
    for (int m = 0; m < mult; ++m) p = p * Polynomial({-root, 1.0});
  return p;
}

// ---------------------------------------------------------------------------
// Separable fields

double SeparableField::operator()(const Vec3& p) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.x(p.x()) * t.y(p.y()) * t.z(p.z());
  return s;
}

SeparableField SeparableField::derivative(int a, int b, int c) const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back({t.x.derivative(a), t.y.derivative(b), t.z.derivative(c)});
  return SeparableField(std::move(out));
}

SeparableField SeparableField::scaled(double s) const {
  std::vector<Term> out = terms_;
  for (auto& t : out) t.x = s * t.x;
  return SeparableField(std::move(out));
}

SeparableField operator+(const SeparableField& a, const SeparableField& b) {
  std::vector<SeparableField::Term> out = a.terms_;
  out.insert(out.end(), b.terms_.begin(), b.terms_.end());
  return SeparableField(std::move(out));
}

// ---------------------------------------------------------------------------
// Manufactured fields

namespace {

const Polynomial kOne({1.0});

struct Fields {
  SeparableField w1, w2, p;
  std::array<SeparableField, 3> u;
};

Fields make_fields() {
  // X4 = x^4 (x-1)^4 (2x-1), Y4 = y^4 (y-1)^4, X5 = x^5 (x-1)^5 / 5 with X5' = X4
  const Polynomial x4 = from_factors(2.0, {{0.0, 4}, {1.0, 4}, {0.5, 1}});
  const Polynomial y4 = from_factors(1.0, {{0.0, 4}, {1.0, 4}});
  const Polynomial x5 = from_factors(0.2, {{0.0, 5}, {1.0, 5}});
  // phi(z) = -6 z^5 - 15 z^4 - 10 z^3 - 1: phi(0) = -1, phi(-1) = 0, phi'(0) = phi'(-1) = 0
  const Polynomial phi({-1.0, 0.0, 0.0, -10.0, -15.0, -6.0});

  Fields f;
  f.w1 = SeparableField({{-1.0 * x4, y4, kOne}});
  f.w2 = SeparableField({{x4.derivative(2), y4, kOne}, {x4, y4.derivative(2), kOne}});
  f.u[0] = SeparableField({{x4.derivative(), y4, phi.derivative()}, {x5, y4.derivative(2), phi.derivative()}});
  f.u[1] = SeparableField({{Polynomial({0.0}), kOne, kOne}});
  f.u[2] = SeparableField({{-1.0 * x4.derivative(2), y4, phi}, {-1.0 * x4, y4.derivative(2), phi}});
  f.p = SeparableField({{Polynomial({0.0}), kOne, kOne}});
  return f;
}

SeparableField laplacian2(const SeparableField& f) { return f.derivative(2, 0, 0) + f.derivative(0, 2, 0); }
SeparableField laplacian3(const SeparableField& f) { return laplacian2(f) + f.derivative(0, 0, 2); }

Vec3 lift(const Vec2& p) { return {p.x(), p.y(), 0.0}; }

std::function<double(const Vec2&)> scalar2(SeparableField f) {
  return [f = std::move(f)](const Vec2& p) { return f(lift(p)); };
}

std::function<Vec2(const Vec2&)> gradient2(const SeparableField& f) {
  return [dx = f.derivative(1, 0, 0), dy = f.derivative(0, 1, 0)](const Vec2& p) {
    const Vec3 q = lift(p);
    return Vec2(dx(q), dy(q));
  };
}

std::function<Mat2(const Vec2&)> hessian2(const SeparableField& f) {
  return [xx = f.derivative(2, 0, 0), xy = f.derivative(1, 1, 0), yy = f.derivative(0, 2, 0)](const Vec2& p) {
    const Vec3 q = lift(p);
    Mat2 h;
    h << xx(q), xy(q), xy(q), yy(q);
    return h;
  };
}

std::function<Vec3(const Vec3&)> vector3(std::array<SeparableField, 3> f) {
  return [f = std::move(f)](const Vec3& p) { return Vec3(f[0](p), f[1](p), f[2](p)); };
}

}  // namespace

ExactEvaluators closed_form_evaluators() {
  const Fields f = make_fields();
  ExactEvaluators ev;
  ev.w1 = scalar2(f.w1);
  ev.w1_gradient = gradient2(f.w1);
  ev.w1_hessian = hessian2(f.w1);
  ev.w1_grad_laplacian = gradient2(laplacian2(f.w1));
  ev.w1_bilaplacian = scalar2(laplacian2(laplacian2(f.w1)));
  ev.w2 = scalar2(f.w2);
  ev.w2_gradient = gradient2(f.w2);
  ev.w2_hessian = hessian2(f.w2);

  ev.u = vector3(f.u);
  std::array<std::array<SeparableField, 3>, 3> jac;
  for (int i = 0; i < 3; ++i) {
    jac[i][0] = f.u[i].derivative(1, 0, 0);
    jac[i][1] = f.u[i].derivative(0, 1, 0);
    jac[i][2] = f.u[i].derivative(0, 0, 1);
  }
  ev.u_jacobian = [jac](const Vec3& p) {
    Mat3 j;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) j(r, c) = jac[r][c](p);
    return j;
  };
  ev.u_laplacian = vector3({laplacian3(f.u[0]), laplacian3(f.u[1]), laplacian3(f.u[2])});
  ev.p = [p = f.p](const Vec3& x) { return p(x); };
  ev.p_gradient = vector3({f.p.derivative(1, 0, 0), f.p.derivative(0, 1, 0), f.p.derivative(0, 0, 1)});
  return ev;
}

// ---------------------------------------------------------------------------
// Validation gate

namespace {

// Max deviation against a reference magnitude collected over all sample points.
class Check {
 public:
  Check(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}

  void add(const Eigen::VectorXd& analytic, const Eigen::VectorXd& reference) {
    scale_ = std::max(scale_, analytic.cwiseAbs().maxCoeff());
    worst_ = std::max(worst_, (analytic - reference).cwiseAbs().maxCoeff());
  }
  void finish() const {
    const double bound = scale_ > 0.0 ? tol_ * scale_ : 1e-12;
    if (!(worst_ <= bound)) {
      std::ostringstream os;
      os << "validation failed for " << name_ << ": max deviation " << worst_ << " exceeds " << bound;
      throw ValidationError(os.str());
    }
  }

 private:
  std::string name_;
  double tol_;
  double scale_ = 0.0, worst_ = 0.0;
};

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

template <typename F, typename P>
auto central(const F& f, const P& p, int axis, double h) {
  P a = p, b = p;
  a(axis) += h;
  b(axis) -= h;
  using R = std::decay_t<decltype(f(p))>;
  return R((f(a) - f(b)) / (2.0 * h));
}

Eigen::VectorXd flat(const Mat2& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), 4); }
Eigen::VectorXd flat(const Mat3& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), 9); }

}  // namespace

void validate_evaluators(const ExactEvaluators& ev, const ValidationOptions& opt) {
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> in(0.05, 0.95);
  const double h = opt.step;

  Check g1("w1_gradient", opt.rel_tol), h1("w1_hessian", opt.rel_tol), gl("w1_grad_laplacian", opt.rel_tol),
      bl("w1_bilaplacian", opt.rel_tol), w2c("w2 = -laplacian w1", opt.rel_tol), g2("w2_gradient", opt.rel_tol),
      h2("w2_hessian", opt.rel_tol), ju("u_jacobian", opt.rel_tol), lu("u_laplacian", opt.rel_tol),
      gp("p_gradient", opt.rel_tol);

  for (int k = 0; k < opt.points; ++k) {
    const Vec2 x(in(rng), in(rng));
    const Vec3 y(in(rng), in(rng), -in(rng));

    Vec2 fd_g;
    Mat2 fd_h;
    for (int a = 0; a < 2; ++a) {
      fd_g(a) = central(ev.w1, x, a, h);
      fd_h.col(a) = central(ev.w1_gradient, x, a, h);
    }
    g1.add(ev.w1_gradient(x), fd_g);
    h1.add(flat(ev.w1_hessian(x)), flat(fd_h));

    auto lap = [&ev](const Vec2& p) { return ev.w1_hessian(p).trace(); };
    Vec2 fd_gl(central(lap, x, 0, h), central(lap, x, 1, h));
    gl.add(ev.w1_grad_laplacian(x), fd_gl);
    const double fd_bl =
        central([&ev](const Vec2& p) { return ev.w1_grad_laplacian(p)(0); }, x, 0, h) +
        central([&ev](const Vec2& p) { return ev.w1_grad_laplacian(p)(1); }, x, 1, h);
    bl.add(scalar(ev.w1_bilaplacian(x)), scalar(fd_bl));
    w2c.add(scalar(ev.w2(x)), scalar(-lap(x)));

    for (int a = 0; a < 2; ++a) {
      fd_g(a) = central(ev.w2, x, a, h);
      fd_h.col(a) = central(ev.w2_gradient, x, a, h);
    }
    g2.add(ev.w2_gradient(x), fd_g);
    h2.add(flat(ev.w2_hessian(x)), flat(fd_h));

    Mat3 fd_j;
    Vec3 fd_lap = Vec3::Zero();
    Vec3 fd_gp;
    for (int a = 0; a < 3; ++a) {
      fd_j.col(a) = central(ev.u, y, a, h);
      fd_lap += central([&ev, a](const Vec3& p) -> Vec3 { return ev.u_jacobian(p).col(a); }, y, a, h);
      fd_gp(a) = central(ev.p, y, a, h);
    }
    ju.add(flat(ev.u_jacobian(y)), flat(fd_j));
    lu.add(ev.u_laplacian(y), fd_lap);
    gp.add(ev.p_gradient(y), fd_gp);
  }
  for (const Check* c : {&g1, &h1, &gl, &bl, &w2c, &g2, &h2, &ju, &lu, &gp}) c->finish();
}

const ExactEvaluators& exact_fields() {
  static const ExactEvaluators validated = [] {
    ExactEvaluators ev = closed_form_evaluators();
    validate_evaluators(ev);
    return ev;
  }();
  return validated;
}

ScalarFunction2 exact_w1() {
  const ExactEvaluators& ev = exact_fields();
  return {ev.w1, ev.w1_gradient, ev.w1_hessian};
}

ScalarFunction2 exact_w2() {
  const ExactEvaluators& ev = exact_fields();
  return {ev.w2, ev.w2_gradient, ev.w2_hessian};
}

VectorFunction3 exact_u() {
  const ExactEvaluators& ev = exact_fields();
  VectorFunction3 f;
  for (int i = 0; i < 3; ++i) {
    f.component[i].value = [&ev, i](const Vec3& p) { return ev.u(p)(i); };
    f.component[i].gradient = [&ev, i](const Vec3& p) -> Vec3 { return ev.u_jacobian(p).row(i).transpose(); };
  }
  return f;
}

ScalarFunction3 exact_p() {
  const ExactEvaluators& ev = exact_fields();
  return {ev.p, ev.p_gradient, {}};
}

LoadSet build_loads(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("build_loads: lambda must be positive");
  const ExactEvaluators& ev = exact_fields();
  LoadSet l;
  l.lambda = lambda;
  for (int i = 0; i < 3; ++i)
    l.f1.component[i].value = [&ev, lambda, i](const Vec3& p) {
      return lambda * ev.u(p)(i) - ev.u_laplacian(p)(i) + ev.p_gradient(p)(i);
    };
  l.f2.value = [&ev, lambda](const Vec2& p) { return lambda * ev.w1(p) - ev.w2(p); };
  l.f2.gradient = [&ev, lambda](const Vec2& p) -> Vec2 { return lambda * ev.w1_gradient(p) - ev.w2_gradient(p); };
  l.f2.hessian = [&ev, lambda](const Vec2& p) -> Mat2 { return lambda * ev.w1_hessian(p) - ev.w2_hessian(p); };
  l.f3.value = [&ev, lambda](const Vec2& p) {
    return lambda * ev.w2(p) + ev.w1_bilaplacian(p) - ev.p(Vec3(p.x(), p.y(), 0.0));
  };
  return l;
}

void validate_loads(const LoadSet& loads, const ValidationOptions& opt) {
  const ExactEvaluators& ev = exact_fields();
  std::mt19937 rng(opt.seed + 1);
  std::uniform_real_distribution<double> in(0.05, 0.95);
  Check c1("f1", opt.rel_tol), c3("f3", 10.0 * opt.rel_tol);
  // Second differences of the values only, Richardson-extrapolated.
  const double h = 1e-3;
  for (int k = 0; k < opt.points; ++k) {
    const Vec3 y(in(rng), in(rng), -in(rng));
    auto lap3 = [&ev](const Vec3& p, double s) {
      Vec3 l = -6.0 * ev.u(p);
      for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e(a) = s;
        l += ev.u(p + e) + ev.u(p - e);
      }
      return Vec3(l / (s * s));
    };
    const Vec3 lap = (4.0 * lap3(y, h / 2) - lap3(y, h)) / 3.0;
    Vec3 f1;
    for (int i = 0; i < 3; ++i) f1(i) = loads.f1.component[i].value(y);
    c1.add(f1, loads.lambda * ev.u(y) - lap);

    const Vec2 x(in(rng), in(rng));
    auto lap2 = [](const auto& f, const Vec2& p, double s) {
      return (f(p + Vec2(s, 0)) + f(p - Vec2(s, 0)) + f(p + Vec2(0, s)) + f(p - Vec2(0, s)) - 4.0 * f(p)) / (s * s);
    };
    // The expanded polynomial coefficients cancel badly at small steps, so use a
    // wide stencil and two Richardson levels (sixth order).
    auto bilap = [&](double step) {
      return lap2([&](const Vec2& q) { return lap2(ev.w1, q, step); }, x, step);
    };
    auto r1 = [&](double t) { return (4.0 * bilap(t / 2) - bilap(t)) / 3.0; };
    const double fd = (16.0 * r1(1.6e-2) - r1(3.2e-2)) / 15.0;
    c3.add(scalar(loads.f3.value(x)), scalar(loads.lambda * ev.w2(x) + fd));
  }
  c1.finish();
  c3.finish();
}

// ---------------------------------------------------------------------------
// Error norms

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

constexpr int kErrorDegree = 8;

}  // namespace

double error_norm(const FeField& field, const ScalarFunction2& exact, Norm norm) {
  const FunctionSpace& space = *field.space;
  require(space.cell_type() == CellType::Tri, "error_norm: plate field expected");
  require(norm != Norm::H2Broken || space.kind() != ElementKind::P1Tri, "error_norm: broken H2 needs Morley or P2");
  require(norm != Norm::L2 || static_cast<bool>(exact.value), "error_norm: exact value missing");
  require(norm != Norm::H1 || static_cast<bool>(exact.gradient), "error_norm: exact gradient missing");
  require(norm != Norm::H2Broken || static_cast<bool>(exact.hessian), "error_norm: exact Hessian missing");

  CellEvaluator ev(field.space, make_quadrature(CellType::Tri, kErrorDegree), norm == Norm::H2Broken);
  double sum = 0.0;
  for (int c = 0; c < space.num_cells(); ++c) {
    ev.reinit(c);
    const Eigen::VectorXd coef = local_coefficients(field, c).col(0);
    for (int q = 0; q < ev.n_qp(); ++q) {
      const Vec2 x = ev.point(q).head<2>();
      double e2 = 0.0;
      if (norm == Norm::L2) {
        e2 = std::pow(ev.values().col(q).dot(coef) - exact.value(x), 2);
      } else if (norm == Norm::H1) {
        e2 = (ev.gradients(q).transpose() * coef - exact.gradient(x)).squaredNorm();
      } else {
        const Eigen::Vector4d hh = ev.hessians(q).transpose() * coef;
        const Mat2 he = exact.hessian(x);
        e2 = (hh - Eigen::Vector4d(he(0, 0), he(0, 1), he(1, 0), he(1, 1))).squaredNorm();
      }
      sum += ev.jxw(q) * e2;
    }
  }
  return std::sqrt(sum);
}

double error_norm(const FeField& field, const ScalarFunction3& exact, Norm norm) {
  VectorFunction3 v;
  v.component[0] = exact;
  require(field.space->components() == 1, "error_norm: scalar field expected");
  return error_norm(field, v, norm);
}

double error_norm(const FeField& field, const VectorFunction3& exact, Norm norm) {
  const FunctionSpace& space = *field.space;
  require(space.cell_type() == CellType::Tet, "error_norm: fluid field expected");
  require(norm != Norm::H2Broken, "error_norm: broken H2 is defined for plate fields only");
  const int nc = space.components();
  for (int k = 0; k < nc; ++k) {
    require(norm != Norm::L2 || static_cast<bool>(exact.component[k].value), "error_norm: exact value missing");
    require(norm != Norm::H1 || static_cast<bool>(exact.component[k].gradient), "error_norm: exact gradient missing");
  }

  CellEvaluator ev(field.space, make_quadrature(CellType::Tet, kErrorDegree));
  double sum = 0.0;
  for (int c = 0; c < space.num_cells(); ++c) {
    ev.reinit(c);
    const Eigen::MatrixXd coef = local_coefficients(field, c);
    for (int q = 0; q < ev.n_qp(); ++q) {
      const Vec3& x = ev.point(q);
      double e2 = 0.0;
      if (norm == Norm::L2) {
        const Eigen::VectorXd uh = coef.transpose() * ev.values().col(q);
        for (int k = 0; k < nc; ++k) e2 += std::pow(uh(k) - exact.component[k].value(x), 2);
      } else {
        const Eigen::MatrixXd gh = coef.transpose() * ev.gradients(q);  // nc x 3
        for (int k = 0; k < nc; ++k) e2 += (gh.row(k).transpose() - exact.component[k].gradient(x)).squaredNorm();
      }
      sum += ev.jxw(q) * e2;
    }
  }
  return std::sqrt(sum);
}

double rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !(h_fine > 0.0) || !(h_coarse > h_fine))
    throw std::invalid_argument("rate: need positive errors and h_coarse > h_fine > 0");
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

// ---------------------------------------------------------------------------
// Convergence study

const char* to_string(StudyMode mode) {
  switch (mode) {
    case StudyMode::Partitioned: return "partitioned";
    case StudyMode::Monolithic: return "monolithic";
    case StudyMode::StokesOnly: return "stokes-only";
    case StudyMode::PlateOnly: return "plate-only";
  }
  return "?";
}

StudyMode parse_study_mode(const std::string& name) {
  for (StudyMode m : {StudyMode::Partitioned, StudyMode::Monolithic, StudyMode::StokesOnly, StudyMode::PlateOnly})
    if (name == to_string(m)) return m;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

ConvergenceReport run_convergence_study(const std::vector<int>& ns, StudyMode mode, const StudyOptions& options) {
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1]))
      throw std::invalid_argument("run_convergence_study: n-list must be positive and ascending");
  const LoadSet loads = build_loads(options.lambda);
  const FsiLoads fsi{loads.f1, loads.f2, loads.f3};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  ConvergenceReport report;
  report.mode = mode;
  for (int n : ns) {
    try {
      const FsiMesh mesh = make_fsi_mesh(n);
      ConvergenceRow row;
      row.n = n;
      row.h = 1.0 / n;
      row.elements = mesh.fluid->num_tets();
      row.l2_u = row.h1_u = row.l2_p = row.l2_w1 = row.h1_w1 = row.h2_w1 = nan;
      const FeField* u = nullptr;
      const FeField* p = nullptr;
      const FeField* w1 = nullptr;

      PartitionedResult part;
      MonolithicSolution mono;
      StokesSolution fluid;
      PlateSolution solid;
      switch (mode) {
        case StudyMode::Partitioned: {
          CouplingConfig cfg{options.lambda, options.eps, options.max_iter, options.omega, options.recovery};
          part = run_partitioned(mesh, cfg, fsi);
          if (!part.trace.converged)
            throw std::runtime_error("fixed point did not reach eps in " + std::to_string(cfg.max_iter) + " iterations");
          row.iterations = part.trace.iterations;
          u = &part.state.u;
          p = &part.state.p;
          w1 = &part.state.w1;
          break;
        }
        case StudyMode::Monolithic:
          mono = solve_monolithic(mesh, options.lambda, 0.0, fsi);
          u = &mono.u;
          p = &mono.q0;
          w1 = &mono.w1;
          break;
        case StudyMode::StokesOnly: {
          const StokesSolver solver(mesh, options.lambda);
          const FeField g = interpolate(solver.plate_space(), exact_w2());
          fluid = solver.solve(solver.load_vector(loads.f1), &g);
          u = &fluid.u;
          p = &fluid.p;
          break;
        }
        case StudyMode::PlateOnly: {
          const PlateSolver solver(mesh, options.lambda, options.recovery);
          solid = solver.solve(solver.load(loads.f2, loads.f3), nullptr);
          w1 = &solid.w1;
          break;
        }
      }
      if (u) {
        row.l2_u = error_norm(*u, exact_u(), Norm::L2);
        row.h1_u = error_norm(*u, exact_u(), Norm::H1);
        row.l2_p = error_norm(*p, exact_p(), Norm::L2);
      }
      if (w1) {
        row.l2_w1 = error_norm(*w1, exact_w1(), Norm::L2);
        row.h1_w1 = error_norm(*w1, exact_w1(), Norm::H1);
        row.h2_w1 = error_norm(*w1, exact_w1(), Norm::H2Broken);
      }
      report.rows.push_back(row);
    } catch (const std::exception& e) {
      throw std::runtime_error("convergence study, n = " + std::to_string(n) + ": " + e.what());
    }
  }
  return report;
}

const std::vector<std::string>& convergence_columns() {
  static const std::vector<std::string> cols{"h",        "L2_u",  "rate_L2_u",  "H1_u",  "rate_H1_u",
                                             "L2_p",     "rate_L2_p", "L2_w1", "rate_L2_w1", "H1_w1",
                                             "rate_H1_w1", "H2_w1", "rate_H2_w1"};
  return cols;
}

double column_value(const ConvergenceRow& row, const std::string& column) {
  if (column == "h") return row.h;
  if (column == "L2_u") return row.l2_u;
  if (column == "H1_u") return row.h1_u;
  if (column == "L2_p") return row.l2_p;
  if (column == "L2_w1") return row.l2_w1;
  if (column == "H1_w1") return row.h1_w1;
  if (column == "H2_w1") return row.h2_w1;
  throw std::invalid_argument("unknown column '" + column + "'");
}

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report, const std::string& comment) {
  const auto& cols = convergence_columns();
  os << "# " << comment << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const ConvergenceRow& row = report.rows[r];
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) os << ',';
      const std::string& c = cols[i];
      if (c.rfind("rate_", 0) == 0) {
        if (r == 0) continue;
        const ConvergenceRow& prev = report.rows[r - 1];
        const std::string base = c.substr(5);
        const double a = column_value(prev, base), b = column_value(row, base);
        if (a > 0.0 && b > 0.0) os << format_sci(rate(a, b, prev.h, row.h));
        else os << "nan";
      } else {
        os << format_sci(column_value(row, c));
      }
    }
    os << '\n';
  }
}

void write_gnuplot_series(std::ostream& os, const ConvergenceReport& report, const std::string& column,
                          const std::string& comment) {
  const bool plate = column.find("w1") != std::string::npos;
  os << "# " << comment << '\n';
  os << "# elements " << column << '\n';
  for (const auto& row : report.rows) os << (plate ? 2 * row.n * row.n : row.elements) << ' ' << format_sci(column_value(row, column)) << '\n';
}

}  // namespace fpi
