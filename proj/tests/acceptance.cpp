// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fpi/cli.hpp"
#include "fpi/coupling.hpp"
#include "fpi/forms.hpp"
#include "fpi/mixed_system.hpp"
#include "fpi/stokes.hpp"
#include "fpi/verification.hpp"

using namespace fpi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Outcome& o, double seconds) {
  std::printf("%s criterion %d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.str().c_str(),
              seconds);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename F>
void criterion(int id, const std::string& title, F body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  report(id, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string sci(double v) { return format_sci(v); }

bool within_rel(double v, double ref, double rel) { return std::abs(v - ref) <= rel * std::abs(ref); }
bool within_factor(double v, double ref, double f) { return v <= f * ref && v >= ref / f; }

/// Columns of a convergence CSV keyed by header name.
std::map<std::string, std::vector<double>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (header.empty()) {
      header = cells;
      continue;
    }
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i)
      cols[header[i]].push_back(cells[i].empty() ? std::nan("") : std::stod(cells[i]));
  }
  return cols;
}

FsiLoads exact_loads() {
  const LoadSet l = build_loads(1.0);
  return {l.f1, l.f2, l.f3};
}

/// |int p| and max_q |(div u, q)| of a fluid pair.
std::pair<double, double> fluid_constraints(const FeField& u, const FeField& p) {
  const double mean = assemble_mean_vector(p.space).dot(p.coeffs);
  const double div = assemble_divergence(u.space, p.space).multiply(u.coeffs).cwiseAbs().maxCoeff();
  return {std::abs(mean), div};
}

struct ConvergedRun {
  std::string label;
  FeField u, p;
};

std::vector<ConvergedRun> converged_runs;
std::vector<MonolithicSolution> monolithic_runs;

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  // The gate runs before any benchmark.
  criterion(7, "exact-solution validation gate", [](Outcome& o) {
    ValidationOptions opt;
    opt.points = 20;
    opt.rel_tol = 1e-6;
    bool passed = true;
    try {
      validate_evaluators(closed_form_evaluators(), opt);
    } catch (const ValidationError& e) {
      passed = false;
      o.detail << " closed form rejected: " << e.what();
    }
    o.require(passed, "closed-form evaluators pass the finite-difference check");
    ExactEvaluators tampered = closed_form_evaluators();
    const auto grad = tampered.w1_gradient;
    tampered.w1_gradient = [grad](const Vec2& x) -> Vec2 { return Vec2(-grad(x).x(), grad(x).y()); };
    bool caught = false;
    try {
      validate_evaluators(tampered, opt);
    } catch (const ValidationError& e) {
      caught = true;
      o.detail << " negative control: " << e.what();
    }
    o.require(caught, "sign error must fail the gate");
    validate_loads(build_loads(1.0), opt);
    o.detail << "; loads consistent";
    (void)exact_fields();
  });

  const fs::path dir = fs::temp_directory_path() / "fpi_acceptance";
  fs::remove_all(dir);
  bool table_ok = false;
  std::map<std::string, std::vector<double>> table;
  {
    const std::string out = dir.string();
    const char* argv[] = {"fpi", "convergence", "--n", "4,6,8", "--mode", "partitioned", "--out", out.c_str()};
    std::ostringstream sout, serr;
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_cli(8, argv, sout, serr);
    std::printf("convergence --n 4,6,8 --mode partitioned: exit %d (%.1f s)\n%s", code,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), sout.str().c_str());
    if (code == 0) {
      table = read_csv(dir / "convergence.csv");
      table_ok = table["L2_u"].size() == 3;
    } else {
      std::printf("%s", serr.str().c_str());
    }
  }

  criterion(1, "velocity and pressure errors at n = 4, 6, 8", [&](Outcome& o) {
    o.require(table_ok, "convergence run produced three rows");
    if (!table_ok) return;
    const double ref_u[] = {1.17e-05, 5.05e-06, 2.53e-06}, ref_p[] = {8.82e-05, 2.94e-05, 1.24e-05};
    const double rate_u[] = {2.06, 2.40}, rate_p[] = {2.71, 2.99};
    for (int i = 0; i < 3; ++i) {
      o.detail << " L2_u=" << sci(table["L2_u"][i]) << " L2_p=" << sci(table["L2_p"][i]) << ';';
      o.require(within_rel(table["L2_u"][i], ref_u[i], 0.5), "L2_u row " + std::to_string(i + 1) + " within 50%");
      o.require(within_rel(table["L2_p"][i], ref_p[i], 0.5), "L2_p row " + std::to_string(i + 1) + " within 50%");
    }
    for (int i = 0; i < 2; ++i) {
      const double ru = table["rate_L2_u"][i + 1], rp = table["rate_L2_p"][i + 1];
      o.detail << " rates " << ru << ", " << rp << ';';
      o.require(std::abs(ru - rate_u[i]) <= 0.35, "velocity rate " + std::to_string(i + 1) + " within 0.35");
      o.require(std::abs(rp - rate_p[i]) <= 0.35, "pressure rate " + std::to_string(i + 1) + " within 0.35");
    }
  });

  criterion(2, "plate errors at n = 4, 6, 8", [&](Outcome& o) {
    o.require(table_ok, "convergence run produced three rows");
    if (!table_ok) return;
    const double ref_l2[] = {8.54e-07, 5.16e-07, 2.73e-07}, ref_h2[] = {9.28e-05, 6.31e-05, 4.76e-05};
    const double rate_h2[] = {0.95, 0.97}, rate_h1[] = {1.22, 2.00};
    for (int i = 0; i < 3; ++i) {
      o.detail << " L2_w1=" << sci(table["L2_w1"][i]) << " H2_w1=" << sci(table["H2_w1"][i]) << ';';
      o.require(within_factor(table["L2_w1"][i], ref_l2[i], 2.0), "L2_w1 row " + std::to_string(i + 1) + " within x2");
      o.require(within_factor(table["H2_w1"][i], ref_h2[i], 2.0), "H2_w1 row " + std::to_string(i + 1) + " within x2");
    }
    for (int i = 0; i < 2; ++i) {
      const double r2 = table["rate_H2_w1"][i + 1], r1 = table["rate_H1_w1"][i + 1];
      o.detail << " rates H2 " << r2 << " H1 " << r1 << ';';
      o.require(std::abs(r2 - rate_h2[i]) <= 0.5, "H2 rate " + std::to_string(i + 1) + " within 0.5");
      o.require(std::abs(r1 - rate_h1[i]) <= 0.6, "H1 rate " + std::to_string(i + 1) + " within 0.6");
    }
  });

  criterion(3, "iteration decay of the partitioned scheme at n = 12", [&](Outcome& o) {
    const FsiMesh mesh = make_fsi_mesh(12);
    CouplingConfig cfg;
    cfg.eps = 1e-10;
    const PartitionedResult r = run_partitioned(mesh, cfg, exact_loads());
    const IterationTrace& t = r.trace;
    o.detail << " iterations=" << t.iterations << " converged=" << (t.converged ? "yes" : "no") << ';';
    o.require(t.converged && t.iterations <= 5, "converged within 5 iterations");
    const std::pair<const char*, const std::vector<double>*> seqs[] = {
        {"u", &t.err_u}, {"p", &t.err_p}, {"w1", &t.err_w1}};
    for (const auto& [name, e] : seqs) {
      o.detail << ' ' << name << ':';
      for (double v : *e) o.detail << ' ' << sci(v);
      o.detail << ';';
      if (e->size() < 4) {
        o.require(false, std::string(name) + " has four iterates");
        continue;
      }
      o.require((*e)[2] <= 1e-2 * (*e)[1], std::string(name) + " drops two orders from 2 to 3");
      o.require((*e)[3] <= 1e-2 * (*e)[2], std::string(name) + " drops two more orders by 4");
    }
    if (t.converged) converged_runs.push_back({"partitioned n=12", r.state.u, r.state.p});
  });

  double diff_n2 = 0.0;
  criterion(5, "partitioned and monolithic solutions agree", [&](Outcome& o) {
    std::vector<double> diffs;
    for (int n : {2, 3}) {
      const FsiMesh mesh = make_fsi_mesh(n);
      CouplingConfig cfg;
      cfg.eps = 1e-12;
      cfg.max_iter = 40;
      const PartitionedResult part = run_partitioned(mesh, cfg, exact_loads());
      const MonolithicSolution mono = solve_monolithic(mesh, 1.0, 0.0, exact_loads());
      o.require(part.trace.converged, "partitioned run converged at n=" + std::to_string(n));
      if (part.trace.converged)
        converged_runs.push_back({"partitioned n=" + std::to_string(n), part.state.u, part.state.p});
      const double d = l2_norm(FeField(mono.u.space, mono.u.coeffs - part.state.u.coeffs));
      const double ep = error_norm(part.state.u, exact_u(), Norm::L2);
      const double em = error_norm(mono.u, exact_u(), Norm::L2);
      diffs.push_back(d);
      o.detail << " n=" << n << " |u_part - u_mono|=" << sci(d) << " err_part=" << sci(ep) << " err_mono=" << sci(em)
               << ';';
      monolithic_runs.push_back(mono);
    }
    diff_n2 = diffs[0];
    o.require(diffs[0] <= 1e-6, "velocity difference at n=2 within 1e-6");
    o.require(diffs[1] < diffs[0], "difference shrinks from n=2 to n=3");
  });
  (void)diff_n2;

  criterion(4, "constraint properties of converged solves", [&](Outcome& o) {
    o.require(!converged_runs.empty() && !monolithic_runs.empty(), "solves available");
    for (const auto& run : converged_runs) {
      const auto [mean, div] = fluid_constraints(run.u, run.p);
      o.detail << ' ' << run.label << ": |int p|=" << sci(mean) << " max|(div u,q)|=" << sci(div) << ';';
      o.require(mean <= 1e-11, run.label + " pressure mean");
      o.require(div <= 1e-9, run.label + " divergence");
    }
    for (const auto& m : monolithic_runs) {
      const auto [mean, div] = fluid_constraints(m.u, m.q0);
      const double iw = std::abs(integral(m.w2));
      o.detail << " monolithic: |int p|=" << sci(mean) << " max|(div u,q)|=" << sci(div) << " |int w2|=" << sci(iw)
               << " |B(u,w2)|=" << sci(m.constraint_residual) << ';';
      o.require(mean <= 1e-11, "monolithic pressure mean");
      o.require(div <= 1e-9, "monolithic divergence");
      o.require(iw <= 1e-10, "monolithic plate mean");
      o.require(m.constraint_residual <= 1e-9, "monolithic constraint residual");
    }
  });

  criterion(6, "discrete inf-sup stability for n = 2, 3, 4", [&](Outcome& o) {
    std::vector<double> betas;
    for (int n : {2, 3, 4}) {
      const FsiMesh mesh = make_fsi_mesh(n);
      const InfSupReport schur = estimate_infsup(mesh);
      InfSupOptions aug;
      aug.path = InfSupPath::Augmented;
      const InfSupReport other = estimate_infsup(mesh, aug);
      const double rel = std::abs(schur.beta - other.beta) / std::max(schur.beta, 1e-300);
      o.detail << " n=" << n << " beta=" << sci(schur.beta) << " (paths differ by " << sci(rel) << ");";
      o.require(schur.beta > 0.0, "beta positive at n=" + std::to_string(n));
      o.require(rel <= 1e-8, "paths agree at n=" + std::to_string(n));
      betas.push_back(schur.beta);
    }
    o.require(*std::min_element(betas.begin(), betas.end()) >= 0.5 * betas.front(), "min beta >= half of beta at n=2");
  });

  fs::remove_all(dir);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
