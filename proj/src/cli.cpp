#include "fpi/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "fpi/coupling.hpp"
#include "fpi/mesh.hpp"
#include "fpi/mixed_system.hpp"

namespace fpi {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kErrorColumns = {"L2_u", "H1_u", "L2_p", "L2_w1", "H1_w1", "H2_w1"};

std::string join_ns(const std::vector<int>& ns) {
  std::string s;
  for (std::size_t i = 0; i < ns.size(); ++i) s += (i ? "," : "") + std::to_string(ns[i]);
  return s;
}

/// Throws with the path on failure.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  body(f);
  f.flush();
  if (!f) throw std::ios_base::failure("write failed: " + path.string());
}

std::string summary(const ConvergenceRow& r) {
  std::ostringstream s;
  s << "n=" << r.n << " h=" << format_sci(r.h);
  for (const std::string& c : kErrorColumns) {
    const double v = column_value(r, c);
    if (!std::isnan(v)) s << ' ' << c << '=' << format_sci(v);
  }
  if (r.iterations > 0) s << " iterations=" << r.iterations;
  return s.str();
}

void write_study(const RunConfig& config, const std::string& file, bool series,
                 std::ostream& out) {
  const fs::path dir(config.out);
  StudyOptions opts;
  opts.lambda = config.lambda;
  opts.eps = config.eps;
  opts.max_iter = config.max_iter;
  opts.omega = config.omega;
  const ConvergenceReport report = run_convergence_study(config.ns, config.mode, opts);
  const std::string comment = describe(config);
  write_file(dir / file, [&](std::ostream& os) { write_convergence_csv(os, report, comment); });
  if (series) {
    for (const std::string& col : kErrorColumns) {
      if (std::isnan(column_value(report.rows.front(), col))) continue;
      write_file(dir / (col + ".dat"), [&](std::ostream& os) { write_gnuplot_series(os, report, col, comment); });
    }
  }
  for (const auto& row : report.rows) out << summary(row) << '\n';
}

int run_coupled(const RunConfig& config, std::ostream& out) {
  const fs::path dir(config.out);
  const LoadSet loads = build_loads(config.lambda);
  const FsiLoads fsi{loads.f1, loads.f2, loads.f3};
  const std::string comment = describe(config);
  int status = 0;

  if (config.mode == StudyMode::Monolithic) {
    std::ostringstream csv;
    csv << "# " << comment << "\nn,L2_u,L2_p,L2_w1,constraint_residual,int_w2\n";
    for (int n : config.ns) {
      const FsiMesh mesh = make_fsi_mesh(n);
      const MonolithicSolution s = solve_monolithic(mesh, config.lambda, 0.0, fsi);
      const double eu = error_norm(s.u, exact_u(), Norm::L2);
      const double ep = error_norm(s.q0, exact_p(), Norm::L2);
      const double ew = error_norm(s.w1, exact_w1(), Norm::L2);
      const double iw = integral(s.w2);
      csv << n << ',' << format_sci(eu) << ',' << format_sci(ep) << ',' << format_sci(ew) << ','
          << format_sci(s.constraint_residual) << ',' << format_sci(iw) << '\n';
      out << "n=" << n << " L2_u=" << format_sci(eu) << " L2_p=" << format_sci(ep) << " L2_w1=" << format_sci(ew)
          << " constraint_residual=" << format_sci(s.constraint_residual) << '\n';
    }
    write_file(dir / "monolithic.csv", [&](std::ostream& os) { os << csv.str(); });
    return 0;
  }

  CouplingConfig cc;
  cc.lambda = config.lambda;
  cc.eps = config.eps;
  cc.max_iter = config.max_iter;
  cc.omega = config.omega;
  for (int n : config.ns) {
    const FsiMesh mesh = make_fsi_mesh(n);
    const PartitionedResult r = run_partitioned(mesh, cc, fsi);
    const std::string file = config.ns.size() == 1 ? "iterations.csv" : "iterations_n" + std::to_string(n) + ".csv";
    write_file(dir / file, [&](std::ostream& os) { write_iteration_csv(os, r.trace, comment); });
    const int k = r.trace.iterations;
    out << "n=" << n << " iterations=" << k << " converged=" << (r.trace.converged ? "yes" : "no");
    if (k > 0)
      out << " err_u=" << format_sci(r.trace.err_u[k - 1]) << " err_p=" << format_sci(r.trace.err_p[k - 1])
          << " err_w1=" << format_sci(r.trace.err_w1[k - 1]);
    out << '\n';
    if (!r.trace.converged) status = 2;
  }
  return status;
}

void run_infsup(const RunConfig& config, std::ostream& out) {
  std::vector<InfSupReport> reports;
  for (int n : config.ns) {
    const FsiMesh mesh = make_fsi_mesh(n);
    InfSupOptions opts;
    opts.lambda = config.lambda;
    reports.push_back(estimate_infsup(mesh, opts));
    out << "n=" << n << " beta=" << format_sci(reports.back().beta) << '\n';
  }
  const std::string json = infsup_json(reports, describe(config));
  write_file(fs::path(config.out) / "infsup.json", [&](std::ostream& os) { os << json; });
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Convergence: return "convergence";
    case Command::Coupled: return "coupled";
    case Command::Stokes: return "stokes";
    case Command::Plate: return "plate";
    case Command::InfSup: return "infsup";
  }
  return "?";
}

std::vector<int> default_ns(Command c) {
  switch (c) {
    case Command::Coupled: return {12};
    case Command::InfSup: return {2, 3, 4};
    default: return {4, 6, 8};
  }
}

ParseOutcome parse_args(int argc, const char* const* argv) {
  CLI::App app{"Stokes-plate interaction solver: convergence studies, coupled runs, inf-sup estimates"};
  app.require_subcommand(1, 1);

  RunConfig cfg;
  std::string mode = "partitioned";
  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::Convergence, "error table over --n for the chosen --mode"},
      {Command::Coupled, "one coupled solve per n; partitioned writes the iteration trace"},
      {Command::Stokes, "fluid alone with the exact plate velocity as boundary datum"},
      {Command::Plate, "plate alone without fluid pressure"},
      {Command::InfSup, "discrete inf-sup constant of the monolithic constraint"}};
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [cmd, text] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(cmd), text);
    sub->add_option("--n", cfg.ns, "mesh parameters, comma separated")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sub->add_option("--lambda", cfg.lambda, "reciprocal time step")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "output directory");
    if (cmd == Command::Convergence || cmd == Command::Coupled) {
      sub->add_option("--eps", cfg.eps, "successive-error tolerance")->check(CLI::PositiveNumber);
      sub->add_option("--max-iter", cfg.max_iter, "iteration cap")->check(CLI::PositiveNumber);
      sub->add_option("--omega", cfg.omega, "relaxation factor in (0, 1]");
      sub->add_option("--mode", mode, "partitioned or monolithic")
          ->check(CLI::IsMember({"partitioned", "monolithic"}));
    }
    subs.emplace_back(sub, cmd);
  }

  ParseOutcome outcome;
  try {
    app.parse(argc, argv);
    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) cfg.command = cmd;
    cfg.mode = cfg.command == Command::Stokes  ? StudyMode::StokesOnly
               : cfg.command == Command::Plate ? StudyMode::PlateOnly
                                               : parse_study_mode(mode);
    if (cfg.ns.empty()) cfg.ns = default_ns(cfg.command);
    CouplingConfig{cfg.lambda, cfg.eps, cfg.max_iter, cfg.omega}.validate();
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    outcome.exit_code = app.exit(e, o, er) == 0 ? 0 : 1;
    outcome.message = o.str() + er.str();
    return outcome;
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = 1;
    outcome.message = std::string(e.what()) + "\n" + app.help();
    return outcome;
  }
  outcome.config = cfg;
  return outcome;
}

std::string describe(const RunConfig& c) {
  std::ostringstream s;
  s << "command=" << to_string(c.command) << " n=" << join_ns(c.ns) << " lambda=" << c.lambda
    << " eps=" << c.eps << " max_iter=" << c.max_iter << " omega=" << c.omega << " mode=" << to_string(c.mode)
    << " out=" << c.out;
  return s.str();
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    fs::create_directories(config.out);
    switch (config.command) {
      case Command::Convergence: write_study(config, "convergence.csv", true, out); return 0;
      case Command::Stokes: write_study(config, "stokes.csv", false, out); return 0;
      case Command::Plate: write_study(config, "plate.csv", false, out); return 0;
      case Command::Coupled: return run_coupled(config, out);
      case Command::InfSup: run_infsup(config, out); return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 2;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const ParseOutcome parsed = parse_args(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? out : err) << parsed.message;
    return parsed.exit_code;
  }
  return execute(*parsed.config, out, err);
}

}  // namespace fpi
