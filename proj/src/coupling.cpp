#include "fpi/coupling.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "fpi/verification.hpp"

namespace fpi {

void CouplingConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("coupling: lambda must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("coupling: eps must be positive");
  if (max_iter < 1) throw std::invalid_argument("coupling: max_iter must be at least 1");
  if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("coupling: omega must lie in (0, 1]");
}

double successive_error(const FeField& prev, const FeField& next) {
  if (prev.space != next.space) throw std::invalid_argument("successive_error: fields live in different spaces");
  return l2_norm(FeField(next.space, next.coeffs - prev.coeffs));
}

PartitionedResult run_partitioned(const FsiMesh& mesh, const CouplingConfig& config, const FsiLoads& loads) {
  config.validate();
  const StokesSolver stokes(mesh, config.lambda);
  const PlateSolver plate(mesh, config.lambda, config.recovery);
  const Eigen::VectorXd fluid_load = stokes.load_vector(loads.f1);
  const PlateLoad plate_load = plate.load(loads.f2, loads.f3);

  PartitionedResult result;
  FsiState& s = result.state;
  s.u = FeField(stokes.velocity_space());
  s.p = FeField(stokes.pressure_space());
  s.w1 = FeField(plate.morley_space());
  s.w2 = FeField(plate.p2_space());
  IterationTrace& trace = result.trace;

  for (int k = 1; k <= config.max_iter; ++k) {
    StokesSolution fluid;
    PlateSolution solid;
    try {
      fluid = stokes.solve(fluid_load, &s.w2);
      solid = plate.solve(plate_load, &fluid.p);
    } catch (const std::exception& e) {
      throw CouplingError("iteration " + std::to_string(k) + ": " + e.what(), k);
    }
    trace.err_u.push_back(successive_error(s.u, fluid.u));
    trace.err_p.push_back(successive_error(s.p, fluid.p));
    trace.err_w1.push_back(successive_error(s.w1, solid.w1));
    trace.iterations = k;

    s.u = std::move(fluid.u);
    s.p = std::move(fluid.p);
    s.c0 = fluid.c0;
    s.w1 = std::move(solid.w1);
    s.w2.coeffs = config.omega * solid.w2.coeffs + (1.0 - config.omega) * s.w2.coeffs;

    if (std::max({trace.err_u.back(), trace.err_p.back(), trace.err_w1.back()}) < config.eps) {
      trace.converged = true;
      break;
    }
  }
  return result;
}

void write_iteration_csv(std::ostream& os, const IterationTrace& trace, const std::string& comment) {
  os << "# " << comment << '\n';
  os << "k,err_u,err_p,err_w1\n";
  for (int k = 0; k < trace.iterations; ++k)
    os << k + 1 << ',' << format_sci(trace.err_u[k]) << ',' << format_sci(trace.err_p[k]) << ','
       << format_sci(trace.err_w1[k]) << '\n';
}

}  // namespace fpi
