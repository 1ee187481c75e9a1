#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fpi/fem.hpp"
#include "fpi/plate.hpp"
#include "fpi/stokes.hpp"

namespace fpi {

struct CouplingConfig {
  double lambda = 1.0;
  double eps = 1e-10;
  int max_iter = 20;
  double omega = 1.0;
  W2Recovery recovery = W2Recovery::Interpolation;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct IterationTrace {
  std::vector<double> err_u, err_p, err_w1;
  int iterations = 0;
  bool converged = false;
};

struct FsiState {
  FeField u, p, w1, w2;
  double c0 = 0.0;
};

struct FsiLoads {
  VectorFunction3 f1;
  ScalarFunction2 f2;
  ScalarFunction2 f3;
};

/// Thrown when a subsolver fails inside the fixed-point loop.
class CouplingError : public std::runtime_error {
 public:
  CouplingError(const std::string& what, int iteration) : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct PartitionedResult {
  FsiState state;
  IterationTrace trace;
};

/// Stokes with u3 = w2^{k-1} on the plate, then the plate with the new pressure,
/// until max(err_u, err_p, err_w1) < eps or max_iter iterations.
PartitionedResult run_partitioned(const FsiMesh& mesh, const CouplingConfig& config, const FsiLoads& loads);

/// L2 norm of next - prev (same space), by quadrature.
double successive_error(const FeField& prev, const FeField& next);

/// Header `k,err_u,err_p,err_w1` after a `# comment` line.
void write_iteration_csv(std::ostream& os, const IterationTrace& trace, const std::string& comment);

}  // namespace fpi
