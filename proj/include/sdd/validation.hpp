#pragma once

// The acceptance suite: twelve numbered property checks with tolerances and
// runtime limits. Shared by the acceptance test binary and `sddsim validate`.

#include "sdd/history.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sdd {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  // Within the runtime limit as well as numerically passing.
  bool ok() const { return passed && seconds <= limit_seconds; }
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<CriterionResult()> run;
};

std::vector<Criterion> acceptance_criteria();

// Runs the selected ids (all when empty). Exceptions become failures.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});

std::string format_result(const CriterionResult& r);

// Dense RK4 solution of the scalar constant-delay problem
//   y'(t) = -a y(t - tau),  y = phi on [-tau, 0],
// by the method of steps with cubic Hermite dense output. tau must be a
// multiple of the step. Returns y at t = 0, step, 2 step, ..., T.
std::vector<double> delay_rk4_oracle(double a, double tau, const std::function<double(double)>& phi, double T,
                                     double step);

}  // namespace sdd
