#pragma once

#include <span>

namespace sdd {

// Ordinary least squares y ~ slope x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace sdd
