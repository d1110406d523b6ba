#pragma once

#include <vector>

namespace equibin {

// Split R-hat over pooled chains; chains hold row-major [draw][dim] blocks of
// equal length.
struct ConvergenceDiagnostics {
  std::vector<double> rhat;  // per parameter
  std::vector<double> ess;   // per parameter, bulk effective sample size
};

ConvergenceDiagnostics compute_diagnostics(
    const std::vector<std::vector<double>>& chains, int dim);

}  // namespace equibin
