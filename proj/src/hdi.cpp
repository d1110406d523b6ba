#include "equibin/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace equibin {

Interval hdi(std::span<const double> samples, double mass) {
  if (samples.size() < 100)
    throw std::invalid_argument("hdi: needs at least 100 samples");
  if (!(mass > 0.0 && mass < 1.0))
    throw std::invalid_argument("hdi: mass must be in (0,1)");

  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());

  const std::size_t n = x.size();
  std::size_t m = static_cast<std::size_t>(
      std::ceil(mass * static_cast<double>(n)));
  m = std::min(std::max<std::size_t>(m, 1), n);

  std::size_t best = 0;
  double best_width = x[m - 1] - x[0];
  for (std::size_t i = 1; i + m <= n; ++i) {
    const double w = x[i + m - 1] - x[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return Interval{x[best], x[best + m - 1], mass};
}

}  // namespace equibin
