#include "vcgmm/kernel.hpp"

#include "vcgmm/error.hpp"

#include <cmath>

namespace vcgmm {

double kernel_eval(double u, KernelFamily family) noexcept
{
  switch (family) {
    case KernelFamily::epanechnikov: {
      const double t = 1.0 - u * u;
      return t > 0.0 ? 0.75 * t : 0.0;
    }
  }
  return 0.0;
}

double kernel_scaled(double u, double h, KernelFamily family)
{
  if (!(h > 0.0))
    fail(ErrorKind::argument, "kernel bandwidth must be positive");
  return kernel_eval(u / h, family) / h;
}

Eigen::Vector2d local_design_vector(double s_j, double s0, double h)
{
  if (!(h > 0.0))
    fail(ErrorKind::argument, "bandwidth must be positive");
  return {1.0, (s_j - s0) / h};
}

double kernel_moment(int a, int b, KernelFamily family)
{
  if (a < 0 || b < 0)
    fail(ErrorKind::argument, "kernel moment orders must be nonnegative");
  // Polynomial on the support, so Simpson with a modest panel count is exact
  // up to rounding for the orders used here.
  constexpr int panels = 2000;
  const double step = 2.0 / panels;
  double acc = 0.0;
  for (int k = 0; k <= panels; ++k) {
    const double t = -1.0 + k * step;
    const double f = std::pow(t, a) * std::pow(kernel_eval(t, family), b);
    const double c = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += c * f;
  }
  return acc * step / 3.0;
}

} // namespace vcgmm
