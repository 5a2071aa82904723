#pragma once

#include <Eigen/Dense>

namespace vcgmm {

//! Kernel families with support [-1, 1]. Only Epanechnikov for now.
enum class KernelFamily { epanechnikov };

//! K(u) = 0.75 (1 - u^2)_+
double kernel_eval(double u, KernelFamily family = KernelFamily::epanechnikov) noexcept;

//! K_h(u) = K(u / h) / h. Throws on h <= 0.
double kernel_scaled(double u, double h, KernelFamily family = KernelFamily::epanechnikov);

//! z_h(s_j - s0) = (1, (s_j - s0) / h).
Eigen::Vector2d local_design_vector(double s_j, double s0, double h);

//! nu_{a,b} = int t^a K(t)^b dt over the support, by composite Simpson.
double kernel_moment(int a, int b, KernelFamily family = KernelFamily::epanechnikov);

} // namespace vcgmm
