#include "vcgmm/linalg.hpp"

#include "vcgmm/core.hpp"

namespace vcgmm {

namespace {

constexpr double min_rcond = 1e-13;

bool try_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Eigen::VectorXd& x, double& rcond)
{
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    rcond = 0.0;
    return false;
  }
  rcond = ldlt.rcond();
  if (!(rcond >= min_rcond) || !ldlt.isPositive())
    return false;
  x = ldlt.solve(b);
  return x.allFinite();
}

} // namespace

Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& lhs,
                                const Eigen::VectorXd& rhs,
                                double jitter,
                                const std::string& context)
{
  if (lhs.rows() != lhs.cols() || lhs.rows() != rhs.size())
    fail(ErrorKind::dimension, context + ": system shape mismatch");
  Eigen::VectorXd x;
  double rcond = 0.0;
  if (try_solve(lhs, rhs, x, rcond))
    return x;

  const double plain_rcond = rcond;
  const double dim = static_cast<double>(lhs.rows());
  const double shift = jitter * lhs.trace() / dim;
  Eigen::MatrixXd shifted = lhs;
  if (shift > 0.0)
    shifted.diagonal().array() += shift;
  if (shift > 0.0 && try_solve(shifted, rhs, x, rcond))
    return x;

  fail(ErrorKind::singular,
       context + ": singular local system (reciprocal condition " + format_real(plain_rcond) +
         ", after ridge " + format_real(shift) + ": " + format_real(rcond) + ")");
}

} // namespace vcgmm
