#pragma once

#include <Eigen/Dense>

#include <string>

namespace vcgmm {

//! Solves a small symmetric positive semi-definite system.
//!
//! A plain LDLT solve is attempted first. Only when it fails (indefinite
//! factorization or reciprocal condition below 1e-13) is
//! `jitter * trace(A) / dim` added to the diagonal and the solve retried.
//! Still-singular systems raise ErrorKind::singular; the message carries the
//! condition estimate and `context`.
Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& lhs,
                                const Eigen::VectorXd& rhs,
                                double jitter,
                                const std::string& context);

} // namespace vcgmm
