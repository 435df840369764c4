#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "shotlab/responses.hpp"
#include "shotlab/rng.hpp"

namespace shotlab {

// Euler beta function B(x, y) for x, y > 0, relative error <= 1e-12.
double beta_fn(double x, double y);

struct PiResult {
    double value;
    double error; // absolute quadrature error estimate (0 for closed forms)
};

// Limit covariance Pi(s, t) = rho * Integral_0^{s^t} C(s-y, t-y) y^{rho-1} dy.
// Fictitious models short-circuit: rho B(beta+1, rho) (s^t)^{beta+rho} on the
// diagonal and 0 off it. Throws numeric_error (with the best estimate
// attached) if the quadrature cannot reach `tol`.
PiResult limit_cov_Pi(const CovarianceModel& model, double rho, double s, double t,
                      double tol = 1e-8);

// The limit covariance matrix on a grid, with quadrature error estimates and
// a verified positive-semidefiniteness certificate.
struct LimitCovariance {
    std::vector<double> grid;
    Eigen::MatrixXd matrix;
    Eigen::MatrixXd quad_error;
    bool fictitious = false;
    double min_eigenvalue = 0.0;
};

LimitCovariance limit_cov_matrix(const CovarianceModel& model, double rho,
                                 const std::vector<double>& grid, double tol = 1e-8);

// `count` independent centered Gaussian vectors (rows) with the given
// covariance; Cholesky root with a diagonal jitter ladder for semidefinite
// matrices.
Eigen::MatrixXd sample_limit_gaussian(const LimitCovariance& cov, Stream& stream,
                                      std::size_t count);

// CSV dump with grid values as row/column headers.
void dump_csv(const LimitCovariance& cov, std::ostream& os);

} // namespace shotlab
