#include "shotlab/limitgauss.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "shotlab/io.hpp"
#include "shotlab/quadrature.hpp"

namespace shotlab {

namespace {

double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

} // namespace

double beta_fn(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) throw domain_error("beta_fn: arguments must be > 0");
    return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

PiResult limit_cov_Pi(const CovarianceModel& model, double rho, double s, double t, double tol) {
    if (!(s > 0.0) || !(t > 0.0)) throw domain_error("limit_cov_Pi: s, t must be > 0");
    if (!(rho > 0.0)) throw domain_error("limit_cov_Pi: rho must be > 0");

    if (model.fictitious) {
        if (s == t) return {rho * beta_fn(model.beta + 1.0, rho) * std::pow(s, model.beta + rho), 0.0};
        return {0.0, 0.0};
    }

    // Substitute y = (s^t) z:
    //   Pi = rho (s^t)^rho * Integral_0^1 C(s - (s^t)z, t - (s^t)z) z^{rho-1} dz.
    // The C arguments are formed from 1-z where they would cancel, keeping the
    // endpoint singularities representable.
    const double m = std::min(s, t);
    const double scale = rho * std::pow(m, rho);
    auto integrand = [&](double z, double omz) {
        const double a = (s == m) ? m * omz : s - m * z;
        const double b = (t == m) ? m * omz : t - m * z;
        return model.C(a, b) * std::pow(z, rho - 1.0);
    };
    const QuadResult q = tanh_sinh_01(integrand, tol / std::max(scale, 1.0));
    if (!q.converged)
        throw numeric_error("limit_cov_Pi: quadrature did not reach tol=" + std::to_string(tol),
                            scale * q.value);
    return {scale * q.value, scale * q.error};
}

LimitCovariance limit_cov_matrix(const CovarianceModel& model, double rho,
                                 const std::vector<double>& grid, double tol) {
    if (grid.empty()) throw config_error("limit_cov_matrix: grid must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw config_error("limit_cov_matrix: grid values must be > 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw config_error("limit_cov_matrix: grid must be strictly increasing");
    }

    const auto n = static_cast<Eigen::Index>(grid.size());
    LimitCovariance out;
    out.grid = grid;
    out.fictitious = model.fictitious;
    out.matrix.setZero(n, n);
    out.quad_error.setZero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const PiResult r = limit_cov_Pi(model, rho, grid[static_cast<std::size_t>(i)],
                                            grid[static_cast<std::size_t>(j)], tol);
            out.matrix(i, j) = out.matrix(j, i) = r.value;
            out.quad_error(i, j) = out.quad_error(j, i) = r.error;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.matrix, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    const double slack = 1e-8 * out.matrix.diagonal().maxCoeff();
    if (out.min_eigenvalue < -slack)
        throw consistency_error("limit covariance is not positive semidefinite (min eigenvalue " +
                                std::to_string(out.min_eigenvalue) +
                                "); the limit function is inconsistent");
    return out;
}

Eigen::MatrixXd sample_limit_gaussian(const LimitCovariance& cov, Stream& stream,
                                      std::size_t count) {
    const Eigen::Index n = cov.matrix.rows();
    const double max_diag = cov.matrix.diagonal().maxCoeff();

    Eigen::MatrixXd root;
    bool factored = false;
    for (double jitter : {0.0, 1e-12, 1e-10}) {
        Eigen::MatrixXd shifted = cov.matrix;
        shifted.diagonal().array() += jitter * max_diag;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            root = llt.matrixL();
            factored = true;
            break;
        }
    }
    if (!factored)
        throw numeric_error("sample_limit_gaussian: Cholesky failed after jitter ladder", 0.0);

    Eigen::MatrixXd draws(static_cast<Eigen::Index>(count), n);
    Eigen::VectorXd z(n);
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = stream.normal();
        draws.row(r) = (root * z).transpose();
    }
    return draws;
}

void dump_csv(const LimitCovariance& cov, std::ostream& os) {
    os << "u";
    for (double g : cov.grid) os << "," << format_double(g);
    os << "\n";
    for (Eigen::Index i = 0; i < cov.matrix.rows(); ++i) {
        os << format_double(cov.grid[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < cov.matrix.cols(); ++j)
            os << "," << format_double(cov.matrix(i, j));
        os << "\n";
    }
}

} // namespace shotlab
