#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shotlab/arrivals.hpp"
#include "shotlab/limitgauss.hpp"
#include "shotlab/responses.hpp"
#include "shotlab/rng.hpp"

namespace shotlab {

// Outcome of one hypothesis checker across a ladder of scales. `pass` is a
// pure function of `statistic` and the decision rule recorded in
// `threshold_description`; the thresholds are reporting policy, not theory.
struct CheckReport {
    std::string name;
    std::vector<double> scales;
    std::vector<double> statistic;
    std::string threshold_description;
    bool pass = false;
};

struct NormalityReport {
    std::vector<double> direction;
    double ks_statistic = 0.0;
    double p_value = 0.0;
    std::size_t sample_size = 0;
};

struct EmpiricalCov {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov; // unbiased (divisor r-1)
    Eigen::MatrixXd se;  // SE_ij = sqrt((C_ii C_jj + C_ij^2) / r)
};

// Sample mean/covariance with entrywise standard errors. Needs >= 2 rows.
EmpiricalCov empirical_cov(const Eigen::MatrixXd& ensemble);

// P(K > x) for the asymptotic Kolmogorov distribution, series truncated at
// 100 terms, absolute error below 1e-10.
double kolmogorov_p(double x);

// Projects the ensemble rows onto `direction`, standardizes by
// sqrt(direction' Pi direction) from the claimed limit covariance, and runs a
// one-sample Kolmogorov-Smirnov test against the standard normal.
NormalityReport ks_normal_test(const Eigen::MatrixXd& ensemble, const LimitCovariance& cov,
                               const Eigen::VectorXd& direction);

// Monte-Carlo mean of sup_{y in [0,T]} |N(ty)/t^rho - c y^rho| per scale; the
// supremum is evaluated exactly at the step points of N. Pass: nonincreasing
// over the top half of scales and final value < 0.1 c T^rho.
CheckReport check_weak_law(const ArrivalSpec& spec, double c, double rho, double T,
                           std::vector<double> scales, std::size_t replicates, Seed seed,
                           unsigned threads = 1);

// Monte-Carlo mean of (N(t) - N(t-1)) / t^{rho-1} per scale (scales must be
// > 1). Pass: every value at most twice the value at the smallest scale.
CheckReport check_increments(const ArrivalSpec& spec, double rho, std::vector<double> scales,
                             std::size_t replicates, Seed seed, unsigned threads = 1);

// Monte-Carlo estimate of E[X^2(t) 1{|X(t)| > y sqrt(t^rho v(t))}] / v(t) per
// scale. Pass: nonincreasing over the top half and final value < 0.05.
CheckReport check_lindeberg(const ResponseSpec& spec, double rho, double y,
                            std::vector<double> scales, std::size_t replicates, Seed seed,
                            unsigned threads = 1);

// max over a 101-point u-grid in [a,b] of |f(ut,(u+w)t)/v(t) - C(u,u+w)| per
// scale, from the exact closed forms. Pass: nonincreasing and final < 1e-2.
CheckReport check_limit_ratio(const ResponseSpec& spec, double w, double a, double b,
                              std::vector<double> scales);

// CSV summary: one row per (check, scale).
void checks_summary_csv(std::span<const CheckReport> reports, std::ostream& os);

} // namespace shotlab
