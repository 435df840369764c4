#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "shotlab/shotnoise.hpp"
#include "shotlab/verify.hpp"

using namespace shotlab;

namespace {

LimitCovariance identity_cov(std::size_t n) {
    LimitCovariance cov;
    for (std::size_t i = 0; i < n; ++i) cov.grid.push_back(static_cast<double>(i + 1));
    cov.matrix = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(n));
    cov.quad_error = Eigen::MatrixXd::Zero(cov.matrix.rows(), cov.matrix.cols());
    return cov;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(8.0 * std::atan(1.0)); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// E[Z^2 1{|Z| > a}] for a standard normal: 2(a phi(a) + Sf(a)).
double truncated_second_moment(double a) { return 2.0 * (a * normal_pdf(a) + normal_sf(a)); }

} // namespace

TEST_CASE("empirical covariance: two-point sample and constants") {
    Eigen::MatrixXd two(2, 2);
    two << 1.0, 0.0, -1.0, 0.0;
    const auto emp = empirical_cov(two);
    CHECK(emp.mean(0) == 0.0);
    CHECK(emp.mean(1) == 0.0);
    CHECK(emp.cov(0, 0) == 2.0); // unbiased divisor r-1 = 1
    CHECK(emp.cov(0, 1) == 0.0);
    CHECK(emp.cov(1, 1) == 0.0);

    Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(5, 2, 3.25);
    const auto empc = empirical_cov(constant);
    CHECK(empc.cov.cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd one(1, 2);
    CHECK_THROWS_AS(empirical_cov(one), domain_error);
}

TEST_CASE("empirical covariance of exact gaussian draws stays within 4 SE") {
    const auto cov = identity_cov(3);
    Stream s = derive(Seed{31}, {});
    const Eigen::MatrixXd draws = sample_limit_gaussian(cov, s, 100'000);
    const auto emp = empirical_cov(draws);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            CHECK(std::fabs(emp.cov(i, j) - cov.matrix(i, j)) < 4 * emp.se(i, j));
}

TEST_CASE("kolmogorov p-value: the two theta series agree to 1e-10") {
    // dual-route check: evaluate both expansions on both sides of the
    // internal crossover and compare
    for (double x : {0.4, 0.6, 0.8, 0.95, 1.05, 1.3, 1.7, 2.2}) {
        double tail = 0.0;
        double sign = 1.0;
        for (int k = 1; k <= 100; ++k) {
            tail += sign * 2.0 * std::exp(-2.0 * k * k * x * x);
            sign = -sign;
        }
        double cdf = 0.0;
        const double pi = 3.14159265358979323846;
        for (int k = 1; k <= 100; ++k) {
            const double odd = 2.0 * k - 1.0;
            cdf += std::exp(-odd * odd * pi * pi / (8.0 * x * x));
        }
        cdf *= std::sqrt(2.0 * pi) / x;
        CHECK(std::fabs((1.0 - cdf) - tail) < 1e-10);
        CHECK(std::fabs(kolmogorov_p(x) - tail) < 1e-10);
    }
    CHECK(kolmogorov_p(0.0) == 1.0);
    CHECK(kolmogorov_p(0.05) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(kolmogorov_p(4.0) < 1e-12);
}

TEST_CASE("ks statistic of the single sample {0} is 1/2") {
    Eigen::MatrixXd ens(1, 1);
    ens << 0.0;
    const auto rep = ks_normal_test(ens, identity_cov(1), Eigen::VectorXd::Ones(1));
    CHECK(rep.ks_statistic == doctest::Approx(0.5));
    CHECK(rep.sample_size == 1);
}

TEST_CASE("ks test holds its level on exact normal samples") {
    const auto cov = identity_cov(2);
    Eigen::VectorXd e1(2);
    e1 << 1.0, 0.0;
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Stream s = derive(Seed{seed}, {77});
        const Eigen::MatrixXd draws = sample_limit_gaussian(cov, s, 20'000);
        const auto rep = ks_normal_test(draws, cov, e1);
        if (rep.p_value > 0.01) ++passes;
    }
    CHECK(passes >= 97);
}

TEST_CASE("ks test rejects a wrong claimed scale") {
    // samples from N(0, 4) tested against claimed unit variance
    LimitCovariance wide = identity_cov(1);
    wide.matrix(0, 0) = 4.0;
    Stream s = derive(Seed{32}, {});
    const Eigen::MatrixXd draws = sample_limit_gaussian(wide, s, 10'000);
    const auto rep = ks_normal_test(draws, identity_cov(1), Eigen::VectorXd::Ones(1));
    CHECK(rep.p_value < 0.01);
}

TEST_CASE("ks test is invariant under positive rescaling of the direction") {
    const auto cov = identity_cov(2);
    Stream s = derive(Seed{33}, {});
    const Eigen::MatrixXd draws = sample_limit_gaussian(cov, s, 5'000);
    Eigen::VectorXd alpha(2);
    alpha << 1.0, 1.0;
    const auto a = ks_normal_test(draws, cov, alpha);
    const auto b = ks_normal_test(draws, cov, 2.0 * alpha);
    CHECK(a.ks_statistic == b.ks_statistic);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("ks test rejects degenerate directions") {
    LimitCovariance cov;
    cov.grid = {1.0, 2.0};
    cov.matrix.resize(2, 2);
    cov.matrix << 1.0, 1.0, 1.0, 1.0;
    cov.quad_error = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd ens = Eigen::MatrixXd::Zero(10, 2);
    Eigen::VectorXd diff(2);
    diff << 1.0, -1.0; // projected variance 0
    CHECK_THROWS_AS(ks_normal_test(ens, cov, diff), degenerate_error);
    CHECK_THROWS_AS(ks_normal_test(ens, cov, Eigen::VectorXd::Zero(2)), degenerate_error);
}

TEST_CASE("weak law checker: deterministic renewal is within the 2/t bound") {
    const auto spec = ArrivalSpec::renewal(Distribution::deterministic(1.0));
    const auto rep = check_weak_law(spec, 1.0, 1.0, 1.0, {1000.0}, 2, Seed{34});
    CHECK(rep.statistic[0] > 0.0);
    CHECK(rep.statistic[0] <= 2.0 / 1000.0);
}

TEST_CASE("weak law checker: branching generation matches a dense-grid oracle") {
    const auto spec = ArrivalSpec::brw_generation(2, Distribution::deterministic(1.0));
    const std::vector<double> scales{20.0, 40.0, 80.0};
    const auto rep = check_weak_law(spec, 0.5, 2.0, 1.0, scales, 2, Seed{35});
    CHECK(rep.pass);
    // closed form N2(s) = sum_{k=1..floor(s)} floor(s-k); dense grid in y
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const double t = scales[si];
        double dense = 0.0;
        const int kpts = 200'000;
        for (int i = 0; i <= kpts; ++i) {
            const double y = static_cast<double>(i) / kpts;
            double n2 = 0.0;
            const double s = t * y;
            for (long long k = 1; k <= static_cast<long long>(std::floor(s)); ++k)
                n2 += std::floor(s - static_cast<double>(k));
            dense = std::max(dense, std::fabs(n2 / (t * t) - 0.5 * y * y));
        }
        // the exact sup can exceed a grid maximum by at most slope/kpts
        CHECK(rep.statistic[si] >= dense - 1e-12);
        CHECK(rep.statistic[si] <= dense + 2.0 / kpts);
    }
}

TEST_CASE("weak law checker: statistic decays for the perturbed walk") {
    const auto spec = ArrivalSpec::perturbed_walk(Distribution::exponential(1.0),
                                                  Distribution::pareto_type(-0.5));
    const auto rep = check_weak_law(spec, 1.0, 1.0, 1.0, {50.0, 200.0, 800.0}, 100, Seed{36});
    CHECK(rep.statistic[1] < rep.statistic[0]);
    CHECK(rep.statistic[2] < rep.statistic[1]);
}

TEST_CASE("increments checker: unit renewal has statistic exactly 1") {
    const auto spec = ArrivalSpec::renewal(Distribution::deterministic(1.0));
    const auto rep = check_increments(spec, 1.0, {10.5, 20.0, 40.0}, 3, Seed{37});
    for (double s : rep.statistic) CHECK(s == 1.0);
    CHECK(rep.pass);
}

TEST_CASE("increments checker: quadratic poisson mean gives 2 - 1/t") {
    const auto spec = ArrivalSpec::poisson_nh(1.0, 2.0);
    const std::vector<double> scales{10.0, 20.0, 40.0};
    const auto rep = check_increments(spec, 2.0, scales, 4000, Seed{38}, 2);
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const double expected = 2.0 - 1.0 / scales[i];
        // Var of one increment is (2t-1)/t^2 ~ 2/t; 5 SE margin
        const double se = std::sqrt((2.0 * scales[i] - 1.0)) / scales[i] / std::sqrt(4000.0);
        CHECK(std::fabs(rep.statistic[i] - expected) < 5 * se);
    }
    CHECK(rep.pass);
}

TEST_CASE("increments checker: branching generation stays bounded") {
    const auto spec = ArrivalSpec::brw_generation(2, Distribution::deterministic(1.0));
    const auto rep = check_increments(spec, 2.0, {10.0, 20.0, 40.0}, 2, Seed{39});
    for (std::size_t i = 0; i < rep.scales.size(); ++i)
        CHECK(rep.statistic[i] == doctest::Approx((rep.scales[i] - 1.0) / rep.scales[i]));
    CHECK(rep.pass);
}

TEST_CASE("lindeberg checker: bounded survival responses give exactly zero") {
    const auto spec = ResponseSpec::survival_indicator(-0.5);
    const auto rep = check_lindeberg(spec, 1.0, 1.0, {16.0, 64.0, 256.0}, 5000, Seed{40}, 2);
    for (double s : rep.statistic) CHECK(s == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("lindeberg checker: normal innovations match the truncated-moment oracle") {
    const auto spec = ResponseSpec::scaled_variable(0.0, Distribution::normal(1.0));
    const std::size_t reps = 400'000;
    const auto rep = check_lindeberg(spec, 1.0, 1.0, {16.0, 64.0, 256.0}, reps, Seed{41}, 2);
    // at t=16 the statistic is E[eta^2 1{|eta| > 4}] ~ 1.134e-3; the indicator
    // fires with probability 6.3e-5, so allow a wide Monte-Carlo corridor
    const double oracle = truncated_second_moment(4.0);
    CHECK(oracle == doctest::Approx(0.00113398).epsilon(1e-3));
    CHECK(rep.statistic[0] > 0.0);
    CHECK(std::fabs(rep.statistic[0] - oracle) < 0.75 * oracle);
    CHECK(rep.statistic[1] <= rep.statistic[0]);
    CHECK(rep.statistic[2] == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("lindeberg checker: modulated OU reduces to the same normal oracle") {
    const auto spec = ResponseSpec::ou_modulated(-0.5);
    const std::size_t reps = 400'000;
    const auto rep = check_lindeberg(spec, 1.0, 1.0, {16.0, 64.0, 256.0}, reps, Seed{42}, 2);
    const double oracle = truncated_second_moment(4.0); // 2 E[theta^2 1{|theta|>sqrt(t/2)}]
    CHECK(std::fabs(rep.statistic[0] - oracle) < 0.75 * oracle);
    CHECK(rep.pass);
}

TEST_CASE("lindeberg checker: two-point innovations vanish once the threshold passes 1") {
    const auto spec = ResponseSpec::scaled_variable(0.0, Distribution::two_point(1.0));
    const auto rep = check_lindeberg(spec, 1.0, 1.0, {4.0, 16.0, 64.0}, 2000, Seed{43});
    // |X(t)| = 1 and the threshold is sqrt(t) > 1 at all three scales
    for (double s : rep.statistic) CHECK(s == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("limit ratio checker: exact power-law kinds give identically zero") {
    for (const auto& spec : {ResponseSpec::centered_poisson(1.0, 2.0),
                             ResponseSpec::time_changed_bm(1.0)}) {
        const auto rep = check_limit_ratio(spec, 1.0, 0.5, 2.0, {10.0, 100.0, 1000.0});
        for (double s : rep.statistic) CHECK(s <= 1e-12);
        CHECK(rep.pass);
    }
}

TEST_CASE("limit ratio checker: survival kind decays toward the limit") {
    const auto rep = check_limit_ratio(ResponseSpec::survival_indicator(-0.5), 1.0, 0.5, 2.0,
                                       {100.0, 1000.0, 10000.0});
    CHECK(rep.statistic[0] > rep.statistic[1]);
    CHECK(rep.statistic[1] > rep.statistic[2]);
    CHECK(rep.statistic[2] < 1e-2);
    CHECK(rep.pass);
    // pinned magnitude: dominated by (sqrt(2)-1)(1+t)^{-1/2} * C at u = a
    const double t = 10000.0;
    const double expected = (std::sqrt(2.0) - 1.0) * std::pow(1.0 + t, -0.5) *
                            std::pow(1.5, -0.5);
    CHECK(rep.statistic[2] == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("limit ratio checker: fictitious OU decays exponentially") {
    const auto rep =
        check_limit_ratio(ResponseSpec::ou_modulated(-0.5), 1.0, 0.5, 2.0, {4.0, 8.0, 16.0});
    CHECK(rep.statistic[0] > rep.statistic[1]);
    CHECK(rep.statistic[2] < 1e-6);
    CHECK(rep.pass);
}

TEST_CASE("checker reports are deterministic in (config, seed)") {
    const auto spec = ArrivalSpec::renewal(Distribution::exponential(1.0));
    const auto a = check_weak_law(spec, 1.0, 1.0, 1.0, {50.0, 100.0}, 50, Seed{44}, 1);
    const auto b = check_weak_law(spec, 1.0, 1.0, 1.0, {50.0, 100.0}, 50, Seed{44}, 4);
    CHECK(a.statistic == b.statistic);
    CHECK(a.pass == b.pass);
}

TEST_CASE("checker argument validation") {
    const auto arrivals = ArrivalSpec::renewal(Distribution::exponential(1.0));
    CHECK_THROWS_AS(check_weak_law(arrivals, 1.0, 1.0, 0.0, {10.0}, 5, Seed{1}), config_error);
    CHECK_THROWS_AS(check_increments(arrivals, 1.0, {0.5, 2.0}, 5, Seed{1}), config_error);
    CHECK_THROWS_AS(check_lindeberg(ResponseSpec::scaled_variable(0.0), 1.0, -1.0, {4.0}, 5,
                                    Seed{1}),
                    config_error);
    CHECK_THROWS_AS(
        check_limit_ratio(ResponseSpec::scaled_variable(0.0), 1.0, 2.0, 0.5, {4.0}),
        config_error);
}

TEST_CASE("csv summary lists one row per scale") {
    CheckReport rep;
    rep.name = "weak_law";
    rep.scales = {10.0, 20.0};
    rep.statistic = {0.25, 0.125};
    rep.pass = true;
    std::ostringstream os;
    checks_summary_csv(std::vector<CheckReport>{rep}, os);
    CHECK(os.str() ==
          "check,scale,statistic,pass\nweak_law,10,0.25,true\nweak_law,20,0.125,true\n");
}

TEST_CASE("scaled-down end-to-end: empirical covariance meets the limit and KS accepts") {
    Scenario sc;
    sc.arrival = ArrivalSpec::renewal(Distribution::exponential(1.0));
    sc.response = ResponseSpec::scaled_variable(0.0, Distribution::normal(1.0));
    sc.c = 1.0;
    sc.rho = 1.0;
    sc.grid = {0.5, 1.0, 2.0};
    sc.t = 100.0;
    sc.replicates = 4000;
    const Eigen::MatrixXd ens = mc_ensemble(sc, Seed{45}, 2);
    const auto limit = limit_cov_matrix(covariance_model(sc.response), sc.rho, sc.grid);
    const auto emp = empirical_cov(ens);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const double se_mean = std::sqrt(emp.cov(i, i) / static_cast<double>(sc.replicates));
        CHECK(std::fabs(emp.mean(i)) < 4 * se_mean); // centering, column by column
        for (Eigen::Index j = 0; j < 3; ++j)
            CHECK(std::fabs(emp.cov(i, j) - limit.matrix(i, j)) < 4 * emp.se(i, j));
    }
    // first/last coordinate and all-ones projections
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3), en = Eigen::VectorXd::Zero(3);
    e1(0) = 1.0;
    en(2) = 1.0;
    for (const auto& direction : {e1, en, Eigen::VectorXd(Eigen::VectorXd::Ones(3))}) {
        const auto rep = ks_normal_test(ens, limit, direction);
        CHECK(rep.p_value > 0.005);
    }
}
