#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "shotlab/responses.hpp"

using namespace shotlab;

namespace {

const ResponseSpec kSpecs[] = {
    ResponseSpec::survival_indicator(-0.5),
    ResponseSpec::scaled_variable(1.0),
    ResponseSpec::time_changed_bm(1.5),
    ResponseSpec::centered_poisson(0.7, 1.3),
    ResponseSpec::ou_modulated(-0.5),
};

const std::array<double, 5> kGrid{0.5, 1.0, 2.0, 4.0, 8.0};

} // namespace

TEST_CASE("survival indicator is the centered indicator of its latent draw") {
    for (std::uint64_t k = 0; k < 50; ++k) {
        ResponsePath p = make_response(ResponseSpec::survival_indicator(-0.5), derive(Seed{1}, {k}));
        const double eta = p.latent();
        CHECK(eta > 0.0);
        for (double t : {0.0, 1.0, 3.0, 4.0, 100.0}) {
            const double expected = (eta > t ? 1.0 : 0.0) - std::pow(1.0 + t, -0.5);
            CHECK(p.at(t) == expected);
        }
        CHECK(p.at(-1.0) == 0.0);
    }
}

TEST_CASE("scaled variable with beta=0 is the constant latent draw") {
    ResponsePath p = make_response(
        ResponseSpec::scaled_variable(0.0, Distribution::two_point(1.2)), derive(Seed{2}, {}));
    const double eta = p.latent();
    CHECK(std::fabs(eta) == 1.2);
    for (double t : {0.0, 0.5, 7.0}) CHECK(p.at(t) == eta);
}

TEST_CASE("time-changed Brownian motion: Cov(X(1), X(2)) = 1 for beta=1") {
    const std::size_t n = 100'000;
    const auto spec = ResponseSpec::time_changed_bm(1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ResponsePath p = make_response(spec, derive(Seed{3}, {i}));
        sum += p.at(1.0) * p.at(2.0);
    }
    const double se = std::sqrt((1.0 * 2.0 + 1.0) / static_cast<double>(n));
    CHECK(std::fabs(sum / static_cast<double>(n) - 1.0) < 3 * se);
}

TEST_CASE("modulated OU: lag product matches the exact covariance") {
    const std::size_t n = 100'000;
    const double beta = -0.5;
    const auto spec = ResponseSpec::ou_modulated(beta);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ResponsePath p = make_response(spec, derive(Seed{4}, {i}));
        sum += p.at(1.0) * p.at(2.0);
    }
    const double f12 = 0.5 * std::pow(2.0, beta / 2) * std::pow(3.0, beta / 2) * std::exp(-1.0);
    const double v1 = 0.5 * std::pow(2.0, beta), v2 = 0.5 * std::pow(3.0, beta);
    const double se = std::sqrt((v1 * v2 + f12 * f12) / static_cast<double>(n));
    CHECK(std::fabs(sum / static_cast<double>(n) - f12) < 3 * se);
}

TEST_CASE("covariance_f closed forms at pinned points") {
    CHECK(covariance_f(ResponseSpec::centered_poisson(1.0, 2.0), 1.0, 3.0) == doctest::Approx(1.0));
    CHECK(covariance_f(ResponseSpec::survival_indicator(-0.5), 3.0, 3.0) == doctest::Approx(0.25));
    CHECK(covariance_f(ResponseSpec::ou_modulated(-0.5), 0.0, 0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(covariance_f(ResponseSpec::ou_modulated(-0.5), -1.0, 0.0), domain_error);
}

TEST_CASE("limit_C closed forms at pinned points") {
    CHECK(limit_C(ResponseSpec::survival_indicator(-0.5), 1.0, 4.0) == doctest::Approx(0.5));
    CHECK(limit_C(ResponseSpec::ou_modulated(-0.5), 1.0, 2.0) == 0.0);
    CHECK(limit_C(ResponseSpec::ou_modulated(-0.5), 2.0, 2.0) ==
          doctest::Approx(std::pow(2.0, -0.5)));
    CHECK(limit_C(ResponseSpec::scaled_variable(2.0), 2.0, 3.0) == doctest::Approx(6.0));
    CHECK_THROWS_AS(limit_C(ResponseSpec::scaled_variable(2.0), 0.0, 3.0), domain_error);
}

TEST_CASE("empirical covariance over 2e5 paths matches f on a 5x5 grid for every kind") {
    const std::size_t n = 200'000;
    std::uint64_t tag = 0;
    for (const auto& spec : kSpecs) {
        const CovarianceModel model = covariance_model(spec);
        // accumulate X_i X_j and X_i^2 X_j^2 for SE from fourth moments
        std::array<std::array<double, 5>, 5> sum{}, sumsq{};
        for (std::size_t r = 0; r < n; ++r) {
            ResponsePath p = make_response(spec, derive(Seed{5}, {tag, r}));
            std::array<double, 5> x{};
            for (std::size_t i = 0; i < kGrid.size(); ++i) x[i] = p.at(kGrid[i]);
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t j = i; j < 5; ++j) {
                    sum[i][j] += x[i] * x[j];
                    sumsq[i][j] += x[i] * x[j] * x[i] * x[j];
                }
        }
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i; j < 5; ++j) {
                const double nn = static_cast<double>(n);
                const double mean = sum[i][j] / nn;
                const double second = sumsq[i][j] / nn;
                const double se = std::sqrt(std::max(second - mean * mean, 0.0) / nn);
                const double f = model.f(kGrid[i], kGrid[j]);
                INFO("kind ", tag, " grid (", kGrid[i], ",", kGrid[j], ")");
                CHECK(std::fabs(mean - f) < 4 * se + 1e-12);
            }
        ++tag;
    }
}

TEST_CASE("path consistency: interleaved, repeated and out-of-order queries agree") {
    for (const auto& spec : {ResponseSpec::time_changed_bm(1.5),
                             ResponseSpec::centered_poisson(0.7, 1.3),
                             ResponseSpec::ou_modulated(-0.5)}) {
        ResponsePath p = make_response(spec, derive(Seed{6}, {static_cast<std::uint64_t>(spec.kind)}));
        const double at2 = p.at(2.0);
        const double at05 = p.at(0.5);  // interior (bridge)
        const double at3 = p.at(3.0);   // extension
        const double at1 = p.at(1.0);   // interior again
        CHECK(p.at(2.0) == at2);
        CHECK(p.at(0.5) == at05);
        CHECK(p.at(1.0) == at1);
        CHECK(p.at(3.0) == at3);
        CHECK(p.at(2.0) == at2); // still stable after more refinement
    }
}

TEST_CASE("bridge-refined queries still have the exact covariance (OU kind)") {
    // Query out of order so interior values come from the conditional bridge,
    // then compare all pairwise products against f.
    const std::size_t n = 100'000;
    const auto spec = ResponseSpec::ou_modulated(-0.5);
    const CovarianceModel model = covariance_model(spec);
    const std::array<double, 3> q{3.0, 1.0, 2.0}; // 2.0 is a bridge fill
    std::array<std::array<double, 3>, 3> sum{};
    for (std::size_t r = 0; r < n; ++r) {
        ResponsePath p = make_response(spec, derive(Seed{7}, {r}));
        std::array<double, 3> x{};
        for (std::size_t i = 0; i < 3; ++i) x[i] = p.at(q[i]);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) sum[i][j] += x[i] * x[j];
    }
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double mean = sum[i][j] / static_cast<double>(n);
            const double f = model.f(q[i], q[j]);
            const double se = std::sqrt((model.v(q[i]) * model.v(q[j]) + f * f) /
                                        static_cast<double>(n));
            CHECK(std::fabs(mean - f) < 4 * se);
        }
}

TEST_CASE("limit function is homogeneous: C(au, aw) = a^beta C(u, w)") {
    for (const auto& spec : kSpecs) {
        const CovarianceModel model = covariance_model(spec);
        for (double a : {0.5, 2.0, 7.0})
            for (double u : {0.3, 1.0, 2.5})
                for (double w : {0.3, 1.0, 2.5}) {
                    const double lhs = model.C(a * u, a * w);
                    const double rhs = std::pow(a, model.beta) * model.C(u, w);
                    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
                }
    }
}

TEST_CASE("C(a,a) = a^beta on the diagonal") {
    for (const auto& spec : kSpecs) {
        const CovarianceModel model = covariance_model(spec);
        for (double a : {0.25, 1.0, 3.0})
            CHECK(model.C(a, a) == doctest::Approx(std::pow(a, model.beta)).epsilon(1e-12));
    }
}

TEST_CASE("covariance is dominated: |f(u,w)| <= (v(u)+v(w))/2 on the grid") {
    for (const auto& spec : kSpecs) {
        const CovarianceModel model = covariance_model(spec);
        for (double u : kGrid)
            for (double w : kGrid) {
                CHECK(std::fabs(model.f(u, w)) <= 0.5 * (model.v(u) + model.v(w)) + 1e-15);
                CHECK(model.f(u, w) == doctest::Approx(model.f(w, u))); // symmetry
            }
        for (double t : kGrid) CHECK(model.v(t) == doctest::Approx(model.f(t, t)));
    }
}

TEST_CASE("spec validation enforces the per-kind beta ranges") {
    CHECK_THROWS_AS(ResponseSpec::survival_indicator(0.5), config_error);
    CHECK_THROWS_AS(ResponseSpec::survival_indicator(-1.0), config_error);
    CHECK_THROWS_AS(ResponseSpec::scaled_variable(-1.5), config_error);
    CHECK_THROWS_AS(ResponseSpec::time_changed_bm(0.0), config_error);
    CHECK_THROWS_AS(ResponseSpec::time_changed_bm(-0.5), config_error);
    CHECK_THROWS_AS(ResponseSpec::centered_poisson(1.0, 0.0), config_error);
    CHECK_THROWS_AS(ResponseSpec::ou_modulated(-1.2), config_error);
    CHECK_THROWS_AS(
        ResponseSpec::scaled_variable(0.0, Distribution::exponential(1.0)), config_error);
}

TEST_CASE("centered poisson kind reports index rho0") {
    CHECK(ResponseSpec::centered_poisson(1.0, 2.0).index() == 2.0);
    CHECK(covariance_model(ResponseSpec::centered_poisson(1.0, 2.0)).beta == 2.0);
    CHECK(covariance_model(ResponseSpec::ou_modulated(-0.5)).fictitious);
    CHECK(!covariance_model(ResponseSpec::time_changed_bm(1.0)).fictitious);
}
