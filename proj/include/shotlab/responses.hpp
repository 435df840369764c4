#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "shotlab/rng.hpp"

namespace shotlab {

enum class ResponseKind {
    SurvivalIndicator, // 1{eta > t} - (1+t)^beta, eta Pareto-type(beta)
    ScaledVariable,    // eta * (1+t)^{beta/2}
    TimeChangedBM,     // W(t^beta)
    CenteredPoisson,   // N(t) - c0 t^rho0, N inhomogeneous Poisson
    OUModulated        // (t+1)^{beta/2} Z(t), Z stationary OU, Var 1/2
};

struct ResponseSpec {
    ResponseKind kind = ResponseKind::ScaledVariable;
    double beta = 0.0;                                       // kinds a, b, c, e
    Distribution innovation = Distribution::normal(1.0);     // kind b
    double c0 = 0.0, rho0 = 0.0;                             // kind d

    static ResponseSpec survival_indicator(double beta);
    static ResponseSpec scaled_variable(double beta,
                                        Distribution innovation = Distribution::normal(1.0));
    static ResponseSpec time_changed_bm(double beta);
    static ResponseSpec centered_poisson(double c0, double rho0);
    static ResponseSpec ou_modulated(double beta);

    void validate() const;
    // Index of regular variation of the covariance (rho0 for kind d).
    double index() const;
};

// One sampled path, evaluated on demand. Evaluation is consistent: the same
// query time always returns the same value, in any query order. For the
// skeleton-backed kinds (c), (d), (e) nondecreasing queries extend the path by
// exact transitions; interior queries are filled by exact conditional bridges
// between the cached knots.
class ResponsePath {
public:
    double at(double t);

    // Latent draw for kinds (a) and (b).
    double latent() const;
    ResponseKind kind() const { return kind_; }

private:
    friend ResponsePath make_response(const ResponseSpec& spec, Stream stream);
    ResponsePath() = default;

    double brownian_at(double tau);
    double ou_at(double t);
    long long poisson_count_at(double t);
    double mean_fn(double t) const { return c0_ * std::pow(t, rho0_); }

    ResponseKind kind_ = ResponseKind::ScaledVariable;
    double beta_ = 0.0;
    double eta_ = 0.0;
    double c0_ = 0.0, rho0_ = 0.0;
    Stream stream_;
    std::vector<std::pair<double, double>> knots_;     // (c): tau -> W; (e): t -> Z
    std::vector<std::pair<double, long long>> counts_; // (d): t -> N(t)
};

ResponsePath make_response(const ResponseSpec& spec, Stream stream);

// Exact second-order structure of a response kind: covariance f, variance v,
// limit function C, index, and whether the limit is fictitious (C vanishing
// off the diagonal). The slowly varying factor is the constant 1 throughout.
struct CovarianceModel {
    std::function<double(double, double)> f;
    std::function<double(double)> v;
    std::function<double(double, double)> C;
    double beta = 0.0;
    bool fictitious = false;
};

CovarianceModel covariance_model(const ResponseSpec& spec);

// Cov(X(u), X(w)), exact closed form. Requires u, w >= 0.
double covariance_f(const ResponseSpec& spec, double u, double w);

// Limit function C(u, w) of f(ut, wt)/v(t). Requires u, w > 0.
double limit_C(const ResponseSpec& spec, double u, double w);

} // namespace shotlab
