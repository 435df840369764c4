#include "shotlab/responses.hpp"

#include <algorithm>
#include <cmath>

namespace shotlab {

ResponseSpec ResponseSpec::survival_indicator(double beta) {
    ResponseSpec s;
    s.kind = ResponseKind::SurvivalIndicator;
    s.beta = beta;
    s.validate();
    return s;
}

ResponseSpec ResponseSpec::scaled_variable(double beta, Distribution innovation) {
    ResponseSpec s;
    s.kind = ResponseKind::ScaledVariable;
    s.beta = beta;
    s.innovation = std::move(innovation);
    s.validate();
    return s;
}

ResponseSpec ResponseSpec::time_changed_bm(double beta) {
    ResponseSpec s;
    s.kind = ResponseKind::TimeChangedBM;
    s.beta = beta;
    s.validate();
    return s;
}

ResponseSpec ResponseSpec::centered_poisson(double c0, double rho0) {
    ResponseSpec s;
    s.kind = ResponseKind::CenteredPoisson;
    s.c0 = c0;
    s.rho0 = rho0;
    s.validate();
    return s;
}

ResponseSpec ResponseSpec::ou_modulated(double beta) {
    ResponseSpec s;
    s.kind = ResponseKind::OUModulated;
    s.beta = beta;
    s.validate();
    return s;
}

void ResponseSpec::validate() const {
    switch (kind) {
    case ResponseKind::SurvivalIndicator:
        if (!(beta > -1.0 && beta < 0.0))
            throw config_error("survival_indicator: beta must lie in (-1, 0)");
        break;
    case ResponseKind::ScaledVariable: {
        if (!(beta > -1.0)) throw config_error("scaled_variable: beta must be > -1");
        const auto m = innovation.mean();
        const auto var = innovation.variance();
        if (!m || !var)
            throw config_error("scaled_variable: innovation law must have finite mean and variance");
        // The deterministic law is admitted so tests can build exact oracles;
        // it is rejected later wherever a positive variance is required.
        using Law = Distribution::Law;
        if (innovation.law() != Law::Normal && innovation.law() != Law::TwoPoint &&
            innovation.law() != Law::Deterministic)
            throw config_error("scaled_variable: innovation must be normal, two_point or deterministic");
        break;
    }
    case ResponseKind::TimeChangedBM:
        if (!(beta > 0.0)) throw config_error("time_changed_bm: beta must be > 0");
        break;
    case ResponseKind::CenteredPoisson:
        if (!(c0 > 0.0)) throw config_error("centered_poisson: c0 must be > 0");
        if (!(rho0 > 0.0)) throw config_error("centered_poisson: rho0 must be > 0");
        break;
    case ResponseKind::OUModulated:
        if (!(beta > -1.0 && beta < 0.0))
            throw config_error("ou_modulated: beta must lie in (-1, 0)");
        break;
    }
}

double ResponseSpec::index() const {
    return kind == ResponseKind::CenteredPoisson ? rho0 : beta;
}

ResponsePath make_response(const ResponseSpec& spec, Stream stream) {
    spec.validate();
    ResponsePath p;
    p.kind_ = spec.kind;
    p.beta_ = spec.beta;
    p.c0_ = spec.c0;
    p.rho0_ = spec.rho0;
    p.stream_ = stream;
    switch (spec.kind) {
    case ResponseKind::SurvivalIndicator:
        p.eta_ = Distribution::pareto_type(spec.beta).sample(p.stream_);
        break;
    case ResponseKind::ScaledVariable:
        p.eta_ = spec.innovation.sample(p.stream_);
        break;
    case ResponseKind::TimeChangedBM:
        p.knots_.emplace_back(0.0, 0.0);
        break;
    case ResponseKind::CenteredPoisson:
        p.counts_.emplace_back(0.0, 0);
        break;
    case ResponseKind::OUModulated:
        p.knots_.emplace_back(0.0, std::sqrt(0.5) * p.stream_.normal());
        break;
    }
    return p;
}

double ResponsePath::latent() const {
    if (kind_ != ResponseKind::SurvivalIndicator && kind_ != ResponseKind::ScaledVariable)
        throw domain_error("latent(): only survival_indicator and scaled_variable expose a latent draw");
    return eta_;
}

double ResponsePath::brownian_at(double tau) {
    auto it = std::lower_bound(knots_.begin(), knots_.end(), tau,
                               [](const auto& kv, double x) { return kv.first < x; });
    if (it != knots_.end() && it->first == tau) return it->second;
    if (it == knots_.end()) {
        const auto& last = knots_.back();
        const double w = last.second + std::sqrt(tau - last.first) * stream_.normal();
        knots_.emplace_back(tau, w);
        return w;
    }
    // Brownian bridge between the adjacent knots.
    const auto lo = *(it - 1);
    const auto hi = *it;
    const double span = hi.first - lo.first;
    const double frac = (tau - lo.first) / span;
    const double mean = lo.second + frac * (hi.second - lo.second);
    const double var = (tau - lo.first) * (hi.first - tau) / span;
    const double w = mean + std::sqrt(var) * stream_.normal();
    knots_.insert(it, {tau, w});
    return w;
}

double ResponsePath::ou_at(double t) {
    auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                               [](const auto& kv, double x) { return kv.first < x; });
    if (it != knots_.end() && it->first == t) return it->second;
    if (it == knots_.end()) {
        // Exact stationary transition, Var Z = 1/2.
        const auto& last = knots_.back();
        const double d = t - last.first;
        const double z =
            std::exp(-d) * last.second + std::sqrt(-std::expm1(-2.0 * d) / 2.0) * stream_.normal();
        knots_.emplace_back(t, z);
        return z;
    }
    // Conditional law of Z(t) given the adjacent knots (OU bridge).
    const auto lo = *(it - 1);
    const auto hi = *it;
    const double u = t - lo.first;
    const double v = hi.first - t;
    const double span = u + v;
    const double q = std::exp(-span);
    const double denom = -std::expm1(-2.0 * span); // 1 - q^2
    const double mean = ((std::exp(-u) - std::exp(-v) * q) * lo.second +
                         (std::exp(-v) - std::exp(-u) * q) * hi.second) /
                        denom;
    const double var = 0.5 * (-std::expm1(-2.0 * u)) * (-std::expm1(-2.0 * v)) / denom;
    const double z = mean + std::sqrt(var) * stream_.normal();
    knots_.insert(it, {t, z});
    return z;
}

long long ResponsePath::poisson_count_at(double t) {
    auto it = std::lower_bound(counts_.begin(), counts_.end(), t,
                               [](const auto& kv, double x) { return kv.first < x; });
    if (it != counts_.end() && it->first == t) return it->second;
    if (it == counts_.end()) {
        const auto& last = counts_.back();
        const long long n = last.second + sample_poisson(stream_, mean_fn(t) - mean_fn(last.first));
        counts_.emplace_back(t, n);
        return n;
    }
    // Given counts at the adjacent knots the interior count is binomial.
    const auto lo = *(it - 1);
    const auto hi = *it;
    const double span = mean_fn(hi.first) - mean_fn(lo.first);
    const double p =
        span > 0.0 ? std::clamp((mean_fn(t) - mean_fn(lo.first)) / span, 0.0, 1.0) : 0.0;
    const long long n = lo.second + sample_binomial(stream_, hi.second - lo.second, p);
    counts_.insert(it, {t, n});
    return n;
}

double ResponsePath::at(double t) {
    if (t < 0.0) return 0.0; // responses vanish on the negative halfline
    switch (kind_) {
    case ResponseKind::SurvivalIndicator:
        return (eta_ > t ? 1.0 : 0.0) - std::pow(1.0 + t, beta_);
    case ResponseKind::ScaledVariable:
        return eta_ * std::pow(1.0 + t, 0.5 * beta_);
    case ResponseKind::TimeChangedBM:
        return brownian_at(std::pow(t, beta_));
    case ResponseKind::CenteredPoisson:
        return static_cast<double>(poisson_count_at(t)) - mean_fn(t);
    case ResponseKind::OUModulated:
        return std::pow(t + 1.0, 0.5 * beta_) * ou_at(t);
    }
    throw consistency_error("unreachable response kind");
}

CovarianceModel covariance_model(const ResponseSpec& spec) {
    spec.validate();
    CovarianceModel m;
    m.beta = spec.index();
    m.fictitious = spec.kind == ResponseKind::OUModulated;
    const double beta = spec.beta;
    switch (spec.kind) {
    case ResponseKind::SurvivalIndicator: {
        auto tail = [beta](double x) { return std::pow(1.0 + x, beta); };
        m.f = [tail](double u, double w) {
            return tail(std::max(u, w)) - tail(u) * tail(w);
        };
        m.v = [tail](double t) { return tail(t) * (1.0 - tail(t)); };
        m.C = [beta](double u, double w) { return std::pow(std::max(u, w), beta); };
        break;
    }
    case ResponseKind::ScaledVariable: {
        const double var_eta = *spec.innovation.variance();
        auto g = [beta](double x) { return std::pow(1.0 + x, 0.5 * beta); };
        m.f = [g, var_eta](double u, double w) { return var_eta * g(u) * g(w); };
        m.v = [g, var_eta](double t) { return var_eta * g(t) * g(t); };
        m.C = [beta](double u, double w) { return std::pow(u * w, 0.5 * beta); };
        break;
    }
    case ResponseKind::TimeChangedBM: {
        m.f = [beta](double u, double w) { return std::pow(std::min(u, w), beta); };
        m.v = [beta](double t) { return std::pow(t, beta); };
        m.C = m.f;
        break;
    }
    case ResponseKind::CenteredPoisson: {
        const double c0 = spec.c0, rho0 = spec.rho0;
        m.f = [c0, rho0](double u, double w) { return c0 * std::pow(std::min(u, w), rho0); };
        m.v = [c0, rho0](double t) { return c0 * std::pow(t, rho0); };
        m.C = [rho0](double u, double w) { return std::pow(std::min(u, w), rho0); };
        break;
    }
    case ResponseKind::OUModulated: {
        m.f = [beta](double u, double w) {
            return 0.5 * std::pow(1.0 + u, 0.5 * beta) * std::pow(1.0 + w, 0.5 * beta) *
                   std::exp(-std::fabs(u - w));
        };
        m.v = [beta](double t) { return 0.5 * std::pow(1.0 + t, beta); };
        m.C = [beta](double u, double w) { return u == w ? std::pow(u, beta) : 0.0; };
        break;
    }
    }
    return m;
}

double covariance_f(const ResponseSpec& spec, double u, double w) {
    if (!(u >= 0.0) || !(w >= 0.0)) throw domain_error("covariance_f: u, w must be >= 0");
    return covariance_model(spec).f(u, w);
}

double limit_C(const ResponseSpec& spec, double u, double w) {
    if (!(u > 0.0) || !(w > 0.0)) throw domain_error("limit_C: u, w must be > 0");
    return covariance_model(spec).C(u, w);
}

} // namespace shotlab
