#include "shotlab/rng.hpp"

#include <cmath>
#include <sstream>

namespace shotlab {

namespace {

// Thread-safe log-gamma (std::lgamma writes the global signgam on glibc).
double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

} // namespace

Distribution Distribution::exponential(double rate) {
    if (!(rate > 0.0)) throw config_error("exponential: rate must be > 0");
    return {Law::Exponential, rate, 0.0};
}

Distribution Distribution::deterministic(double value) {
    return {Law::Deterministic, value, 0.0};
}

Distribution Distribution::pareto_type(double beta) {
    if (!(beta > -1.0 && beta < 0.0)) throw config_error("pareto_type: beta must lie in (-1, 0)");
    return {Law::ParetoType, beta, 0.0};
}

Distribution Distribution::normal(double sd) {
    if (!(sd > 0.0)) throw config_error("normal: sd must be > 0");
    return {Law::Normal, sd, 0.0};
}

Distribution Distribution::lognormal(double mu, double sigma) {
    if (!(sigma > 0.0)) throw config_error("lognormal: sigma must be > 0");
    return {Law::LogNormal, mu, sigma};
}

Distribution Distribution::two_point(double magnitude) {
    if (!(magnitude > 0.0)) throw config_error("two_point: magnitude must be > 0");
    return {Law::TwoPoint, magnitude, 0.0};
}

double Distribution::sample(Stream& stream) const {
    switch (law_) {
    case Law::Exponential:
        return -std::log(stream.u01()) / p0_;
    case Law::Deterministic:
        return p0_;
    case Law::ParetoType:
        // Inversion: U^{1/beta} - 1 has tail (1+t)^beta exactly.
        return std::pow(stream.u01(), 1.0 / p0_) - 1.0;
    case Law::Normal:
        return p0_ * stream.normal();
    case Law::LogNormal:
        return std::exp(p0_ + p1_ * stream.normal());
    case Law::TwoPoint:
        return stream.u01() < 0.5 ? -p0_ : p0_;
    }
    throw consistency_error("unreachable distribution law");
}

std::optional<double> Distribution::mean() const {
    switch (law_) {
    case Law::Exponential: return 1.0 / p0_;
    case Law::Deterministic: return p0_;
    case Law::ParetoType: return std::nullopt; // infinite for beta in (-1,0)
    case Law::Normal: return 0.0;
    case Law::LogNormal: return std::exp(p0_ + 0.5 * p1_ * p1_);
    case Law::TwoPoint: return 0.0;
    }
    return std::nullopt;
}

std::optional<double> Distribution::variance() const {
    switch (law_) {
    case Law::Exponential: return 1.0 / (p0_ * p0_);
    case Law::Deterministic: return 0.0;
    case Law::ParetoType: return std::nullopt;
    case Law::Normal: return p0_ * p0_;
    case Law::LogNormal: {
        const double s2 = p1_ * p1_;
        return (std::exp(s2) - 1.0) * std::exp(2.0 * p0_ + s2);
    }
    case Law::TwoPoint: return p0_ * p0_;
    }
    return std::nullopt;
}

bool Distribution::strictly_positive() const {
    switch (law_) {
    case Law::Exponential:
    case Law::ParetoType:
    case Law::LogNormal:
        return true;
    case Law::Deterministic:
        return p0_ > 0.0;
    case Law::Normal:
    case Law::TwoPoint:
        return false;
    }
    return false;
}

bool Distribution::nondegenerate_at_zero() const {
    if (law_ == Law::Deterministic) return p0_ != 0.0;
    return true;
}

std::string Distribution::describe() const {
    std::ostringstream os;
    switch (law_) {
    case Law::Exponential: os << "exponential(rate=" << p0_ << ")"; break;
    case Law::Deterministic: os << "deterministic(" << p0_ << ")"; break;
    case Law::ParetoType: os << "pareto_type(beta=" << p0_ << ")"; break;
    case Law::Normal: os << "normal(sd=" << p0_ << ")"; break;
    case Law::LogNormal: os << "lognormal(mu=" << p0_ << ", sigma=" << p1_ << ")"; break;
    case Law::TwoPoint: os << "two_point(magnitude=" << p0_ << ")"; break;
    }
    return os.str();
}

long long sample_poisson(Stream& stream, double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw domain_error("sample_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;

    if (mean < 10.0) {
        // Knuth product-of-uniforms.
        const double limit = std::exp(-mean);
        long long k = 0;
        double prod = stream.u01();
        while (prod > limit) {
            ++k;
            prod *= stream.u01();
        }
        return k;
    }

    // Transformed rejection with squeeze, Hormann (1993), algorithm PTRS.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = stream.u01() - 0.5;
        const double v = stream.u01();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long long>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - log_gamma(k + 1.0))
            return static_cast<long long>(k);
    }
}

long long sample_binomial(Stream& stream, long long n, double p) {
    if (n < 0) throw domain_error("sample_binomial: n must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw domain_error("sample_binomial: p must lie in [0,1]");
    long long k = 0;
    for (long long i = 0; i < n; ++i)
        if (stream.u01() < p) ++k;
    return k;
}

} // namespace shotlab
