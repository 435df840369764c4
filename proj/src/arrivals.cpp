#include "shotlab/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "shotlab/io.hpp"

namespace shotlab {

namespace {

double log_factorial(int j) {
    double s = 0.0;
    for (int i = 2; i <= j; ++i) s += std::log(static_cast<double>(i));
    return s;
}

void require_positive_law(const Distribution& d, const char* role) {
    if (!d.strictly_positive())
        throw config_error(std::string(role) + " law must be strictly positive, got " + d.describe());
}

} // namespace

ArrivalSpec ArrivalSpec::renewal(Distribution xi) {
    ArrivalSpec s;
    s.kind = ArrivalKind::Renewal;
    s.interarrival = std::move(xi);
    s.validate();
    return s;
}

ArrivalSpec ArrivalSpec::perturbed_walk(Distribution xi, Distribution eta) {
    ArrivalSpec s;
    s.kind = ArrivalKind::PerturbedWalk;
    s.interarrival = std::move(xi);
    s.perturbation = std::move(eta);
    s.validate();
    return s;
}

ArrivalSpec ArrivalSpec::poisson_nh(double c0, double rho0) {
    ArrivalSpec s;
    s.kind = ArrivalKind::PoissonNH;
    s.c0 = c0;
    s.rho0 = rho0;
    s.validate();
    return s;
}

ArrivalSpec ArrivalSpec::brw_generation(int j, Distribution xi, std::size_t population_cap) {
    ArrivalSpec s;
    s.kind = ArrivalKind::BrwGeneration;
    s.generation = j;
    s.interarrival = std::move(xi);
    s.population_cap = population_cap;
    s.validate();
    return s;
}

void ArrivalSpec::validate() const {
    switch (kind) {
    case ArrivalKind::Renewal:
        require_positive_law(interarrival, "interarrival");
        break;
    case ArrivalKind::PerturbedWalk:
        require_positive_law(interarrival, "interarrival");
        require_positive_law(perturbation, "perturbation");
        break;
    case ArrivalKind::PoissonNH:
        if (!(c0 > 0.0)) throw config_error("poisson_nh: c0 must be > 0");
        if (!(rho0 > 0.0)) throw config_error("poisson_nh: rho0 must be > 0");
        break;
    case ArrivalKind::BrwGeneration:
        if (generation < 2) throw config_error("brw_generation: generation must be >= 2");
        require_positive_law(interarrival, "interarrival");
        break;
    }
    if (population_cap == 0) throw config_error("population_cap must be > 0");
}

Normalization derived_normalization(const ArrivalSpec& spec) {
    switch (spec.kind) {
    case ArrivalKind::Renewal:
    case ArrivalKind::PerturbedWalk: {
        const auto mu = spec.interarrival.mean();
        if (!mu || !(*mu > 0.0))
            throw config_error("no finite normalization: interarrival mean is infinite for " +
                               spec.interarrival.describe());
        return {1.0 / *mu, 1.0};
    }
    case ArrivalKind::PoissonNH:
        return {spec.c0, spec.rho0};
    case ArrivalKind::BrwGeneration: {
        const auto mu = spec.interarrival.mean();
        if (!mu || !(*mu > 0.0))
            throw config_error("no finite normalization: interarrival mean is infinite for " +
                               spec.interarrival.describe());
        const int j = spec.generation;
        const double log_c = -(log_factorial(j) + j * std::log(*mu));
        return {std::exp(log_c), static_cast<double>(j)};
    }
    }
    throw consistency_error("unreachable arrival kind");
}

ArrivalRealization::ArrivalRealization(std::vector<double> times, double horizon)
    : times_(std::move(times)), horizon_(horizon) {
    if (!(horizon_ > 0.0)) throw config_error("horizon must be > 0");
    if (!std::is_sorted(times_.begin(), times_.end()))
        throw config_error("arrival times must be nondecreasing");
    if (!times_.empty() && (times_.front() < 0.0 || times_.back() > horizon_))
        throw config_error("arrival times must lie in [0, horizon]");
}

std::size_t ArrivalRealization::count(double t) const {
    if (!(t >= 0.0) || t > horizon_)
        throw domain_error("count: t must lie in [0, horizon]; counting past the horizon would truncate");
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin());
}

namespace {

void check_cap(std::size_t n, std::size_t cap) {
    if (n > cap)
        throw resource_error("arrival population exceeded cap of " + std::to_string(cap) + " points");
}

std::vector<double> generate_renewal(const ArrivalSpec& spec, double horizon, Stream& stream) {
    std::vector<double> times;
    times.push_back(0.0);
    double s = 0.0;
    for (;;) {
        s += spec.interarrival.sample(stream);
        if (s > horizon) break;
        times.push_back(s);
        check_cap(times.size(), spec.population_cap);
    }
    return times;
}

std::vector<double> generate_perturbed(const ArrivalSpec& spec, double horizon, Stream& stream) {
    // Walk extended until S_{k-1} > horizon; since eta > 0 no later point can
    // fall back into [0, horizon], so the realization there is exact.
    std::vector<double> times;
    double s = 0.0;
    while (s <= horizon) {
        const double eta = spec.perturbation.sample(stream);
        const double point = s + eta;
        if (point <= horizon) {
            times.push_back(point);
            check_cap(times.size(), spec.population_cap);
        }
        s += spec.interarrival.sample(stream);
    }
    std::sort(times.begin(), times.end());
    return times;
}

std::vector<double> generate_poisson_nh(const ArrivalSpec& spec, double horizon, Stream& stream) {
    // Conditional uniformity: K ~ Poisson(m(horizon)), points at
    // m^{-1}(U_i m(horizon)) = horizon * U_i^{1/rho0}.
    const double total_mean = spec.c0 * std::pow(horizon, spec.rho0);
    if (total_mean > static_cast<double>(spec.population_cap))
        throw resource_error("poisson_nh: expected count " + std::to_string(total_mean) +
                             " exceeds population cap");
    const long long k = sample_poisson(stream, total_mean);
    check_cap(static_cast<std::size_t>(k), spec.population_cap);
    std::vector<double> times(static_cast<std::size_t>(k));
    for (auto& t : times) t = horizon * std::pow(stream.u01(), 1.0 / spec.rho0);
    std::sort(times.begin(), times.end());
    return times;
}

std::vector<double> generate_brw(const ArrivalSpec& spec, double horizon, Stream& stream) {
    const int j = spec.generation;
    // Expected generation-j population is about horizon^j / (j! mu^j); refuse
    // upfront when the interarrival mean is known.
    if (const auto mu = spec.interarrival.mean(); mu && *mu > 0.0) {
        const double log_expected =
            j * std::log(horizon / *mu) - log_factorial(j);
        if (log_expected > std::log(static_cast<double>(spec.population_cap)))
            throw resource_error("brw_generation: expected population exp(" +
                                 std::to_string(log_expected) + ") exceeds cap");
    }

    // Generation-by-generation streaming: only the previous generation kept.
    std::vector<double> prev{0.0};
    std::vector<double> next;
    for (int g = 1; g <= j; ++g) {
        next.clear();
        for (double parent : prev) {
            double s = parent;
            for (;;) {
                s += spec.interarrival.sample(stream);
                if (s > horizon) break;
                next.push_back(s);
                check_cap(next.size(), spec.population_cap);
            }
        }
        prev.swap(next);
        if (prev.empty()) break;
    }
    std::sort(prev.begin(), prev.end());
    return prev;
}

} // namespace

ArrivalRealization generate_arrivals(const ArrivalSpec& spec, double horizon, Stream& stream) {
    if (!(horizon > 0.0)) throw config_error("generate_arrivals: horizon must be > 0");
    spec.validate();
    std::vector<double> times;
    switch (spec.kind) {
    case ArrivalKind::Renewal: times = generate_renewal(spec, horizon, stream); break;
    case ArrivalKind::PerturbedWalk: times = generate_perturbed(spec, horizon, stream); break;
    case ArrivalKind::PoissonNH: times = generate_poisson_nh(spec, horizon, stream); break;
    case ArrivalKind::BrwGeneration: times = generate_brw(spec, horizon, stream); break;
    }
    return ArrivalRealization(std::move(times), horizon);
}

void dump_csv(const ArrivalRealization& realization, std::ostream& os) {
    os << "time\n";
    for (double t : realization.times()) os << format_double(t) << "\n";
}

} // namespace shotlab
