#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "shotlab/rng.hpp"

namespace shotlab {

enum class ArrivalKind { Renewal, PerturbedWalk, PoissonNH, BrwGeneration };

// Normalization pair (c, rho): N(t) / t^rho -> c.
struct Normalization {
    double c;
    double rho;
};

// Parametric arrival model. Renewal emits the zero-delayed walk 0, S_1, S_2,
// ...; PerturbedWalk emits S_{k-1} + eta_k for k >= 1; PoissonNH is an
// inhomogeneous Poisson process with mean function m(t) = c0 * t^rho0;
// BrwGeneration emits the generation-j positions of a branching random walk
// whose displacement point process is S_1, S_2, ... of the interarrival walk.
struct ArrivalSpec {
    ArrivalKind kind = ArrivalKind::Renewal;
    Distribution interarrival = Distribution::exponential(1.0); // xi
    Distribution perturbation = Distribution::exponential(1.0); // eta (PerturbedWalk)
    double c0 = 0.0;    // PoissonNH
    double rho0 = 0.0;  // PoissonNH
    int generation = 0; // BrwGeneration, j >= 2
    std::size_t population_cap = 50'000'000;

    static ArrivalSpec renewal(Distribution xi);
    static ArrivalSpec perturbed_walk(Distribution xi, Distribution eta);
    static ArrivalSpec poisson_nh(double c0, double rho0);
    static ArrivalSpec brw_generation(int j, Distribution xi,
                                      std::size_t population_cap = 50'000'000);

    void validate() const;
};

// The (c, rho) pair the model converges with. Throws config_error when the
// interarrival law has no finite mean (no finite normalization exists).
Normalization derived_normalization(const ArrivalSpec& spec);

// One sampled arrival collection on [0, horizon], sorted, with its counting
// function. Read-only after construction.
class ArrivalRealization {
public:
    ArrivalRealization(std::vector<double> times, double horizon);

    // Number of arrival times <= t; right-continuous and nondecreasing.
    // Throws domain_error outside [0, horizon].
    std::size_t count(double t) const;

    const std::vector<double>& times() const { return times_; }
    double horizon() const { return horizon_; }

private:
    std::vector<double> times_;
    double horizon_;
};

ArrivalRealization generate_arrivals(const ArrivalSpec& spec, double horizon, Stream& stream);

// CSV dump: header "time", one row per arrival, round-trip formatting.
void dump_csv(const ArrivalRealization& realization, std::ostream& os);

} // namespace shotlab
