#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shotlab/arrivals.hpp"
#include "shotlab/responses.hpp"
#include "shotlab/rng.hpp"

namespace shotlab {

// A complete experiment description: arrival model, response model, the
// normalization pair (c, rho), the evaluation grid u_1 < ... < u_n, the scale
// parameter t and the replicate count.
struct Scenario {
    ArrivalSpec arrival;
    ResponseSpec response;
    double c = 1.0;
    double rho = 1.0;
    std::vector<double> grid;
    double t = 1.0;
    std::size_t replicates = 1;

    void validate() const;
};

// Y(s) = sum over arrivals T_k <= s of X_{k+1}(s - T_k), evaluated at each
// query time. One fresh independent response path per arrival (derived from
// stream.split(k) for the k-th stored arrival), reused across query times.
std::vector<double> evaluate_Y(const ArrivalRealization& arrivals, const ResponseSpec& response,
                               std::span<const double> times, const Stream& stream);

struct ScaledSample {
    std::vector<double> values; // (Y(u_i t) / sqrt(c t^rho v(t)))_i
};

// One draw of the scaled vector: fresh arrivals on [0, u_n t], fresh response
// paths, scaled by sqrt(c t^rho v(t)) with the exact variance function v.
// Stream use: arrivals from stream.split(0), the k-th arrival's response path
// from stream.split(1).split(k).
ScaledSample scaled_sample(const Scenario& scenario, const Stream& stream);

// replicates x n matrix; row r is scaled_sample with the stream derive(seed,
// [r]). Row order is deterministic and independent of the thread count.
Eigen::MatrixXd mc_ensemble(const Scenario& scenario, Seed seed, unsigned threads = 1);

// CSV dump: header "replicate,u,value", one row per (replicate, grid point).
void dump_ensemble_csv(const Eigen::MatrixXd& ensemble, const std::vector<double>& grid,
                       std::ostream& os);

} // namespace shotlab
