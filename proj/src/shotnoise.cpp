#include "shotlab/shotnoise.hpp"

#include <cmath>
#include <ostream>

#include "shotlab/io.hpp"
#include "shotlab/parallel.hpp"

namespace shotlab {

void Scenario::validate() const {
    arrival.validate();
    response.validate();
    if (!(c > 0.0)) throw config_error("scenario: c must be > 0");
    if (!(rho > 0.0)) throw config_error("scenario: rho must be > 0");
    if (!(t > 0.0)) throw config_error("scenario: t must be > 0");
    if (replicates == 0) throw config_error("scenario: replicates must be >= 1");
    if (grid.empty()) throw config_error("scenario: grid must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw config_error("scenario: grid values must be > 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw config_error("scenario: grid must be strictly increasing");
    }

    const double beta = response.index();
    const double floor = -std::min(rho, 1.0);
    if (!(beta > floor))
        throw config_error("scenario: response index beta=" + std::to_string(beta) +
                           " violates the constraint beta > -(min(rho,1)) = " +
                           std::to_string(floor));

    const Normalization derived = derived_normalization(arrival);
    const double ctol = 1e-9 * std::max(1.0, std::fabs(derived.c));
    if (std::fabs(c - derived.c) > ctol || rho != derived.rho)
        throw config_error("scenario: (c, rho) = (" + std::to_string(c) + ", " +
                           std::to_string(rho) + ") does not match the arrival model's pair (" +
                           std::to_string(derived.c) + ", " + std::to_string(derived.rho) + ")");
}

std::vector<double> evaluate_Y(const ArrivalRealization& arrivals, const ResponseSpec& response,
                               std::span<const double> times, const Stream& stream) {
    for (double s : times)
        if (!(s >= 0.0) || s > arrivals.horizon())
            throw domain_error("evaluate_Y: query times must lie in [0, horizon]");

    std::vector<double> y(times.size(), 0.0);
    const auto& tk = arrivals.times();
    for (std::size_t k = 0; k < tk.size(); ++k) {
        ResponsePath path = make_response(response, stream.split(k));
        for (std::size_t i = 0; i < times.size(); ++i)
            if (tk[k] <= times[i]) y[i] += path.at(times[i] - tk[k]);
    }
    return y;
}

ScaledSample scaled_sample(const Scenario& scenario, const Stream& stream) {
    const CovarianceModel model = covariance_model(scenario.response);
    const double vt = model.v(scenario.t);
    if (!(vt > 0.0))
        throw degenerate_error("scaled_sample: v(t) = " + std::to_string(vt) +
                               " gives a degenerate scale");

    const double horizon = scenario.grid.back() * scenario.t;
    Stream arrival_stream = stream.split(0);
    const ArrivalRealization arrivals =
        generate_arrivals(scenario.arrival, horizon, arrival_stream);

    std::vector<double> times(scenario.grid.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = scenario.grid[i] * scenario.t;

    ScaledSample sample;
    sample.values = evaluate_Y(arrivals, scenario.response, times, stream.split(1));
    const double denom = std::sqrt(scenario.c * std::pow(scenario.t, scenario.rho) * vt);
    for (double& v : sample.values) v /= denom;
    return sample;
}

Eigen::MatrixXd mc_ensemble(const Scenario& scenario, Seed seed, unsigned threads) {
    scenario.validate();
    const auto n = static_cast<Eigen::Index>(scenario.grid.size());
    Eigen::MatrixXd ensemble(static_cast<Eigen::Index>(scenario.replicates), n);
    parallel_for(scenario.replicates, threads, [&](std::size_t r) {
        const ScaledSample s = scaled_sample(scenario, derive(seed, {r}));
        for (Eigen::Index i = 0; i < n; ++i)
            ensemble(static_cast<Eigen::Index>(r), i) = s.values[static_cast<std::size_t>(i)];
    });
    return ensemble;
}

void dump_ensemble_csv(const Eigen::MatrixXd& ensemble, const std::vector<double>& grid,
                       std::ostream& os) {
    os << "replicate,u,value\n";
    for (Eigen::Index r = 0; r < ensemble.rows(); ++r)
        for (Eigen::Index i = 0; i < ensemble.cols(); ++i)
            os << r << "," << format_double(grid[static_cast<std::size_t>(i)]) << ","
               << format_double(ensemble(r, i)) << "\n";
}

} // namespace shotlab
