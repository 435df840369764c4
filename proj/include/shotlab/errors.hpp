#pragma once

#include <stdexcept>
#include <string>

namespace shotlab {

// Bad user-supplied configuration (invalid parameters, malformed config files).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Query outside the domain an object was built for (e.g. counting past the horizon).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Work refused because it would exceed a configured budget.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numeric routine failed to reach its target; carries the best value it had.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& msg, double best_estimate)
        : std::runtime_error(msg), best_estimate(best_estimate) {}
    double best_estimate;
};

// An internal invariant failed (e.g. a covariance that should be PSD is not).
class consistency_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A request that is valid syntactically but degenerate (zero variance scale,
// direction with zero projected variance).
class degenerate_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace shotlab
