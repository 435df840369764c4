#include "shotlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "shotlab/io.hpp"
#include "shotlab/parallel.hpp"

namespace shotlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Nonincreasing over indices [m/2, m), with a tiny tie slack so statistics
// that are exactly zero at several scales compare cleanly.
bool nonincreasing_top_half(const std::vector<double>& stat) {
    const std::size_t m = stat.size();
    for (std::size_t i = m / 2; i > 0 && i < m; ++i) {
        const double slack = 1e-12 * (1.0 + std::fabs(stat[i - 1]));
        if (stat[i] > stat[i - 1] + slack) return false;
    }
    return true;
}

void require_scales(const std::vector<double>& scales, double min_exclusive) {
    if (scales.empty()) throw config_error("checker: scales must be nonempty");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > min_exclusive))
            throw config_error("checker: scales must be > " + std::to_string(min_exclusive));
        if (i > 0 && !(scales[i] > scales[i - 1]))
            throw config_error("checker: scales must be strictly increasing");
    }
}

// Exact supremum of |N(ty)/t^rho - c y^rho| over y in [0, T]. Between jumps
// the deviation is monotone (the comparator increases, N is flat), so it is
// enough to look at both one-sided values at every jump and at the endpoints.
double sup_scaled_deviation(const std::vector<double>& times, double t, double c, double rho,
                            double T) {
    const double trho = std::pow(t, rho);
    double sup = 0.0;
    std::size_t cnt = 0;
    std::size_t i = 0;
    const std::size_t n = times.size();
    while (i < n) {
        const double y = times[i] / t;
        if (y > T) break;
        const double comparator = c * std::pow(y, rho);
        sup = std::max(sup, std::fabs(static_cast<double>(cnt) / trho - comparator));
        while (i < n && times[i] / t == y) {
            ++cnt;
            ++i;
        }
        sup = std::max(sup, std::fabs(static_cast<double>(cnt) / trho - comparator));
    }
    sup = std::max(sup, std::fabs(static_cast<double>(cnt) / trho - c * std::pow(T, rho)));
    return sup;
}

} // namespace

EmpiricalCov empirical_cov(const Eigen::MatrixXd& ensemble) {
    const Eigen::Index r = ensemble.rows();
    if (r < 2) throw domain_error("empirical_cov: need at least 2 rows");
    EmpiricalCov out;
    out.mean = ensemble.colwise().mean();
    const Eigen::MatrixXd centered = ensemble.rowwise() - out.mean.transpose();
    out.cov = centered.transpose() * centered / static_cast<double>(r - 1);
    out.se.resizeLike(out.cov);
    for (Eigen::Index i = 0; i < out.cov.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cov.cols(); ++j)
            out.se(i, j) = std::sqrt(
                (out.cov(i, i) * out.cov(j, j) + out.cov(i, j) * out.cov(i, j)) /
                static_cast<double>(r));
    return out;
}

double kolmogorov_p(double x) {
    if (!(x > 0.0)) return 1.0;
    double p;
    if (x < 1.0) {
        // Dual theta series for the CDF, accurate where the direct tail series
        // oscillates: K(x) = sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
        double cdf = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double odd = 2.0 * k - 1.0;
            cdf += std::exp(-odd * odd * kPi * kPi / (8.0 * x * x));
        }
        cdf *= std::sqrt(2.0 * kPi) / x;
        p = 1.0 - cdf;
    } else {
        double q = 0.0;
        double sign = 1.0;
        for (int k = 1; k <= 100; ++k) {
            q += sign * 2.0 * std::exp(-2.0 * static_cast<double>(k) * k * x * x);
            sign = -sign;
        }
        p = q;
    }
    return std::clamp(p, 0.0, 1.0);
}

NormalityReport ks_normal_test(const Eigen::MatrixXd& ensemble, const LimitCovariance& cov,
                               const Eigen::VectorXd& direction) {
    if (direction.size() != ensemble.cols() || direction.size() != cov.matrix.rows())
        throw config_error("ks_normal_test: direction length must match the grid");
    if (direction.norm() == 0.0) throw degenerate_error("ks_normal_test: direction is zero");
    const double proj_var = direction.transpose() * cov.matrix * direction;
    if (!(proj_var > 0.0))
        throw degenerate_error("ks_normal_test: direction has nonpositive projected variance");

    const double sd = std::sqrt(proj_var);
    std::vector<double> z(static_cast<std::size_t>(ensemble.rows()));
    for (Eigen::Index r = 0; r < ensemble.rows(); ++r)
        z[static_cast<std::size_t>(r)] = ensemble.row(r).dot(direction) / sd;
    std::sort(z.begin(), z.end());

    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = normal_cdf(z[i]);
        d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - cdf,
                                 cdf - static_cast<double>(i) / n));
    }

    NormalityReport report;
    report.direction.assign(direction.data(), direction.data() + direction.size());
    report.ks_statistic = d;
    report.p_value = kolmogorov_p(std::sqrt(n) * d);
    report.sample_size = z.size();
    return report;
}

CheckReport check_weak_law(const ArrivalSpec& spec, double c, double rho, double T,
                           std::vector<double> scales, std::size_t replicates, Seed seed,
                           unsigned threads) {
    require_scales(scales, 0.0);
    if (!(T > 0.0)) throw config_error("check_weak_law: T must be > 0");
    if (replicates == 0) throw config_error("check_weak_law: replicates must be >= 1");

    std::vector<double> sups(scales.size() * replicates);
    parallel_for(sups.size(), threads, [&](std::size_t slot) {
        const std::size_t si = slot / replicates;
        const std::size_t r = slot % replicates;
        Stream stream = derive(seed, {si, r});
        const double t = scales[si];
        const ArrivalRealization real = generate_arrivals(spec, t * T, stream);
        sups[slot] = sup_scaled_deviation(real.times(), t, c, rho, T);
    });

    CheckReport report;
    report.name = "weak_law";
    report.scales = std::move(scales);
    report.statistic.resize(report.scales.size());
    for (std::size_t si = 0; si < report.scales.size(); ++si) {
        double acc = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) acc += sups[si * replicates + r];
        report.statistic[si] = acc / static_cast<double>(replicates);
    }
    const double bound = 0.1 * c * std::pow(T, rho);
    report.threshold_description =
        "nonincreasing over top half of scales and final value < 0.1*c*T^rho = " +
        format_double(bound);
    report.pass = nonincreasing_top_half(report.statistic) && report.statistic.back() < bound;
    return report;
}

CheckReport check_increments(const ArrivalSpec& spec, double rho, std::vector<double> scales,
                             std::size_t replicates, Seed seed, unsigned threads) {
    require_scales(scales, 1.0);
    if (replicates == 0) throw config_error("check_increments: replicates must be >= 1");

    std::vector<double> vals(scales.size() * replicates);
    parallel_for(vals.size(), threads, [&](std::size_t slot) {
        const std::size_t si = slot / replicates;
        const std::size_t r = slot % replicates;
        Stream stream = derive(seed, {si, r});
        const double t = scales[si];
        const ArrivalRealization real = generate_arrivals(spec, t, stream);
        const double inc = static_cast<double>(real.count(t)) - static_cast<double>(real.count(t - 1.0));
        vals[slot] = inc / std::pow(t, rho - 1.0);
    });

    CheckReport report;
    report.name = "increments";
    report.scales = std::move(scales);
    report.statistic.resize(report.scales.size());
    for (std::size_t si = 0; si < report.scales.size(); ++si) {
        double acc = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) acc += vals[si * replicates + r];
        report.statistic[si] = acc / static_cast<double>(replicates);
    }
    report.threshold_description =
        "bounded by 2x the value at the smallest scale (boundedness proxy)";
    const double bound = 2.0 * report.statistic.front();
    report.pass = std::all_of(report.statistic.begin(), report.statistic.end(),
                              [bound](double s) { return s <= bound; });
    return report;
}

CheckReport check_lindeberg(const ResponseSpec& spec, double rho, double y,
                            std::vector<double> scales, std::size_t replicates, Seed seed,
                            unsigned threads) {
    require_scales(scales, 0.0);
    if (!(y > 0.0)) throw config_error("check_lindeberg: y must be > 0");
    if (replicates == 0) throw config_error("check_lindeberg: replicates must be >= 1");

    const CovarianceModel model = covariance_model(spec);
    std::vector<double> vals(scales.size() * replicates);
    parallel_for(vals.size(), threads, [&](std::size_t slot) {
        const std::size_t si = slot / replicates;
        const std::size_t r = slot % replicates;
        const double t = scales[si];
        const double threshold = y * std::sqrt(std::pow(t, rho) * model.v(t));
        ResponsePath path = make_response(spec, derive(seed, {si, r}));
        const double x = path.at(t);
        vals[slot] = std::fabs(x) > threshold ? x * x : 0.0;
    });

    CheckReport report;
    report.name = "lindeberg";
    report.scales = std::move(scales);
    report.statistic.resize(report.scales.size());
    for (std::size_t si = 0; si < report.scales.size(); ++si) {
        double acc = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) acc += vals[si * replicates + r];
        report.statistic[si] = acc / static_cast<double>(replicates) / model.v(report.scales[si]);
    }
    report.threshold_description =
        "nonincreasing over top half of scales and final value < 0.05";
    report.pass = nonincreasing_top_half(report.statistic) && report.statistic.back() < 0.05;
    return report;
}

CheckReport check_limit_ratio(const ResponseSpec& spec, double w, double a, double b,
                              std::vector<double> scales) {
    require_scales(scales, 0.0);
    if (!(w > 0.0)) throw config_error("check_limit_ratio: w must be > 0");
    if (!(0.0 < a && a < b)) throw config_error("check_limit_ratio: need 0 < a < b");

    const CovarianceModel model = covariance_model(spec);
    CheckReport report;
    report.name = "limit_ratio";
    report.scales = std::move(scales);
    report.statistic.reserve(report.scales.size());
    for (double t : report.scales) {
        double worst = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double u = a + (b - a) * static_cast<double>(i) / 100.0;
            const double ratio = model.f(u * t, (u + w) * t) / model.v(t);
            worst = std::max(worst, std::fabs(ratio - model.C(u, u + w)));
        }
        report.statistic.push_back(worst);
    }
    report.threshold_description = "nonincreasing across scales and final value < 1e-2";
    bool monotone = true;
    for (std::size_t i = 1; i < report.statistic.size(); ++i) {
        const double slack = 1e-12 * (1.0 + std::fabs(report.statistic[i - 1]));
        if (report.statistic[i] > report.statistic[i - 1] + slack) monotone = false;
    }
    report.pass = monotone && report.statistic.back() < 1e-2;
    return report;
}

void checks_summary_csv(std::span<const CheckReport> reports, std::ostream& os) {
    os << "check,scale,statistic,pass\n";
    for (const auto& rep : reports)
        for (std::size_t i = 0; i < rep.scales.size(); ++i)
            os << rep.name << "," << format_double(rep.scales[i]) << ","
               << format_double(rep.statistic[i]) << "," << (rep.pass ? "true" : "false") << "\n";
}

} // namespace shotlab
