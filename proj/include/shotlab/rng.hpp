#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "shotlab/errors.hpp"

namespace shotlab {

// Master seed of an experiment. Every random quantity in a run is a pure
// function of the master seed and a derivation path, so replays are
// bit-identical and independent of scheduling.
struct Seed {
    std::uint64_t master = 0;
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014; constants by Vigna).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Chain one path element into a derivation key.
inline std::uint64_t chain(std::uint64_t key, std::uint64_t element) {
    return mix64(key + kGolden * (element + 1));
}

} // namespace detail

// Counter-based stream in the SplittableRandom family: the state advances by a
// per-stream odd gamma and is finalized by mix64. Both the initial counter and
// the gamma are hashes of (master seed, derivation path), so streams with
// distinct paths behave as independent generators.
class Stream {
public:
    Stream() : Stream(0) {}

    std::uint64_t next_u64() {
        state_ += gamma_;
        return detail::mix64(state_);
    }

    // Uniform on (0,1), never returning an endpoint.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    // Standard normal via Box-Muller; consumes exactly two uniforms, the sine
    // twin is discarded so every draw is a pure function of the stream state.
    double normal() {
        const double u1 = u01();
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Child stream with the path extended by `element`.
    Stream split(std::uint64_t element) const {
        if (depth_ >= kMaxDepth)
            throw config_error("stream derivation deeper than " + std::to_string(kMaxDepth));
        Stream child(detail::chain(key_, element));
        child.path_ = path_;
        child.path_[static_cast<std::size_t>(depth_)] = element;
        child.depth_ = depth_ + 1;
        return child;
    }

    std::span<const std::uint64_t> path() const {
        return {path_.data(), static_cast<std::size_t>(depth_)};
    }

private:
    friend Stream derive(Seed, std::span<const std::uint64_t>);

    static constexpr int kMaxDepth = 8;

    explicit Stream(std::uint64_t key)
        : key_(key),
          state_(detail::mix64(key ^ 0x6A09E667F3BCC908ULL)),
          gamma_(detail::mix64(key ^ 0xBB67AE8584CAA73BULL) | 1ULL) {}

    std::uint64_t key_;
    std::uint64_t state_;
    std::uint64_t gamma_;
    std::array<std::uint64_t, kMaxDepth> path_{};
    int depth_ = 0;
};

// Pure derivation of a stream from (seed, path).
inline Stream derive(Seed seed, std::span<const std::uint64_t> path) {
    Stream s(detail::mix64(seed.master + detail::kGolden));
    for (std::uint64_t p : path) s = s.split(p);
    return s;
}

inline Stream derive(Seed seed, std::initializer_list<std::uint64_t> path) {
    return derive(seed, std::span<const std::uint64_t>(path.begin(), path.size()));
}

// A fresh master seed deterministically derived from (seed, tag); used to give
// independent sub-experiments their own seed space.
inline Seed fold_seed(Seed seed, std::uint64_t tag) {
    return Seed{detail::mix64(seed.master ^ detail::mix64(tag + detail::kGolden))};
}

// Distribution descriptor for the sampling menu. Parameters are validated at
// construction; sampling is exact inversion or a standard exact method.
class Distribution {
public:
    enum class Law { Exponential, Deterministic, ParetoType, Normal, LogNormal, TwoPoint };

    static Distribution exponential(double rate);
    static Distribution deterministic(double value);
    // P{eta > t} = (1+t)^beta exactly for t >= 0, beta in (-1,0).
    static Distribution pareto_type(double beta);
    static Distribution normal(double sd);
    static Distribution lognormal(double mu, double sigma);
    // +/- magnitude with probability 1/2 each.
    static Distribution two_point(double magnitude);

    double sample(Stream& stream) const;

    Law law() const { return law_; }
    double param0() const { return p0_; }
    double param1() const { return p1_; }

    // nullopt when the moment is infinite (Pareto-type tails).
    std::optional<double> mean() const;
    std::optional<double> variance() const;

    // Support contained in [0, inf) with P{X > 0} = 1.
    bool strictly_positive() const;
    // P{X = 0} < 1.
    bool nondegenerate_at_zero() const;

    std::string describe() const;

private:
    Distribution(Law law, double p0, double p1) : law_(law), p0_(p0), p1_(p1) {}

    Law law_;
    double p0_;
    double p1_;
};

// Poisson variate with the given mean; exact (Knuth product method for small
// means, Hormann's PTRS transformed rejection for large ones).
long long sample_poisson(Stream& stream, double mean);

// Binomial(n, p) by direct Bernoulli counting; O(n), intended for the modest
// counts that appear in conditional path refinement.
long long sample_binomial(Stream& stream, long long n, double p);

} // namespace shotlab
