#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tabsynth {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded random stream with hand-rolled distributions so that results are
// reproducible for a fixed seed regardless of standard-library internals.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in (0, 1]; never zero, safe under log().
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via Box-Muller. Stateless: the spare value is discarded.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Standard Gumbel(0, 1) noise.
    double gumbel() { return -std::log(-std::log(uniform_pos())); }

    // Unbiased uniform index in [0, n).
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("RngStream::index: n must be positive");
        const std::uint64_t bound = n;
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    // Index drawn with probability proportional to weights[i]; total must be > 0.
    std::size_t pick_weighted(std::span<const double> weights, double total) {
        double r = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return weights.size() - 1;
    }

    // Derive an independent sub-seed (e.g. one per iteration or worker).
    std::uint64_t derive(std::uint64_t salt) { return splitmix64(next_u64() ^ splitmix64(salt)); }

    std::string serialize_state() const {
        std::ostringstream os;
        os << eng_;
        return os.str();
    }

    void restore_state(const std::string& s) {
        std::istringstream is(s);
        is >> eng_;
        if (is.fail()) throw std::invalid_argument("RngStream: bad serialized state");
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace tabsynth
