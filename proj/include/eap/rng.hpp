#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "eap/common.hpp"

namespace eap {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
}  // namespace detail

// One master seed fans out into named child streams so that adding or
// reordering one consumer does not perturb the draws seen by another.
// Keys mix the master seed, a stream name, and up to two counters.
inline std::uint64_t derive_seed(std::uint64_t master, const std::string& name,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a(name, master ^ 0x9e3779b97f4a7c15ull);
    h = detail::splitmix64(h ^ detail::splitmix64(a));
    h = detail::splitmix64(h ^ detail::splitmix64(b * 0x632be59bd9b4e019ull + 1));
    return h;
}

// mt19937_64 engine with portable uniform/normal draws. The raw engine is
// seedable and streamable, so runs reproduce bit-exactly; the distributions
// are hand-mapped because the std ones are implementation-defined.
class RngStream {
public:
    RngStream() : RngStream(0) {}
    explicit RngStream(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}
    RngStream(std::uint64_t master, const std::string& name, std::uint64_t a = 0,
              std::uint64_t b = 0)
        : RngStream(derive_seed(master, name, a, b)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double uniform(const Interval& iv) { return uniform(iv.lo, iv.hi); }

    // Standard normal via Box-Muller; the spare draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    int uniform_int(int n) {  // in [0, n)
        require(n > 0, "uniform_int: n must be positive");
        return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
        os.precision(17);
        os << spare_;
        return os.str();
    }

    void deserialize(const std::string& s) {
        std::istringstream is(s);
        int flag = 0;
        is >> engine_ >> flag >> spare_;
        has_spare_ = flag != 0;
        if (!is) throw RuntimeFailure("RngStream: bad serialized state");
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace eap
