#pragma once

#include <cmath>
#include <istream>
#include <ostream>

#include "eap/common.hpp"

namespace eap {

// Per-component running mean/std (Welford). center=false gives a pure
// scale transform, used for regression targets so a zero target stays zero.
class RunningNormalizer {
public:
    explicit RunningNormalizer(int dim, bool center = true)
        : center_(center), mean_(dim, 0.0), m2_(dim, 0.0) {}

    int dim() const { return static_cast<int>(mean_.size()); }
    std::int64_t count() const { return count_; }

    void update(const Vec& x) {
        require(x.size() == mean_.size(), "normalizer update: dimension mismatch");
        ++count_;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double delta = x[i] - mean_[i];
            mean_[i] += delta / static_cast<double>(count_);
            m2_[i] += delta * (x[i] - mean_[i]);
        }
    }

    double stddev(std::size_t i) const {
        if (count_ < 2) return 1.0;
        const double var = m2_[i] / static_cast<double>(count_ - 1);
        return std::max(std::sqrt(var), 1e-8);
    }

    const Vec& mean() const { return mean_; }

    Vec normalize(const Vec& x) const {
        require(x.size() == mean_.size(), "normalize: dimension mismatch");
        Vec y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = (x[i] - (center_ ? mean_[i] : 0.0)) / stddev(i);
        return y;
    }

    Vec denormalize(const Vec& y) const {
        require(y.size() == mean_.size(), "denormalize: dimension mismatch");
        Vec x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            x[i] = y[i] * stddev(i) + (center_ ? mean_[i] : 0.0);
        return x;
    }

    void save(std::ostream& out) const {
        const std::uint64_t n = mean_.size();
        const std::uint8_t c = center_ ? 1 : 0;
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(&c), sizeof(c));
        out.write(reinterpret_cast<const char*>(&count_), sizeof(count_));
        out.write(reinterpret_cast<const char*>(mean_.data()), static_cast<std::streamsize>(n * sizeof(double)));
        out.write(reinterpret_cast<const char*>(m2_.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }

    void load(std::istream& in) {
        std::uint64_t n = 0;
        std::uint8_t c = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof(n));
        in.read(reinterpret_cast<char*>(&c), sizeof(c));
        in.read(reinterpret_cast<char*>(&count_), sizeof(count_));
        mean_.resize(n);
        m2_.resize(n);
        in.read(reinterpret_cast<char*>(mean_.data()), static_cast<std::streamsize>(n * sizeof(double)));
        in.read(reinterpret_cast<char*>(m2_.data()), static_cast<std::streamsize>(n * sizeof(double)));
        center_ = c != 0;
        if (!in) throw RuntimeFailure("normalizer: truncated state");
    }

private:
    bool center_;
    std::int64_t count_ = 0;
    Vec mean_;
    Vec m2_;
};

}  // namespace eap
