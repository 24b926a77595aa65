#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "eap/common.hpp"

namespace eap {

// Adaptive-moment optimizer with bias correction. The label names the
// parameter block in fault diagnostics.
class Adam {
public:
    Adam(std::string label, std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : label_(std::move(label)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
          m_(n, 0.0), v_(n, 0.0) {}

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    int step_count() const { return t_; }
    std::size_t size() const { return m_.size(); }

    void step(Vec& params, const Vec& grad) {
        require(params.size() == m_.size() && grad.size() == m_.size(),
                "adam '" + label_ + "': shape mismatch");
        for (std::size_t i = 0; i < grad.size(); ++i)
            if (!std::isfinite(grad[i]))
                throw RuntimeFailure("adam '" + label_ + "': non-finite gradient at parameter " +
                                     std::to_string(i));
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
        for (std::size_t i = 0; i < params.size(); ++i)
            if (!std::isfinite(params[i]))
                throw RuntimeFailure("adam '" + label_ + "': non-finite parameter " +
                                     std::to_string(i) + " after update");
    }

    void save(std::ostream& out) const {
        out.write(reinterpret_cast<const char*>(&t_), sizeof(t_));
        write_vec(out, m_);
        write_vec(out, v_);
    }

    void load(std::istream& in) {
        in.read(reinterpret_cast<char*>(&t_), sizeof(t_));
        read_vec(in, m_);
        read_vec(in, v_);
        if (!in) throw RuntimeFailure("adam '" + label_ + "': truncated optimizer state");
    }

private:
    static void write_vec(std::ostream& out, const Vec& v) {
        const std::uint64_t n = v.size();
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    static void read_vec(std::istream& in, Vec& v) {
        std::uint64_t n = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof(n));
        v.resize(n);
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }

    std::string label_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    Vec m_, v_;
};

// Global-norm gradient clipping; returns the pre-clip norm.
inline double clip_grad_norm(Vec& grad, double max_norm) {
    double sq = 0.0;
    for (double g : grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (double& g : grad) g *= scale;
    }
    return norm;
}

}  // namespace eap
