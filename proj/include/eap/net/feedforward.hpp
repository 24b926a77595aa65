#pragma once

#include <cmath>
#include <vector>

#include "eap/common.hpp"
#include "eap/rng.hpp"

namespace eap {

enum class Activation { Tanh, Identity };

// Dense network over one flat parameter vector, layout per layer: row-major
// W (out x in) then b. Hidden layers apply the hidden activation (tanh by
// default), the output layer is linear. forward() caches activations;
// backward() consumes the cache and accumulates parameter gradients.
class FeedforwardNet {
public:
    explicit FeedforwardNet(std::vector<int> sizes, Activation hidden = Activation::Tanh)
        : sizes_(std::move(sizes)), hidden_(hidden) {
        require(sizes_.size() >= 2, "net needs at least input and output sizes");
        for (int s : sizes_) require(s > 0, "layer sizes must be positive");
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            w_off_.push_back(off);
            off += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l]);
            b_off_.push_back(off);
            off += static_cast<std::size_t>(sizes_[l + 1]);
        }
        params_.assign(off, 0.0);
    }

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int n_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    std::size_t n_params() const { return params_.size(); }
    const std::vector<int>& sizes() const { return sizes_; }
    Vec& params() { return params_; }
    const Vec& params() const { return params_; }

    void set_params(const Vec& p) {
        require(p.size() == params_.size(), "feedforward: parameter size mismatch");
        params_ = p;
        cached_ = false;
    }

    std::size_t weight_offset(int layer) const { return w_off_.at(layer); }
    std::size_t bias_offset(int layer) const { return b_off_.at(layer); }

    // Orthogonal weights scaled by gain (hidden layers) and output_gain for
    // the final layer; zero biases. output_gain 0 pins the output to zero.
    void init_orthogonal(RngStream& rng, double hidden_gain, double output_gain) {
        for (int l = 0; l < n_layers(); ++l) {
            const double gain = (l == n_layers() - 1) ? output_gain : hidden_gain;
            fill_orthogonal(rng, sizes_[l + 1], sizes_[l], gain, params_.data() + w_off_[l]);
            for (int i = 0; i < sizes_[l + 1]; ++i) params_[b_off_[l] + i] = 0.0;
        }
    }

    const Vec& forward(const Vec& x) {
        require(static_cast<int>(x.size()) == input_dim(), "forward: input dimension mismatch");
        act_.resize(sizes_.size());
        act_[0] = x;
        for (int l = 0; l < n_layers(); ++l) {
            const int in = sizes_[l], out = sizes_[l + 1];
            const double* W = params_.data() + w_off_[l];
            const double* b = params_.data() + b_off_[l];
            const double* a = act_[l].data();
            act_[l + 1].resize(out);
            const bool last = l == n_layers() - 1;
            for (int i = 0; i < out; ++i) {
                double s = b[i];
                const double* w = W + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) s += w[j] * a[j];
                act_[l + 1][i] = (last || hidden_ == Activation::Identity) ? s : std::tanh(s);
            }
        }
        cached_ = true;
        return act_.back();
    }

    const Vec& output() const {
        require(cached_, "output: no cached forward pass");
        return act_.back();
    }

    // dy = dL/d(output). Accumulates dL/d(params) into grad (length
    // n_params) and returns dL/d(input). Invalidates the cache.
    Vec backward(Vec dy, double* grad) {
        require(cached_, "backward: no cached forward pass");
        require(static_cast<int>(dy.size()) == output_dim(), "backward: output gradient mismatch");
        for (int l = n_layers() - 1; l >= 0; --l) {
            const int in = sizes_[l], out = sizes_[l + 1];
            const bool last = l == n_layers() - 1;
            if (!last && hidden_ == Activation::Tanh) {
                const double* a = act_[l + 1].data();
                for (int i = 0; i < out; ++i) dy[i] *= 1.0 - a[i] * a[i];
            }
            const double* W = params_.data() + w_off_[l];
            double* gW = grad + w_off_[l];
            double* gb = grad + b_off_[l];
            const double* a_in = act_[l].data();
            Vec dx(in, 0.0);
            for (int i = 0; i < out; ++i) {
                const double d = dy[i];
                gb[i] += d;
                const std::size_t row = static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) {
                    gW[row + j] += d * a_in[j];
                    dx[j] += d * W[row + j];
                }
            }
            dy = std::move(dx);
        }
        cached_ = false;
        return dy;
    }

private:
    // Modified Gram-Schmidt on a Gaussian draw; the taller orientation is
    // orthogonalized so the rows (out <= in) or columns stay orthonormal.
    static void fill_orthogonal(RngStream& rng, int rows, int cols, double gain, double* W) {
        if (gain == 0.0) {
            for (int i = 0; i < rows * cols; ++i) W[i] = 0.0;
            return;
        }
        const bool transpose = rows < cols;
        const int r = transpose ? cols : rows;
        const int c = transpose ? rows : cols;
        std::vector<Vec> q(c, Vec(r));
        for (auto& col : q)
            for (auto& v : col) v = rng.normal();
        for (int j = 0; j < c; ++j) {
            for (int k = 0; k < j; ++k) {
                double dot = 0.0;
                for (int i = 0; i < r; ++i) dot += q[k][i] * q[j][i];
                for (int i = 0; i < r; ++i) q[j][i] -= dot * q[k][i];
            }
            double norm = 0.0;
            for (double v : q[j]) norm += v * v;
            norm = std::sqrt(norm);
            require(norm > 1e-12, "orthogonal init: degenerate draw");
            for (auto& v : q[j]) v /= norm;
        }
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                W[static_cast<std::size_t>(i) * cols + j] = gain * (transpose ? q[i][j] : q[j][i]);
    }

    std::vector<int> sizes_;
    Activation hidden_;
    std::vector<std::size_t> w_off_, b_off_;
    Vec params_;
    std::vector<Vec> act_;
    bool cached_ = false;
};

}  // namespace eap
