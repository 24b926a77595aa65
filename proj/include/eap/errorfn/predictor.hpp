#pragma once

#include <memory>
#include <numeric>

#include "eap/common.hpp"
#include "eap/errorfn/dataset.hpp"
#include "eap/net/adam.hpp"
#include "eap/net/bottleneck.hpp"
#include "eap/net/feedforward.hpp"
#include "eap/net/normalizer.hpp"
#include "eap/rng.hpp"

namespace eap {

enum class ErrorRepr { Full, Projected };

inline std::string to_string(ErrorRepr r) {
    return r == ErrorRepr::Full ? "full" : "projected";
}

inline ErrorRepr error_repr_from_string(const std::string& s) {
    if (s == "full") return ErrorRepr::Full;
    if (s == "projected") return ErrorRepr::Projected;
    throw ConfigError("unknown error representation: " + s);
}

// Mean over samples of the squared prediction-error norm.
inline double mse_loss(const std::vector<Vec>& preds, const std::vector<Vec>& targets) {
    require(preds.size() == targets.size() && !preds.empty(), "mse_loss: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        require(preds[i].size() == targets[i].size(), "mse_loss: dimension mismatch");
        for (std::size_t j = 0; j < preds[i].size(); ++j) {
            const double d = preds[i][j] - targets[i][j];
            total += d * d;
        }
    }
    return total / static_cast<double>(preds.size());
}

// E(s, a, mu) -> e. Inputs are standardized with a running mean/std;
// targets are scaled by a running per-component std (no centering, so a
// zero dynamics gap maps to a zero regression target). The Full variant
// predicts the T-step state error directly; the Projected variant trains an
// encoder-decoder against the same loss and hands the policy the latent.
class ErrorPredictor {
public:
    ErrorPredictor(ErrorRepr repr, int state_dim, int action_dim, int mu_dim,
                   std::vector<int> hidden, int latent_dim, int horizon)
        : repr_(repr), state_dim_(state_dim), horizon_(horizon),
          input_norm_(state_dim + action_dim + mu_dim, true),
          target_norm_(state_dim, false) {
        require(horizon_ >= 1, "error predictor: horizon T must be >= 1");
        require(hidden.size() == 2, "error predictor: expected two hidden sizes");
        const int in = state_dim + action_dim + mu_dim;
        if (repr_ == ErrorRepr::Full) {
            net_ = std::make_unique<FeedforwardNet>(
                std::vector<int>{in, hidden[0], hidden[1], state_dim});
        } else {
            require(latent_dim >= 1 && latent_dim < state_dim,
                    "error predictor: latent dim must be in [1, state_dim)");
            bottleneck_ = std::make_unique<BottleneckNet>(in, hidden[0], latent_dim, hidden[1],
                                                          state_dim);
        }
    }

    ErrorRepr repr() const { return repr_; }
    int horizon() const { return horizon_; }
    int input_dim() const { return input_norm_.dim(); }
    // Dimension of the e vector the policy consumes.
    int e_dim() const {
        return repr_ == ErrorRepr::Full ? state_dim_ : bottleneck_->latent_dim();
    }
    std::size_t n_params() const {
        return repr_ == ErrorRepr::Full ? net_->n_params() : bottleneck_->n_params();
    }
    RunningNormalizer& input_normalizer() { return input_norm_; }
    RunningNormalizer& target_normalizer() { return target_norm_; }

    // Hidden layers orthogonal; the layer producing e is zero so a fresh
    // predictor outputs exactly zero.
    void init(RngStream& rng) {
        if (repr_ == ErrorRepr::Full)
            net_->init_orthogonal(rng, std::sqrt(2.0), 0.0);
        else
            bottleneck_->init(rng);
    }

    Vec params() const { return repr_ == ErrorRepr::Full ? net_->params() : bottleneck_->params(); }
    void set_params(const Vec& p) {
        if (repr_ == ErrorRepr::Full) {
            require(p.size() == net_->n_params(), "predictor set_params: wrong length");
            net_->params() = p;
        } else {
            bottleneck_->set_params(p);
        }
    }

    // Feeds a freshly collected sample into the running normalizers.
    void observe_sample(const ErrorSample& s) {
        input_norm_.update(build_input(s.s0, s.a0, s.mu));
        target_norm_.update(s.target());
    }

    // The e vector fed to the policy: denormalized state error (Full) or
    // the bottleneck latent (Projected).
    Vec predict(const Vec& s, const Vec& a, const Vec& mu) {
        const Vec x = input_norm_.normalize(build_input(s, a, mu));
        if (repr_ == ErrorRepr::Full) return target_norm_.denormalize(net_->forward(x));
        return bottleneck_->encode(x);
    }

    // Normalized-space prediction, the quantity regressed by Eq-style MSE.
    Vec predict_normalized(const Vec& s, const Vec& a, const Vec& mu) {
        const Vec x = input_norm_.normalize(build_input(s, a, mu));
        return repr_ == ErrorRepr::Full ? net_->forward(x) : bottleneck_->forward(x);
    }

    struct TrainResult {
        double final_loss = 0.0;  // mean squared-norm over the dataset, post-training
        int epochs = 0;
    };

    // Fixed-epoch warm-start regression on the dataset. Minibatch SGD with
    // the caller's optimizer; shuffling drawn from rng.
    TrainResult train(const ErrorDataset& data, int epochs, int minibatch, Adam& opt,
                      RngStream& rng) {
        require(data.size() >= static_cast<std::size_t>(minibatch),
                "train_error_fn: dataset smaller than one minibatch");
        const std::size_t n = data.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Vec grad(n_params());
        Vec p = params();

        for (int epoch = 0; epoch < epochs; ++epoch) {
            for (std::size_t i = n; i > 1; --i)
                std::swap(order[i - 1], order[rng.uniform_int(static_cast<int>(i))]);
            for (std::size_t start = 0; start + minibatch <= n; start += minibatch) {
                std::fill(grad.begin(), grad.end(), 0.0);
                double mb_loss = 0.0;
                for (int k = 0; k < minibatch; ++k) {
                    const ErrorSample& s = data[order[start + k]];
                    const Vec x = input_norm_.normalize(build_input(s.s0, s.a0, s.mu));
                    const Vec y = target_norm_.normalize(s.target());
                    const Vec& pred =
                        repr_ == ErrorRepr::Full ? net_->forward(x) : bottleneck_->forward(x);
                    Vec dy(pred.size());
                    for (std::size_t j = 0; j < pred.size(); ++j) {
                        const double d = pred[j] - y[j];
                        mb_loss += d * d;
                        dy[j] = 2.0 * d / static_cast<double>(minibatch);
                    }
                    if (repr_ == ErrorRepr::Full)
                        net_->backward(std::move(dy), grad.data());
                    else
                        bottleneck_->backward(std::move(dy), grad.data());
                }
                if (!std::isfinite(mb_loss))
                    throw RuntimeFailure("train_error_fn: non-finite loss");
                opt.step(p, grad);
                set_params(p);
            }
        }

        TrainResult res;
        res.epochs = epochs;
        res.final_loss = dataset_loss(data);
        return res;
    }

    // Mean squared-norm of (prediction - normalized target) over a dataset.
    double dataset_loss(const ErrorDataset& data) {
        require(data.size() > 0, "dataset_loss: empty dataset");
        std::vector<Vec> preds, targets;
        preds.reserve(data.size());
        targets.reserve(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const ErrorSample& s = data[i];
            preds.push_back(predict_normalized(s.s0, s.a0, s.mu));
            targets.push_back(target_norm_.normalize(s.target()));
        }
        return mse_loss(preds, targets);
    }

    void save(std::ostream& out) const {
        const Vec p = params();
        const std::uint64_t n = p.size();
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(p.data()),
                  static_cast<std::streamsize>(n * sizeof(double)));
        input_norm_.save(out);
        target_norm_.save(out);
    }

    void load(std::istream& in) {
        std::uint64_t n = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof(n));
        Vec p(n);
        in.read(reinterpret_cast<char*>(p.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw RuntimeFailure("error predictor: truncated stream");
        set_params(p);
        input_norm_.load(in);
        target_norm_.load(in);
    }

private:
    static Vec concat(const Vec& a, const Vec& b, const Vec& c) {
        Vec out;
        out.reserve(a.size() + b.size() + c.size());
        out.insert(out.end(), a.begin(), a.end());
        out.insert(out.end(), b.begin(), b.end());
        out.insert(out.end(), c.begin(), c.end());
        return out;
    }

    Vec build_input(const Vec& s, const Vec& a, const Vec& mu) const {
        Vec x = concat(s, a, mu);
        require(static_cast<int>(x.size()) == input_norm_.dim(),
                "error predictor: input dimension mismatch");
        return x;
    }

    ErrorRepr repr_;
    int state_dim_;
    int horizon_;
    std::unique_ptr<FeedforwardNet> net_;        // Full
    std::unique_ptr<BottleneckNet> bottleneck_;  // Projected
    RunningNormalizer input_norm_;
    RunningNormalizer target_norm_;
};

}  // namespace eap
