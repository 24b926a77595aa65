#pragma once

#include "eap/common.hpp"
#include "eap/net/feedforward.hpp"

namespace eap {

// Encoder-decoder pair with a low-dimensional linear latent. The latent is
// the projected error fed to the policy; the decoder only exists so the
// latent can be trained against full-dimension targets.
class BottleneckNet {
public:
    BottleneckNet(int in, int enc_hidden, int latent, int dec_hidden, int out)
        : encoder_({in, enc_hidden, latent}), decoder_({latent, dec_hidden, out}) {
        require(latent < out, "bottleneck latent must be narrower than the output");
    }

    // Zero latent layer so a fresh network projects everything to exactly
    // zero; the decoder output is then zero too (zero biases, tanh(0)=0).
    void init(RngStream& rng) {
        encoder_.init_orthogonal(rng, std::sqrt(2.0), 0.0);
        decoder_.init_orthogonal(rng, std::sqrt(2.0), 1.0);
    }

    int input_dim() const { return encoder_.input_dim(); }
    int latent_dim() const { return encoder_.output_dim(); }
    int output_dim() const { return decoder_.output_dim(); }
    std::size_t n_params() const { return encoder_.n_params() + decoder_.n_params(); }
    FeedforwardNet& encoder() { return encoder_; }
    FeedforwardNet& decoder() { return decoder_; }

    Vec params() const {
        Vec p = encoder_.params();
        const Vec& d = decoder_.params();
        p.insert(p.end(), d.begin(), d.end());
        return p;
    }

    void set_params(const Vec& p) {
        require(p.size() == n_params(), "bottleneck set_params: wrong length");
        std::copy(p.begin(), p.begin() + static_cast<long>(encoder_.n_params()),
                  encoder_.params().begin());
        std::copy(p.begin() + static_cast<long>(encoder_.n_params()), p.end(),
                  decoder_.params().begin());
    }

    const Vec& encode(const Vec& x) { return encoder_.forward(x); }

    const Vec& forward(const Vec& x) { return decoder_.forward(encoder_.forward(x)); }

    const Vec& latent() const { return encoder_.output(); }

    // grad layout matches params(): [encoder | decoder].
    Vec backward(Vec dy, double* grad) {
        Vec dlatent = decoder_.backward(std::move(dy), grad + encoder_.n_params());
        return encoder_.backward(std::move(dlatent), grad);
    }

private:
    FeedforwardNet encoder_;
    FeedforwardNet decoder_;
};

}  // namespace eap
