#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "eap/common.hpp"
#include "eap/io/config.hpp"
#include "eap/ppo/buffer.hpp"
#include "eap/train/baseline_trainer.hpp"
#include "eap/train/eap_trainer.hpp"

namespace eap {
namespace ckpt {

constexpr char kMagic[9] = "EAPCKPT1";

inline void write_u8(std::ostream& o, std::uint8_t v) {
    o.write(reinterpret_cast<const char*>(&v), 1);
}
inline std::uint8_t read_u8(std::istream& i) {
    std::uint8_t v = 0;
    i.read(reinterpret_cast<char*>(&v), 1);
    return v;
}
inline void write_i64(std::ostream& o, std::int64_t v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::int64_t read_i64(std::istream& i) {
    std::int64_t v = 0;
    i.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
inline void write_u64(std::ostream& o, std::uint64_t v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint64_t read_u64(std::istream& i) {
    std::uint64_t v = 0;
    i.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
inline void write_f64(std::ostream& o, double v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline double read_f64(std::istream& i) {
    double v = 0;
    i.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
inline void write_vec(std::ostream& o, const Vec& v) {
    write_u64(o, v.size());
    o.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline Vec read_vec(std::istream& i) {
    Vec v(read_u64(i));
    i.read(reinterpret_cast<char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
    return v;
}
inline void write_string(std::ostream& o, const std::string& s) {
    write_u64(o, s.size());
    o.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string read_string(std::istream& i) {
    std::string s(read_u64(i), '\0');
    i.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}

inline void write_buffer(std::ostream& o, const RolloutBuffer& b) {
    write_u64(o, b.steps.size());
    for (const Transition& t : b.steps) {
        write_vec(o, t.s);
        write_vec(o, t.a_hat);
        write_f64(o, t.r);
        write_vec(o, t.s_next);
        write_vec(o, t.mu);
        write_f64(o, t.log_prob);
        write_u8(o, t.done ? 1 : 0);
        write_vec(o, t.aux_obs);
    }
    write_vec(o, b.final_next_input);
    write_vec(o, b.episode_returns);
}

inline RolloutBuffer read_buffer(std::istream& i) {
    RolloutBuffer b;
    b.steps.resize(read_u64(i));
    for (Transition& t : b.steps) {
        t.s = read_vec(i);
        t.a_hat = read_vec(i);
        t.r = read_f64(i);
        t.s_next = read_vec(i);
        t.mu = read_vec(i);
        t.log_prob = read_f64(i);
        t.done = read_u8(i) != 0;
        t.aux_obs = read_vec(i);
    }
    b.final_next_input = read_vec(i);
    b.episode_returns = read_vec(i);
    return b;
}

inline void check(std::istream& in, const std::string& what) {
    if (!in) throw RuntimeFailure("checkpoint: truncated or corrupt " + what);
}

}  // namespace ckpt

// Self-contained EAP checkpoint: the resolved config and population are
// embedded as text, everything mutable as binary, so a load restores training
// bit-for-bit without the original config file.
inline void save_eap_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                                const EAPState& st) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("checkpoint: cannot open for write: " + path);
    out.write(ckpt::kMagic, 8);
    ckpt::write_u8(out, 0);  // mode: eap
    ckpt::write_string(out, cfg.serialize());
    ckpt::write_string(out, serialize_population(st.pop));
    ckpt::write_vec(out, st.policy.params());
    ckpt::write_vec(out, st.value.params());
    st.policy_opt.save(out);
    st.value_opt.save(out);
    st.err_opt.save(out);
    st.predictor.save(out);
    st.dataset.save(out);
    ckpt::write_buffer(out, st.last_buffer);
    ckpt::write_i64(out, st.iteration);
    ckpt::write_i64(out, st.pretrain_updates);
    ckpt::write_i64(out, st.policy_samples);
    ckpt::write_i64(out, st.pretrain_samples);
    ckpt::write_i64(out, st.error_samples);
    ckpt::write_i64(out, st.predictor_faults);
    ckpt::write_i64(out, st.collect_skipped);
    ckpt::write_u8(out, st.pretrained ? 1 : 0);
    ckpt::write_u8(out, st.pretrain_met_threshold ? 1 : 0);
    ckpt::write_f64(out, st.last_mean_return);
    if (!out) throw RuntimeFailure("checkpoint: write failed: " + path);
}

struct LoadedEap {
    ExperimentConfig cfg;
    EAPState state;
};

inline LoadedEap load_eap_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("checkpoint: cannot open: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(ckpt::kMagic, 8))
        throw RuntimeFailure("checkpoint: bad magic in " + path);
    if (ckpt::read_u8(in) != 0)
        throw RuntimeFailure("checkpoint: not an eap checkpoint: " + path);

    ExperimentConfig cfg = ExperimentConfig::from_text(ckpt::read_string(in));
    EnvPopulation pop = parse_population(ckpt::read_string(in));
    const EnvDescriptor desc = cfg.make_descriptor();
    require(pop.env_name == desc.name, "checkpoint: population env does not match config task");

    EAPState st = make_eap_state(desc, std::move(pop), cfg.hidden, cfg.ppo, cfg.err, cfg.seed);
    st.policy.set_params(ckpt::read_vec(in));
    st.value.set_params(ckpt::read_vec(in));
    st.policy_opt.load(in);
    st.value_opt.load(in);
    st.err_opt.load(in);
    st.predictor.load(in);
    st.dataset.load(in);
    st.last_buffer = ckpt::read_buffer(in);
    st.iteration = static_cast<int>(ckpt::read_i64(in));
    st.pretrain_updates = static_cast<int>(ckpt::read_i64(in));
    st.policy_samples = ckpt::read_i64(in);
    st.pretrain_samples = ckpt::read_i64(in);
    st.error_samples = ckpt::read_i64(in);
    st.predictor_faults = ckpt::read_i64(in);
    st.collect_skipped = ckpt::read_i64(in);
    st.pretrained = ckpt::read_u8(in) != 0;
    st.pretrain_met_threshold = ckpt::read_u8(in) != 0;
    st.last_mean_return = ckpt::read_f64(in);
    ckpt::check(in, "eap state in " + path);
    require(st.policy_opt.size() == st.policy.n_params() &&
                st.value_opt.size() == st.value.n_params() &&
                st.err_opt.size() == st.predictor.n_params(),
            "checkpoint: optimizer shapes do not match the configured networks");
    return {std::move(cfg), std::move(st)};
}

inline void save_baseline_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                                     const BaselineState& st) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("checkpoint: cannot open for write: " + path);
    out.write(ckpt::kMagic, 8);
    ckpt::write_u8(out, 1);  // mode: baseline
    ckpt::write_u8(out, st.kind == BaselineKind::DR ? 0 : 1);
    ckpt::write_string(out, cfg.serialize());
    ckpt::write_string(out, serialize_population(st.pop));
    ckpt::write_vec(out, st.policy.params());
    ckpt::write_vec(out, st.value.params());
    st.policy_opt.save(out);
    st.value_opt.save(out);
    ckpt::write_i64(out, st.updates);
    ckpt::write_i64(out, st.policy_samples);
    ckpt::write_f64(out, st.last_mean_return);
    if (!out) throw RuntimeFailure("checkpoint: write failed: " + path);
}

struct LoadedBaseline {
    ExperimentConfig cfg;
    BaselineState state;
};

inline LoadedBaseline load_baseline_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("checkpoint: cannot open: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(ckpt::kMagic, 8))
        throw RuntimeFailure("checkpoint: bad magic in " + path);
    if (ckpt::read_u8(in) != 1)
        throw RuntimeFailure("checkpoint: not a baseline checkpoint: " + path);
    const BaselineKind kind = ckpt::read_u8(in) == 0 ? BaselineKind::DR : BaselineKind::UP;

    ExperimentConfig cfg = ExperimentConfig::from_text(ckpt::read_string(in));
    EnvPopulation pop = parse_population(ckpt::read_string(in));
    const EnvDescriptor desc = cfg.make_descriptor();
    require(pop.env_name == desc.name, "checkpoint: population env does not match config task");

    BaselineState st = make_baseline_state(desc, std::move(pop), kind, cfg.hidden, cfg.ppo, cfg.seed);
    st.policy.set_params(ckpt::read_vec(in));
    st.value.set_params(ckpt::read_vec(in));
    st.policy_opt.load(in);
    st.value_opt.load(in);
    st.updates = static_cast<int>(ckpt::read_i64(in));
    st.policy_samples = ckpt::read_i64(in);
    st.last_mean_return = ckpt::read_f64(in);
    ckpt::check(in, "baseline state in " + path);
    require(st.policy_opt.size() == st.policy.n_params() &&
                st.value_opt.size() == st.value.n_params(),
            "checkpoint: optimizer shapes do not match the configured networks");
    return {std::move(cfg), std::move(st)};
}

// Peeks at the mode byte so the CLI can dispatch without trying both loaders.
inline bool checkpoint_is_eap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("checkpoint: cannot open: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(ckpt::kMagic, 8))
        throw RuntimeFailure("checkpoint: bad magic in " + path);
    return ckpt::read_u8(in) == 0;
}

}  // namespace eap
