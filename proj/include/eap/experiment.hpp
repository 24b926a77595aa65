#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eap/common.hpp"
#include "eap/eval/ablation.hpp"
#include "eap/eval/compare.hpp"
#include "eap/eval/evaluate.hpp"
#include "eap/io/checkpoint.hpp"
#include "eap/io/config.hpp"
#include "eap/io/metrics.hpp"
#include "eap/io/svg.hpp"
#include "eap/train/baseline_trainer.hpp"
#include "eap/train/eap_trainer.hpp"

namespace eap {

constexpr const char* kOutRootEnvVar = "EAP_OUT_ROOT";

inline std::string output_root() {
    const char* v = std::getenv(kOutRootEnvVar);
    return (v && *v) ? std::string(v) : std::string("runs");
}

inline std::string resolve_run_dir(const ExperimentConfig& cfg) {
    return cfg.out_dir.empty() ? output_root() + "/" + cfg.run_name() : cfg.out_dir;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write file: " + path);
    out << content;
    if (!out) throw RuntimeFailure("write failed: " + path);
}

inline std::string eval_report_csv(const EvalReport& rep) {
    std::ostringstream o;
    o << "# eap-eval v1\n";
    o << "# task=" << rep.task << " method=" << rep.method << " seed=" << rep.seed
      << " mode=" << rep.mode << " episodes_per_env=" << rep.n_episodes
      << " population_hash=" << rep.population_hash << " norm_lo=" << rep.norm_lo
      << " norm_hi=" << rep.norm_hi << "\n";
    o << "env_index,episodes,mean_return,std_return,mean_normalized_return\n";
    char buf[128];
    for (const auto& e : rep.per_env) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", e.env_index, e.episodes,
                      e.mean_return, e.std_return, e.mean_normalized);
        o << buf;
    }
    std::snprintf(buf, sizeof(buf), "overall,,%.17g,,%.17g\n", rep.mean_return,
                  rep.mean_normalized);
    o << buf;
    return o.str();
}

// Heldout-split zero-shot evaluation for a trained state of either kind.
inline EvalReport evaluate_eap_heldout(EAPState& st, const ExperimentConfig& cfg) {
    EvalSettings es{cfg.n_episodes, cfg.eval_mode, cfg.seed};
    EvalReport rep = evaluate_zero_shot(st.desc, st.pop, st.pop.heldout_idx,
                                        make_eap_eval_actor(st.policy, st.predictor, es.mode), es);
    rep.method = "eap";
    return rep;
}

inline EvalReport evaluate_baseline_heldout(BaselineState& st, const ExperimentConfig& cfg) {
    EvalSettings es{cfg.n_episodes, cfg.eval_mode, cfg.seed};
    EvalReport rep = evaluate_zero_shot(
        st.desc, st.pop, st.pop.heldout_idx,
        make_baseline_eval_actor(st.policy, st.kind, st.desc, cfg.up_nu, es.mode), es);
    rep.method = to_string(st.kind);
    return rep;
}

struct TrainOutcome {
    std::string run_dir;
    std::string method;
    std::uint64_t seed = 0;
    std::int64_t total_samples = 0;
    std::int64_t policy_samples = 0;
    std::int64_t error_samples = 0;
    bool pretrain_met_threshold = true;
    double final_train_return = 0.0;
    EvalReport heldout;
};

namespace detail {

struct CurveCapture {
    PlotSeries pretrain{"pretrain", {}, {}};
    PlotSeries train{"train", {}, {}};

    MetricsSink wrap(MetricsWriter& writer) {
        return [this, &writer](const MetricsRow& row) {
            writer.append(row);
            PlotSeries& s = row.phase == "pretrain" ? pretrain : train;
            s.xs.push_back(static_cast<double>(row.total_samples));
            s.ys.push_back(row.mean_return);
        };
    }

    std::vector<PlotSeries> series() const {
        std::vector<PlotSeries> out;
        if (!pretrain.xs.empty()) out.push_back(pretrain);
        if (!train.xs.empty()) out.push_back(train);
        return out;
    }
};

inline void write_train_artifacts(const std::string& dir, const ExperimentConfig& cfg,
                                  const CurveCapture& curves, const TrainOutcome& out) {
    if (!curves.series().empty())
        write_line_plot(dir + "/learning_curve.svg", cfg.run_name(), "environment steps",
                        "mean episode return", curves.series());
    write_text_file(dir + "/eval_heldout.csv", eval_report_csv(out.heldout));

    std::ostringstream s;
    s << "run " << cfg.run_name() << "\n";
    s << "method " << out.method << "\n";
    s << "seed " << out.seed << "\n";
    s << "total_samples " << out.total_samples << "\n";
    s << "policy_samples " << out.policy_samples << "\n";
    s << "error_samples " << out.error_samples << "\n";
    s << "pretrain_met_threshold " << (out.pretrain_met_threshold ? 1 : 0) << "\n";
    s << "final_train_return " << out.final_train_return << "\n";
    s << "heldout_mean_return " << out.heldout.mean_return << "\n";
    s << "heldout_mean_normalized " << out.heldout.mean_normalized << "\n";
    write_text_file(dir + "/summary.txt", s.str());
}

}  // namespace detail

// Full training run: creates the run directory, pins the resolved config and
// population, streams metrics, checkpoints, and finishes with a held-out
// zero-shot evaluation.
inline TrainOutcome run_train(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    const std::string dir = resolve_run_dir(cfg);
    std::filesystem::create_directories(dir);
    cfg.out_dir = dir;

    const EnvDescriptor desc = cfg.make_descriptor();
    EnvPopulation pop = cfg.make_population(desc);
    write_text_file(dir + "/config.txt", cfg.serialize());
    save_population(pop, dir + "/population.txt");

    MetricsWriter metrics(dir + "/metrics.csv");
    detail::CurveCapture curves;
    const MetricsSink sink = curves.wrap(metrics);

    TrainOutcome out;
    out.run_dir = dir;
    out.method = cfg.method;
    out.seed = cfg.seed;

    if (cfg.method == "eap") {
        EAPState st = make_eap_state(desc, std::move(pop), cfg.hidden, cfg.ppo, cfg.err, cfg.seed);
        out.pretrain_met_threshold =
            pretrain_reference(st, cfg.ppo, cfg.pretrain_budget, cfg.pretrain_threshold, sink);
        const CheckpointFn ck = [&](const EAPState& s) {
            save_eap_checkpoint(dir + "/checkpoint.bin", cfg, s);
        };
        train_eap(st, cfg.iterations, cfg.ppo, cfg.err, sink, ck, cfg.checkpoint_every);
        out.total_samples = st.total_samples();
        out.policy_samples = st.policy_samples;
        out.error_samples = st.error_samples;
        out.final_train_return = st.last_mean_return;
        out.heldout = evaluate_eap_heldout(st, cfg);
    } else {
        const BaselineKind kind = baseline_kind_from_string(cfg.method);
        BaselineState st = make_baseline_state(desc, std::move(pop), kind, cfg.hidden, cfg.ppo,
                                               cfg.seed);
        const BaselineCheckpointFn ck = [&](const BaselineState& s) {
            save_baseline_checkpoint(dir + "/checkpoint.bin", cfg, s);
        };
        train_baseline(st, cfg.budget, cfg.ppo, sink, ck, cfg.checkpoint_every);
        out.total_samples = st.policy_samples;
        out.policy_samples = st.policy_samples;
        out.final_train_return = st.last_mean_return;
        out.heldout = evaluate_baseline_heldout(st, cfg);
    }

    detail::write_train_artifacts(dir, cfg, curves, out);
    return out;
}

// Continues a checkpointed run to its configured end. EAP runs train the
// remaining outer iterations; baseline runs consume the remaining budget.
inline TrainOutcome resume_train(const std::string& checkpoint_path) {
    if (checkpoint_is_eap(checkpoint_path)) {
        LoadedEap loaded = load_eap_checkpoint(checkpoint_path);
        ExperimentConfig& cfg = loaded.cfg;
        EAPState& st = loaded.state;
        const std::string dir = resolve_run_dir(cfg);
        std::filesystem::create_directories(dir);

        MetricsWriter metrics(dir + "/metrics.csv", /*append=*/true);
        detail::CurveCapture curves;
        const MetricsSink sink = curves.wrap(metrics);
        const CheckpointFn ck = [&](const EAPState& s) {
            save_eap_checkpoint(dir + "/checkpoint.bin", cfg, s);
        };
        if (!st.pretrained)
            pretrain_reference(st, cfg.ppo, cfg.pretrain_budget, cfg.pretrain_threshold, sink);
        const int remaining = cfg.iterations - st.iteration;
        if (remaining > 0)
            train_eap(st, remaining, cfg.ppo, cfg.err, sink, ck, cfg.checkpoint_every);

        TrainOutcome out;
        out.run_dir = dir;
        out.method = "eap";
        out.seed = cfg.seed;
        out.total_samples = st.total_samples();
        out.policy_samples = st.policy_samples;
        out.error_samples = st.error_samples;
        out.pretrain_met_threshold = st.pretrain_met_threshold;
        out.final_train_return = st.last_mean_return;
        out.heldout = evaluate_eap_heldout(st, cfg);
        write_text_file(dir + "/eval_heldout.csv", eval_report_csv(out.heldout));
        return out;
    }

    LoadedBaseline loaded = load_baseline_checkpoint(checkpoint_path);
    ExperimentConfig& cfg = loaded.cfg;
    BaselineState& st = loaded.state;
    const std::string dir = resolve_run_dir(cfg);
    std::filesystem::create_directories(dir);

    MetricsWriter metrics(dir + "/metrics.csv", /*append=*/true);
    detail::CurveCapture curves;
    const MetricsSink sink = curves.wrap(metrics);
    const BaselineCheckpointFn ck = [&](const BaselineState& s) {
        save_baseline_checkpoint(dir + "/checkpoint.bin", cfg, s);
    };
    if (st.policy_samples < cfg.budget)
        train_baseline(st, cfg.budget, cfg.ppo, sink, ck, cfg.checkpoint_every);

    TrainOutcome out;
    out.run_dir = dir;
    out.method = cfg.method;
    out.seed = cfg.seed;
    out.total_samples = st.policy_samples;
    out.policy_samples = st.policy_samples;
    out.final_train_return = st.last_mean_return;
    out.heldout = evaluate_baseline_heldout(st, cfg);
    write_text_file(dir + "/eval_heldout.csv", eval_report_csv(out.heldout));
    return out;
}

inline std::vector<int> split_indices(const EnvPopulation& pop, const std::string& split) {
    if (split == "heldout") return pop.heldout_idx;
    if (split == "train") return pop.train_idx;
    if (split == "val") return pop.val_idx;
    if (split == "all") {
        std::vector<int> all(pop.entries.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        return all;
    }
    throw ConfigError("unknown split '" + split + "' (expected heldout, train, val, or all)");
}

struct EvalOptions {
    std::string population_path;  // empty: the checkpoint's own population
    std::string split = "heldout";
    int n_episodes = 0;  // 0: keep the checkpoint config's value
    std::string mode;    // empty: keep
    std::string out_csv;
    std::string out_svg;
};

// Zero-shot evaluation of a checkpointed policy. Supplying a different
// population file is allowed for cross-evaluation but earns a loud warning
// when its hash differs from the population the policy was trained on.
inline EvalReport run_eval(const std::string& checkpoint_path, const EvalOptions& opt) {
    const bool is_eap = checkpoint_is_eap(checkpoint_path);

    ExperimentConfig cfg;
    EvalReport rep;
    std::uint64_t trained_hash = 0;

    auto pick_population = [&](const EnvPopulation& own, const EnvDescriptor& desc) {
        trained_hash = population_hash(own);
        if (opt.population_path.empty()) return own;
        EnvPopulation ext = load_population(opt.population_path, desc);
        if (population_hash(ext) != trained_hash)
            std::cerr << "[warn] population hash mismatch: evaluating on " << opt.population_path
                      << " (hash " << population_hash(ext)
                      << "), not the training population (hash " << trained_hash << ")\n";
        return ext;
    };

    if (is_eap) {
        LoadedEap loaded = load_eap_checkpoint(checkpoint_path);
        cfg = loaded.cfg;
        if (opt.n_episodes > 0) cfg.n_episodes = opt.n_episodes;
        if (!opt.mode.empty()) cfg.eval_mode = eval_mode_from_string(opt.mode);
        EnvPopulation pop = pick_population(loaded.state.pop, loaded.state.desc);
        EvalSettings es{cfg.n_episodes, cfg.eval_mode, cfg.seed};
        rep = evaluate_zero_shot(
            loaded.state.desc, pop, split_indices(pop, opt.split),
            make_eap_eval_actor(loaded.state.policy, loaded.state.predictor, es.mode), es);
        rep.method = "eap";
    } else {
        LoadedBaseline loaded = load_baseline_checkpoint(checkpoint_path);
        cfg = loaded.cfg;
        if (opt.n_episodes > 0) cfg.n_episodes = opt.n_episodes;
        if (!opt.mode.empty()) cfg.eval_mode = eval_mode_from_string(opt.mode);
        EnvPopulation pop = pick_population(loaded.state.pop, loaded.state.desc);
        EvalSettings es{cfg.n_episodes, cfg.eval_mode, cfg.seed};
        rep = evaluate_zero_shot(loaded.state.desc, pop, split_indices(pop, opt.split),
                                 make_baseline_eval_actor(loaded.state.policy, loaded.state.kind,
                                                          loaded.state.desc, cfg.up_nu, es.mode),
                                 es);
        rep.method = to_string(loaded.state.kind);
    }

    if (!opt.out_csv.empty()) write_text_file(opt.out_csv, eval_report_csv(rep));
    if (!opt.out_svg.empty()) {
        std::vector<BarEntry> bars;
        for (const auto& e : rep.per_env)
            bars.push_back({"env " + std::to_string(e.env_index), e.mean_normalized, 0.0});
        write_bar_plot(opt.out_svg, rep.method + " zero-shot (" + opt.split + ")",
                       "mean normalized return", bars);
    }
    return rep;
}

struct CompareOutcome {
    std::string out_dir;
    ComparisonReport report;
    std::vector<MethodRuns> methods;
};

// Head-to-head protocol: per seed, train EAP first, then train each baseline
// against EAP's realized sample total so every method sees the same budget,
// then evaluate everything on that seed's shared held-out split.
inline CompareOutcome run_compare(const ExperimentConfig& base,
                                  const std::vector<std::uint64_t>& seeds,
                                  const std::vector<std::string>& baselines = {"dr", "up"}) {
    require(!seeds.empty(), "compare: no seeds");
    const std::string cmp_dir =
        base.out_dir.empty() ? output_root() + "/" + base.task + "_compare" : base.out_dir;
    std::filesystem::create_directories(cmp_dir);

    std::vector<MethodRuns> methods;
    methods.push_back({"eap", {}, {}, {}});
    for (const auto& b : baselines) methods.push_back({b, {}, {}, {}});

    for (std::uint64_t seed : seeds) {
        ExperimentConfig ce = base;
        ce.method = "eap";
        ce.seed = seed;
        ce.out_dir = cmp_dir + "/eap_seed" + std::to_string(seed);
        const TrainOutcome eap_out = run_train(ce);
        methods[0].reports.push_back(eap_out.heldout);
        methods[0].total_samples.push_back(eap_out.total_samples);
        methods[0].error_samples.push_back(eap_out.error_samples);

        for (std::size_t b = 0; b < baselines.size(); ++b) {
            ExperimentConfig cb = base;
            cb.method = baselines[b];
            cb.seed = seed;
            cb.budget = eap_out.total_samples;
            cb.out_dir = cmp_dir + "/" + baselines[b] + "_seed" + std::to_string(seed);
            const TrainOutcome bout = run_train(cb);
            methods[b + 1].reports.push_back(bout.heldout);
            methods[b + 1].total_samples.push_back(bout.total_samples);
            methods[b + 1].error_samples.push_back(0);
        }
    }

    CompareOutcome out;
    out.out_dir = cmp_dir;
    out.methods = methods;
    out.report = compare_methods(methods);
    write_text_file(cmp_dir + "/comparison.csv", comparison_csv(out.report));

    std::vector<BarEntry> bars;
    for (const auto& row : out.report.rows)
        bars.push_back({row.method, row.mean_normalized, row.std_normalized});
    write_bar_plot(cmp_dir + "/comparison.svg", base.task + " zero-shot comparison",
                   "mean normalized return", bars);
    return out;
}

// Named observability splits for the mu_split ablation axis; any other value
// is read as a '+'-joined list of parameter names.
inline std::vector<std::string> mu_split_names(const std::string& task, const std::string& value) {
    if (value == "default") return {};
    if (task == "cartpole") {
        if (value == "masses") return {"pole_mass", "cart_mass"};
        if (value == "geometry") return {"pole_length"};
        if (value == "all")
            return {"pole_length", "pole_mass", "cart_mass",
                    "rot_damping", "rot_friction", "trans_friction"};
    } else if (task == "pendulum") {
        if (value == "masses") return {"pole_mass"};
        if (value == "geometry") return {"pole_length"};
        if (value == "all")
            return {"pole_length", "pole_mass", "joint_damping", "dry_friction", "gravity_scale"};
    } else if (task == "hopper") {
        if (value == "masses") return {"body_mass"};
        if (value == "geometry") return {"rest_length"};
        if (value == "all")
            return {"body_mass", "rest_length", "spring_k", "leg_damping", "gravity_scale"};
    }
    std::vector<std::string> names;
    std::istringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, '+'))
        if (!tok.empty()) names.push_back(tok);
    if (names.empty()) throw ConfigError("mu_split value '" + value + "' names no parameters");
    return names;
}

inline void apply_ablation_value(ExperimentConfig& cfg, AblationAxis axis,
                                 const std::string& value) {
    switch (axis) {
        case AblationAxis::HorizonT:
            cfg.err.T = std::stoi(value);
            break;
        case AblationAxis::Representation:
            cfg.err.repr = error_repr_from_string(value);
            break;
        case AblationAxis::MuSplit:
            cfg.observable_names = mu_split_names(cfg.task, value);
            break;
        case AblationAxis::ReferenceChoice:
            cfg.reference_index = std::stoi(value);
            break;
    }
}

inline std::string sanitize_for_path(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '-';
    return out;
}

struct AblationOutcome {
    std::string out_dir;
    AblationTable table;
};

// One EAP train+eval per (axis value, seed), each in its own cell directory
// under the sweep root.
inline AblationOutcome run_ablation_sweep(const ExperimentConfig& base, const AblationSpec& spec) {
    const std::string dir = base.out_dir.empty()
                                ? output_root() + "/" + base.task + "_ablate_" + to_string(spec.axis)
                                : base.out_dir;
    std::filesystem::create_directories(dir);

    AblationTable table = run_ablation(spec, [&](const std::string& value, std::uint64_t seed) {
        ExperimentConfig cfg = base;
        cfg.method = "eap";
        apply_ablation_value(cfg, spec.axis, value);
        cfg.seed = seed;
        cfg.out_dir = dir + "/" + sanitize_for_path(value) + "_seed" + std::to_string(seed);
        return run_train(cfg).heldout.mean_normalized;
    });

    write_text_file(dir + "/ablation.csv", ablation_csv(table));
    std::vector<BarEntry> bars;
    for (const auto& c : table.rows)
        if (!c.missing()) bars.push_back({c.value, c.mean, c.stddev});
    if (!bars.empty())
        write_bar_plot(dir + "/ablation.svg", base.task + " ablation: " + table.axis,
                       "mean normalized return", bars);
    return {dir, std::move(table)};
}

// Human-readable population listing with roles, split membership, and hash.
inline std::string describe_population(const EnvDescriptor& desc, const EnvPopulation& pop) {
    std::ostringstream o;
    o << "population for " << pop.env_name << "\n";
    o << "entries " << pop.entries.size() << " (train " << pop.train_idx.size() << ", val "
      << pop.val_idx.size() << ", heldout " << pop.heldout_idx.size() << ")\n";
    o << "reference index " << pop.reference_index << "\n";
    o << "hash " << population_hash(pop) << "\n";
    auto split_of = [&](int i) -> std::string {
        for (int t : pop.train_idx)
            if (t == i) return i == pop.reference_index ? "train(ref)" : "train";
        for (int t : pop.val_idx)
            if (t == i) return "val";
        for (int t : pop.heldout_idx)
            if (t == i) return "heldout";
        return "?";
    };
    const int mu_dim = pop.entries.empty() ? 0 : static_cast<int>(pop.entries[0].mu.size());
    const int nu_dim = pop.entries.empty() ? 0 : static_cast<int>(pop.entries[0].nu.size());
    const bool named = desc.mu_dim() == mu_dim && desc.nu_dim() == nu_dim;
    o << "idx  split       ";
    if (named) {
        for (const auto& n : desc.mu_names()) o << n << "(mu) ";
        for (const auto& n : desc.nu_names()) o << n << "(nu) ";
    } else {
        for (int i = 0; i < mu_dim; ++i) o << "mu" << i << " ";
        for (int i = 0; i < nu_dim; ++i) o << "nu" << i << " ";
    }
    o << "\n";
    char buf[64];
    for (std::size_t i = 0; i < pop.entries.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%-4zu %-11s ", i, split_of(static_cast<int>(i)).c_str());
        o << buf;
        for (double v : pop.entries[i].mu) {
            std::snprintf(buf, sizeof(buf), "%.6g ", v);
            o << buf;
        }
        for (double v : pop.entries[i].nu) {
            std::snprintf(buf, sizeof(buf), "%.6g ", v);
            o << buf;
        }
        o << "\n";
    }
    return o.str();
}

}  // namespace eap
