#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eap/common.hpp"
#include "eap/env/population.hpp"
#include "eap/errorfn/predictor.hpp"
#include "eap/eval/evaluate.hpp"
#include "eap/ppo/ppo.hpp"
#include "eap/train/baseline_trainer.hpp"
#include "eap/train/eap_trainer.hpp"

namespace eap {

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

// Sectioned key-value text: [section] headers, key = value lines, full-line
// # comments. Keys are addressed as "section.key". Typed getters record
// consumption so unknown keys can be rejected after resolution.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text) {
        KeyValueConfig kv;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw ConfigError("config line " + std::to_string(lineno) + ": empty section");
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": key outside any [section]");
            kv.values_[section + "." + key] = value;
        }
        return kv;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    // Dotted-path override, e.g. "error_fn.T=5".
    void set_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + assignment + "': expected section.key=value");
        const std::string key = detail::trim(assignment.substr(0, eq));
        if (key.find('.') == std::string::npos)
            throw ConfigError("override '" + assignment + "': key must be section.key");
        values_[key] = detail::trim(assignment.substr(eq + 1));
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        char* end = nullptr;
        const double v = std::strtod(it->second.c_str(), &end);
        if (end == it->second.c_str() || *end != '\0')
            throw ConfigError("config " + key + ": not a number: '" + it->second + "'");
        return v;
    }

    std::int64_t get_int(const std::string& key, std::int64_t def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        char* end = nullptr;
        const long long v = std::strtoll(it->second.c_str(), &end, 10);
        if (end == it->second.c_str() || *end != '\0')
            throw ConfigError("config " + key + ": not an integer: '" + it->second + "'");
        return v;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
        if (end == it->second.c_str() || *end != '\0')
            throw ConfigError("config " + key + ": not an unsigned integer: '" + it->second + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config " + key + ": not a boolean: '" + v + "'");
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        std::vector<int> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = detail::trim(tok);
            if (tok.empty()) continue;
            char* end = nullptr;
            const long v = std::strtol(tok.c_str(), &end, 10);
            if (end == tok.c_str() || *end != '\0')
                throw ConfigError("config " + key + ": bad integer list element '" + tok + "'");
            out.push_back(static_cast<int>(v));
        }
        if (out.empty()) throw ConfigError("config " + key + ": empty list");
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> def) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        std::vector<std::string> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = detail::trim(tok);
            if (!tok.empty()) out.push_back(tok);
        }
        return out;
    }

    // Call after all known keys were read; anything left is a typo.
    void reject_unknown_keys() const {
        std::vector<std::string> unknown;
        for (const auto& [k, v] : values_)
            if (consumed_.count(k) == 0) unknown.push_back(k);
        if (!unknown.empty()) {
            std::string msg = "unknown config key(s):";
            for (const auto& k : unknown) msg += " " + k;
            throw ConfigError(msg);
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

// The fully resolved experiment description; serializes with every default
// made explicit so a run directory pins everything.
struct ExperimentConfig {
    // [run]
    std::string task = "cartpole";
    std::string method = "eap";
    std::uint64_t seed = 1;
    std::string out_dir;  // empty: auto under the output root

    // [env]
    int k_train = 10;
    int k_val = 4;
    int k_heldout = 5;
    HeldoutVary heldout_vary = HeldoutVary::Both;
    std::vector<std::string> observable_names;  // empty: task default split
    int reference_index = -1;
    bool perturb_enabled = false;
    double perturb_lo = 0.0;
    double perturb_hi = 0.0;
    int perturb_duration = 0;

    // [net]
    std::vector<int> hidden = {32, 16};

    // [ppo]
    PPOConfig ppo;

    // [error_fn]
    ErrorFnSettings err;

    // [train]
    int iterations = 150;
    std::int64_t pretrain_budget = 300000;
    double pretrain_threshold = 450.0;
    int checkpoint_every = 25;
    std::int64_t budget = 0;  // baselines: total env-step budget

    // [eval]
    int n_episodes = 20;
    EvalMode eval_mode = EvalMode::Mean;
    UpNuMode up_nu = UpNuMode::Midpoint;

    static ExperimentConfig resolve(KeyValueConfig& kv) {
        ExperimentConfig c;
        c.task = kv.get_string("run.task", c.task);
        c.method = kv.get_string("run.method", c.method);
        c.seed = kv.get_u64("run.seed", c.seed);
        c.out_dir = kv.get_string("run.out_dir", c.out_dir);

        c.k_train = static_cast<int>(kv.get_int("env.k_train", c.k_train));
        c.k_val = static_cast<int>(kv.get_int("env.k_val", c.k_val));
        c.k_heldout = static_cast<int>(kv.get_int("env.k_heldout", c.k_heldout));
        c.heldout_vary = heldout_vary_from_string(
            kv.get_string("env.heldout_vary", to_string(c.heldout_vary)));
        c.observable_names = kv.get_string_list("env.observable_names", c.observable_names);
        c.reference_index = static_cast<int>(kv.get_int("env.reference_index", c.reference_index));
        c.perturb_enabled = kv.get_bool("env.perturb_enabled", c.perturb_enabled);
        c.perturb_lo = kv.get_double("env.perturb_lo", c.perturb_lo);
        c.perturb_hi = kv.get_double("env.perturb_hi", c.perturb_hi);
        c.perturb_duration = static_cast<int>(kv.get_int("env.perturb_duration", c.perturb_duration));

        c.hidden = kv.get_int_list("net.hidden", c.hidden);

        c.ppo.gamma = kv.get_double("ppo.gamma", c.ppo.gamma);
        c.ppo.gae_lambda = kv.get_double("ppo.gae_lambda", c.ppo.gae_lambda);
        c.ppo.clip_epsilon = kv.get_double("ppo.clip_epsilon", c.ppo.clip_epsilon);
        c.ppo.policy_lr = kv.get_double("ppo.policy_lr", c.ppo.policy_lr);
        c.ppo.value_lr = kv.get_double("ppo.value_lr", c.ppo.value_lr);
        c.ppo.epochs_per_update =
            static_cast<int>(kv.get_int("ppo.epochs", c.ppo.epochs_per_update));
        c.ppo.minibatch_size = static_cast<int>(kv.get_int("ppo.minibatch", c.ppo.minibatch_size));
        // Task-dependent default: Pendulum swing-up needs a little entropy.
        c.ppo.entropy_coef = kv.get_double("ppo.entropy_coef",
                                           c.task == "pendulum" ? 0.005 : 0.0);
        c.ppo.max_grad_norm = kv.get_double("ppo.max_grad_norm", c.ppo.max_grad_norm);
        c.ppo.rollout_steps_per_update =
            static_cast<int>(kv.get_int("ppo.rollout_steps", c.ppo.rollout_steps_per_update));
        c.ppo.kl_limit = kv.get_double("ppo.kl_limit", c.ppo.kl_limit);

        c.err.T = static_cast<int>(kv.get_int("error_fn.T", c.err.T));
        c.err.repr = error_repr_from_string(
            kv.get_string("error_fn.representation", to_string(c.err.repr)));
        c.err.latent_dim = static_cast<int>(kv.get_int("error_fn.latent_dim", c.err.latent_dim));
        c.err.epochs_per_refresh =
            static_cast<int>(kv.get_int("error_fn.epochs", c.err.epochs_per_refresh));
        c.err.minibatch = static_cast<int>(kv.get_int("error_fn.minibatch", c.err.minibatch));
        c.err.lr = kv.get_double("error_fn.lr", c.err.lr);
        c.err.samples_per_refresh = static_cast<int>(
            kv.get_int("error_fn.samples_per_refresh", c.err.samples_per_refresh));
        c.err.dataset_capacity = static_cast<std::size_t>(
            kv.get_int("error_fn.dataset_capacity", static_cast<std::int64_t>(c.err.dataset_capacity)));

        c.iterations = static_cast<int>(kv.get_int("train.iterations", c.iterations));
        c.pretrain_budget = kv.get_int("train.pretrain_budget", c.pretrain_budget);
        c.pretrain_threshold = kv.get_double(
            "train.pretrain_threshold",
            c.task == "pendulum" ? -300.0 : (c.task == "hopper" ? -40.0 : 450.0));
        c.checkpoint_every = static_cast<int>(kv.get_int("train.checkpoint_every", c.checkpoint_every));
        c.budget = kv.get_int("train.budget", c.budget);

        c.n_episodes = static_cast<int>(kv.get_int("eval.n_episodes", c.n_episodes));
        c.eval_mode = eval_mode_from_string(kv.get_string("eval.mode", to_string(c.eval_mode)));
        c.up_nu = up_nu_mode_from_string(kv.get_string("eval.up_nu", to_string(c.up_nu)));

        kv.reject_unknown_keys();
        c.validate();
        return c;
    }

    static ExperimentConfig from_file(const std::string& path,
                                      const std::vector<std::string>& overrides = {}) {
        KeyValueConfig kv = KeyValueConfig::load(path);
        for (const auto& o : overrides) kv.set_override(o);
        return resolve(kv);
    }

    static ExperimentConfig from_text(const std::string& text,
                                      const std::vector<std::string>& overrides = {}) {
        KeyValueConfig kv = KeyValueConfig::parse(text);
        for (const auto& o : overrides) kv.set_override(o);
        return resolve(kv);
    }

    void validate() const {
        if (method != "eap" && method != "dr" && method != "up")
            throw ConfigError("run.method must be eap, dr, or up");
        (void)descriptor_for_task(task);  // throws on unknown task
        if (k_train < 1 || k_val < 1 || k_heldout < 1)
            throw ConfigError("env population counts must be >= 1");
        if (method != "eap" && budget <= 0)
            throw ConfigError("train.budget is required (positive) for baseline methods");
        if (perturb_enabled && (perturb_hi < perturb_lo || perturb_duration <= 0))
            throw ConfigError("env.perturb settings are inconsistent");
        if (hidden.size() != 2) throw ConfigError("net.hidden must list exactly two sizes");
        if (n_episodes < 1) throw ConfigError("eval.n_episodes must be >= 1");
        ppo.validate();
        err.validate();
    }

    // Builds the task descriptor with the configured split and perturbation.
    EnvDescriptor make_descriptor() const {
        EnvDescriptor d = descriptor_for_task(task);
        if (!observable_names.empty()) d = remap_split(d, observable_names);
        if (perturb_enabled)
            d.perturbation = PerturbationSpec{{perturb_lo, perturb_hi}, perturb_duration};
        d.validate();
        return d;
    }

    EnvPopulation make_population(const EnvDescriptor& desc) const {
        EnvPopulation pop = sample_population(desc, k_train, k_val, k_heldout, seed, heldout_vary);
        if (reference_index >= 0) {
            if (reference_index >= static_cast<int>(pop.entries.size()))
                throw ConfigError("env.reference_index out of range");
            pop.reference_index = reference_index;
        }
        return pop;
    }

    std::string run_name() const { return task + "_" + method + "_seed" + std::to_string(seed); }

    // Every field, defaults included, in stable order.
    std::string serialize() const {
        std::ostringstream o;
        auto d = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        o << "[run]\n";
        o << "task = " << task << "\n";
        o << "method = " << method << "\n";
        o << "seed = " << seed << "\n";
        o << "out_dir = " << out_dir << "\n";
        o << "[env]\n";
        o << "k_train = " << k_train << "\n";
        o << "k_val = " << k_val << "\n";
        o << "k_heldout = " << k_heldout << "\n";
        o << "heldout_vary = " << to_string(heldout_vary) << "\n";
        o << "observable_names = ";
        for (std::size_t i = 0; i < observable_names.size(); ++i)
            o << (i ? "," : "") << observable_names[i];
        o << "\n";
        o << "reference_index = " << reference_index << "\n";
        o << "perturb_enabled = " << (perturb_enabled ? "true" : "false") << "\n";
        o << "perturb_lo = " << d(perturb_lo) << "\n";
        o << "perturb_hi = " << d(perturb_hi) << "\n";
        o << "perturb_duration = " << perturb_duration << "\n";
        o << "[net]\n";
        o << "hidden = " << hidden[0] << "," << hidden[1] << "\n";
        o << "[ppo]\n";
        o << "gamma = " << d(ppo.gamma) << "\n";
        o << "gae_lambda = " << d(ppo.gae_lambda) << "\n";
        o << "clip_epsilon = " << d(ppo.clip_epsilon) << "\n";
        o << "policy_lr = " << d(ppo.policy_lr) << "\n";
        o << "value_lr = " << d(ppo.value_lr) << "\n";
        o << "epochs = " << ppo.epochs_per_update << "\n";
        o << "minibatch = " << ppo.minibatch_size << "\n";
        o << "entropy_coef = " << d(ppo.entropy_coef) << "\n";
        o << "max_grad_norm = " << d(ppo.max_grad_norm) << "\n";
        o << "rollout_steps = " << ppo.rollout_steps_per_update << "\n";
        o << "kl_limit = " << d(ppo.kl_limit) << "\n";
        o << "[error_fn]\n";
        o << "T = " << err.T << "\n";
        o << "representation = " << to_string(err.repr) << "\n";
        o << "latent_dim = " << err.latent_dim << "\n";
        o << "epochs = " << err.epochs_per_refresh << "\n";
        o << "minibatch = " << err.minibatch << "\n";
        o << "lr = " << d(err.lr) << "\n";
        o << "samples_per_refresh = " << err.samples_per_refresh << "\n";
        o << "dataset_capacity = " << err.dataset_capacity << "\n";
        o << "[train]\n";
        o << "iterations = " << iterations << "\n";
        o << "pretrain_budget = " << pretrain_budget << "\n";
        o << "pretrain_threshold = " << d(pretrain_threshold) << "\n";
        o << "checkpoint_every = " << checkpoint_every << "\n";
        o << "budget = " << budget << "\n";
        o << "[eval]\n";
        o << "n_episodes = " << n_episodes << "\n";
        o << "mode = " << to_string(eval_mode) << "\n";
        o << "up_nu = " << to_string(up_nu) << "\n";
        return o.str();
    }
};

}  // namespace eap
