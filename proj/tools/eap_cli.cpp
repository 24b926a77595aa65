#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eap/eap.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    for (const auto& tok : split_commas(s)) seeds.push_back(std::stoull(tok));
    if (seeds.empty()) throw eap::ConfigError("no seeds given");
    return seeds;
}

void print_train_outcome(const eap::TrainOutcome& out) {
    std::printf("run dir            %s\n", out.run_dir.c_str());
    std::printf("method             %s (seed %llu)\n", out.method.c_str(),
                static_cast<unsigned long long>(out.seed));
    std::printf("total samples      %lld\n", static_cast<long long>(out.total_samples));
    std::printf("  policy samples   %lld\n", static_cast<long long>(out.policy_samples));
    std::printf("  error samples    %lld\n", static_cast<long long>(out.error_samples));
    std::printf("final train return %.3f\n", out.final_train_return);
    std::printf("heldout return     %.3f (normalized %.4f)\n", out.heldout.mean_return,
                out.heldout.mean_normalized);
}

void print_eval_report(const eap::EvalReport& rep) {
    std::printf("task %s  method %s  mode %s  episodes/env %d  population hash %llu\n",
                rep.task.c_str(), rep.method.c_str(), rep.mode.c_str(), rep.n_episodes,
                static_cast<unsigned long long>(rep.population_hash));
    for (const auto& e : rep.per_env)
        std::printf("  env %-3d return %10.3f +- %-8.3f normalized %.4f\n", e.env_index,
                    e.mean_return, e.std_return, e.mean_normalized);
    std::printf("overall return %.3f  normalized %.4f\n", rep.mean_return, rep.mean_normalized);
}

int dispatch(int argc, char** argv) {
    CLI::App app{"error-aware policy training and evaluation"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, set_out_dir;
    std::vector<std::string> overrides;

    auto add_config_opts = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config file");
        if (required) opt->required();
        cmd->add_option("--set", overrides, "override config keys (section.key=value)");
    };

    // train
    auto* train = app.add_subcommand("train", "train a policy and evaluate it zero-shot");
    add_config_opts(train, false);
    train->add_option("--resume", checkpoint_path, "continue from a checkpoint");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpointed policy zero-shot");
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint to evaluate")->required();
    eap::EvalOptions eopt;
    eval->add_option("--population", eopt.population_path, "population file (default: embedded)");
    eval->add_option("--split", eopt.split, "heldout|train|val|all (default heldout)");
    eval->add_option("--episodes", eopt.n_episodes, "episodes per environment");
    eval->add_option("--mode", eopt.mode, "mean|sampled");
    eval->add_option("--out-csv", eopt.out_csv, "write the per-environment report here");
    eval->add_option("--out-svg", eopt.out_svg, "write a per-environment bar plot here");

    // compare
    auto* compare = app.add_subcommand("compare", "train eap and baselines at matched budget");
    add_config_opts(compare, true);
    std::string seeds_str = "1,2,3,4", baselines_str = "dr,up";
    compare->add_option("--seeds", seeds_str, "comma-separated seeds (default 1,2,3,4)");
    compare->add_option("--baselines", baselines_str, "baselines to run (default dr,up)");
    compare->add_option("--out", set_out_dir, "output directory");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "sweep one design axis");
    add_config_opts(ablate, true);
    std::string axis_str = "horizon_T", values_str, ab_seeds_str = "1,2";
    ablate->add_option("--axis", axis_str,
                       "horizon_T|representation|mu_split|reference_choice")->required();
    ablate->add_option("--values", values_str, "comma-separated axis values")->required();
    ablate->add_option("--seeds", ab_seeds_str, "comma-separated seeds (default 1,2)");
    ablate->add_option("--out", set_out_dir, "output directory");

    // inspect-population
    auto* inspect = app.add_subcommand("inspect-population", "print a population table");
    std::string pop_file;
    inspect->add_option("--file", pop_file, "population file to inspect");
    add_config_opts(inspect, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize CLI11's exit codes to the 0/2/3 contract; help stays 0
        return app.exit(e) == 0 ? 0 : 2;
    }

    auto load_cfg = [&]() {
        if (config_path.empty()) throw eap::ConfigError("--config is required here");
        return eap::ExperimentConfig::from_file(config_path, overrides);
    };

    if (train->parsed()) {
        eap::TrainOutcome out;
        if (!checkpoint_path.empty()) {
            if (!config_path.empty() || !overrides.empty())
                throw eap::ConfigError("--resume uses the checkpoint's embedded config; "
                                       "drop --config/--set");
            out = eap::resume_train(checkpoint_path);
        } else {
            out = eap::run_train(load_cfg());
        }
        print_train_outcome(out);
        return 0;
    }

    if (eval->parsed()) {
        print_eval_report(eap::run_eval(checkpoint_path, eopt));
        return 0;
    }

    if (compare->parsed()) {
        eap::ExperimentConfig cfg = load_cfg();
        if (!set_out_dir.empty()) cfg.out_dir = set_out_dir;
        const eap::CompareOutcome out = eap::run_compare(cfg, parse_seeds(seeds_str),
                                                         split_commas(baselines_str));
        std::printf("%s", eap::comparison_csv(out.report).c_str());
        std::printf("artifacts in %s\n", out.out_dir.c_str());
        return 0;
    }

    if (ablate->parsed()) {
        eap::ExperimentConfig cfg = load_cfg();
        if (!set_out_dir.empty()) cfg.out_dir = set_out_dir;
        eap::AblationSpec spec;
        spec.axis = eap::ablation_axis_from_string(axis_str);
        spec.values = split_commas(values_str);
        spec.seeds = parse_seeds(ab_seeds_str);
        const eap::AblationOutcome out = eap::run_ablation_sweep(cfg, spec);
        std::printf("%s", eap::ablation_csv(out.table).c_str());
        std::printf("artifacts in %s\n", out.out_dir.c_str());
        return 0;
    }

    if (inspect->parsed()) {
        if (!pop_file.empty()) {
            const eap::EnvPopulation pop = eap::load_population(pop_file);
            const eap::EnvDescriptor desc = eap::descriptor_for_task(pop.env_name);
            std::printf("%s", eap::describe_population(desc, pop).c_str());
        } else {
            const eap::ExperimentConfig cfg = load_cfg();
            const eap::EnvDescriptor desc = cfg.make_descriptor();
            const eap::EnvPopulation pop = cfg.make_population(desc);
            std::printf("%s", eap::describe_population(desc, pop).c_str());
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const eap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
}
