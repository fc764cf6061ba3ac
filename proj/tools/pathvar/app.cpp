#include "app.hpp"

#include "config.hpp"
#include "experiments.hpp"

#include "pathvar/parallel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace pathvar::cli {

namespace {

std::size_t threads_from_env() {
    const char* env = std::getenv("PATHVAR_THREADS");
    if (!env || !*env) return 0;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v <= 0) throw ConfigError("PATHVAR_THREADS", "expected a positive integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"Variational calculus on path space: numerical experiments"};
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    auto* out_opt = run->add_option("--output-dir", output_dir, "Override output_dir");
    auto* seed_opt = run->add_option("--seed", seed, "Override seed");
    run->add_option("--threads", threads, "Worker threads (default: PATHVAR_THREADS or 1)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{4096}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const std::size_t env_threads = threads_from_env();
        set_thread_count(threads ? threads : (env_threads ? env_threads : 1));
        Overrides overrides;
        if (*out_opt) overrides.output_dir = output_dir;
        if (*seed_opt) overrides.seed = seed;
        const ExperimentConfig cfg = load_config(config_path, overrides);
        return execute(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "pathvar: error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace pathvar::cli
