#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fork-join queue asymptotics: Lundberg roots, simulation, limit-law checks"};
    app.require_subcommand(1);

    std::string config_path;
    fjq::cli::Options opt;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::size_t parallelism = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"gamma", "Solve for the Lundberg root and report γ, Λ'(γ), Λ''(γ), ĉ"},
        {"simulate", "Sample a statistic and write <statistic>.csv with a manifest"},
        {"compare", "KS distance of standardized samples against a limit law"},
        {"hetero", "Per-class roots, the dominating class and its limit law"},
        {"verify", "Run the invariant suite"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file")
            ->check(CLI::ExistingFile)
            ->required(std::string(name) != "verify");
        sub->add_option("--out", out_dir, "Output directory for artifacts");
        sub->add_option("--seed", seed, "Master seed (overrides the config)");
        sub->add_option("--parallelism", parallelism, "Worker threads (overrides the config)")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fjq::cli::kConfigError;
    }

    const auto* sub = app.get_subcommands().front();
    opt.out_dir = out_dir;
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--parallelism")) opt.parallelism = parallelism;

    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) {
        try {
            config = fjq::cli::load_config(config_path);
        } catch (const fjq::Error& e) {
            std::cout << nlohmann::json{{"status", "error"}, {"reason", "ConfigError"}, {"message", e.what()}}.dump()
                      << '\n';
            return fjq::cli::kConfigError;
        }
    }
    return fjq::cli::run(sub->get_name(), config, opt, std::cout, std::cerr);
}
