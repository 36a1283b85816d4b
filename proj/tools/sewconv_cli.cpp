#include "sewconv/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace ex = sewconv::experiment;

int main(int argc, char** argv) {
    CLI::App app{"Sewing-map convolution integrals and mild solutions of Young evolution equations"};
    app.set_version_flag("--version", std::string(sewconv::kVersion));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "PRNG seed");
    app.add_option("--set", overrides, "override a config key, e.g. --set path.eta=0.8")->take_all();
    bool print_config = false;
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    auto* identities = app.add_subcommand("identities", "simplex increment identity suite");
    auto* integral = app.add_subcommand("integral", "convolution integrals with level histories");
    auto* rates = app.add_subcommand("rates", "fitted exponents against their predicted values");
    auto* solve = app.add_subcommand("solve", "mild solution trajectory, Y-norm and a-priori constants");
    auto* paths = app.add_subcommand("paths", "driver utilities");
    auto* paths_export = paths->add_subcommand("export", "write the configured driver as CSV");
    paths->require_subcommand(1);
    for (auto* sub : {identities, integral, rates, solve, paths, paths_export}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ex::kConfigError;
    }

    ex::json cfg;
    try {
        std::optional<ex::json> doc;
        if (!config_path.empty()) doc = ex::load_config_file(config_path);
        cfg = ex::resolve_config(doc, overrides, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt,
                                 out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir));
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return ex::kConfigError;
    }
    if (print_config) {
        std::cout << cfg.dump(2) << '\n';
        return 0;
    }

    std::string command;
    if (*identities) command = "identities";
    else if (*integral) command = "integral";
    else if (*rates) command = "rates";
    else if (*solve) command = "solve";
    else if (*paths_export) command = "paths export";
    return ex::run(command, cfg, std::cout, std::cerr);
}
