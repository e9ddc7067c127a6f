// Command-line front end: simulate, fit, interval, coverage.

#include "splicebs/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void add_common(CLI::App* sub, splicebs::cli::RunConfig& cfg) {
    sub->add_option("--output", cfg.output, "Output file (coverage: path prefix for .json/.csv)");
    sub->add_option("--seed", cfg.seed, "Master seed");
    sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "json | csv | table");
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    using splicebs::cli::RunConfig;
    RunConfig cfg;
    CLI::App app{"Splice bootstrap prediction intervals for AR and SETAR series"};
    app.set_version_flag("--version", std::string(splicebs::version));
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Simulate a series from a preset or model");
    add_common(simulate, cfg);
    simulate->add_option("--preset", cfg.preset, "ar1-normal, setar-exp, ...");
    simulate->add_option("--model", cfg.model, "Model JSON (inline or file) with coefficients");
    simulate->add_option("--noise", cfg.noise, "normal | exp | mixture");
    simulate->add_option("--n", cfg.n, "Series length");

    auto* fit = app.add_subcommand("fit", "Fit an AR or SETAR model to a CSV series");
    add_common(fit, cfg);
    fit->add_option("--input", cfg.input, "Single-column CSV series")->required();
    fit->add_option("--model", cfg.model, "Model config JSON (inline or file)");

    auto* interval = app.add_subcommand("interval", "Prediction intervals for a CSV series");
    add_common(interval, cfg);
    interval->add_option("--input", cfg.input, "Single-column CSV series")->required();
    interval->add_option("--model", cfg.model, "Model config JSON (inline or file)");
    interval->add_option("--method", cfg.method, "sb | backcast | ck");
    interval->add_option("--b", cfg.replicates, "Bootstrap replicates B");
    interval->add_option("--k", cfg.horizon, "Horizon K");
    interval->add_option("--beta", cfg.beta, "Nominal level");

    auto* coverage = app.add_subcommand("coverage", "Monte Carlo conditional coverage study");
    add_common(coverage, cfg);
    coverage->add_option("--preset", cfg.preset, "Preset name, e.g. ar1_normal_100");
    coverage->add_flag("--grid", cfg.grid, "Run all 18 replication presets");
    coverage->add_option("--presets-dir", cfg.presets_dir, "Directory holding preset JSON files");
    coverage->add_option("--method", cfg.method, "sb | backcast | rigged");
    coverage->add_option("--b", cfg.replicates, "Bootstrap replicates B");
    coverage->add_option("--k", cfg.horizon, "Horizon K");
    coverage->add_option("--beta", cfg.beta, "Nominal level");
    coverage->add_option("--reps", cfg.reps, "Replications");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : splicebs::cli::exit_config;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "coverage" && !coverage->count("--presets-dir")) {
#ifdef SPLICEBS_PRESETS_DIR
        if (!std::filesystem::exists(cfg.presets_dir)) cfg.presets_dir = SPLICEBS_PRESETS_DIR;
#endif
    }

    const auto out = splicebs::cli::run(cfg);
    for (const auto& [path, text] : out.files) {
        if (!write_file(path, text)) {
            std::cerr << "error: cannot write '" << path << "'\n";
            return splicebs::cli::exit_config;
        }
    }
    if (!out.text.empty()) {
        if (cfg.output && out.files.empty()) {
            if (!write_file(*cfg.output, out.text)) {
                std::cerr << "error: cannot write '" << *cfg.output << "'\n";
                return splicebs::cli::exit_config;
            }
        } else if (out.files.empty()) {
            std::cout << out.text;
        }
    }
    if (out.status != 0) std::cerr << "error: " << out.error << '\n';
    return out.status;
}
