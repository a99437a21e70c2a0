#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "floquet/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    long long workers = -1;
    std::string out_dir;
    bool plot = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_plot) {
    cmd->add_option("--config", o.config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    o.seed_opt = cmd->add_option("--seed", o.seed, "override master_seed");
    o.workers_opt =
        cmd->add_option("--workers", o.workers, "override worker count (0 = auto)")
            ->check(CLI::NonNegativeNumber);
    o.out_opt = cmd->add_option("--out", o.out_dir, "override output_dir");
    if (with_plot) cmd->add_flag("--plot", o.plot, "also emit an SVG line chart");
}

floquet::ExperimentConfig load_with_overrides(const CommonOpts& o) {
    floquet::ExperimentConfig cfg = floquet::load_config(o.config_path);
    if (o.seed_opt->count() > 0) cfg.master_seed = o.seed;
    if (o.workers_opt->count() > 0) cfg.workers = static_cast<std::size_t>(o.workers);
    if (o.out_opt->count() > 0) cfg.output_dir = o.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Floquet random-circuit quasi-energy spectral statistics"};
    app.require_subcommand(1);

    CommonOpts sff_opts, r2_opts, validate_opts;
    std::string suite;
    int wg_q = 0, wg_max_p = 0;
    std::string wg_out = ".";

    CLI::App* sff = app.add_subcommand("sff", "ensemble spectral form factor sweep");
    add_common(sff, sff_opts, /*with_plot=*/true);

    CLI::App* r2 = app.add_subcommand("r2", "two-level correlation histogram");
    add_common(r2, r2_opts, /*with_plot=*/true);

    CLI::App* verify = app.add_subcommand("verify", "run a named verification suite");
    verify->add_option("suite", suite, "weingarten | moments | ordering | asymptotics")
        ->required();

    CLI::App* wg = app.add_subcommand("wg-table", "solve and serialize a Weingarten table");
    wg->add_option("--q", wg_q, "unitary group dimension")->required();
    wg->add_option("--max-p", wg_max_p, "highest moment order (<= q)")->required();
    wg->add_option("--out", wg_out, "output directory");

    CLI::App* validate = app.add_subcommand("validate-circuit", "check CircuitSpec invariants");
    validate->add_option("--config", validate_opts.config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sff->parsed()) return floquet::run_sff(load_with_overrides(sff_opts), sff_opts.plot,
                                                   std::cout);
        if (r2->parsed())
            return floquet::run_r2(load_with_overrides(r2_opts), r2_opts.plot, std::cout);
        if (verify->parsed()) return floquet::run_verify(suite, std::cout);
        if (wg->parsed()) return floquet::run_wg_table(wg_q, wg_max_p, wg_out, std::cout);
        if (validate->parsed())
            return floquet::run_validate_circuit(floquet::load_config(validate_opts.config_path),
                                                 std::cout);
    } catch (const floquet::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
