// dickesim — spectral experiments on the Dicke model and its rotating-wave limit

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "dicke/runner.hpp"

namespace {

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::string> variant;
    std::optional<std::string> sector;
    std::optional<std::string> window;
    std::optional<std::string> delta_lambdas;
    std::optional<std::string> lambdas;
    std::optional<std::string> out_dir;
    std::optional<std::string> cache_dir;
    std::optional<double> omega, omega0, lambda0, delta_lambda, j, t_max, fit_t_lo, fit_t_hi;
    std::optional<int> n_max, workers, time_samples;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "key = value config file; flags override");
    cmd->add_option("--omega", o.omega, "field frequency");
    cmd->add_option("--omega0", o.omega0, "atomic level splitting");
    cmd->add_option("--lambda0", o.lambda0, "unperturbed coupling");
    cmd->add_option("--delta-lambda", o.delta_lambda, "perturbation strength");
    cmd->add_option("--delta-lambdas", o.delta_lambdas,
                    "perturbation grid: geom:lo:hi:n, lin:lo:hi:n, or comma list");
    cmd->add_option("--lambdas", o.lambdas, "coupling grid for gamma-vs-lambda");
    cmd->add_option("--variant", o.variant, "model variant: full|rwa")
        ->check(CLI::IsMember({"full", "rwa"}));
    cmd->add_option("--j", o.j, "pseudospin length (half-integer)");
    cmd->add_option("--n-max", o.n_max, "boson cutoff");
    cmd->add_option("--sector", o.sector, "parity sector: odd|even")
        ->check(CLI::IsMember({"odd", "even"}));
    cmd->add_option("--window", o.window, "state window: frac_lo:frac_hi or abs:lo:hi");
    cmd->add_option("--time-samples", o.time_samples, "samples on the time grid");
    cmd->add_option("--t-max", o.t_max, "time grid end (0 = auto from Gamma)");
    cmd->add_option("--fit-t-lo", o.fit_t_lo, "decay fit range start");
    cmd->add_option("--fit-t-hi", o.fit_t_hi, "decay fit range end (0 = auto, until |O| reaches 0.05)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--cache", o.cache_dir, "eigendecomposition cache directory");
    cmd->add_option("--workers", o.workers, "worker threads for sweep points (0 = cores)");
}

void apply_overrides(dicke::ExperimentConfig& cfg, const CliOverrides& o) {
    if (o.variant) cfg.params.variant = dicke::variant_from_string(*o.variant);
    if (o.omega) cfg.params.omega = *o.omega;
    if (o.omega0) cfg.params.omega0 = *o.omega0;
    if (o.lambda0) cfg.params.lambda = *o.lambda0;
    if (o.j) cfg.params.j = *o.j;
    if (o.n_max) cfg.params.n_max = *o.n_max;
    if (o.sector) cfg.sector = (*o.sector == "odd") ? dicke::Parity::Odd : dicke::Parity::Even;
    if (o.window) cfg.window = dicke::parse_window_spec(*o.window);
    if (o.delta_lambda) cfg.delta_lambda = *o.delta_lambda;
    if (o.delta_lambdas) cfg.delta_lambdas = dicke::parse_grid(*o.delta_lambdas);
    if (o.lambdas) cfg.lambdas = dicke::parse_grid(*o.lambdas);
    if (o.time_samples) cfg.time_samples = *o.time_samples;
    if (o.t_max) cfg.t_max = *o.t_max;
    if (o.fit_t_lo) cfg.fit_t_lo = *o.fit_t_lo;
    if (o.fit_t_hi) cfg.fit_t_hi = *o.fit_t_hi;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.cache_dir) cfg.cache_dir = *o.cache_dir;
    if (o.workers) cfg.workers = *o.workers;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dicke-model LDOS, fidelity-amplitude, and level-statistics experiments"};
    app.require_subcommand(1);

    CliOverrides overrides;
    dicke::ExperimentKind kind = dicke::ExperimentKind::Spectrum;
    const std::pair<dicke::ExperimentKind, const char*> kinds[] = {
        {dicke::ExperimentKind::Spectrum, "eigenvalues of one sector with convergence flags"},
        {dicke::ExperimentKind::LevelStats, "unfolded nearest-neighbor spacing statistics"},
        {dicke::ExperimentKind::Ldos, "window-averaged LDOS histogram, mean energy, width"},
        {dicke::ExperimentKind::GammaVsDelta, "LDOS width vs perturbation strength"},
        {dicke::ExperimentKind::GammaVsLambda, "LDOS width vs coupling, full and rwa"},
        {dicke::ExperimentKind::Fidelity, "fidelity-amplitude traces |O(t)|"},
        {dicke::ExperimentKind::Fit, "Gaussian+exponential fit of the |O(t)| decay"},
    };
    for (const auto& [k, description] : kinds) {
        CLI::App* cmd = app.add_subcommand(dicke::to_string(k), description);
        add_common_options(cmd, overrides);
        cmd->callback([&kind, k] { kind = k; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        dicke::ExperimentConfig config;
        config.kind = kind;
        if (overrides.config_path) {
            dicke::apply_config_entries(config,
                                        dicke::read_key_value_file(*overrides.config_path));
            config.kind = kind;  // the subcommand wins over the file's `experiment`
        }
        if (const char* env = std::getenv("DICKESIM_CACHE_DIR"); env && *env) {
            config.cache_dir = env;
        }
        apply_overrides(config, overrides);
        return dicke::run_cli(config);
    } catch (const dicke::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
