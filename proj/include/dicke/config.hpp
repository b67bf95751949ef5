// config.hpp — experiment configuration: flat key = value files plus CLI overrides

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dicke/hamiltonian.hpp"

namespace dicke {

enum class ExperimentKind {
    Spectrum,
    LevelStats,
    Ldos,
    GammaVsDelta,
    GammaVsLambda,
    Fidelity,
    Fit,
};

const char* to_string(ExperimentKind k);
ExperimentKind kind_from_string(const std::string& s);

// State window: either a fraction of the converged level count or absolute
// eigenstate indices.  Text forms "0.4:0.6" and "abs:400:600".
struct WindowSpec {
    enum class Mode { Fraction, Absolute } mode = Mode::Fraction;
    double lo = 0.4;
    double hi = 0.6;

    std::string str() const;
};
WindowSpec parse_window_spec(const std::string& text);

// Grids accept "geom:lo:hi:count", "lin:lo:hi:count", or a comma list.
std::vector<double> parse_grid(const std::string& text);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Spectrum;
    ModelParams params;                 // params.lambda is λ₀
    Parity sector = Parity::Odd;
    WindowSpec window;
    double delta_lambda = 0.0;          // single perturbation (ldos, fit, gamma-vs-lambda)
    std::vector<double> delta_lambdas;  // perturbation grid (gamma-vs-delta, fidelity)
    std::vector<double> lambdas;        // coupling grid (gamma-vs-lambda)
    int time_samples = 600;
    double t_max = 0.0;                 // 0 → 20/Γ
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;              // 0 → where |O| first reaches 0.05
    double ldos_bin_width = 0.0;        // 0 → span/200
    double discard_frac = 0.1;
    int poly_degree = 6;
    double convergence_tol = 1e-8;
    int probe_increment = 0;            // 0 → max(10, n_max/10)
    std::size_t profile_margin = 0;     // 0 → half the window size
    std::filesystem::path out_dir = "out";
    std::filesystem::path cache_dir;    // empty → in-memory only
    int workers = 0;                    // 0 → hardware concurrency

    void validate() const;  // throws ConfigError
};

// Key = value lines, '#' comments, blank lines ignored.
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

// Applies file keys onto a config; unknown keys are errors.
void apply_config_entries(ExperimentConfig& config,
                          const std::map<std::string, std::string>& entries);

// Echo of every effective setting, for the run manifest.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& config);

} // namespace dicke
