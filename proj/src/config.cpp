#include "dicke/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dicke/csv.hpp"

namespace dicke {

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::LevelStats: return "level-stats";
        case ExperimentKind::Ldos: return "ldos";
        case ExperimentKind::GammaVsDelta: return "gamma-vs-delta";
        case ExperimentKind::GammaVsLambda: return "gamma-vs-lambda";
        case ExperimentKind::Fidelity: return "fidelity";
        case ExperimentKind::Fit: return "fit";
    }
    return "?";
}

ExperimentKind kind_from_string(const std::string& s) {
    for (const auto k : {ExperimentKind::Spectrum, ExperimentKind::LevelStats, ExperimentKind::Ldos,
                         ExperimentKind::GammaVsDelta, ExperimentKind::GammaVsLambda,
                         ExperimentKind::Fidelity, ExperimentKind::Fit}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string WindowSpec::str() const {
    std::ostringstream os;
    if (mode == Mode::Absolute) {
        os << "abs:" << static_cast<long long>(lo) << ':' << static_cast<long long>(hi);
    } else {
        os << lo << ':' << hi;
    }
    return os.str();
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
    if (used != s.size()) throw ConfigError("trailing junk in " + what + ": '" + s + "'");
    return v;
}

int to_int(const std::string& s, const std::string& what) {
    const double v = to_double(s, what);
    if (v != std::floor(v)) throw ConfigError(what + " must be an integer, got '" + s + "'");
    return static_cast<int>(v);
}

} // namespace

WindowSpec parse_window_spec(const std::string& text) {
    WindowSpec w;
    std::string body = text;
    if (body.rfind("abs:", 0) == 0) {
        w.mode = WindowSpec::Mode::Absolute;
        body = body.substr(4);
    } else {
        w.mode = WindowSpec::Mode::Fraction;
    }
    const auto parts = split(body, ':');
    if (parts.size() != 2) {
        throw ConfigError("window spec must be '<frac_lo>:<frac_hi>' or 'abs:<lo>:<hi>', got '" +
                          text + "'");
    }
    w.lo = to_double(parts[0], "window low edge");
    w.hi = to_double(parts[1], "window high edge");
    if (!(w.hi > w.lo)) throw ConfigError("window must have positive extent");
    if (w.mode == WindowSpec::Mode::Fraction && (w.lo < 0.0 || w.hi > 1.0)) {
        throw ConfigError("fractional window must lie within [0, 1]");
    }
    if (w.mode == WindowSpec::Mode::Absolute && (w.lo < 0.0 || w.lo != std::floor(w.lo) ||
                                                 w.hi != std::floor(w.hi))) {
        throw ConfigError("absolute window bounds must be non-negative integers");
    }
    return w;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.rfind("geom:", 0) == 0 || text.rfind("lin:", 0) == 0) {
        const bool geometric = text[0] == 'g';
        const auto parts = split(text.substr(geometric ? 5 : 4), ':');
        if (parts.size() != 3) throw ConfigError("grid spec needs lo:hi:count, got '" + text + "'");
        const double lo = to_double(parts[0], "grid low");
        const double hi = to_double(parts[1], "grid high");
        const int count = to_int(parts[2], "grid count");
        if (count < 1 || !(hi > lo)) throw ConfigError("grid must be increasing and non-empty");
        if (geometric && !(lo > 0.0)) throw ConfigError("geometric grid needs positive bounds");
        grid.reserve(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) {
            const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
            grid.push_back(geometric ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
        }
        return grid;
    }
    for (const auto& cell : split(text, ',')) grid.push_back(to_double(cell, "grid value"));
    if (grid.empty()) throw ConfigError("empty grid");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw ConfigError("grid values must increase");
    }
    return grid;
}

void ExperimentConfig::validate() const {
    params.validate();
    if (delta_lambda < 0.0) throw ConfigError("delta_lambda must be non-negative");
    if (time_samples < 2) throw ConfigError("time_samples must be at least 2");
    if (t_max < 0.0) throw ConfigError("t_max must be non-negative");
    if (!(discard_frac >= 0.0 && discard_frac < 0.5)) {
        throw ConfigError("discard_frac must lie in [0, 0.5)");
    }
    if (poly_degree < 1) throw ConfigError("poly_degree must be at least 1");
    if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be positive");
    if (probe_increment < 0) throw ConfigError("probe_increment must be non-negative");
    if (workers < 0) throw ConfigError("workers must be non-negative");

    switch (kind) {
        case ExperimentKind::GammaVsDelta:
        case ExperimentKind::Fidelity:
            if (delta_lambdas.empty() && delta_lambda == 0.0 && kind == ExperimentKind::Fidelity) {
                break;  // δλ = 0 trace is legal
            }
            if (delta_lambdas.empty() && delta_lambda == 0.0) {
                throw ConfigError("gamma-vs-delta needs a delta_lambdas grid");
            }
            break;
        case ExperimentKind::GammaVsLambda:
            if (lambdas.empty()) throw ConfigError("gamma-vs-lambda needs a lambdas grid");
            if (!(delta_lambda > 0.0)) {
                throw ConfigError("gamma-vs-lambda needs a positive delta_lambda");
            }
            break;
        default:
            break;
    }
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::map<std::string, std::string> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
        }
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key on config line " + std::to_string(lineno));
        entries[key] = value;
    }
    return entries;
}

void apply_config_entries(ExperimentConfig& c, const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "experiment") c.kind = kind_from_string(value);
        else if (key == "variant") c.params.variant = variant_from_string(value);
        else if (key == "omega") c.params.omega = to_double(value, key);
        else if (key == "omega0") c.params.omega0 = to_double(value, key);
        else if (key == "lambda0") c.params.lambda = to_double(value, key);
        else if (key == "j") c.params.j = to_double(value, key);
        else if (key == "n_max") c.params.n_max = to_int(value, key);
        else if (key == "sector") {
            if (value == "odd") c.sector = Parity::Odd;
            else if (value == "even") c.sector = Parity::Even;
            else throw ConfigError("sector must be odd|even");
        }
        else if (key == "window") c.window = parse_window_spec(value);
        else if (key == "delta_lambda") c.delta_lambda = to_double(value, key);
        else if (key == "delta_lambdas") c.delta_lambdas = parse_grid(value);
        else if (key == "lambdas") c.lambdas = parse_grid(value);
        else if (key == "time_samples") c.time_samples = to_int(value, key);
        else if (key == "t_max") c.t_max = to_double(value, key);
        else if (key == "fit_t_lo") c.fit_t_lo = to_double(value, key);
        else if (key == "fit_t_hi") c.fit_t_hi = to_double(value, key);
        else if (key == "ldos_bin_width") c.ldos_bin_width = to_double(value, key);
        else if (key == "discard_frac") c.discard_frac = to_double(value, key);
        else if (key == "poly_degree") c.poly_degree = to_int(value, key);
        else if (key == "convergence_tol") c.convergence_tol = to_double(value, key);
        else if (key == "probe_increment") c.probe_increment = to_int(value, key);
        else if (key == "profile_margin") c.profile_margin = static_cast<std::size_t>(to_int(value, key));
        else if (key == "out_dir") c.out_dir = value;
        else if (key == "cache_dir") c.cache_dir = value;
        else if (key == "workers") c.workers = to_int(value, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
    const auto fmt = csv::format_double;
    std::vector<std::pair<std::string, std::string>> echo;
    echo.emplace_back("experiment", to_string(c.kind));
    echo.emplace_back("variant", to_string(c.params.variant));
    echo.emplace_back("omega", fmt(c.params.omega));
    echo.emplace_back("omega0", fmt(c.params.omega0));
    echo.emplace_back("lambda0", fmt(c.params.lambda));
    echo.emplace_back("j", fmt(c.params.j));
    echo.emplace_back("n_max", std::to_string(c.params.n_max));
    echo.emplace_back("sector", to_string(c.sector));
    echo.emplace_back("window", c.window.str());
    echo.emplace_back("delta_lambda", fmt(c.delta_lambda));
    const auto grid_str = [&fmt](const std::vector<double>& grid) {
        std::string s;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (k) s += ',';
            s += fmt(grid[k]);
        }
        return s;
    };
    echo.emplace_back("delta_lambdas", grid_str(c.delta_lambdas));
    echo.emplace_back("lambdas", grid_str(c.lambdas));
    echo.emplace_back("time_samples", std::to_string(c.time_samples));
    echo.emplace_back("t_max", fmt(c.t_max));
    echo.emplace_back("fit_t_lo", fmt(c.fit_t_lo));
    echo.emplace_back("fit_t_hi", fmt(c.fit_t_hi));
    echo.emplace_back("ldos_bin_width", fmt(c.ldos_bin_width));
    echo.emplace_back("discard_frac", fmt(c.discard_frac));
    echo.emplace_back("poly_degree", std::to_string(c.poly_degree));
    echo.emplace_back("convergence_tol", fmt(c.convergence_tol));
    echo.emplace_back("probe_increment", std::to_string(c.probe_increment));
    echo.emplace_back("profile_margin", std::to_string(c.profile_margin));
    echo.emplace_back("out_dir", c.out_dir.string());
    echo.emplace_back("cache_dir", c.cache_dir.string());
    echo.emplace_back("workers", std::to_string(c.workers));
    return echo;
}

} // namespace dicke
