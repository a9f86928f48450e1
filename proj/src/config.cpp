#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "qlab/cli.hpp"

namespace qlab {

namespace {

std::vector<double> parse_tau_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw usage_error("tau_list: cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw usage_error("tau_list: empty list");
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// key = value lines; [section] headers and #/; comments are decorative.
// Unknown keys and unparsable values are usage errors naming the key.
void apply_config_file(RunConfig& cfg, std::string& tau_str, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw usage_error("config: cannot open '" + path + "'");
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw usage_error("config: expected 'key = value', got '" + t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        auto as_double = [&](double& out) {
            try {
                out = std::stod(val);
            } catch (const std::exception&) {
                throw usage_error("config: cannot parse value for key '" + key + "'");
            }
        };
        if (key == "grid_n" || key == "grid-n") {
            try {
                cfg.grid_n = std::stoi(val);
            } catch (const std::exception&) {
                throw usage_error("config: cannot parse value for key '" + key + "'");
            }
        } else if (key == "eps") {
            as_double(cfg.eps);
        } else if (key == "tol") {
            as_double(cfg.tol);
        } else if (key == "seed") {
            try {
                cfg.seed = std::stoull(val);
            } catch (const std::exception&) {
                throw usage_error("config: cannot parse value for key '" + key + "'");
            }
        } else if (key == "tau_list" || key == "tau-list") {
            tau_str = val;
        } else if (key == "preset") {
            cfg.preset = val;
        } else if (key == "sigma_csv" || key == "sigma-csv") {
            cfg.sigma_csv = val;
        } else if (key == "q_csv" || key == "q-csv") {
            cfg.q_csv = val;
        } else if (key == "f_csv" || key == "f-csv") {
            cfg.f_csv = val;
        } else if (key == "out" || key == "output_dir" || key == "output-dir") {
            cfg.output_dir = val;
        } else if (key == "kmax" || key == "k_max" || key == "k-max") {
            try {
                cfg.k_max = std::stoi(val);
            } catch (const std::exception&) {
                throw usage_error("config: cannot parse value for key '" + key + "'");
            }
        } else if (key == "linear") {
            cfg.linear_only = (val == "1" || val == "true" || val == "yes");
        } else {
            throw usage_error("config: unknown key '" + key + "'");
        }
    }
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    std::string tau_str = "5,10,20";

    // Pull out --config first so file values become the defaults that
    // command-line flags then override.
    std::string config_path;
    std::vector<std::string> rest;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw usage_error("--config: missing file argument");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!config_path.empty()) apply_config_file(cfg, tau_str, config_path);

    CLI::App app{"qlab: numerical laboratory for the quasilinear inverse source problem"};
    app.add_option("--grid_n,--grid-n", cfg.grid_n, "nodes per side (>= 9, odd preferred)");
    app.add_option("--eps", cfg.eps, "finite-difference step for DN linearizations");
    app.add_option("--tol", cfg.tol, "solver residual target");
    app.add_option("--seed", cfg.seed, "seed for random test fields");
    app.add_option("--tau_list,--tau-list", tau_str, "comma-separated CGO frequencies");
    app.add_option("--preset", cfg.preset, "constant | affine | manufactured");
    app.add_option("--sigma_csv,--sigma-csv", cfg.sigma_csv, "sigma field CSV override");
    app.add_option("--q_csv,--q-csv", cfg.q_csv, "q field CSV override");
    app.add_option("--f_csv,--f-csv", cfg.f_csv, "F field CSV override");
    app.add_option("--out,--output_dir,--output-dir", cfg.output_dir, "output directory");
    app.add_option("--kmax,--k_max,--k-max", cfg.k_max, "boundary Fourier modes");
    app.add_flag("--linear", cfg.linear_only, "gauge-demo: only the linear counterexample");

    for (const char* name : {"forward", "dn", "linearize", "verify", "gauge-demo", "cgo-probe",
                             "recon"}) {
        app.add_subcommand(name)->fallthrough();
    }
    app.require_subcommand(0, 1);

    std::vector<const char*> argv;
    argv.push_back("qlab");
    for (const auto& a : rest) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        throw usage_error(e.what());
    }

    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    cfg.tau_list = parse_tau_list(tau_str);

    if (cfg.grid_n < 9) throw usage_error("grid_n: must be >= 9 (got " + std::to_string(cfg.grid_n) + ")");
    if (!(cfg.eps >= 1e-5 && cfg.eps <= 1e-1)) {
        throw usage_error("eps: outside [1e-5, 1e-1]");
    }
    if (!(cfg.tol > 0.0 && cfg.tol <= 1e-4)) throw usage_error("tol: must lie in (0, 1e-4]");
    if (cfg.k_max < 1) throw usage_error("kmax: must be >= 1");
    for (double t : cfg.tau_list) {
        if (!(t >= 0.0)) throw usage_error("tau_list: frequencies must be >= 0");
    }
    if (!cfg.preset.empty() && cfg.preset != "constant" && cfg.preset != "affine" &&
        cfg.preset != "manufactured") {
        throw usage_error("preset: unknown preset '" + cfg.preset + "'");
    }
    return cfg;
}

CoefficientSet preset_set(const std::string& preset, const GridSpec& g) {
    if (preset == "manufactured") {
        return manufactured_solution(g).first;
    }
    CoefficientSet set;
    set.q = make_real_field(g, [](double, double) { return 1.0; });
    set.f0.assign(g.boundary_count(), 0.0);
    if (preset == "constant") {
        set.sigma = make_real_field(g, [](double, double) { return 2.0; });
        set.F = make_real_field(g, [](double, double) { return -1.0; });
    } else if (preset == "affine") {
        set.sigma = make_real_field(g, [](double x, double) { return 2.0 + x; });
        set.F = make_real_field(g, [](double, double) { return 0.0; });
    } else {
        throw usage_error("preset: unknown preset '" + preset + "'");
    }
    return set;
}

}  // namespace qlab
