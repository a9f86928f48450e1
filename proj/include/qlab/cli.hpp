#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlab/forward.hpp"
#include "qlab/report.hpp"

namespace qlab {

class usage_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    int grid_n = 33;
    double eps = 1e-3;
    double tol = 1e-10;
    std::vector<double> tau_list = {5.0, 10.0, 20.0};
    std::uint64_t seed = 7;
    // constant | affine | manufactured; empty means the command default
    // (affine for cgo-probe/recon, manufactured otherwise)
    std::string preset;
    std::string sigma_csv, q_csv, f_csv;  // optional field overrides
    std::string output_dir = "qlab_out";
    int k_max = 4;
    bool linear_only = false;  // gauge-demo: only the q = 0 counterexample
};

/// Parses argv (subcommand + flags), with values from an optional
/// `--config <file>` of `key = value` lines; flags override the file.
/// Throws usage_error on unknown commands, type mismatches, or values
/// outside the documented ranges.
RunConfig parse_config(const std::vector<std::string>& args);

/// Named analytic presets on the given grid. f0 is the zero trace except
/// for the manufactured preset, which carries its own boundary data.
CoefficientSet preset_set(const std::string& preset, const GridSpec& g);

/// Dispatches to the owning module, writes report.txt and field CSVs
/// into output_dir.
Report run(const RunConfig& cfg);

/// 0 success, 1 verdict failure, 2 usage error.
int run_main(const std::vector<std::string>& args);

}  // namespace qlab
