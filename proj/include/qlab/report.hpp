#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qlab {

/// Structured text report: named scalar metrics (17 significant digits),
/// PASS/FAIL/INDETERMINATE verdicts, and a config echo. Every FAIL
/// carries the violated threshold and the attained value.
struct Report {
    struct Verdict {
        std::string status;
        double attained = 0.0;
        double threshold = 0.0;
        bool has_values = false;
        std::string note;
    };

    std::string command;
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::pair<std::string, Verdict>> verdicts;

    void prov(const std::string& key, const std::string& value);
    void metric(const std::string& name, double value);
    void pass(const std::string& name);
    void fail(const std::string& name, double attained, double threshold,
              const std::string& note = "");
    void indeterminate(const std::string& name, const std::string& note = "");
    /// pass/fail on `attained <= threshold`.
    void check_le(const std::string& name, double attained, double threshold);
    /// pass/fail on `lo <= value <= hi`.
    void check_range(const std::string& name, double value, double lo, double hi);

    bool any_fail() const;
    std::string to_text() const;
    void write(const std::string& path) const;
};

}  // namespace qlab
