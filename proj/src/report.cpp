#include "qlab/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qlab {

void Report::prov(const std::string& key, const std::string& value) {
    provenance.emplace_back(key, value);
}

void Report::metric(const std::string& name, double value) { metrics.emplace_back(name, value); }

void Report::pass(const std::string& name) {
    Verdict v;
    v.status = "PASS";
    verdicts.emplace_back(name, v);
}

void Report::fail(const std::string& name, double attained, double threshold,
                  const std::string& note) {
    Verdict v;
    v.status = "FAIL";
    v.attained = attained;
    v.threshold = threshold;
    v.has_values = true;
    v.note = note;
    verdicts.emplace_back(name, v);
}

void Report::indeterminate(const std::string& name, const std::string& note) {
    Verdict v;
    v.status = "INDETERMINATE";
    v.note = note;
    verdicts.emplace_back(name, v);
}

void Report::check_le(const std::string& name, double attained, double threshold) {
    if (attained <= threshold) {
        pass(name);
    } else {
        fail(name, attained, threshold);
    }
}

void Report::check_range(const std::string& name, double value, double lo, double hi) {
    if (value >= lo && value <= hi) {
        pass(name);
    } else {
        fail(name, value, value < lo ? lo : hi, "out of range");
    }
}

bool Report::any_fail() const {
    for (const auto& [name, v] : verdicts)
        if (v.status == "FAIL") return true;
    return false;
}

std::string Report::to_text() const {
    std::ostringstream os;
    char buf[96];
    os << "# qlab report: " << command << "\n\n[provenance]\n";
    for (const auto& [k, v] : provenance) os << k << " = " << v << "\n";
    os << "\n[metrics]\n";
    for (const auto& [k, v] : metrics) {
        std::snprintf(buf, sizeof(buf), "%.16e", v);
        os << k << " = " << buf << "\n";
    }
    os << "\n[verdicts]\n";
    for (const auto& [k, v] : verdicts) {
        os << k << " = " << v.status;
        if (v.has_values) {
            std::snprintf(buf, sizeof(buf), " (attained %.16e, threshold %.16e)", v.attained,
                          v.threshold);
            os << buf;
        }
        if (!v.note.empty()) os << " [" << v.note << "]";
        os << "\n";
    }
    return os.str();
}

void Report::write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("Report::write: cannot open " + path);
    os << to_text();
}

}  // namespace qlab
