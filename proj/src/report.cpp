#include "khess/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace khess {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool ConditionReport::all_passed() const {
    return std::all_of(items.begin(), items.end(), [](const ConditionItem& i) { return i.passed; });
}

const ConditionItem* ConditionReport::find(const std::string& name) const {
    for (const auto& i : items) {
        if (i.name == name) return &i;
    }
    return nullptr;
}

std::string ConditionReport::to_text() const {
    std::size_t width = 4;
    for (const auto& i : items) width = std::max(width, i.name.size());
    std::ostringstream os;
    os << "# " << subject << "\n";
    for (const auto& i : items) {
        os << i.name << std::string(width - i.name.size() + 2, ' ') << (i.passed ? "PASS" : "FAIL")
           << "  checked=" << i.checked << "  failures=" << i.failures
           << "  worst_slack=" << format_real(i.worst_slack);
        if (!i.witness.empty()) os << "  witness=" << i.witness;
        os << "\n";
    }
    return os.str();
}

}  // namespace khess
