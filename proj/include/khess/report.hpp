#pragma once

#include <string>
#include <vector>

namespace khess {

/// One checked condition: how many cases were examined, how many failed, the
/// worst slack seen (negative means violated) and a witness for the worst case.
struct ConditionItem {
    std::string name;
    bool passed = true;
    long checked = 0;
    long failures = 0;
    double worst_slack = 0.0;
    std::string witness;
};

struct ConditionReport {
    std::string subject;
    std::vector<ConditionItem> items;

    bool all_passed() const;
    const ConditionItem* find(const std::string& name) const;
    /// Aligned text table, one row per item.
    std::string to_text() const;
};

/// Formats a double with 17 significant digits, the round-trip representation
/// used in every emitted table.
std::string format_real(double v);

}  // namespace khess
