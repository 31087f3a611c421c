#pragma once

#include <cstddef>
#include <vector>

#include "treeanova/errors.hpp"

namespace treeanova {

/// Raw observations: groups[0] is the control, groups[1..k] the treatments.
/// Valid data has k >= 1, every group size >= 2, and finite values only.
struct GroupedData {
    std::vector<std::vector<double>> groups;

    std::size_t num_groups() const { return groups.size(); }
    std::size_t num_treatments() const { return groups.empty() ? 0 : groups.size() - 1; }
};

/// Throws DataError if the invariants above do not hold.
void validate(const GroupedData& data);

/// Per-group counts, means, and both variance conventions. biased_var divides
/// by n_i (enters likelihoods), unbiased_var by n_i - 1 (drives bootstrap
/// generation and the standardized differences).
struct SummaryStats {
    std::vector<std::size_t> n;
    std::vector<double> mean;
    std::vector<double> biased_var;
    std::vector<double> unbiased_var;

    std::size_t num_groups() const { return n.size(); }
    std::size_t num_treatments() const { return n.empty() ? 0 : n.size() - 1; }
};

SummaryStats summarize(const GroupedData& data);

}  // namespace treeanova
