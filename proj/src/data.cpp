#include "treeanova/data.hpp"

#include <cmath>
#include <string>

namespace treeanova {

void validate(const GroupedData& data) {
    if (data.groups.size() < 2) {
        throw DataError("grouped data needs a control and at least one treatment (k >= 1)");
    }
    for (std::size_t i = 0; i < data.groups.size(); ++i) {
        const auto& group = data.groups[i];
        if (group.size() < 2) {
            throw DataError("group " + std::to_string(i) + " has " +
                            std::to_string(group.size()) +
                            " observations; at least 2 required");
        }
        for (double value : group) {
            if (!std::isfinite(value)) {
                throw DataError("group " + std::to_string(i) +
                                " contains a non-finite observation");
            }
        }
    }
}

SummaryStats summarize(const GroupedData& data) {
    validate(data);
    SummaryStats stats;
    const std::size_t groups = data.groups.size();
    stats.n.resize(groups);
    stats.mean.resize(groups);
    stats.biased_var.resize(groups);
    stats.unbiased_var.resize(groups);

    for (std::size_t i = 0; i < groups; ++i) {
        const auto& group = data.groups[i];
        const auto n = group.size();
        double sum = 0.0;
        for (double value : group) sum += value;
        const double mean = sum / static_cast<double>(n);

        double squared_deviation = 0.0;
        for (double value : group) {
            const double d = value - mean;
            squared_deviation += d * d;
        }
        stats.n[i] = n;
        stats.mean[i] = mean;
        stats.biased_var[i] = squared_deviation / static_cast<double>(n);
        stats.unbiased_var[i] = squared_deviation / static_cast<double>(n - 1);
    }
    return stats;
}

}  // namespace treeanova
