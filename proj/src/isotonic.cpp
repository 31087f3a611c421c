#include "treeanova/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace treeanova {

namespace {

void validate(const WeightedVector& data) {
    if (data.values.size() != data.weights.size()) {
        throw ParameterError("values and weights must have equal length");
    }
    if (data.values.size() < 2) {
        throw ParameterError("projection needs a root and at least one treatment");
    }
    for (double v : data.values) {
        if (!std::isfinite(v)) throw ParameterError("values must be finite");
    }
    for (double w : data.weights) {
        if (!(std::isfinite(w) && w > 0.0)) {
            throw ParameterError("weights must be positive and finite");
        }
    }
}

double weighted_objective(std::span<const double> values, std::span<const double> weights,
                          std::span<const double> fitted) {
    double objective = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - fitted[i];
        objective += weights[i] * d * d;
    }
    return objective;
}

}  // namespace

namespace detail {

std::size_t tree_project(std::span<const double> values, std::span<const double> weights,
                         std::span<double> fitted, std::vector<std::size_t>& order) {
    const std::size_t k = values.size() - 1;
    order.resize(k);
    std::iota(order.begin(), order.end(), std::size_t{1});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });

    for (std::size_t i = 1; i <= k; ++i) fitted[i] = values[i];

    double pooled_mean = values[0];
    double pooled_weight = weights[0];
    std::size_t pooled = 0;
    // Values are visited in ascending order and the pooled mean only ever
    // decreases, so the first non-violator ends the scan.
    while (pooled < k && values[order[pooled]] < pooled_mean) {
        const std::size_t i = order[pooled];
        pooled_weight += weights[i];
        pooled_mean += (values[i] - pooled_mean) * weights[i] / pooled_weight;
        ++pooled;
    }
    fitted[0] = pooled_mean;
    for (std::size_t j = 0; j < pooled; ++j) fitted[order[j]] = pooled_mean;
    return pooled;
}

}  // namespace detail

TreeProjection tree_isotonic(const WeightedVector& data) {
    validate(data);
    TreeProjection result;
    result.fitted.resize(data.values.size());
    std::vector<std::size_t> order;
    const std::size_t pooled =
        detail::tree_project(data.values, data.weights, result.fitted, order);

    result.pooled_set.assign(order.begin(), order.begin() + pooled);
    std::sort(result.pooled_set.begin(), result.pooled_set.end());
    result.objective = weighted_objective(data.values, data.weights, result.fitted);
    return result;
}

TreeProjection brute_force_projection(const WeightedVector& data, double tolerance) {
    validate(data);
    if (data.values.size() > 6) {
        throw ParameterError("brute_force_projection is a combinatorial oracle; "
                             "at most 6 coordinates supported");
    }
    const auto& x = data.values;
    const auto& w = data.weights;
    const std::size_t k = x.size() - 1;

    TreeProjection best;
    bool have_best = false;

    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        double weight_sum = w[0];
        double value_sum = w[0] * x[0];
        for (std::size_t i = 1; i <= k; ++i) {
            if (mask & (1u << (i - 1))) {
                weight_sum += w[i];
                value_sum += w[i] * x[i];
            }
        }
        const double pooled_mean = value_sum / weight_sum;

        bool feasible = true;
        for (std::size_t i = 1; i <= k && feasible; ++i) {
            if (!(mask & (1u << (i - 1))) && x[i] < pooled_mean - tolerance) {
                feasible = false;
            }
        }
        if (!feasible) continue;

        std::vector<double> fitted(x.size());
        fitted[0] = pooled_mean;
        for (std::size_t i = 1; i <= k; ++i) {
            fitted[i] = (mask & (1u << (i - 1))) ? pooled_mean : x[i];
        }
        const double objective = weighted_objective(x, w, fitted);
        if (!have_best || objective < best.objective) {
            best.fitted = std::move(fitted);
            best.objective = objective;
            best.pooled_set.clear();
            for (std::size_t i = 1; i <= k; ++i) {
                if (mask & (1u << (i - 1))) best.pooled_set.push_back(i);
            }
            have_best = true;
        }
    }
    return best;
}

}  // namespace treeanova
