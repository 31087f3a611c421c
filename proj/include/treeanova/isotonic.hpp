#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "treeanova/errors.hpp"

namespace treeanova {

/// Input of the weighted projection: values (x0..xk, index 0 = root/control)
/// and strictly positive finite weights.
struct WeightedVector {
    std::vector<double> values;
    std::vector<double> weights;
};

/// Weighted least-squares projection onto the tree-order cone
/// {mu : mu_0 <= mu_i, i = 1..k}.
struct TreeProjection {
    std::vector<double> fitted;
    std::vector<std::size_t> pooled_set;  // treatments pooled with the root, ascending
    double objective = 0.0;               // sum_i w_i (values_i - fitted_i)^2
};

/// Minimum Violator Algorithm: repeatedly pool the smallest treatment value
/// that lies below the running root mean (ties broken by lowest index) until
/// no violator remains. O(k log k).
TreeProjection tree_isotonic(const WeightedVector& data);

/// Exhaustive oracle: enumerates every subset of treatments pooled with the
/// root and returns the feasible candidate with minimal objective. Intended
/// for validation only; refuses more than 6 coordinates. A candidate with
/// pooled mean m is feasible when every unpooled value is >= m - tolerance.
TreeProjection brute_force_projection(const WeightedVector& data, double tolerance = 0.0);

namespace detail {

/// Allocation-free core used by the estimation iteration. `fitted` receives
/// the projected vector; `order` is scratch for the value sort, and its first
/// `pooled` entries (the return value) are the treatments pooled with the
/// root. Inputs are assumed validated.
std::size_t tree_project(std::span<const double> values, std::span<const double> weights,
                         std::span<double> fitted, std::vector<std::size_t>& order);

}  // namespace detail

}  // namespace treeanova
