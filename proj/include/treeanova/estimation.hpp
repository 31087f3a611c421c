#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "treeanova/data.hpp"
#include "treeanova/errors.hpp"

namespace treeanova {

/// Stopping rule of the restricted-MLE iterations: stop once successive mean
/// and variance iterates all move at most 10^-tol_exponent.
struct ConvergenceConfig {
    int tol_exponent = 6;  // >= 3
    std::size_t max_iterations = 10000;

    double tolerance() const;
    void validate() const;
};

enum class ParameterSpace { common_mean, tree_order };

/// Serialized names: "null" for the common-mean space, "tree" for the cone.
const char* parameter_space_name(ParameterSpace space);

struct RestrictedMleResult {
    std::vector<double> mu_hat;
    std::vector<double> sigma2_hat;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> loglik_trace;  // one entry per iterate, non-decreasing
    ParameterSpace space = ParameterSpace::common_mean;
};

/// Log-likelihood of heteroscedastic normal groups at (mu, sigma2), dropping
/// the additive constant: sum_i [-n_i/2 * ln(sigma2_i)
/// - n_i * (s_i^2 + (xbar_i - mu_i)^2) / (2 sigma2_i)].
double log_likelihood(const SummaryStats& stats, std::span<const double> mu,
                      std::span<const double> sigma2);

/// MLE of (mu, sigma^2) under the common-mean space: fixed point of
/// mu = sum(w_i xbar_i)/sum(w_i), sigma2_i = s_i^2 + (xbar_i - mu)^2 with
/// w_i = n_i / sigma2_i, started from the grand mean.
RestrictedMleResult mle_null(const SummaryStats& stats, const ConvergenceConfig& cfg = {});
RestrictedMleResult mle_null(const GroupedData& data, const ConvergenceConfig& cfg = {});

/// MLE under the tree-order cone: alternates the weighted tree projection of
/// the group means with the variance update, started from the unrestricted
/// estimates.
RestrictedMleResult mle_tree(const SummaryStats& stats, const ConvergenceConfig& cfg = {});
RestrictedMleResult mle_tree(const GroupedData& data, const ConvergenceConfig& cfg = {});

/// Sufficient condition for uniqueness of the restricted MLE: each group's
/// biased variance must exceed the squared distance from its mean to both the
/// smallest and the largest group mean. Failure is a warning, never an abort.
struct Condition1Report {
    std::vector<bool> group_pass;

    bool all_pass() const;
};

Condition1Report check_condition1(const SummaryStats& stats);

namespace detail {

/// Reusable buffers for the fixed-point iterations; one instance per worker.
struct FitScratch {
    std::vector<double> mu;
    std::vector<double> sigma2;
    std::vector<double> mu_prev;
    std::vector<double> sigma2_prev;
    std::vector<double> weights;
    std::vector<std::size_t> order;
};

struct FitStatus {
    bool converged = false;
    bool degenerate = false;  // some final sigma2_i collapsed to zero
    std::size_t iterations = 0;
};

/// Cores behind mle_null / mle_tree. On return scratch.mu and scratch.sigma2
/// hold the final iterate. When `trace` is non-null a log-likelihood entry is
/// appended per iterate.
FitStatus fit_null(const SummaryStats& stats, const ConvergenceConfig& cfg,
                   FitScratch& scratch, std::vector<double>* trace);
FitStatus fit_tree(const SummaryStats& stats, const ConvergenceConfig& cfg,
                   FitScratch& scratch, std::vector<double>* trace);

/// log of the likelihood-ratio statistic: fits both spaces and returns
/// sum_i n_i/2 * (ln sigma2_tree_i - ln sigma2_null_i). Refits the tree side
/// from the common-mean solution in the rare case the default start converges
/// to a worse point, keeping the ratio <= 1 up to stopping tolerance.
struct LogLrtStatus {
    double log_lambda = 0.0;
    bool ok = false;  // both fits converged, none degenerate
};
LogLrtStatus log_lrt(const SummaryStats& stats, const ConvergenceConfig& cfg,
                     FitScratch& scratch_null, FitScratch& scratch_tree);

}  // namespace detail

}  // namespace treeanova
