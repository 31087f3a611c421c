#include "treeanova/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treeanova/isotonic.hpp"

namespace treeanova {

namespace {

// Keeps weights finite while a variance iterate sits at zero; degenerate
// likelihoods are detected on the final iterate instead.
constexpr double kVarianceFloor = 1e-300;

double floored(double sigma2) { return std::max(sigma2, kVarianceFloor); }

double group_term(double n, double biased_var, double mean_diff, double sigma2) {
    const double s2 = floored(sigma2);
    return -0.5 * n * std::log(s2) -
           0.5 * n * (biased_var + mean_diff * mean_diff) / s2;
}

void validate_stats(const SummaryStats& stats) {
    if (stats.num_groups() < 2) {
        throw DataError("summary statistics need a control and at least one treatment");
    }
}

}  // namespace

double ConvergenceConfig::tolerance() const { return std::pow(10.0, -tol_exponent); }

void ConvergenceConfig::validate() const {
    if (tol_exponent < 3) {
        throw ConfigError("convergence tol_exponent must be >= 3");
    }
    if (max_iterations < 1) {
        throw ConfigError("max_iterations must be >= 1");
    }
}

const char* parameter_space_name(ParameterSpace space) {
    return space == ParameterSpace::common_mean ? "null" : "tree";
}

double log_likelihood(const SummaryStats& stats, std::span<const double> mu,
                      std::span<const double> sigma2) {
    double total = 0.0;
    for (std::size_t i = 0; i < stats.num_groups(); ++i) {
        total += group_term(static_cast<double>(stats.n[i]), stats.biased_var[i],
                            stats.mean[i] - mu[i], sigma2[i]);
    }
    return total;
}

bool Condition1Report::all_pass() const {
    return std::all_of(group_pass.begin(), group_pass.end(), [](bool b) { return b; });
}

Condition1Report check_condition1(const SummaryStats& stats) {
    validate_stats(stats);
    const auto [lo, hi] = std::minmax_element(stats.mean.begin(), stats.mean.end());
    const double a = *lo;
    const double b = *hi;
    Condition1Report report;
    report.group_pass.reserve(stats.num_groups());
    for (std::size_t i = 0; i < stats.num_groups(); ++i) {
        const double da = stats.mean[i] - a;
        const double db = stats.mean[i] - b;
        report.group_pass.push_back(stats.biased_var[i] > std::max(da * da, db * db));
    }
    return report;
}

namespace detail {

namespace {

void resize_scratch(FitScratch& scratch, std::size_t groups) {
    scratch.mu.resize(groups);
    scratch.sigma2.resize(groups);
    scratch.mu_prev.resize(groups);
    scratch.sigma2_prev.resize(groups);
    scratch.weights.resize(groups);
}

bool any_degenerate(const std::vector<double>& sigma2) {
    return std::any_of(sigma2.begin(), sigma2.end(), [](double v) { return v <= 0.0; });
}

double common_mean_loglik(const SummaryStats& stats, double mu,
                          const std::vector<double>& sigma2) {
    double total = 0.0;
    for (std::size_t i = 0; i < stats.num_groups(); ++i) {
        total += group_term(static_cast<double>(stats.n[i]), stats.biased_var[i],
                            stats.mean[i] - mu, sigma2[i]);
    }
    return total;
}

}  // namespace

FitStatus fit_null(const SummaryStats& stats, const ConvergenceConfig& cfg,
                   FitScratch& scratch, std::vector<double>* trace) {
    const std::size_t groups = stats.num_groups();
    resize_scratch(scratch, groups);
    const double tol = cfg.tolerance();

    double total_n = 0.0;
    double grand_sum = 0.0;
    for (std::size_t i = 0; i < groups; ++i) {
        total_n += static_cast<double>(stats.n[i]);
        grand_sum += static_cast<double>(stats.n[i]) * stats.mean[i];
    }
    double mu = grand_sum / total_n;
    for (std::size_t i = 0; i < groups; ++i) {
        const double d = stats.mean[i] - mu;
        scratch.sigma2_prev[i] = stats.biased_var[i] + d * d;
    }

    FitStatus status;
    for (std::size_t m = 1; m <= cfg.max_iterations; ++m) {
        if (any_degenerate(scratch.sigma2_prev)) {
            // a zero variance iterate pins the mean on a constant group;
            // the likelihood is unbounded there
            scratch.sigma2 = scratch.sigma2_prev;
            status.degenerate = true;
            std::fill(scratch.mu.begin(), scratch.mu.end(), mu);
            return status;
        }
        double weight_sum = 0.0;
        double weighted_mean_sum = 0.0;
        for (std::size_t i = 0; i < groups; ++i) {
            const double w = static_cast<double>(stats.n[i]) / floored(scratch.sigma2_prev[i]);
            weight_sum += w;
            weighted_mean_sum += w * stats.mean[i];
        }
        const double mu_new = weighted_mean_sum / weight_sum;

        double delta_sigma = 0.0;
        for (std::size_t i = 0; i < groups; ++i) {
            const double d = stats.mean[i] - mu_new;
            scratch.sigma2[i] = stats.biased_var[i] + d * d;
            delta_sigma = std::max(delta_sigma,
                                   std::abs(scratch.sigma2[i] - scratch.sigma2_prev[i]));
        }
        const double delta_mu = std::abs(mu_new - mu);

        if (trace) trace->push_back(common_mean_loglik(stats, mu_new, scratch.sigma2));

        mu = mu_new;
        scratch.sigma2_prev = scratch.sigma2;
        status.iterations = m;
        if (delta_mu <= tol && delta_sigma <= tol) {
            status.converged = true;
            break;
        }
    }

    std::fill(scratch.mu.begin(), scratch.mu.end(), mu);
    status.degenerate = any_degenerate(scratch.sigma2);
    return status;
}

namespace {

FitStatus fit_tree_impl(const SummaryStats& stats, const ConvergenceConfig& cfg,
                        FitScratch& scratch, std::vector<double>* trace,
                        const std::vector<double>* init_mu,
                        const std::vector<double>* init_sigma2) {
    const std::size_t groups = stats.num_groups();
    resize_scratch(scratch, groups);
    const double tol = cfg.tolerance();

    if (init_mu) {
        scratch.mu_prev = *init_mu;
        scratch.sigma2_prev = *init_sigma2;
    } else {
        std::copy(stats.mean.begin(), stats.mean.end(), scratch.mu_prev.begin());
        std::copy(stats.biased_var.begin(), stats.biased_var.end(),
                  scratch.sigma2_prev.begin());
    }

    FitStatus status;
    for (std::size_t m = 1; m <= cfg.max_iterations; ++m) {
        if (any_degenerate(scratch.sigma2_prev)) {
            scratch.mu = scratch.mu_prev;
            scratch.sigma2 = scratch.sigma2_prev;
            status.degenerate = true;
            return status;
        }
        for (std::size_t i = 0; i < groups; ++i) {
            scratch.weights[i] =
                static_cast<double>(stats.n[i]) / floored(scratch.sigma2_prev[i]);
        }
        tree_project(stats.mean, scratch.weights, scratch.mu, scratch.order);

        double delta_mu = 0.0;
        double delta_sigma = 0.0;
        for (std::size_t i = 0; i < groups; ++i) {
            const double d = stats.mean[i] - scratch.mu[i];
            scratch.sigma2[i] = stats.biased_var[i] + d * d;
            delta_mu = std::max(delta_mu, std::abs(scratch.mu[i] - scratch.mu_prev[i]));
            delta_sigma = std::max(delta_sigma,
                                   std::abs(scratch.sigma2[i] - scratch.sigma2_prev[i]));
        }

        if (trace) trace->push_back(log_likelihood(stats, scratch.mu, scratch.sigma2));

        scratch.mu_prev = scratch.mu;
        scratch.sigma2_prev = scratch.sigma2;
        status.iterations = m;
        if (delta_mu <= tol && delta_sigma <= tol) {
            status.converged = true;
            break;
        }
    }

    status.degenerate = any_degenerate(scratch.sigma2);
    return status;
}

}  // namespace

FitStatus fit_tree(const SummaryStats& stats, const ConvergenceConfig& cfg,
                   FitScratch& scratch, std::vector<double>* trace) {
    return fit_tree_impl(stats, cfg, scratch, trace, nullptr, nullptr);
}

LogLrtStatus log_lrt(const SummaryStats& stats, const ConvergenceConfig& cfg,
                     FitScratch& scratch_null, FitScratch& scratch_tree) {
    const FitStatus null_status = fit_null(stats, cfg, scratch_null, nullptr);
    FitStatus tree_status = fit_tree(stats, cfg, scratch_tree, nullptr);

    const auto log_ratio = [&]() {
        double total = 0.0;
        for (std::size_t i = 0; i < stats.num_groups(); ++i) {
            total += 0.5 * static_cast<double>(stats.n[i]) *
                     (std::log(floored(scratch_tree.sigma2[i])) -
                      std::log(floored(scratch_null.sigma2[i])));
        }
        return total;
    };

    LogLrtStatus result;
    result.log_lambda = log_ratio();

    // The tree iteration can occasionally settle on a stationary point below
    // the common-mean optimum (the cone contains it). Restarting from that
    // optimum only ascends, restoring lambda <= 1.
    if (result.log_lambda > 0.0 && null_status.converged && !null_status.degenerate) {
        FitStatus restart = fit_tree_impl(stats, cfg, scratch_tree, nullptr,
                                          &scratch_null.mu, &scratch_null.sigma2);
        const double restarted = log_ratio();
        if (restarted < result.log_lambda) {
            result.log_lambda = restarted;
            tree_status = restart;
        }
    }

    result.ok = null_status.converged && tree_status.converged &&
                !null_status.degenerate && !tree_status.degenerate;
    return result;
}

}  // namespace detail

namespace {

RestrictedMleResult finish_fit(const SummaryStats& stats, const ConvergenceConfig& cfg,
                               ParameterSpace space) {
    detail::FitScratch scratch;
    std::vector<double> trace;
    const detail::FitStatus status =
        space == ParameterSpace::common_mean
            ? detail::fit_null(stats, cfg, scratch, &trace)
            : detail::fit_tree(stats, cfg, scratch, &trace);

    if (status.degenerate) {
        throw DegenerateLikelihoodError(
            "zero within-group variance about the fitted mean; likelihood unbounded");
    }
    if (!status.converged) {
        std::string message = std::string(parameter_space_name(space)) +
                              "-space MLE did not converge within " +
                              std::to_string(cfg.max_iterations) + " iterations";
        const Condition1Report condition = check_condition1(stats);
        if (!condition.all_pass()) {
            message += "; Condition 1 fails for group(s)";
            for (std::size_t i = 0; i < condition.group_pass.size(); ++i) {
                if (!condition.group_pass[i]) message += " " + std::to_string(i);
            }
            message += ", so convergence is not guaranteed";
        }
        throw ConvergenceError(message, std::move(trace));
    }

    RestrictedMleResult result;
    result.mu_hat = std::move(scratch.mu);
    result.sigma2_hat = std::move(scratch.sigma2);
    result.iterations = status.iterations;
    result.converged = true;
    result.loglik_trace = std::move(trace);
    result.space = space;
    return result;
}

}  // namespace

RestrictedMleResult mle_null(const SummaryStats& stats, const ConvergenceConfig& cfg) {
    validate_stats(stats);
    cfg.validate();
    return finish_fit(stats, cfg, ParameterSpace::common_mean);
}

RestrictedMleResult mle_null(const GroupedData& data, const ConvergenceConfig& cfg) {
    return mle_null(summarize(data), cfg);
}

RestrictedMleResult mle_tree(const SummaryStats& stats, const ConvergenceConfig& cfg) {
    validate_stats(stats);
    cfg.validate();
    return finish_fit(stats, cfg, ParameterSpace::tree_order);
}

RestrictedMleResult mle_tree(const GroupedData& data, const ConvergenceConfig& cfg) {
    return mle_tree(summarize(data), cfg);
}

}  // namespace treeanova
