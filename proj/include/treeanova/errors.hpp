#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace treeanova {

/// Invalid parameter of a distribution, weight vector, or algorithm input.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or insufficient observation data (ingestion, group sizes).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration (config file fields, budget floors).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Moments requested for a distribution without finite variance.
class UnsupportedMomentsError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Likelihood unbounded: zero within-group variance about the fitted mean.
class DegenerateLikelihoodError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Zero variance in a standardized-difference denominator.
class DegenerateVarianceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Iteration hit max_iterations before meeting the stopping rule.
/// Carries the log-likelihood trace of the aborted run.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& message, std::vector<double> loglik_trace)
        : std::runtime_error(message), trace_(std::move(loglik_trace)) {}

    const std::vector<double>& loglik_trace() const { return trace_; }

  private:
    std::vector<double> trace_;
};

/// More than 1% of bootstrap resamples failed to produce a statistic.
class BootstrapInstabilityError : public std::runtime_error {
  public:
    BootstrapInstabilityError(const std::string& message, std::size_t failures,
                              std::size_t draws)
        : std::runtime_error(message + " (" + std::to_string(failures) + " of " +
                             std::to_string(draws) + " resamples failed)"),
          failures_(failures),
          draws_(draws) {}

    std::size_t failures() const { return failures_; }
    std::size_t draws() const { return draws_; }

  private:
    std::size_t failures_;
    std::size_t draws_;
};

}  // namespace treeanova
