#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "treeanova/distributions.hpp"
#include "treeanova/estimation.hpp"
#include "treeanova/stat_tests.hpp"

namespace treeanova {

/// One size/power cell: group means, variances, counts, error law, the tests
/// to run, and the Monte-Carlo budgets. For power curves `c_grid` lists
/// multipliers applied to the whole mean vector.
struct SimulationSpec {
    std::vector<double> mu;
    std::vector<double> sigma2;
    std::vector<std::size_t> n;
    DistributionSpec distribution = DistributionSpec::normal();
    std::vector<TestKind> tests = {TestKind::lrt, TestKind::max_d, TestKind::min_d};
    std::size_t replications = 2000;
    std::size_t bootstrap_draws = 1000;
    double alpha = 0.05;
    Seed seed{0};
    std::vector<double> c_grid;  // empty means a single point at c = 1
    ConvergenceConfig convergence{};

    void validate() const;
};

/// Empirical rejection rate of one test at one grid point.
struct RejectionRate {
    TestKind test = TestKind::lrt;
    double c = 1.0;
    double rejection_rate = 0.0;
    double monte_carlo_se = 0.0;
    std::size_t replications_failed = 0;
    std::size_t valid_replications = 0;
};

struct SimulationResult {
    std::vector<RejectionRate> rates;  // grid-major, then spec.tests order
    std::size_t replications = 0;
    double elapsed_seconds = 0.0;
};

/// Size study: requires a constant mean vector and an empty c_grid. Every
/// replication generates data under H0, bootstraps its own critical values,
/// and tallies rejections.
SimulationResult estimate_size(const SimulationSpec& spec, int threads = 1);

/// Power study: requires a tree-feasible mean vector with at least one strict
/// inequality. Rates are produced per c_grid point (or the single point c=1).
SimulationResult estimate_power(const SimulationSpec& spec, int threads = 1);

/// Batch wrapper: executes cells independently, collecting per-cell errors
/// without aborting the rest. A cell with a constant mean vector runs as a
/// size study, otherwise as a power study.
enum class ErrorCategory { none, config, data, numeric };

struct GridCellOutcome {
    std::optional<SimulationResult> result;
    std::string error;  // empty on success
    ErrorCategory category = ErrorCategory::none;
};

std::vector<GridCellOutcome> run_grid(const std::vector<SimulationSpec>& specs,
                                      int threads = 1);

/// CSV schema: k,n_vec,sigma2_vec,mu_vec,c,distribution,test,alpha,P,M,
/// rejection_rate,mc_se,seed with vectors encoded |-separated.
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const SimulationSpec& spec,
                    const SimulationResult& result);

}  // namespace treeanova
