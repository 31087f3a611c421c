#include "treeanova/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "treeanova/format.hpp"
#include "treeanova/parallel.hpp"

namespace treeanova {

namespace {

enum class Outcome : std::uint8_t { accept = 0, reject = 1, failed = 2 };

struct TestSelection {
    bool lrt = false;
    bool max_d = false;
    bool min_d = false;

    bool any_d() const { return max_d || min_d; }
};

TestSelection select(const std::vector<TestKind>& tests) {
    TestSelection selection;
    for (TestKind t : tests) {
        if (t == TestKind::lrt) selection.lrt = true;
        if (t == TestKind::max_d) selection.max_d = true;
        if (t == TestKind::min_d) selection.min_d = true;
    }
    return selection;
}

constexpr std::size_t kTestSlots = 3;

std::size_t slot_of(TestKind kind) { return static_cast<std::size_t>(kind); }

// The q-quantile order statistic (1-based rank floor(q*count)) of the
// non-NaN entries, or NaN when everything failed. Mutates `values`.
double rank_statistic(std::vector<double>& values, double q, std::size_t& failures) {
    auto valid_end = std::remove_if(values.begin(), values.end(),
                                    [](double v) { return std::isnan(v); });
    const auto valid = static_cast<std::size_t>(valid_end - values.begin());
    failures = values.size() - valid;
    if (valid == 0) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t rank = detail::quantile_rank(q, valid);
    std::nth_element(values.begin(), values.begin() + (rank - 1), valid_end);
    return values[rank - 1];
}

bool mu_constant(const std::vector<double>& mu) {
    return std::all_of(mu.begin(), mu.end(), [&](double v) { return v == mu.front(); });
}

bool mu_tree_feasible(const std::vector<double>& mu) {
    return std::all_of(mu.begin() + 1, mu.end(), [&](double v) { return mu[0] <= v; });
}

struct ReplicationEngine {
    const SimulationSpec& spec;
    TestSelection selection;
    std::vector<double> grid;            // c multipliers, at least {1}
    std::vector<double> sigma;           // sqrt(sigma2)
    Moments raw_moments{0.0, 1.0};
    double raw_sd = 1.0;

    // per-worker scratch
    struct Workspace {
        SummaryStats stats;             // variances fixed per replication
        std::vector<double> w_mean;     // standardized group means
        detail::FitScratch scratch_null;
        detail::FitScratch scratch_tree;
        std::vector<double> d_denom_sqrt;
    };

    ReplicationEngine(const SimulationSpec& s, std::vector<double> grid_points)
        : spec(s), selection(select(s.tests)), grid(std::move(grid_points)) {
        sigma.reserve(spec.sigma2.size());
        for (double v : spec.sigma2) sigma.push_back(std::sqrt(v));
        raw_moments = theoretical_moments(spec.distribution);
        raw_sd = std::sqrt(raw_moments.variance);
    }

    std::size_t groups() const { return spec.n.size(); }

    void init_workspace(Workspace& ws) const {
        const std::size_t g = groups();
        ws.stats.n = spec.n;
        ws.stats.mean.assign(g, 0.0);
        ws.stats.biased_var.assign(g, 0.0);
        ws.stats.unbiased_var.assign(g, 0.0);
        ws.w_mean.assign(g, 0.0);
        ws.d_denom_sqrt.assign(g, 0.0);
    }

    // Outcome layout: out[grid_index * kTestSlots + slot].
    void run_replication(std::size_t r, Workspace& ws, Outcome* out) const {
        const Seed rep_seed = spec.seed.derived(r);
        const Seed data_seed = rep_seed.derived(StreamPurpose::data);

        // Standardized draws per group: only their first two moments are
        // needed, shifted per grid point later.
        for (std::size_t i = 0; i < groups(); ++i) {
            auto engine = data_seed.derived(i).engine();
            const std::size_t count = spec.n[i];
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                const double y = spec.distribution.draw(engine);
                sum += y;
                sum_sq += y * y;
            }
            const double nd = static_cast<double>(count);
            const double raw_mean = sum / nd;
            const double raw_biased = std::max(0.0, sum_sq / nd - raw_mean * raw_mean);
            ws.w_mean[i] = (raw_mean - raw_moments.mean) / raw_sd;
            const double w_biased = raw_biased / raw_moments.variance;
            ws.stats.biased_var[i] = spec.sigma2[i] * w_biased;
            ws.stats.unbiased_var[i] = ws.stats.biased_var[i] * nd / (nd - 1.0);
        }

        // Bootstrap pass: depends on the data only through n and S^2, both
        // invariant under the per-grid-point mean shifts, so one pass serves
        // every grid point.
        BootstrapConfig boot;
        boot.draws = spec.bootstrap_draws;
        boot.alpha = spec.alpha;
        boot.seed = rep_seed;
        detail::NullDistribution null_dist = detail::simulate_null_distribution(
            ws.stats, boot, spec.convergence, selection.lrt, selection.any_d(),
            /*threads=*/1);

        double log_critical = 0.0;
        bool lrt_usable = false;
        if (selection.lrt) {
            std::size_t failures = 0;
            log_critical = rank_statistic(null_dist.log_lrt, spec.alpha, failures);
            lrt_usable = !std::isnan(log_critical) && failures * 100 <= boot.draws;
        }
        double d_max_critical = 0.0;
        double d_min_critical = 0.0;
        bool d_usable = false;
        if (selection.any_d()) {
            std::size_t failures_max = 0;
            std::size_t failures_min = 0;
            d_max_critical =
                rank_statistic(null_dist.d_max, 1.0 - spec.alpha, failures_max);
            d_min_critical =
                rank_statistic(null_dist.d_min, 1.0 - spec.alpha, failures_min);
            d_usable =
                !std::isnan(d_max_critical) && failures_max * 100 <= boot.draws;
        }

        // Observed D denominators are also shift-invariant.
        bool d_denominators_ok = true;
        if (selection.any_d()) {
            for (std::size_t i = 1; i < groups(); ++i) {
                const double denom =
                    ws.stats.unbiased_var[i] / static_cast<double>(spec.n[i]) +
                    ws.stats.unbiased_var[0] / static_cast<double>(spec.n[0]);
                if (!(denom > 0.0)) {
                    d_denominators_ok = false;
                    break;
                }
                ws.d_denom_sqrt[i] = std::sqrt(denom);
            }
        }

        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double c = grid[g];
            for (std::size_t i = 0; i < groups(); ++i) {
                ws.stats.mean[i] = c * spec.mu[i] + sigma[i] * ws.w_mean[i];
            }
            Outcome* slots = out + g * kTestSlots;

            if (selection.lrt) {
                Outcome outcome = Outcome::failed;
                if (lrt_usable) {
                    const detail::LogLrtStatus status = detail::log_lrt(
                        ws.stats, spec.convergence, ws.scratch_null, ws.scratch_tree);
                    if (status.ok) {
                        outcome = status.log_lambda < log_critical ? Outcome::reject
                                                                   : Outcome::accept;
                    }
                }
                slots[slot_of(TestKind::lrt)] = outcome;
            }
            if (selection.any_d()) {
                double d_max = -std::numeric_limits<double>::infinity();
                double d_min = std::numeric_limits<double>::infinity();
                if (d_denominators_ok) {
                    for (std::size_t i = 1; i < groups(); ++i) {
                        const double d =
                            (ws.stats.mean[i] - ws.stats.mean[0]) / ws.d_denom_sqrt[i];
                        d_max = std::max(d_max, d);
                        d_min = std::min(d_min, d);
                    }
                }
                const bool usable = d_usable && d_denominators_ok;
                if (selection.max_d) {
                    slots[slot_of(TestKind::max_d)] =
                        !usable ? Outcome::failed
                                : (d_max > d_max_critical ? Outcome::reject
                                                          : Outcome::accept);
                }
                if (selection.min_d) {
                    slots[slot_of(TestKind::min_d)] =
                        !usable ? Outcome::failed
                                : (d_min > d_min_critical ? Outcome::reject
                                                          : Outcome::accept);
                }
            }
        }
    }
};

SimulationResult run_study(const SimulationSpec& spec, std::vector<double> grid,
                           int threads) {
    const auto start = std::chrono::steady_clock::now();
    ReplicationEngine engine(spec, std::move(grid));

    const std::size_t per_replication = engine.grid.size() * kTestSlots;
    std::vector<Outcome> outcomes(spec.replications * per_replication, Outcome::accept);

    const int workers = std::max(1, threads);
    std::vector<ReplicationEngine::Workspace> workspaces(
        static_cast<std::size_t>(workers));
    for (auto& ws : workspaces) engine.init_workspace(ws);

    parallel_for(spec.replications, workers, [&](std::size_t r, int worker) {
        engine.run_replication(r, workspaces[static_cast<std::size_t>(worker)],
                               outcomes.data() + r * per_replication);
    });

    SimulationResult result;
    result.replications = spec.replications;
    for (std::size_t g = 0; g < engine.grid.size(); ++g) {
        for (TestKind test : spec.tests) {
            std::size_t rejections = 0;
            std::size_t failed = 0;
            for (std::size_t r = 0; r < spec.replications; ++r) {
                const Outcome o = outcomes[r * per_replication + g * kTestSlots +
                                           slot_of(test)];
                if (o == Outcome::reject) ++rejections;
                if (o == Outcome::failed) ++failed;
            }
            RejectionRate rate;
            rate.test = test;
            rate.c = engine.grid[g];
            rate.replications_failed = failed;
            rate.valid_replications = spec.replications - failed;
            if (rate.valid_replications > 0) {
                rate.rejection_rate = static_cast<double>(rejections) /
                                      static_cast<double>(rate.valid_replications);
                rate.monte_carlo_se =
                    std::sqrt(rate.rejection_rate * (1.0 - rate.rejection_rate) /
                              static_cast<double>(rate.valid_replications));
            } else {
                rate.rejection_rate = std::numeric_limits<double>::quiet_NaN();
                rate.monte_carlo_se = std::numeric_limits<double>::quiet_NaN();
            }
            result.rates.push_back(rate);
        }
    }

    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace

void SimulationSpec::validate() const {
    const std::size_t groups = mu.size();
    if (groups < 2) {
        throw ConfigError("mu needs a control and at least one treatment entry");
    }
    if (sigma2.size() != groups || n.size() != groups) {
        throw ConfigError("mu, sigma2, and n must have equal length");
    }
    for (double v : mu) {
        if (!std::isfinite(v)) throw ConfigError("mu entries must be finite");
    }
    for (double v : sigma2) {
        if (!(std::isfinite(v) && v > 0.0)) throw ConfigError("sigma2 entries must be > 0");
    }
    for (std::size_t count : n) {
        if (count < 2) throw ConfigError("every group size must be >= 2");
    }
    if (tests.empty()) throw ConfigError("at least one test must be selected");
    for (std::size_t i = 0; i < tests.size(); ++i) {
        for (std::size_t j = i + 1; j < tests.size(); ++j) {
            if (tests[i] == tests[j]) {
                throw ConfigError("tests must not repeat: " +
                                  std::string(test_kind_name(tests[i])));
            }
        }
    }
    if (replications < 100) throw ConfigError("replications must be >= 100");

    BootstrapConfig boot;
    boot.draws = bootstrap_draws;
    boot.alpha = alpha;
    boot.validate();
    convergence.validate();

    if (!distribution.has_finite_variance()) {
        throw ConfigError("distribution must have finite variance for standardization");
    }
    for (double c : c_grid) {
        if (!(std::isfinite(c) && c >= 0.0)) {
            throw ConfigError("c_grid entries must be finite and >= 0");
        }
    }
}

SimulationResult estimate_size(const SimulationSpec& spec, int threads) {
    spec.validate();
    if (!mu_constant(spec.mu)) {
        throw ConfigError("estimate_size requires a constant mean vector (H0)");
    }
    if (!spec.c_grid.empty()) {
        throw ConfigError("c_grid applies to power studies only");
    }
    return run_study(spec, {1.0}, threads);
}

SimulationResult estimate_power(const SimulationSpec& spec, int threads) {
    spec.validate();
    if (!mu_tree_feasible(spec.mu)) {
        throw ConfigError("estimate_power requires mu_0 <= mu_i for every treatment");
    }
    if (mu_constant(spec.mu)) {
        throw ConfigError(
            "estimate_power requires at least one strict inequality in mu");
    }
    std::vector<double> grid = spec.c_grid.empty() ? std::vector<double>{1.0}
                                                   : spec.c_grid;
    return run_study(spec, std::move(grid), threads);
}

std::vector<GridCellOutcome> run_grid(const std::vector<SimulationSpec>& specs,
                                      int threads) {
    if (specs.empty()) throw ConfigError("grid needs at least one cell");
    std::vector<GridCellOutcome> outcomes;
    outcomes.reserve(specs.size());
    for (const auto& spec : specs) {
        GridCellOutcome outcome;
        try {
            outcome.result = mu_constant(spec.mu) ? estimate_size(spec, threads)
                                                  : estimate_power(spec, threads);
        } catch (const ConfigError& e) {
            outcome.error = e.what();
            outcome.category = ErrorCategory::config;
        } catch (const ParameterError& e) {
            outcome.error = e.what();
            outcome.category = ErrorCategory::config;
        } catch (const DataError& e) {
            outcome.error = e.what();
            outcome.category = ErrorCategory::data;
        } catch (const std::exception& e) {
            outcome.error = e.what();
            outcome.category = ErrorCategory::numeric;
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

namespace {

template <typename T, typename Format>
void write_joined(std::ostream& out, const std::vector<T>& values, Format format) {
    bool first = true;
    for (const auto& v : values) {
        if (!first) out << "|";
        out << format(v);
        first = false;
    }
}

}  // namespace

void write_csv_header(std::ostream& out) {
    out << "k,n_vec,sigma2_vec,mu_vec,c,distribution,test,alpha,P,M,rejection_rate,"
           "mc_se,seed\n";
}

void write_csv_rows(std::ostream& out, const SimulationSpec& spec,
                    const SimulationResult& result) {
    for (const auto& rate : result.rates) {
        out << spec.mu.size() - 1 << ",";
        write_joined(out, spec.n, [](std::size_t v) { return std::to_string(v); });
        out << ",";
        write_joined(out, spec.sigma2, format_double);
        out << ",";
        write_joined(out, spec.mu, format_double);
        out << "," << format_double(rate.c) << "," << spec.distribution.to_string()
            << "," << test_kind_name(rate.test) << "," << format_double(spec.alpha)
            << "," << spec.replications << "," << spec.bootstrap_draws << ","
            << format_double(rate.rejection_rate) << ","
            << format_double(rate.monte_carlo_se) << "," << spec.seed.root() << "\n";
    }
}

}  // namespace treeanova
