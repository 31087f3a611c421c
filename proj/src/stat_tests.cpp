#include "treeanova/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "treeanova/distributions.hpp"
#include "treeanova/parallel.hpp"

namespace treeanova {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxRedraws = 100;

std::vector<double> sorted_valid(const std::vector<double>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (!std::isnan(v)) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void check_instability(std::size_t failures, std::size_t draws, const char* what) {
    if (failures * 100 > draws) {
        throw BootstrapInstabilityError(std::string("bootstrap ") + what +
                                            " unstable: too many resamples failed",
                                        failures, draws);
    }
}

// One-pass moments of n draws from normal(0, sd^2).
struct GroupMoments {
    double mean;
    double biased_var;
    double unbiased_var;
};

GroupMoments draw_null_group(Xoshiro256PlusPlus& engine, std::size_t n, double sd) {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t j = 0;
    for (; j + 1 < n; j += 2) {
        const auto [z1, z2] = draw_standard_normal_pair(engine);
        const double x1 = sd * z1;
        const double x2 = sd * z2;
        sum += x1 + x2;
        sum_sq += x1 * x1 + x2 * x2;
    }
    if (j < n) {
        const double x = sd * draw_standard_normal(engine);
        sum += x;
        sum_sq += x * x;
    }
    const double count = static_cast<double>(n);
    const double mean = sum / count;
    const double biased = std::max(0.0, sum_sq / count - mean * mean);
    return {mean, biased, biased * count / (count - 1.0)};
}

struct ResampleWorkspace {
    SummaryStats stats;
    std::vector<double> unbiased_sd;  // sqrt(S_i^2) of the observed groups
    detail::FitScratch scratch_null;
    detail::FitScratch scratch_tree;
    std::size_t redraws = 0;

    void init(const SummaryStats& observed) {
        stats.n = observed.n;
        const std::size_t groups = observed.num_groups();
        stats.mean.assign(groups, 0.0);
        stats.biased_var.assign(groups, 0.0);
        stats.unbiased_var.assign(groups, 0.0);
        unbiased_sd.resize(groups);
        for (std::size_t i = 0; i < groups; ++i) {
            unbiased_sd[i] = std::sqrt(observed.unbiased_var[i]);
        }
    }

    void draw_resample(Xoshiro256PlusPlus& engine) {
        for (std::size_t i = 0; i < stats.num_groups(); ++i) {
            const GroupMoments m = draw_null_group(engine, stats.n[i], unbiased_sd[i]);
            stats.mean[i] = m.mean;
            stats.biased_var[i] = m.biased_var;
            stats.unbiased_var[i] = m.unbiased_var;
        }
    }

    bool degenerate_variance() const {
        for (double v : stats.unbiased_var) {
            if (v <= 0.0) return true;
        }
        return false;
    }
};

void d_extremes(const SummaryStats& stats, double& d_max, double& d_min) {
    d_max = -std::numeric_limits<double>::infinity();
    d_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < stats.num_groups(); ++i) {
        const double denom = stats.unbiased_var[i] / static_cast<double>(stats.n[i]) +
                             stats.unbiased_var[0] / static_cast<double>(stats.n[0]);
        const double d = (stats.mean[i] - stats.mean[0]) / std::sqrt(denom);
        d_max = std::max(d_max, d);
        d_min = std::min(d_min, d);
    }
}

}  // namespace

std::string_view test_kind_name(TestKind kind) {
    switch (kind) {
        case TestKind::lrt: return "lrt";
        case TestKind::max_d: return "maxd";
        case TestKind::min_d: return "mind";
    }
    return "?";
}

std::string_view test_kind_label(TestKind kind) {
    switch (kind) {
        case TestKind::lrt: return "LRT";
        case TestKind::max_d: return "Max-D";
        case TestKind::min_d: return "Min-D";
    }
    return "?";
}

TestKind parse_test_kind(std::string_view name) {
    if (name == "lrt") return TestKind::lrt;
    if (name == "maxd") return TestKind::max_d;
    if (name == "mind") return TestKind::min_d;
    throw ConfigError("unknown test '" + std::string(name) +
                      "'; expected lrt, maxd, or mind");
}

void BootstrapConfig::validate() const {
    if (draws < 100) throw ConfigError("bootstrap draws must be >= 100");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (std::floor(alpha * static_cast<double>(draws) + 1e-9) < 1.0) {
        throw ConfigError("floor(alpha * draws) must be >= 1");
    }
}

namespace detail {

std::size_t quantile_rank(double q, std::size_t count) {
    const double raw = std::floor(q * static_cast<double>(count) + 1e-9);
    if (raw < 1.0) return 1;
    if (raw > static_cast<double>(count)) return count;
    return static_cast<std::size_t>(raw);
}

double add_one_p_value(std::size_t extreme_count, std::size_t valid_count) {
    return static_cast<double>(1 + extreme_count) / static_cast<double>(valid_count + 1);
}

NullDistribution simulate_null_distribution(const SummaryStats& observed,
                                            const BootstrapConfig& boot,
                                            const ConvergenceConfig& cfg, bool want_lrt,
                                            bool want_d, int threads) {
    const std::size_t draws = boot.draws;
    NullDistribution null_dist;
    if (want_lrt) null_dist.log_lrt.assign(draws, kNaN);
    if (want_d) {
        null_dist.d_max.assign(draws, kNaN);
        null_dist.d_min.assign(draws, kNaN);
    }

    const Seed bootstrap_seed = boot.seed.derived(StreamPurpose::bootstrap);
    const int workers = std::max(1, threads);
    std::vector<ResampleWorkspace> workspaces(static_cast<std::size_t>(workers));
    for (auto& ws : workspaces) ws.init(observed);

    parallel_for(draws, workers, [&](std::size_t b, int worker) {
        ResampleWorkspace& ws = workspaces[static_cast<std::size_t>(worker)];
        auto engine = bootstrap_seed.derived(b).engine();
        ws.draw_resample(engine);

        if (want_lrt) {
            const LogLrtStatus lrt =
                log_lrt(ws.stats, cfg, ws.scratch_null, ws.scratch_tree);
            if (lrt.ok) null_dist.log_lrt[b] = lrt.log_lambda;
        }
        if (want_d) {
            std::size_t attempts = 1;
            while (ws.degenerate_variance() && attempts < kMaxRedraws) {
                ws.draw_resample(engine);
                ++attempts;
                ++ws.redraws;
            }
            if (!ws.degenerate_variance()) {
                d_extremes(ws.stats, null_dist.d_max[b], null_dist.d_min[b]);
            }
        }
    });

    for (const auto& ws : workspaces) null_dist.d_redraws += ws.redraws;
    if (want_lrt) {
        null_dist.lrt_failures = static_cast<std::size_t>(
            std::count_if(null_dist.log_lrt.begin(), null_dist.log_lrt.end(),
                          [](double v) { return std::isnan(v); }));
    }
    if (want_d) {
        null_dist.d_failures = static_cast<std::size_t>(
            std::count_if(null_dist.d_max.begin(), null_dist.d_max.end(),
                          [](double v) { return std::isnan(v); }));
    }
    return null_dist;
}

}  // namespace detail

double lrt_statistic(const GroupedData& data, const ConvergenceConfig& cfg) {
    const SummaryStats stats = summarize(data);
    cfg.validate();
    detail::FitScratch scratch_null;
    detail::FitScratch scratch_tree;
    const detail::LogLrtStatus status =
        detail::log_lrt(stats, cfg, scratch_null, scratch_tree);
    if (!status.ok) {
        // surface the precise estimation error (degenerate likelihood or
        // non-convergence with its trace)
        (void)mle_null(stats, cfg);
        (void)mle_tree(stats, cfg);
        throw ConvergenceError("likelihood-ratio fits did not converge", {});
    }
    return std::exp(status.log_lambda);
}

std::vector<double> d_statistics(const SummaryStats& stats) {
    if (stats.num_groups() < 2) {
        throw DataError("d_statistics needs a control and at least one treatment");
    }
    std::vector<double> d;
    d.reserve(stats.num_treatments());
    for (std::size_t i = 1; i < stats.num_groups(); ++i) {
        const double denom = stats.unbiased_var[i] / static_cast<double>(stats.n[i]) +
                             stats.unbiased_var[0] / static_cast<double>(stats.n[0]);
        if (!(denom > 0.0)) {
            throw DegenerateVarianceError("zero variance in the D_" + std::to_string(i) +
                                          " denominator");
        }
        d.push_back((stats.mean[i] - stats.mean[0]) / std::sqrt(denom));
    }
    return d;
}

std::vector<double> simultaneous_ci(const SummaryStats& stats, double d_max_critical) {
    if (!std::isfinite(d_max_critical)) {
        throw ParameterError("simultaneous_ci: critical value must be finite");
    }
    std::vector<double> lower;
    lower.reserve(stats.num_treatments());
    for (std::size_t i = 1; i < stats.num_groups(); ++i) {
        const double denom = stats.unbiased_var[i] / static_cast<double>(stats.n[i]) +
                             stats.unbiased_var[0] / static_cast<double>(stats.n[0]);
        if (!(denom > 0.0)) {
            throw DegenerateVarianceError("zero variance in a confidence bound");
        }
        lower.push_back(stats.mean[i] - stats.mean[0] -
                        d_max_critical * std::sqrt(denom));
    }
    return lower;
}

TestReport run_lrt(const GroupedData& data, const BootstrapConfig& boot,
                   const ConvergenceConfig& cfg, int threads) {
    boot.validate();
    cfg.validate();
    const SummaryStats stats = summarize(data);

    TestReport report;
    report.test = TestKind::lrt;
    report.alpha = boot.alpha;
    report.mle_null_fit = mle_null(stats, cfg);
    report.mle_tree_fit = mle_tree(stats, cfg);

    detail::FitScratch scratch_null;
    detail::FitScratch scratch_tree;
    const detail::LogLrtStatus observed =
        detail::log_lrt(stats, cfg, scratch_null, scratch_tree);
    report.statistic = std::exp(observed.log_lambda);

    const detail::NullDistribution null_dist = detail::simulate_null_distribution(
        stats, boot, cfg, /*want_lrt=*/true, /*want_d=*/false, threads);
    report.bootstrap_failures = null_dist.lrt_failures;
    check_instability(null_dist.lrt_failures, boot.draws, "LRT");

    const std::vector<double> sorted = sorted_valid(null_dist.log_lrt);
    const std::size_t rank = detail::quantile_rank(boot.alpha, sorted.size());
    const double log_critical = sorted[rank - 1];
    report.critical_value = std::exp(log_critical);

    const auto below = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), observed.log_lambda) -
        sorted.begin());
    report.p_value = detail::add_one_p_value(below, sorted.size());
    report.reject = observed.log_lambda < log_critical;
    return report;
}

std::pair<TestReport, TestReport> run_maxd_mind(const GroupedData& data,
                                                const BootstrapConfig& boot,
                                                int threads) {
    boot.validate();
    const SummaryStats stats = summarize(data);
    const std::vector<double> d = d_statistics(stats);

    const detail::NullDistribution null_dist = detail::simulate_null_distribution(
        stats, boot, ConvergenceConfig{}, /*want_lrt=*/false, /*want_d=*/true, threads);
    check_instability(null_dist.d_failures, boot.draws, "Max-D/Min-D");

    const double rank_q = 1.0 - boot.alpha;

    const auto build = [&](TestKind kind, double statistic,
                           const std::vector<double>& null_draws) {
        TestReport report;
        report.test = kind;
        report.alpha = boot.alpha;
        report.statistic = statistic;
        report.per_treatment_d = d;
        report.bootstrap_failures = null_dist.d_failures;
        report.bootstrap_redraws = null_dist.d_redraws;

        const std::vector<double> sorted = sorted_valid(null_draws);
        const std::size_t rank = detail::quantile_rank(rank_q, sorted.size());
        report.critical_value = sorted[rank - 1];

        const auto at_or_above = static_cast<std::size_t>(
            sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), statistic));
        report.p_value = detail::add_one_p_value(at_or_above, sorted.size());
        report.reject = statistic > report.critical_value;
        return report;
    };

    TestReport max_report = build(TestKind::max_d, *std::max_element(d.begin(), d.end()),
                                  null_dist.d_max);
    max_report.ci_lower = simultaneous_ci(stats, max_report.critical_value);
    TestReport min_report = build(TestKind::min_d, *std::min_element(d.begin(), d.end()),
                                  null_dist.d_min);
    return {std::move(max_report), std::move(min_report)};
}

TestReport run_maxd(const GroupedData& data, const BootstrapConfig& boot, int threads) {
    return run_maxd_mind(data, boot, threads).first;
}

TestReport run_mind(const GroupedData& data, const BootstrapConfig& boot, int threads) {
    return run_maxd_mind(data, boot, threads).second;
}

}  // namespace treeanova
