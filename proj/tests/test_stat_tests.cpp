#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "treeanova/distributions.hpp"
#include "treeanova/stat_tests.hpp"

using namespace treeanova;

namespace {

// Group summaries of the four-group noise-sensitivity study.
SummaryStats study_summary() {
    SummaryStats s;
    s.n = {23, 25, 22, 28};
    s.mean = {-0.4134783, 0.2344000, 1.0504545, 0.9367857};
    s.unbiased_var = {1.416596, 3.422117, 7.297271, 1.935926};
    s.biased_var.resize(4);
    for (std::size_t i = 0; i < 4; ++i) {
        s.biased_var[i] =
            s.unbiased_var[i] * static_cast<double>(s.n[i] - 1) / static_cast<double>(s.n[i]);
    }
    return s;
}

GroupedData make_groups(Xoshiro256PlusPlus& engine, std::size_t k) {
    GroupedData data;
    for (std::size_t i = 0; i <= k; ++i) {
        const std::size_t n = 4 + engine() % 8;
        std::vector<double> group(n);
        const double center = 2.0 * engine.next_unit() - 1.0;
        const double sd = 0.5 + engine.next_unit();
        for (auto& v : group) v = center + sd * draw_standard_normal(engine);
        data.groups.push_back(std::move(group));
    }
    return data;
}

bool reports_equal(const TestReport& a, const TestReport& b) {
    return a.test == b.test && a.statistic == b.statistic &&
           a.critical_value == b.critical_value && a.p_value == b.p_value &&
           a.reject == b.reject && a.per_treatment_d == b.per_treatment_d &&
           a.ci_lower == b.ci_lower && a.bootstrap_failures == b.bootstrap_failures;
}

}  // namespace

TEST_CASE("d statistics reproduce the study reference values") {
    const std::vector<double> d = d_statistics(study_summary());
    REQUIRE(d.size() == 3);
    CHECK(std::abs(*std::max_element(d.begin(), d.end()) - 3.7344682) <= 1e-6);
    CHECK(std::abs(*std::min_element(d.begin(), d.end()) - 1.4542517) <= 1e-6);
}

TEST_CASE("d statistics hand-computed case") {
    SummaryStats s;
    s.n = {4, 4};
    s.mean = {0.0, 1.0};
    s.biased_var = {0.75, 0.75};
    s.unbiased_var = {1.0, 1.0};
    const std::vector<double> d = d_statistics(s);
    CHECK(d[0] == doctest::Approx(1.0 / std::sqrt(0.5)).epsilon(1e-7));
}

TEST_CASE("identical groups give zero statistics") {
    SummaryStats s;
    s.n = {5, 5, 5};
    s.mean = {2.0, 2.0, 2.0};
    s.biased_var = {1.0, 1.0, 1.0};
    s.unbiased_var = {1.25, 1.25, 1.25};
    for (double v : d_statistics(s)) CHECK(v == 0.0);
}

TEST_CASE("zero denominators are rejected") {
    SummaryStats s;
    s.n = {3, 3};
    s.mean = {0.0, 1.0};
    s.biased_var = {0.0, 0.0};
    s.unbiased_var = {0.0, 0.0};
    CHECK_THROWS_AS(d_statistics(s), DegenerateVarianceError);
    CHECK_THROWS_AS(simultaneous_ci(s, 1.0), DegenerateVarianceError);
}

TEST_CASE("equal group means give lambda = 1") {
    const GroupedData data{{{0.0, 2.0}, {0.5, 1.5}, {-1.0, 3.0}}};  // all means 1
    CHECK(lrt_statistic(data) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lambda never exceeds 1 beyond tolerance") {
    auto engine = Seed(321).engine();
    for (int trial = 0; trial < 100; ++trial) {
        const GroupedData data = make_groups(engine, 1 + engine() % 3);
        CAPTURE(trial);
        CHECK(lrt_statistic(data) <= 1.0 + 1e-12);
    }
}

TEST_CASE("bootstrap config invariants") {
    BootstrapConfig config;
    config.draws = 2;
    config.alpha = 0.5;
    CHECK_THROWS_AS(config.validate(), ConfigError);  // budget floor
    config.draws = 5000;
    config.alpha = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.alpha = 1e-5;
    CHECK_THROWS_AS(config.validate(), ConfigError);  // floor(alpha*M) = 0
    config.alpha = 0.05;
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("quantile ranks match the stated order statistics") {
    CHECK(detail::quantile_rank(0.05, 5000) == 250);
    CHECK(detail::quantile_rank(0.95, 5000) == 4750);
    CHECK(detail::quantile_rank(0.05, 1000) == 50);
    CHECK(detail::quantile_rank(0.95, 1000) == 950);
    CHECK(detail::quantile_rank(0.01, 50) == 1);  // clamped at the bottom
    CHECK(detail::quantile_rank(0.999999, 100) == 99);
    CHECK(detail::quantile_rank(1.0, 100) == 100);
}

TEST_CASE("critical value equals the naive sorted order statistic") {
    const GroupedData data{{{0.1, 1.4, -0.3, 0.9}, {1.2, 0.4, 2.2, 0.8, 1.5}}};
    BootstrapConfig boot;
    boot.draws = 100;
    boot.alpha = 0.1;
    boot.seed = Seed(5);

    const detail::NullDistribution null_dist = detail::simulate_null_distribution(
        summarize(data), boot, ConvergenceConfig{}, true, true, 1);
    REQUIRE(null_dist.lrt_failures == 0);

    std::vector<double> sorted = null_dist.log_lrt;
    std::sort(sorted.begin(), sorted.end());
    const TestReport lrt = run_lrt(data, boot);
    CHECK(lrt.critical_value == doctest::Approx(std::exp(sorted[9])).epsilon(1e-14));

    std::vector<double> sorted_max = null_dist.d_max;
    std::sort(sorted_max.begin(), sorted_max.end());
    const TestReport maxd = run_maxd(data, boot);
    CHECK(maxd.critical_value == sorted_max[89]);  // rank floor(0.9*100) = 90
}

TEST_CASE("an extreme statistic gives the smallest p-value and rejects") {
    // treatments far above control: the tree fit is unconstrained while the
    // common-mean fit is terrible, so lambda lands below every bootstrap draw
    const GroupedData data{
        {{0.0, 0.4, -0.4, 0.1}, {10.0, 10.5, 9.5, 10.2}, {20.0, 20.4, 19.6, 20.1}}};
    BootstrapConfig boot;
    boot.draws = 200;
    boot.seed = Seed(9);
    const TestReport report = run_lrt(data, boot);
    CHECK(report.p_value == doctest::Approx(1.0 / 201.0));
    CHECK(report.reject);
}

TEST_CASE("location shift leaves all statistics unchanged") {
    auto engine = Seed(654).engine();
    const GroupedData data = make_groups(engine, 2);
    GroupedData shifted = data;
    for (auto& group : shifted.groups) {
        for (auto& v : group) v += 10.0;
    }
    BootstrapConfig boot;
    boot.draws = 300;
    boot.seed = Seed(17);

    const TestReport a = run_lrt(data, boot);
    const TestReport b = run_lrt(shifted, boot);
    CHECK(b.statistic == doctest::Approx(a.statistic).epsilon(1e-9));
    CHECK(b.critical_value == doctest::Approx(a.critical_value).epsilon(1e-9));
    CHECK(b.p_value == doctest::Approx(a.p_value));
    CHECK(b.reject == a.reject);

    const auto [amax, amin] = run_maxd_mind(data, boot);
    const auto [bmax, bmin] = run_maxd_mind(shifted, boot);
    CHECK(bmax.statistic == doctest::Approx(amax.statistic).epsilon(1e-9));
    CHECK(bmax.critical_value == doctest::Approx(amax.critical_value).epsilon(1e-9));
    CHECK(bmin.statistic == doctest::Approx(amin.statistic).epsilon(1e-9));
}

TEST_CASE("rescaling the data leaves lambda and D unchanged") {
    auto engine = Seed(655).engine();
    const GroupedData data = make_groups(engine, 2);
    GroupedData scaled = data;
    for (auto& group : scaled.groups) {
        for (auto& v : group) v *= 3.5;
    }
    CHECK(std::abs(lrt_statistic(scaled) - lrt_statistic(data)) <= 1e-10);
    const std::vector<double> da = d_statistics(summarize(data));
    const std::vector<double> db = d_statistics(summarize(scaled));
    for (std::size_t i = 0; i < da.size(); ++i) {
        CHECK(std::abs(da[i] - db[i]) <= 1e-10);
    }
}

TEST_CASE("reports are identical across thread counts") {
    auto engine = Seed(777).engine();
    const GroupedData data = make_groups(engine, 3);
    BootstrapConfig boot;
    boot.draws = 400;
    boot.seed = Seed(23);

    CHECK(reports_equal(run_lrt(data, boot, {}, 1), run_lrt(data, boot, {}, 4)));
    CHECK(reports_equal(run_maxd(data, boot, 1), run_maxd(data, boot, 4)));
    CHECK(reports_equal(run_mind(data, boot, 1), run_mind(data, boot, 4)));
}

TEST_CASE("with a single treatment, Max-D and Min-D coincide") {
    const GroupedData data{{{0.2, 1.1, -0.5}, {0.8, 1.9, 1.4, 0.6}}};
    BootstrapConfig boot;
    boot.draws = 250;
    boot.seed = Seed(31);
    const auto [max_report, min_report] = run_maxd_mind(data, boot);
    CHECK(max_report.statistic == min_report.statistic);
    CHECK(max_report.critical_value == min_report.critical_value);
    CHECK(max_report.p_value == min_report.p_value);
    CHECK(max_report.reject == min_report.reject);
}

TEST_CASE("simultaneous bounds: degenerate critical value and monotonicity") {
    const SummaryStats s = study_summary();
    const std::vector<double> at_zero = simultaneous_ci(s, 0.0);
    for (std::size_t i = 1; i < s.num_groups(); ++i) {
        CHECK(at_zero[i - 1] == doctest::Approx(s.mean[i] - s.mean[0]));
    }
    const std::vector<double> base = simultaneous_ci(s, 1.0);
    const std::vector<double> doubled = simultaneous_ci(s, 2.0);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(doubled[i] < base[i]);

    const std::vector<double> study = simultaneous_ci(s, 2.1667720);
    CHECK(std::abs(study[0] - (-0.3174323)) <= 5e-4);
    CHECK(std::abs(study[1] - 0.1050967) <= 5e-4);
    CHECK(std::abs(study[2] - 0.5668287) <= 5e-4);
}

TEST_CASE("Max-D rejection is equivalent to a positive lower bound") {
    auto engine = Seed(888).engine();
    for (int trial = 0; trial < 20; ++trial) {
        const GroupedData data = make_groups(engine, 2);
        BootstrapConfig boot;
        boot.draws = 200;
        boot.seed = Seed(41 + static_cast<std::uint64_t>(trial));
        const TestReport report = run_maxd(data, boot);
        const double best_bound =
            *std::max_element(report.ci_lower.begin(), report.ci_lower.end());
        if (std::abs(report.statistic - report.critical_value) < 1e-9) continue;
        CHECK(report.reject == (best_bound > 0.0));
    }
}
