#include "treeanova/report.hpp"

#include <ostream>

#include <json.hpp>

#include "treeanova/format.hpp"

namespace treeanova {

namespace {

nlohmann::json mle_to_json(const RestrictedMleResult& fit) {
    return {
        {"space", parameter_space_name(fit.space)},
        {"mu_hat", fit.mu_hat},
        {"sigma2_hat", fit.sigma2_hat},
        {"iterations", fit.iterations},
        {"converged", fit.converged},
        {"loglik_trace", fit.loglik_trace},
    };
}

nlohmann::json test_to_json(const TestReport& report) {
    nlohmann::json j{
        {"test", std::string(test_kind_name(report.test))},
        {"statistic", report.statistic},
        {"critical_value", report.critical_value},
        {"p_value", report.p_value},
        {"reject", report.reject},
        {"alpha", report.alpha},
        {"bootstrap_failures", report.bootstrap_failures},
        {"bootstrap_redraws", report.bootstrap_redraws},
    };
    if (!report.per_treatment_d.empty()) j["per_treatment_d"] = report.per_treatment_d;
    if (!report.ci_lower.empty()) j["ci_lower"] = report.ci_lower;
    if (report.mle_null_fit) j["mle_null"] = mle_to_json(*report.mle_null_fit);
    if (report.mle_tree_fit) j["mle_tree"] = mle_to_json(*report.mle_tree_fit);
    return j;
}

}  // namespace

void write_text_report(std::ostream& out, const AnalysisReport& report) {
    out << "Groups (control = " << report.labels[0] << "):\n";
    out << "  label  n  mean  s2(biased)  S2(unbiased)\n";
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        out << "  " << report.labels[i] << "  " << report.stats.n[i] << "  "
            << format_double(report.stats.mean[i]) << "  "
            << format_double(report.stats.biased_var[i]) << "  "
            << format_double(report.stats.unbiased_var[i]) << "\n";
    }
    for (std::size_t i = 0; i < report.condition1.group_pass.size(); ++i) {
        if (!report.condition1.group_pass[i]) {
            out << "warning: Condition 1 fails for group " << report.labels[i]
                << "; uniqueness of the restricted MLE is not guaranteed\n";
        }
    }
    for (const auto& test : report.tests) {
        out << "\nTest: " << test_kind_label(test.test) << "\n";
        out << "  statistic      = " << format_double(test.statistic) << "\n";
        out << "  critical value = " << format_double(test.critical_value) << "\n";
        out << "  p-value        = " << format_double(test.p_value) << "\n";
        out << "  decision       = " << (test.reject ? "Rejected" : "Not rejected")
            << " (alpha = " << format_double(test.alpha) << ")\n";
        if (!test.per_treatment_d.empty()) {
            out << "  D per treatment:";
            for (std::size_t i = 0; i < test.per_treatment_d.size(); ++i) {
                out << " " << report.labels[i + 1] << "="
                    << format_double(test.per_treatment_d[i]);
            }
            out << "\n";
        }
        if (!test.ci_lower.empty()) {
            out << "  simultaneous lower bounds for mu_i - mu_0:\n";
            for (std::size_t i = 0; i < test.ci_lower.size(); ++i) {
                out << "    " << report.labels[i + 1] << ": ("
                    << format_double(test.ci_lower[i]) << ", inf)\n";
            }
        }
        if (test.bootstrap_failures > 0) {
            out << "  note: " << test.bootstrap_failures
                << " bootstrap resamples failed and were excluded\n";
        }
        if (test.bootstrap_redraws > 0) {
            out << "  note: " << test.bootstrap_redraws
                << " degenerate bootstrap resamples were redrawn\n";
        }
    }
}

void write_json_report(std::ostream& out, const AnalysisReport& report) {
    nlohmann::json groups = nlohmann::json::array();
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        groups.push_back({
            {"label", report.labels[i]},
            {"n", report.stats.n[i]},
            {"mean", report.stats.mean[i]},
            {"biased_var", report.stats.biased_var[i]},
            {"unbiased_var", report.stats.unbiased_var[i]},
            {"condition1_pass", static_cast<bool>(report.condition1.group_pass[i])},
        });
    }
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& test : report.tests) tests.push_back(test_to_json(test));

    const nlohmann::json j{{"groups", groups}, {"tests", tests}};
    out << j.dump(2) << "\n";
}

void write_csv_report(std::ostream& out, const AnalysisReport& report) {
    out << "test,statistic,critical_value,p_value,alpha,reject,ci_lower\n";
    for (const auto& test : report.tests) {
        out << test_kind_name(test.test) << "," << format_double(test.statistic) << ","
            << format_double(test.critical_value) << "," << format_double(test.p_value)
            << "," << format_double(test.alpha) << "," << (test.reject ? 1 : 0) << ",";
        for (std::size_t i = 0; i < test.ci_lower.size(); ++i) {
            if (i > 0) out << "|";
            out << format_double(test.ci_lower[i]);
        }
        out << "\n";
    }
}

}  // namespace treeanova
