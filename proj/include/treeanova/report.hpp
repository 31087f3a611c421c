#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "treeanova/estimation.hpp"
#include "treeanova/stat_tests.hpp"

namespace treeanova {

/// Everything the `test` subcommand presents: group summaries, the uniqueness
/// condition, and one report per requested test in request order.
struct AnalysisReport {
    std::vector<std::string> labels;
    SummaryStats stats;
    Condition1Report condition1;
    std::vector<TestReport> tests;
};

void write_text_report(std::ostream& out, const AnalysisReport& report);

/// Structured output mirroring the TestReport fields field-for-field.
void write_json_report(std::ostream& out, const AnalysisReport& report);

/// One row per test: test,statistic,critical_value,p_value,alpha,reject,
/// ci_lower (|-separated, Max-D only).
void write_csv_report(std::ostream& out, const AnalysisReport& report);

}  // namespace treeanova
