#include "treeanova/table_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "treeanova/format.hpp"

namespace treeanova {

namespace {

std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

[[noreturn]] void fail(std::size_t row, const std::string& message) {
    throw DataError("row " + std::to_string(row) + ": " + message);
}

double parse_value(const std::string& text, std::size_t row) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        fail(row, "non-numeric value '" + text + "'");
    }
    if (!std::isfinite(value)) fail(row, "value must be finite");
    return value;
}

}  // namespace

InputTable ingest_csv(std::istream& in, const std::string& control_label) {
    std::string line;
    std::size_t row = 0;

    if (!std::getline(in, line)) throw DataError("empty input: missing header row");
    ++row;
    if (trim(line) != "group,value") {
        throw DataError("row 1: expected header 'group,value', got '" + trim(line) + "'");
    }

    std::vector<std::string> labels;
    std::vector<std::vector<double>> groups;

    while (std::getline(in, line)) {
        ++row;
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;

        const auto comma = trimmed.find(',');
        if (comma == std::string::npos) fail(row, "expected 'group,value'");
        const std::string label = trim(trimmed.substr(0, comma));
        if (label.empty()) fail(row, "empty group label");
        const double value = parse_value(trim(trimmed.substr(comma + 1)), row);

        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) {
            labels.push_back(label);
            groups.emplace_back();
            it = labels.end() - 1;
        }
        groups[static_cast<std::size_t>(it - labels.begin())].push_back(value);
    }

    const auto control = std::find(labels.begin(), labels.end(), control_label);
    if (control == labels.end()) {
        throw DataError("control group '" + control_label + "' not found in input");
    }
    if (labels.size() < 2) {
        throw DataError("at least one treatment group is required besides the control");
    }

    InputTable table;
    const auto control_index = static_cast<std::size_t>(control - labels.begin());
    table.labels.push_back(labels[control_index]);
    table.data.groups.push_back(std::move(groups[control_index]));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i == control_index) continue;
        table.labels.push_back(labels[i]);
        table.data.groups.push_back(std::move(groups[i]));
    }

    for (std::size_t i = 0; i < table.labels.size(); ++i) {
        if (table.data.groups[i].size() < 2) {
            throw DataError("group '" + table.labels[i] + "' has " +
                            std::to_string(table.data.groups[i].size()) +
                            " observations; at least 2 required");
        }
    }
    return table;
}

InputTable ingest_csv(const std::string& path, const std::string& control_label) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open input file '" + path + "'");
    return ingest_csv(file, control_label);
}

void export_csv(std::ostream& out, const InputTable& table) {
    out << "group,value\n";
    for (std::size_t i = 0; i < table.labels.size(); ++i) {
        for (double value : table.data.groups[i]) {
            out << table.labels[i] << "," << format_double(value) << "\n";
        }
    }
}

}  // namespace treeanova
