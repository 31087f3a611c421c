#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "treeanova/data.hpp"

namespace treeanova {

/// Long-format observations with their group labels; labels[0] is the
/// designated control group and data.groups follows the same order.
struct InputTable {
    std::vector<std::string> labels;
    GroupedData data;
};

/// Reads long-format CSV with header `group,value`. The control label lands
/// at index 0; treatments keep first-appearance order. Errors carry 1-based
/// row numbers (the header is row 1).
InputTable ingest_csv(std::istream& in, const std::string& control_label);
InputTable ingest_csv(const std::string& path, const std::string& control_label);

/// Inverse of ingest_csv at full precision (values round-trip exactly).
void export_csv(std::ostream& out, const InputTable& table);

}  // namespace treeanova
