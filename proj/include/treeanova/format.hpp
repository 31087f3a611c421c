#pragma once

#include <string>

namespace treeanova {

/// Shortest decimal that round-trips to the same double; "nan"/"inf" for
/// non-finite values. Keeps CSV and report bytes stable across runs.
std::string format_double(double value);

}  // namespace treeanova
