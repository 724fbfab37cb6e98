#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tmc {

// Shortest decimal form that parses back to the same double ("137", "0.1").
// Used everywhere a double is written to CSV so outputs are byte-stable.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::vector<std::string> split_csv_line(std::string_view line);
std::string join_csv(const std::vector<std::string>& fields);

}  // namespace tmc
