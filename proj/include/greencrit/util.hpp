#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace greencrit {

/// Reads a numeric CSV with exactly `columns` columns; a non-numeric first
/// line is skipped as a header.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns);

/// "name:args" -> (name, args); args empty when there is no colon.
std::pair<std::string, std::string> split_spec(const std::string& spec);

/// Comma-separated numbers; throws ConfigError on malformed input.
std::vector<double> parse_number_list(const std::string& text);
double parse_number(const std::string& text);

std::string trim(const std::string& s);

/// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(const std::string& s);

/// Worker count: GREENCRIT_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

} // namespace greencrit
