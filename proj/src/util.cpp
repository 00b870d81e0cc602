#include "greencrit/util.hpp"

#include "greencrit/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace greencrit {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text)
{
    const std::string t = trim(text);
    double value = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    if (!t.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (t.empty() || ec != std::errc() || ptr != last)
        throw ConfigError("not a number: '" + t + "'");
    return value;
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_number(item));
    return out;
}

std::pair<std::string, std::string> split_spec(const std::string& spec)
{
    const std::string t = trim(spec);
    const auto colon = t.find(':');
    if (colon == std::string::npos)
        return {t, {}};
    return {trim(t.substr(0, colon)), trim(t.substr(colon + 1))};
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    std::vector<std::vector<double>> out(columns);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty())
            continue;
        std::vector<double> row;
        try {
            row = parse_number_list(line);
        } catch (const ConfigError&) {
            if (line_number == 1)
                continue;
            throw ConfigError(path + ": malformed row", line_number);
        }
        if (row.size() != columns)
            throw ConfigError(path + ": expected " + std::to_string(columns) + " columns", line_number);
        for (std::size_t c = 0; c < columns; ++c)
            out[c].push_back(row[c]);
    }
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

unsigned thread_count()
{
    if (const char* env = std::getenv("GREENCRIT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace greencrit
