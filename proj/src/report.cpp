#include "greencrit/report.hpp"

#include "greencrit/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace greencrit {

bool is_positive(Verdict v)
{
    return v == Verdict::Finite || v == Verdict::Bounded;
}

bool is_negative(Verdict v)
{
    return v == Verdict::Divergent || v == Verdict::Unbounded;
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Finite: return "Finite";
    case Verdict::Divergent: return "Divergent";
    case Verdict::Bounded: return "Bounded";
    case Verdict::Unbounded: return "Unbounded";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

std::string to_string(Bracket b)
{
    switch (b) {
    case Bracket::Exact: return "Exact";
    case Bracket::UpperBound: return "UpperBound";
    case Bracket::LowerBound: return "LowerBound";
    }
    return "Exact";
}

namespace {

struct IdName
{
    CriterionId id;
    const char* display;
    const char* cli;
};

constexpr IdName kIdNames[] = {
    {CriterionId::CondInt1, "CondInt1", "cond-int1"},
    {CriterionId::CondInt2, "CondInt2", "cond-int2"},
    {CriterionId::CondInt1b, "CondInt1b", "cond-int1b"},
    {CriterionId::Cond1, "Cond1", "cond-1"},
    {CriterionId::Cond2, "Cond2", "cond-2"},
    {CriterionId::Last1, "Last1", "last-1"},
    {CriterionId::Last2, "Last2", "last-2"},
    {CriterionId::CondM, "CondM", "cond-m"},
    {CriterionId::Cond0, "Cond0", "cond-0"},
    {CriterionId::Conjecture2, "Conjecture2", "conjecture-2"},
};

} // namespace

std::string to_string(CriterionId id)
{
    for (const auto& entry : kIdNames)
        if (entry.id == id)
            return entry.display;
    return "Unknown";
}

CriterionId parse_criterion_id(const std::string& name)
{
    for (const auto& entry : kIdNames)
        if (name == entry.cli || name == entry.display)
            return entry.id;
    throw ConfigError("unknown criterion '" + name + "'");
}

void CriterionReport::add(const std::string& key, const std::string& value)
{
    extras.emplace_back(key, value);
}

void CriterionReport::add(const std::string& key, double value)
{
    extras.emplace_back(key, format_number(value));
}

std::string CriterionReport::extra(const std::string& key) const
{
    for (const auto& [k, v] : extras)
        if (k == key)
            return v;
    return {};
}

std::string CriterionReport::to_text() const
{
    std::string out;
    out += "criterion_id = " + to_string(criterion_id) + "\n";
    out += "verdict = " + to_string(verdict) + "\n";
    out += "truncated_value = " + format_number(truncated_value) + "\n";
    out += "tail_slope = " + format_number(tail_slope) + "\n";
    out += "constant_estimate = " + format_number(constant_estimate) + "\n";
    out += "bracket = " + to_string(bracket) + "\n";
    for (const auto& [k, v] : extras)
        out += k + " = " + v + "\n";
    return out;
}

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return fmt::format("{}", x);
}

} // namespace greencrit
