#pragma once

#include <string>
#include <utility>
#include <vector>

namespace greencrit {

enum class Verdict { Finite, Divergent, Bounded, Unbounded, Inconclusive };

enum class Bracket { Exact, UpperBound, LowerBound };

enum class CriterionId {
    CondInt1,
    CondInt2,
    CondInt1b,
    Cond1,
    Cond2,
    Last1,
    Last2,
    CondM,
    Cond0,
    Conjecture2,
};

/// Finite or Bounded.
bool is_positive(Verdict v);
/// Divergent or Unbounded.
bool is_negative(Verdict v);

std::string to_string(Verdict v);
std::string to_string(Bracket b);
std::string to_string(CriterionId id);
/// Accepts the kebab-case names used on the command line ("cond-int1b", ...).
CriterionId parse_criterion_id(const std::string& name);

struct CriterionReport
{
    CriterionId criterion_id = CriterionId::Cond0;
    Verdict verdict = Verdict::Inconclusive;
    double truncated_value = 0.0;
    double tail_slope = 0.0;
    double constant_estimate = 0.0;
    Bracket bracket = Bracket::Exact;
    /// Additional key/value lines, emitted after the fixed keys in insertion order.
    std::vector<std::pair<std::string, std::string>> extras;
    /// (r, integrand or normalized sup) samples for plotting; not part of to_text().
    std::vector<std::pair<double, double>> samples;

    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    /// Value of an extra key, or empty.
    std::string extra(const std::string& key) const;

    /// "key = value" lines in fixed key order.
    std::string to_text() const;
};

/// Shortest round-trip decimal representation.
std::string format_number(double x);

} // namespace greencrit
