#pragma once

#include <stdexcept>
#include <string>

namespace greencrit {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Query outside the domain of a tabulated quantity or outside the range of R.
class OutOfRangeError : public Error
{
public:
    using Error::Error;
};

class PreconditionError : public Error
{
public:
    using Error::Error;
};

/// An improper integral that must converge (e.g. the tail of R) diverges.
class DivergenceError : public Error
{
public:
    using Error::Error;
};

/// Quadrature or fit did not reach the requested accuracy. Carries the best
/// estimate obtained before giving up.
class NumericalFailure : public Error
{
public:
    NumericalFailure(const std::string& what, double partial)
        : Error(what), partial_estimate(partial)
    {
    }

    double partial_estimate;
};

/// Critical-exponent scan bracket does not straddle a verdict change.
class BracketError : public Error
{
public:
    using Error::Error;
};

/// A constructive recipe refused to build a solution because its criterion failed.
class ConstructionRefused : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    ConfigError(const std::string& what, int line_number = 0)
        : Error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + what : what),
          line(line_number)
    {
    }

    int line;
};

} // namespace greencrit
