#pragma once

// Run configuration for the command-line front end.
//
// Format: `[section]` headers followed by `key = value` lines; `#` and `;`
// start comments. Keys are addressed as `section.key` (top-level keys have no
// prefix), which is also the syntax accepted by --override.

#include "greencrit/criteria.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace greencrit {

struct RawEntry
{
    std::string value;
    int line = 0; ///< 0 for overrides
};

using RawConfig = std::map<std::string, RawEntry>;

/// Throws ConfigError with the offending line number.
RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::string& path);

/// "section.key=value"; the value may be empty.
void apply_override(RawConfig& raw, const std::string& assignment);

struct RunConfig
{
    // [profile] / [measure] / [metric]
    std::string profile = "euclidean:3";
    std::string measure = "unit";
    std::string metric; ///< empty: no metric

    // [grid]
    GridSpec grid;
    double quad_rel_tol = 1e-10;

    // [task]
    std::string criterion = "cond-int1b"; ///< criterion name, or "main" / "thm3"
    double q = 4.0;
    double r0 = 1.0;
    double a = 0.0; ///< 0: 1/R(r0)
    std::size_t center_samples = 8;
    double alpha = 0.0;

    // [scan]
    double q_lo = 1.1;
    double q_hi = 10.0;
    double tol = 1e-3;
    std::size_t scan_points = 9;

    // [solve]
    std::size_t max_iters = 10000;
    double picard_tol = 1e-12;

    // [verify]
    std::vector<std::string> suite{"full"};
    std::size_t trials = 500;
    std::vector<double> lem_r_s{1.5, 2.0, 3.0};
    std::vector<double> level_radii{2.0, 10.0, 100.0};
    std::vector<double> moser_q{1.5, 2.0, 3.0};
    std::size_t moser_j = 60;
    std::size_t hardy_trials = 200;
    std::vector<double> hardy_s{0.25, 0.5, 0.75};
    std::size_t harnack_shell = 0; ///< 0: the shell nearest r0
    std::string corrupt;           ///< "symmetry": perturb one matrix entry (negative control)

    std::uint64_t seed = 42;

    // [output]
    std::string output_dir = ".";
    std::string prefix = "greencrit";

    /// Throws ConfigError on inconsistent values.
    void validate() const;
    /// Criterion inputs with parsed profiles (the metric is built when named).
    CriterionParams criterion_params() const;
    /// Every key in canonical order, for echoing into reports.
    std::string to_text() const;
};

/// Unknown keys and malformed values raise ConfigError with line diagnostics.
RunConfig build_run_config(const RawConfig& raw);

} // namespace greencrit
