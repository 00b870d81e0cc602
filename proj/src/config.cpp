#include "greencrit/config.hpp"

#include "greencrit/error.hpp"
#include "greencrit/util.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace greencrit {

namespace {

std::string join_numbers(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += (i ? "," : "") + format_number(xs[i]);
    return out;
}

std::string join_words(const std::vector<std::string>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += (i ? "," : "") + xs[i];
    return out;
}

std::vector<std::string> split_words(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

std::size_t parse_count(const std::string& text)
{
    const double v = parse_number(text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15)
        throw ConfigError("not a non-negative integer: '" + trim(text) + "'");
    return static_cast<std::size_t>(v);
}

struct Key
{
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define GC_STRING(key, field)                                                                   \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = trim(v); },                   \
        [](const RunConfig& c) { return c.field; }}
#define GC_NUMBER(key, field)                                                                   \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = parse_number(v); },           \
        [](const RunConfig& c) { return format_number(c.field); }}
#define GC_COUNT(key, field)                                                                    \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = parse_count(v); },            \
        [](const RunConfig& c) { return std::to_string(c.field); }}
#define GC_LIST(key, field)                                                                     \
    Key{key, [](RunConfig& c, const std::string& v) { c.field = parse_number_list(v); },      \
        [](const RunConfig& c) { return join_numbers(c.field); }}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        Key{"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_count(v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
        GC_STRING("profile.spec", profile),
        GC_STRING("measure.spec", measure),
        GC_STRING("metric.spec", metric),
        GC_NUMBER("grid.r_min", grid.r_min),
        GC_NUMBER("grid.r_max", grid.r_max),
        GC_COUNT("grid.n", grid.n),
        GC_NUMBER("grid.quad_rel_tol", quad_rel_tol),
        GC_STRING("task.criterion", criterion),
        GC_NUMBER("task.q", q),
        GC_NUMBER("task.r0", r0),
        GC_NUMBER("task.a", a),
        GC_COUNT("task.center_samples", center_samples),
        GC_NUMBER("task.alpha", alpha),
        GC_NUMBER("scan.q_lo", q_lo),
        GC_NUMBER("scan.q_hi", q_hi),
        GC_NUMBER("scan.tol", tol),
        GC_COUNT("scan.points", scan_points),
        GC_COUNT("solve.max_iters", max_iters),
        GC_NUMBER("solve.tol", picard_tol),
        Key{"verify.suite", [](RunConfig& c, const std::string& v) { c.suite = split_words(v); },
            [](const RunConfig& c) { return join_words(c.suite); }},
        GC_COUNT("verify.trials", trials),
        GC_LIST("verify.lem_r_s", lem_r_s),
        GC_LIST("verify.level_radii", level_radii),
        GC_LIST("verify.moser_q", moser_q),
        GC_COUNT("verify.moser_j", moser_j),
        GC_COUNT("verify.hardy_trials", hardy_trials),
        GC_LIST("verify.hardy_s", hardy_s),
        GC_COUNT("verify.harnack_shell", harnack_shell),
        GC_STRING("verify.corrupt", corrupt),
        GC_STRING("output.dir", output_dir),
        GC_STRING("output.prefix", prefix),
    };
    return table;
}

#undef GC_STRING
#undef GC_NUMBER
#undef GC_COUNT
#undef GC_LIST

bool is_q(double q) { return q > 1.0 && std::isfinite(q); }

} // namespace

RawConfig parse_config_text(const std::string& text)
{
    RawConfig out;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(ss, line)) {
        ++number;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("unterminated section header", number);
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty() || section.find_first_of(" \t.=") != std::string::npos)
                throw ConfigError("bad section name '" + section + "'", number);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", number);
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        const auto hash = value.rfind('#', 0) == 0 ? 0 : value.find(" #");
        if (hash != std::string::npos)
            value = trim(value.substr(0, hash));
        if (key.empty())
            throw ConfigError("empty key", number);
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full))
            throw ConfigError("duplicate key '" + full + "'", number);
        out[full] = RawEntry{value, number};
    }
    return out;
}

RawConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config_text(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void apply_override(RawConfig& raw, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty())
        throw ConfigError("override '" + assignment + "' has an empty key");
    raw[key] = RawEntry{trim(assignment.substr(eq + 1)), 0};
}

RunConfig build_run_config(const RawConfig& raw)
{
    RunConfig cfg;
    for (const auto& [name, entry] : raw) {
        const Key* key = nullptr;
        for (const auto& k : keys())
            if (name == k.name)
                key = &k;
        if (!key)
            throw ConfigError("unknown key '" + name + "'", entry.line);
        try {
            key->set(cfg, entry.value);
        } catch (const ConfigError& e) {
            throw ConfigError(name + ": " + e.what(), entry.line);
        }
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const
{
    if (!(grid.r_min > 0.0 && grid.r_min < grid.r_max))
        throw ConfigError("grid: need 0 < r_min < r_max");
    if (grid.n < 8)
        throw ConfigError("grid: n must be at least 8");
    if (!(quad_rel_tol > 0.0 && quad_rel_tol < 1e-2))
        throw ConfigError("grid: quad_rel_tol must lie in (0, 1e-2)");
    if (!is_q(q))
        throw ConfigError("task: q must exceed 1");
    if (!(r0 > 0.0))
        throw ConfigError("task: r0 must be positive");
    if (a < 0.0)
        throw ConfigError("task: a must be non-negative");
    if (center_samples < 2)
        throw ConfigError("task: center_samples must be at least 2");
    if (!is_q(q_lo) || !(q_hi > q_lo))
        throw ConfigError("scan: need 1 < q_lo < q_hi");
    if (!(tol > 0.0))
        throw ConfigError("scan: tol must be positive");
    if (scan_points < 2)
        throw ConfigError("scan: points must be at least 2");
    if (max_iters == 0 || !(picard_tol > 0.0))
        throw ConfigError("solve: max_iters and tol must be positive");
    for (double s : lem_r_s)
        if (!(s >= 1.0))
            throw ConfigError("verify: lem_r_s entries must be at least 1");
    for (double r : level_radii)
        if (!(r > 0.0))
            throw ConfigError("verify: level_radii must be positive");
    for (double mq : moser_q)
        if (!is_q(mq))
            throw ConfigError("verify: moser_q entries must exceed 1");
    if (moser_j < 2)
        throw ConfigError("verify: moser_j must be at least 2");
    for (double s : hardy_s)
        if (!(s > 0.0 && s < 1.0))
            throw ConfigError("verify: hardy_s entries must lie in (0, 1)");
    if (!corrupt.empty() && corrupt != "symmetry")
        throw ConfigError("verify: corrupt must be empty or 'symmetry'");
    static const std::vector<std::string> suites = {"full", "kernel", "lem-r", "weighted-norm", "harnack",
                                                    "level-set", "moser", "hardy", "3g"};
    if (suite.empty())
        throw ConfigError("verify: empty suite");
    for (const auto& s : suite) {
        bool known = false;
        for (const auto& k : suites)
            known = known || s == k;
        if (!known)
            throw ConfigError("verify: unknown suite '" + s + "'");
    }
    if (criterion != "main" && criterion != "thm3")
        parse_criterion_id(criterion);
    if (prefix.empty() || prefix.find('/') != std::string::npos)
        throw ConfigError("output: prefix must be a plain file name");
}

CriterionParams RunConfig::criterion_params() const
{
    CriterionParams p;
    p.volume = parse_volume_spec(profile);
    p.measure = parse_measure_spec(measure);
    p.r0 = r0;
    p.center_samples = center_samples;
    p.grid = grid;
    p.a = a;
    p.kernel.quad_rel_tol = quad_rel_tol;
    p.alpha = alpha;
    if (!metric.empty()) {
        if (split_spec(metric).first == "inverse_r") {
            const GreenRadialKernel kernel(p.volume, p.kernel);
            p.metric = parse_metric_spec(metric, &kernel);
        } else {
            p.metric = parse_metric_spec(metric, nullptr);
        }
    }
    return p;
}

std::string RunConfig::to_text() const
{
    std::string out;
    for (const auto& k : keys())
        out += std::string(k.name) + " = " + k.get(*this) + "\n";
    return out;
}

} // namespace greencrit
