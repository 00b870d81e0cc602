// greencrit {report|scan|solve|verify} --config PATH [--override key=value]...

#include "greencrit/cli.hpp"
#include "greencrit/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv)
{
    CLI::App app{"Existence criteria for positive solutions of Delta u + sigma u^q <= 0 on model manifolds"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    // Shorthands for the most common overrides.
    std::optional<std::string> criterion, profile, measure, metric, output, q;

    for (const char* name : {"report", "scan", "solve", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (INI-style sections)");
        sub->add_option("--override", overrides, "section.key=value, applied after the file")->allow_extra_args(false);
        sub->add_option("--criterion", criterion, "task.criterion");
        sub->add_option("--profile", profile, "profile.spec, e.g. euclidean:3");
        sub->add_option("--measure", measure, "measure.spec, e.g. radial_power:1,1");
        sub->add_option("--metric", metric, "metric.spec, e.g. snowflake:1,3,2");
        sub->add_option("--q", q, "task.q");
        sub->add_option("--output", output, "output.dir");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    greencrit::RunConfig config;
    try {
        greencrit::RawConfig raw;
        if (!config_path.empty())
            raw = greencrit::parse_config_file(config_path);
        auto shorthand = [&raw](const char* key, const std::optional<std::string>& v) {
            if (v)
                raw[key] = greencrit::RawEntry{*v, 0};
        };
        shorthand("task.criterion", criterion);
        shorthand("profile.spec", profile);
        shorthand("measure.spec", measure);
        shorthand("metric.spec", metric);
        shorthand("output.dir", output);
        shorthand("task.q", q);
        for (const auto& o : overrides)
            greencrit::apply_override(raw, o);
        config = greencrit::build_run_config(raw);
    } catch (const greencrit::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return greencrit::kExitConfig;
    }
    return greencrit::run_command(command, config, std::cout, std::cerr);
}
