// qnap: run a queueing-network experiment described by a config file.

#include "qnap/config.hpp"
#include "qnap/errors.hpp"
#include "qnap/experiment.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace
{
    enum ExitCode
    {
        kOk = 0,
        kFailure = 1,
        kConfigError = 2,
        kDeadlock = 3,
    };

    std::size_t jobs_from_env()
    {
        const char *env = std::getenv("QNAP_JOBS");
        if (env == nullptr || *env == '\0')
            return 1;
        try
        {
            std::size_t used = 0;
            const long v = std::stol(env, &used);
            if (used == std::string(env).size() && v >= 1)
                return static_cast<std::size_t>(v);
        }
        catch (const std::exception &)
        {
        }
        throw qnap::ConfigError(fmt::format("QNAP_JOBS must be a positive integer, got '{}'", env));
    }

    int run(int argc, char **argv)
    {
        CLI::App app{"Simulate queueing-network performance models of cyber-physical systems."};
        app.set_version_flag("--version", qnap::tool_version());

        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> replications;
        std::optional<double> horizon;
        std::optional<double> warmup;
        std::optional<std::size_t> jobs;
        std::string out_dir = "out";
        std::optional<std::string> format;
        std::vector<std::string> sets;

        app.add_option("-c,--config", config_path, "experiment config file")->required();
        app.add_option("--seed", seed, "base seed (replication r uses seed XOR r)");
        app.add_option("--replications", replications, "independent replications per point")
            ->check(CLI::PositiveNumber);
        app.add_option("--horizon", horizon, "simulated time per replication [msec]");
        app.add_option("--warmup", warmup, "discarded initial period [msec]");
        app.add_option("-j,--jobs", jobs, "worker threads (default: $QNAP_JOBS or 1)")->check(CLI::PositiveNumber);
        app.add_option("-o,--out", out_dir, "output directory")->capture_default_str();
        app.add_option("--format", format, "csv, svg, table or all")
            ->check(CLI::IsMember({"csv", "svg", "table", "all"}));
        app.add_option("--set", sets, "override a config value: dotted.path=<json>");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &e)
        {
            return app.exit(e);
        }
        catch (const CLI::CallForVersion &e)
        {
            return app.exit(e);
        }
        catch (const CLI::ParseError &e)
        {
            app.exit(e);
            return kConfigError;
        }

        qnap::ExperimentConfig cfg = qnap::load_config(config_path);
        for (const std::string &s : sets)
        {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0)
                throw qnap::ConfigError(fmt::format("--set expects path=value, got '{}'", s));
            cfg = qnap::with_override(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (seed)
            cfg = qnap::with_override(cfg, "seed", std::to_string(*seed));
        if (replications)
            cfg = qnap::with_override(cfg, "replications", std::to_string(*replications));
        if (horizon)
            cfg = qnap::with_override(cfg, "horizon", fmt::format("{:.17g}", *horizon));
        if (warmup)
            cfg = qnap::with_override(cfg, "warmup", fmt::format("{:.17g}", *warmup));
        if (format)
            cfg = qnap::with_override(cfg, "outputs", fmt::format("[\"{}\"]", *format));

        qnap::RunOptions options;
        options.out_dir = out_dir;
        options.jobs = jobs ? *jobs : jobs_from_env();
        const qnap::RunSummary summary = qnap::run_experiment(cfg, options);
        for (const auto &f : summary.files)
            std::cout << f.string() << '\n';
        return kOk;
    }
} // namespace

int main(int argc, char **argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const qnap::ConfigError &e)
    {
        std::cerr << "qnap: config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const qnap::DeadlockError &e)
    {
        std::cerr << "qnap: deadlock: " << e.what() << '\n';
        return kDeadlock;
    }
    catch (const std::exception &e)
    {
        std::cerr << "qnap: error: " << e.what() << '\n';
        return kFailure;
    }
}
