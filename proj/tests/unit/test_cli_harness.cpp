#include "qnap/config.hpp"
#include "qnap/errors.hpp"
#include "qnap/experiment.hpp"
#include "qnap/render.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace qnap;
namespace fs = std::filesystem;

namespace
{
    const char *kSmall = R"({
      "schema": "v1",
      "experiment": "small",
      "model": {"builder": "baseline", "params": {"arrival_rate": 0.05}},
      "sweep": {"path": "model.params.arrival_rate", "values": [0.02, 0.05, 0.1], "label": "rate"},
      "replications": 3,
      "seed": 7,
      "horizon": 20000,
      "warmup": 2000,
      "outputs": ["csv", "svg", "table"],
      "plots": [{"name": "u", "title": "U", "y_label": "utilization",
                 "series": [{"station": "Controller", "class": "ALL", "metric": "utilization"}]}]
    })";

    std::string read(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / ("qnap_test_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }

    struct CliRun
    {
        int exit_code;
        std::string err;
    };

    CliRun run_cli(const std::string &args, const fs::path &dir)
    {
        const fs::path err = dir / "stderr.txt";
        const std::string cmd = std::string(QNAP_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() +
                                " 2> " + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read(err)};
    }

    fs::path write_config(const fs::path &dir, const std::string &name, const std::string &text)
    {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p;
    }
} // namespace

TEST_CASE("config parsing fills defaults and produces a stable canonical form")
{
    const auto cfg = parse_config(kSmall);
    CHECK(cfg.name == "small");
    CHECK(cfg.replications == 3);
    CHECK(cfg.model.baseline.controller_demand == 5.0);
    REQUIRE(cfg.sweep.has_value());
    CHECK(cfg.sweep->values.size() == 3);
    const auto again = parse_config(cfg.canonical);
    CHECK(again.canonical == cfg.canonical);
}

TEST_CASE("config errors name the offending field")
{
    auto error_of = [](const std::string &text) {
        try
        {
            parse_config(text);
        }
        catch (const ConfigError &e)
        {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(error_of("{not json").find("JSON") != std::string::npos);
    CHECK(error_of(R"({"schema": "v2", "experiment": "x", "model": {"builder": "baseline"}})").find("schema") !=
          std::string::npos);
    CHECK(error_of(R"({"schema": "v1", "experiment": "x", "model": {"builder": "baseline"}, "replicatons": 3})")
              .find("replicatons") != std::string::npos);
    CHECK(error_of(R"({"schema": "v1", "experiment": "x", "model": {"builder": "baseline"}, "replications": 1})")
              .find("replications") != std::string::npos);
    CHECK(error_of(R"({"schema": "v1", "experiment": "x", "model": {"builder": "baseline"},
                      "horizon": 100, "warmup": 200})")
              .find("warmup") != std::string::npos);
    CHECK(error_of(R"({"schema": "v1", "experiment": "x", "model": {"builder": "baseline"},
                      "sweep": {"path": "model.params.no_such_knob", "values": [1]}})")
              .find("model.params.no_such_knob") != std::string::npos);
    CHECK(error_of(R"({"schema": "v1", "experiment": "x", "model": {"builder": "baseline"},
                      "sweep": {"path": "seed", "values": []}})")
              .find("sweep.values") != std::string::npos);
    CHECK(error_of(R"({"schema": "v1", "experiment": "x", "model": {"builder": "teapot"}})").find("teapot") !=
          std::string::npos);
}

TEST_CASE("overrides re-validate and update the canonical form")
{
    const auto cfg = parse_config(kSmall);
    const auto o = with_override(cfg, "model.params.controller_demand", "3.5");
    CHECK(o.model.baseline.controller_demand == 3.5);
    CHECK(o.canonical != cfg.canonical);
    CHECK_THROWS_AS(with_override(cfg, "model.params.nope", "1"), ConfigError);
    CHECK_THROWS_AS(with_override(cfg, "replications", "1"), ConfigError);
    CHECK_THROWS_AS(with_override(cfg, "model.params.controller_demand", "\"fast\""), ConfigError);
}

TEST_CASE("inline networks and antipattern sections parse")
{
    const auto cfg = parse_config(R"({
      "schema": "v1", "experiment": "inline",
      "model": {"builder": "inline", "network": {
        "stations": [
          {"name": "Source", "kind": "source"},
          {"name": "Controller", "kind": "fcfs", "service": {"Analysis": {"kind": "exponential", "mean": 5.0}}},
          {"name": "Sink", "kind": "sink"}],
        "classes": [{"name": "Analysis", "mode": "open", "arrival": {"kind": "exponential", "rate": 0.03}}],
        "routing": {"Analysis": {"Source": [{"to": "Controller"}], "Controller": [{"to": "Sink", "p": 1.0}]}}}},
      "antipattern": {"kind": "is-everything-ok", "ieok": {"n_status": 2, "check_period": "inf"}},
      "replications": 2, "horizon": 1000, "warmup": 10})");
    const auto m = build_model(cfg);
    CHECK(m.find_class("Status") != nullptr);
    CHECK(m.find_station("StatusTimer")->service.at("Status").is_never());
    CHECK(parse_config(cfg.canonical).canonical == cfg.canonical);
}

TEST_CASE("output formats")
{
    CHECK(parse_output_formats("all").size() == 3);
    CHECK(parse_output_formats("csv") == std::set<OutputFormat>{OutputFormat::Csv});
    CHECK_THROWS_AS(parse_output_formats("pdf"), ConfigError);
}

TEST_CASE("csv has the fixed header and one row per estimate")
{
    EstimateRow r{"e", "p", "0.5", "Controller", "Analysis", Metric::Utilization, {0.25, 0.01, 10}, 42};
    const std::string csv = render_csv({r});
    CHECK(csv == std::string(kCsvHeader) + "\ne,p,0.5,Controller,Analysis,utilization,0.25,0.01,10,42\n");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(-0.0) == "0");
}

TEST_CASE("validation table layout and QN cells")
{
    ValidationRow original{"Analysis", 17.4, {17.8, 0.41, 10}, 0.4, 5.53, {5.35, 0.10, 10}, 3.18};
    const auto t1 = render_validation_table({original}, TableFormat{1});
    CHECK(t1.text.rfind("Job Class | EG [%] | QN [%] | Error [%] | EG [msec] | QN [msec] | Error [%]\n", 0) == 0);
    CHECK(t1.text.find("Analysis | 17.4 | 17.8 (±0.41) | 0.4 | 5.53 | 5.35 (±0.10) | 3.18\n") != std::string::npos);

    ValidationRow reproduced{"Analysis", 17.40, {18.18, 0.42, 10}, 0.78, 5.38, {5.33, 0.10, 10}, 0.92};
    CHECK(render_validation_table({reproduced}, TableFormat{2}).text.find("18.18 (±0.42)") != std::string::npos);

    ValidationRow zero{"Idle", 0.0, {0.0, 0.0, 10}, 0.0, 1.0, {1.0, 0.0, 10}, 0.0};
    CHECK(render_validation_table({zero}, TableFormat{1}).text.find("Idle | 0.0 | 0.0 (±0.00) | 0.0 |") !=
          std::string::npos);
    CHECK(t1.csv.find("class,eg_utilization_percent") == 0);
}

TEST_CASE("plots are deterministic and validate their series")
{
    PlotSeries s{"N_status", {1, 5, 10, 20}, {0.4, 0.45, 0.5, 0.6}, {0.01, 0.01, 0.02, 0.01}};
    PlotSpec spec{"t", "x", "y", false, true};
    const std::string a = render_plot({s}, spec);
    CHECK(a == render_plot({s}, spec));
    CHECK(a.rfind("<svg", 0) == 0);
    std::size_t markers = 0;
    for (std::size_t pos = a.find("r=\"3\""); pos != std::string::npos; pos = a.find("r=\"3\"", pos + 1))
        ++markers;
    CHECK(markers == 4);
    CHECK(a.find("min 0.4 at 1") != std::string::npos);

    PlotSeries bad = s;
    bad.y.pop_back();
    CHECK_THROWS_AS(render_plot({bad}, spec), ConfigError);
    PlotSeries shorter{"b", {1}, {1}, {0}};
    CHECK_THROWS_AS(render_plot({s, shorter}, spec), ConfigError);
    CHECK_THROWS_AS(render_plot({PlotSeries{}}, spec), ConfigError);
    spec.log_x = true;
    PlotSeries zero_x{"z", {0, 1}, {1, 2}, {0, 0}};
    CHECK_THROWS_AS(render_plot({zero_x}, spec), ConfigError);
}

TEST_CASE("seed derivation and worker count do not change results")
{
    CHECK(derive_seed(10, 0, 3) == (10u ^ 3u));
    CHECK(derive_seed(10, 5, 3) == derive_seed(10, 0, 3));
    const auto cfg = parse_config(kSmall);
    const auto one = simulate_experiment(cfg, 1);
    const auto three = simulate_experiment(cfg, 3);
    CHECK(render_csv(one.rows) == render_csv(three.rows));
    CHECK(one.points.size() == 3);
    CHECK(one.points[0].seeds == std::vector<std::uint64_t>{7, 6, 5});
}

TEST_CASE("run_experiment writes outputs and a manifest")
{
    const auto dir = scratch("run");
    const auto summary = run_experiment(parse_config(kSmall), RunOptions{dir, 1});
    for (const char *f : {"small.csv", "small_table.txt", "small_u.svg", "small_manifest.json"})
        CHECK(fs::exists(dir / f));
    CHECK(summary.files.back().filename() == "small_manifest.json");
    const std::string manifest = read(dir / "small_manifest.json");
    CHECK(manifest.find(sha256_hex(read(dir / "small.csv"))) != std::string::npos);
    CHECK(manifest.find("philox4x32-10/v1") != std::string::npos);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("failed runs leave no partial outputs")
{
    const auto dir = scratch("partial");
    // the plot refers to a class that does not exist, which is only detected while rendering
    auto cfg = parse_config(kSmall);
    cfg.plots[0].series[0].job_class = "Ghost";
    CHECK_THROWS_AS(run_experiment(cfg, RunOptions{dir, 1}), ConfigError);
    CHECK(fs::is_empty(dir));
}

TEST_CASE("cli: success, flag overrides and byte-identical reruns")
{
    const auto dir = scratch("cli_ok");
    const auto cfg = write_config(dir, "small.cfg", kSmall);
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (dir / "a").string(), dir).exit_code == 0);
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (dir / "b").string() + " --jobs 2", dir).exit_code == 0);
    for (const char *f : {"small.csv", "small_table.txt", "small_u.svg"})
        CHECK(read(dir / "a" / f) == read(dir / "b" / f));

    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (dir / "c").string() +
                        " --seed 99 --replications 2 --format csv",
                    dir)
                .exit_code == 0);
    CHECK(fs::exists(dir / "c" / "small.csv"));
    CHECK_FALSE(fs::exists(dir / "c" / "small_u.svg"));
    CHECK(read(dir / "c" / "small.csv").find(",2,99\n") != std::string::npos);
}

TEST_CASE("cli: unknown sweep path exits 2 and names the path")
{
    const auto dir = scratch("cli_bad");
    std::string text = kSmall;
    text.replace(text.find("model.params.arrival_rate"), 25, "model.params.arival_rate");
    const auto cfg = write_config(dir, "bad.cfg", text);
    const auto r = run_cli("--config " + cfg.string() + " --out " + (dir / "out").string(), dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("model.params.arival_rate") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));

    CHECK(run_cli("--config " + (dir / "missing.cfg").string(), dir).exit_code == 2);
    CHECK(run_cli("--config " + cfg.string() + " --bogus", dir).exit_code == 2);
}

TEST_CASE("cli: a deadlocking model exits 3")
{
    const auto dir = scratch("cli_deadlock");
    const auto cfg = write_config(dir, "dead.cfg", R"({
      "schema": "v1", "experiment": "dead",
      "model": {"builder": "inline", "network": {
        "stations": [
          {"name": "A", "kind": "fcfs", "service": {"Jobs": {"kind": "exponential", "rate": 1.0}}},
          {"name": "B", "kind": "fcfs", "service": {"Jobs": {"kind": "exponential", "rate": 1.0}}},
          {"name": "Sink", "kind": "sink"}],
        "classes": [{"name": "Jobs", "mode": "closed", "population": 2, "reference": "A"}],
        "routing": {"Jobs": {"A": [{"to": "B"}], "B": [{"to": "Sink"}]}}}},
      "replications": 2, "horizon": 1000, "warmup": 10})");
    const auto r = run_cli("--config " + cfg.string() + " --out " + (dir / "out").string(), dir);
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("Jobs") != std::string::npos);
}

TEST_CASE("cli: QNAP_JOBS is honoured only without --jobs")
{
    const auto dir = scratch("cli_env");
    const auto cfg = write_config(dir, "small.cfg", kSmall);
    CHECK(run_cli("--config " + cfg.string() + " --out " + (dir / "o").string(), dir).exit_code == 0);
    setenv("QNAP_JOBS", "zero", 1);
    CHECK(run_cli("--config " + cfg.string() + " --out " + (dir / "o").string(), dir).exit_code == 2);
    CHECK(run_cli("--config " + cfg.string() + " --out " + (dir / "o").string() + " --jobs 2", dir).exit_code == 0);
    unsetenv("QNAP_JOBS");
}
