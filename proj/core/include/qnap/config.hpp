#pragma once

#include "qnap/antipatterns.hpp"
#include "qnap/builders.hpp"
#include "qnap/eg_solver.hpp"
#include "qnap/metrics.hpp"
#include "qnap/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qnap
{
    enum class OutputFormat : std::uint8_t
    {
        Csv,
        Svg,
        Table,
    };

    std::string to_string(OutputFormat format);
    /// "csv", "svg", "table" or "all".
    std::set<OutputFormat> parse_output_formats(const std::string &text);

    struct ModelSpec
    {
        // "baseline", "sensor_net" or "inline"
        std::string builder = "baseline";
        BaselineParams baseline;
        SensorNetParams sensor_net;
        NetworkModel network; // inline only
    };

    struct SeriesSpec
    {
        std::string station;
        std::string job_class;
        Metric metric = Metric::Utilization;
        std::string label;
    };

    struct PlotConfig
    {
        std::string name;
        std::string title;
        std::string y_label;
        bool log_x = false;
        bool annotate_min = false;
        std::vector<SeriesSpec> series;
    };

    struct SweepSpec
    {
        std::string path;                 // dotted path into the canonical config
        std::vector<std::string> values;  // JSON-encoded values
        std::string label;                // x-axis label
    };

    struct ValidationSpec
    {
        std::string station = "Controller"; // resource whose utilization is compared
        int percent_decimals = 2;
        std::vector<eg::Scenario> scenarios;
    };

    /// Parsed experiment configuration (schema v1). `canonical` holds the
    /// configuration re-serialized with every default filled in; it is what
    /// sweep paths resolve against and what the manifest digest covers.
    struct ExperimentConfig
    {
        std::string name = "experiment";
        std::string description;
        ModelSpec model;
        std::optional<AntipatternSpec> antipattern;
        std::optional<SweepSpec> sweep;
        std::size_t replications = 10;
        std::uint64_t seed = 1;
        double horizon = 1e6; // msec
        double warmup = 1e5;  // msec
        std::set<OutputFormat> outputs{OutputFormat::Csv, OutputFormat::Svg, OutputFormat::Table};
        std::vector<PlotConfig> plots;
        std::optional<ValidationSpec> validation;

        std::string canonical;
    };

    inline constexpr const char *kSchemaVersion = "v1";

    /// Throws ConfigError with a message naming the offending field.
    ExperimentConfig parse_config(const std::string &text);
    ExperimentConfig load_config(const std::filesystem::path &path);

    /// Returns the configuration with the value at `path` (dotted, array
    /// indices as numbers) replaced by `json_value`. The path must already
    /// exist in the canonical configuration.
    ExperimentConfig with_override(const ExperimentConfig &config, const std::string &path,
                                   const std::string &json_value);

    /// Builds the configured model and applies the configured antipattern.
    NetworkModel build_model(const ExperimentConfig &config);

    /// Parses a standalone inline network description (the "network" object
    /// of an inline model).
    NetworkModel parse_network(const std::string &json_text);
} // namespace qnap
