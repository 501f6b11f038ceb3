#pragma once

#include "qnap/config.hpp"
#include "qnap/metrics.hpp"
#include "qnap/model.hpp"
#include "qnap/render.hpp"
#include "qnap/sim_time.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qnap
{
    /// Replication seed: base_seed XOR replication. The sweep index is
    /// deliberately not mixed in, so every sweep point reuses the same seeds
    /// (common random numbers).
    std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t sweep_index, std::size_t replication) noexcept;

    /// Runs one replication per seed on up to `jobs` worker threads. The
    /// result order follows `seeds` and never depends on `jobs`.
    std::vector<ReplicationResult> run_replications(const NetworkModel &model, std::span<const std::uint64_t> seeds,
                                                    SimTime horizon, SimTime warmup, std::size_t jobs);

    struct SweepPoint
    {
        std::string value; // JSON text, empty without a sweep
        double x = 0.0;    // numeric value for plotting
        std::vector<std::uint64_t> seeds;
        MetricAccumulator metrics;
    };

    struct ExperimentResult
    {
        std::vector<SweepPoint> points;
        std::vector<EstimateRow> rows;
        std::optional<std::vector<ValidationRow>> validation;
    };

    /// Simulates every sweep point. Pure in (config, jobs): no files written.
    ExperimentResult simulate_experiment(const ExperimentConfig &config, std::size_t jobs);

    struct RunOptions
    {
        std::filesystem::path out_dir = "out";
        std::size_t jobs = 1;
    };

    struct RunSummary
    {
        ExperimentResult result;
        std::vector<std::filesystem::path> files; // outputs, manifest last
    };

    /// Simulates and writes the configured outputs plus a manifest into
    /// out_dir. Files already written are removed if a later step fails.
    RunSummary run_experiment(const ExperimentConfig &config, const RunOptions &options);

    /// Lowercase hex SHA-256.
    std::string sha256_hex(const std::string &bytes);

    std::string tool_version();
} // namespace qnap
