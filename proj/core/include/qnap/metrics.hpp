#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace qnap
{
    enum class Metric : std::uint8_t
    {
        Utilization,
        ResponseTime,   // msec
        Throughput,     // per msec
        QueueLength,    // time-average number of jobs
        DroppedCount,
        DroppedRate,    // per msec
    };

    /// "utilization", "response-time-msec", "throughput-per-msec",
    /// "queue-length", "dropped-count", "dropped-rate-per-msec"
    std::string to_string(Metric metric);
    std::optional<Metric> parse_metric(const std::string &text);

    /// Class name used for per-station totals over every class.
    inline constexpr const char *kAllClasses = "ALL";

    struct MetricKey
    {
        std::string station;
        std::string job_class;
        Metric metric = Metric::Utilization;

        friend auto operator<=>(const MetricKey &, const MetricKey &) = default;
    };

    struct MetricSample
    {
        std::string station;
        std::string job_class;
        Metric metric = Metric::Utilization;
        double value = 0.0;

        MetricKey key() const { return {station, job_class, metric}; }
        friend bool operator==(const MetricSample &, const MetricSample &) = default;
    };

    /// Output of one seeded run: exactly one sample per (station, class,
    /// metric) key.
    struct ReplicationResult
    {
        std::uint64_t seed = 0;
        double horizon = 0.0;
        double warmup = 0.0;
        std::vector<MetricSample> samples;

        std::optional<double> value(const std::string &station, const std::string &job_class, Metric metric) const;
        friend bool operator==(const ReplicationResult &, const ReplicationResult &) = default;
    };

    struct ConfidenceInterval
    {
        static constexpr double kLevel = 0.99;

        double mean = 0.0;
        double half_width = 0.0;
        std::size_t n = 0;

        double lower() const noexcept { return mean - half_width; }
        double upper() const noexcept { return mean + half_width; }
        bool covers(double x) const noexcept { return lower() <= x && x <= upper(); }
    };

    /// Two-sided 99% Student-t quantile, i.e. t(0.995, dof).
    double t_quantile_995(std::size_t dof);

    /// Mean and 99% confidence interval over independent observations.
    /// Observations are summed in ascending order, so the result does not
    /// depend on the order they are supplied in. Throws StatsError for n < 2.
    ConfidenceInterval confidence_interval(std::span<const double> observations);

    /// Independent-replications estimate of one metric. Throws StatsError
    /// when fewer than 2 results are given, when they disagree on horizon or
    /// warmup, or when the key is missing from a result.
    ConfidenceInterval estimate(std::span<const ReplicationResult> results, const std::string &station,
                                const std::string &job_class, Metric metric);

    /// Per-key collection of replication values. Values are kept sorted, so
    /// merging is exactly associative and commutative and estimates do not
    /// depend on the fan-in order.
    class MetricAccumulator
    {
    public:
        MetricAccumulator() = default;
        explicit MetricAccumulator(const ReplicationResult &result);

        void add(const ReplicationResult &result);

        bool empty() const noexcept { return values_.empty(); }
        std::size_t replications() const noexcept { return replications_; }
        std::vector<MetricKey> keys() const;
        const std::vector<double> &values(const MetricKey &key) const;
        ConfidenceInterval estimate(const MetricKey &key) const;

        friend bool operator==(const MetricAccumulator &, const MetricAccumulator &) = default;

    private:
        friend MetricAccumulator merge(const MetricAccumulator &a, const MetricAccumulator &b);

        std::map<MetricKey, std::vector<double>> values_;
        std::size_t replications_ = 0;
    };

    /// Throws StatsError when both sides are non-empty and their key sets
    /// differ.
    MetricAccumulator merge(const MetricAccumulator &a, const MetricAccumulator &b);

    /// |eg - qn| in percentage points.
    double utilization_error(double eg_percent, double qn_mean_percent);

    /// 100 * |eg - qn| / qn. Throws StatsError when qn_mean <= 0.
    double response_time_error(double eg_msec, double qn_mean_msec);

    struct ValidationRow
    {
        std::string class_name;
        double eg_utilization = 0.0;            // percent
        ConfidenceInterval qn_utilization;      // percent
        double utilization_error = 0.0;         // percentage points
        double eg_response_time = 0.0;          // msec
        ConfidenceInterval qn_response_time;    // msec
        double response_time_error = 0.0;       // percent
    };
} // namespace qnap
