#include "qnap/metrics.hpp"

#include "qnap/errors.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

namespace qnap
{
    std::string to_string(Metric metric)
    {
        switch (metric)
        {
        case Metric::Utilization:
            return "utilization";
        case Metric::ResponseTime:
            return "response-time-msec";
        case Metric::Throughput:
            return "throughput-per-msec";
        case Metric::QueueLength:
            return "queue-length";
        case Metric::DroppedCount:
            return "dropped-count";
        case Metric::DroppedRate:
            return "dropped-rate-per-msec";
        }
        return "?";
    }

    std::optional<Metric> parse_metric(const std::string &text)
    {
        for (auto m : {Metric::Utilization, Metric::ResponseTime, Metric::Throughput, Metric::QueueLength,
                       Metric::DroppedCount, Metric::DroppedRate})
            if (to_string(m) == text)
                return m;
        return std::nullopt;
    }

    std::optional<double> ReplicationResult::value(const std::string &station, const std::string &job_class,
                                                   Metric metric) const
    {
        for (const MetricSample &s : samples)
            if (s.metric == metric && s.station == station && s.job_class == job_class)
                return s.value;
        return std::nullopt;
    }

    double t_quantile_995(std::size_t dof)
    {
        if (dof == 0)
        {
            throw StatsError("t quantile needs at least one degree of freedom");
        }
        const boost::math::students_t dist(static_cast<double>(dof));
        return boost::math::quantile(dist, 0.995);
    }

    namespace
    {
        // Neumaier-compensated sum of values in the given (sorted) order.
        double compensated_sum(std::span<const double> values)
        {
            double sum = 0.0;
            double carry = 0.0;
            for (double v : values)
            {
                const double t = sum + v;
                if (std::abs(sum) >= std::abs(v))
                    carry += (sum - t) + v;
                else
                    carry += (v - t) + sum;
                sum = t;
            }
            return sum + carry;
        }

        ConfidenceInterval interval_from_sorted(std::span<const double> sorted)
        {
            const std::size_t n = sorted.size();
            if (n < 2)
            {
                throw StatsError(fmt::format("a confidence interval needs at least 2 observations, got {}", n));
            }
            const double mean = compensated_sum(sorted) / static_cast<double>(n);
            std::vector<double> squares;
            squares.reserve(n);
            for (double v : sorted)
                squares.push_back((v - mean) * (v - mean));
            std::sort(squares.begin(), squares.end());
            const double variance = compensated_sum(squares) / static_cast<double>(n - 1);
            const double half = t_quantile_995(n - 1) * std::sqrt(variance) / std::sqrt(static_cast<double>(n));
            return ConfidenceInterval{mean, half, n};
        }
    } // namespace

    ConfidenceInterval confidence_interval(std::span<const double> observations)
    {
        std::vector<double> sorted(observations.begin(), observations.end());
        std::sort(sorted.begin(), sorted.end());
        return interval_from_sorted(sorted);
    }

    ConfidenceInterval estimate(std::span<const ReplicationResult> results, const std::string &station,
                                const std::string &job_class, Metric metric)
    {
        if (results.size() < 2)
        {
            throw StatsError(fmt::format("estimate needs at least 2 replications, got {}", results.size()));
        }
        std::vector<double> values;
        values.reserve(results.size());
        for (const ReplicationResult &r : results)
        {
            if (r.horizon != results.front().horizon || r.warmup != results.front().warmup)
            {
                throw StatsError("replications disagree on horizon or warmup");
            }
            auto v = r.value(station, job_class, metric);
            if (!v)
            {
                throw StatsError(fmt::format("metric {} for {}/{} missing from replication with seed {}",
                                             to_string(metric), station, job_class, r.seed));
            }
            values.push_back(*v);
        }
        return confidence_interval(values);
    }

    MetricAccumulator::MetricAccumulator(const ReplicationResult &result)
    {
        add(result);
    }

    void MetricAccumulator::add(const ReplicationResult &result)
    {
        std::map<MetricKey, std::vector<double>> incoming;
        for (const MetricSample &s : result.samples)
            incoming[s.key()].push_back(s.value);
        if (!values_.empty())
        {
            if (incoming.size() != values_.size() ||
                !std::equal(incoming.begin(), incoming.end(), values_.begin(),
                            [](const auto &a, const auto &b) { return a.first == b.first; }))
            {
                throw StatsError("replication result does not match the accumulator's key space");
            }
        }
        for (auto &[key, vals] : incoming)
        {
            if (vals.size() != 1)
                throw StatsError(fmt::format("duplicate sample for {}/{}/{}", key.station, key.job_class,
                                             to_string(key.metric)));
            auto &dst = values_[key];
            dst.insert(std::upper_bound(dst.begin(), dst.end(), vals.front()), vals.front());
        }
        ++replications_;
    }

    std::vector<MetricKey> MetricAccumulator::keys() const
    {
        std::vector<MetricKey> out;
        out.reserve(values_.size());
        for (const auto &[key, vals] : values_)
            out.push_back(key);
        return out;
    }

    const std::vector<double> &MetricAccumulator::values(const MetricKey &key) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
        {
            throw StatsError(fmt::format("no values for {}/{}/{}", key.station, key.job_class, to_string(key.metric)));
        }
        return it->second;
    }

    ConfidenceInterval MetricAccumulator::estimate(const MetricKey &key) const
    {
        return interval_from_sorted(values(key));
    }

    MetricAccumulator merge(const MetricAccumulator &a, const MetricAccumulator &b)
    {
        if (a.empty())
            return b;
        if (b.empty())
            return a;
        if (a.values_.size() != b.values_.size() ||
            !std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(),
                        [](const auto &x, const auto &y) { return x.first == y.first; }))
        {
            throw StatsError("cannot merge accumulators with different key spaces");
        }
        MetricAccumulator out;
        out.replications_ = a.replications_ + b.replications_;
        auto ib = b.values_.begin();
        for (const auto &[key, va] : a.values_)
        {
            const auto &vb = ib->second;
            std::vector<double> merged(va.size() + vb.size());
            std::merge(va.begin(), va.end(), vb.begin(), vb.end(), merged.begin());
            out.values_.emplace_hint(out.values_.end(), key, std::move(merged));
            ++ib;
        }
        return out;
    }

    double utilization_error(double eg_percent, double qn_mean_percent)
    {
        return std::abs(eg_percent - qn_mean_percent);
    }

    double response_time_error(double eg_msec, double qn_mean_msec)
    {
        if (!(qn_mean_msec > 0.0))
        {
            throw StatsError(fmt::format("response-time error needs a positive QN mean, got {}", qn_mean_msec));
        }
        return 100.0 * std::abs(eg_msec - qn_mean_msec) / qn_mean_msec;
    }
} // namespace qnap
