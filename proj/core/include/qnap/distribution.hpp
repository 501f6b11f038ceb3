#pragma once

#include "qnap/rng.hpp"
#include "qnap/sim_time.hpp"

#include <optional>
#include <string>
#include <variant>

namespace qnap
{
    struct Exponential
    {
        double rate = 1.0; // per msec
        friend bool operator==(const Exponential &, const Exponential &) = default;
    };

    struct Deterministic
    {
        double value = 0.0; // msec
        friend bool operator==(const Deterministic &, const Deterministic &) = default;
    };

    struct Erlang
    {
        int phases = 1;
        double rate = 1.0; // per phase, per msec
        friend bool operator==(const Erlang &, const Erlang &) = default;
    };

    struct Uniform
    {
        double lo = 0.0;
        double hi = 0.0;
        friend bool operator==(const Uniform &, const Uniform &) = default;
    };

    /// With probability `probability`, an exponentially distributed extra
    /// demand of mean `mean_ms` is added to the sample.
    struct Surcharge
    {
        double probability = 0.0;
        double mean_ms = 0.0;
        friend bool operator==(const Surcharge &, const Surcharge &) = default;
    };

    /// Service-time or inter-arrival distribution.
    ///
    /// A sample is `base + offset (+ surcharge)`. Uniform draws consumed per
    /// sample are fixed for a given distribution:
    ///   exponential 1, deterministic 0, erlang(k) k, uniform 1,
    ///   plus 2 when a surcharge is present (selector and extra demand, both
    ///   always drawn). The offset draws nothing.
    class ServiceDistribution
    {
    public:
        using Base = std::variant<Exponential, Deterministic, Erlang, Uniform>;

        ServiceDistribution() = default;
        explicit ServiceDistribution(Base base) : base_(base) {}

        static ServiceDistribution exponential(double rate) { return ServiceDistribution{Exponential{rate}}; }
        static ServiceDistribution exponential_mean(double mean_ms);
        static ServiceDistribution deterministic(double value) { return ServiceDistribution{Deterministic{value}}; }
        static ServiceDistribution erlang(int phases, double rate) { return ServiceDistribution{Erlang{phases, rate}}; }
        static ServiceDistribution uniform(double lo, double hi) { return ServiceDistribution{Uniform{lo, hi}}; }
        static ServiceDistribution never() { return deterministic(kNeverMs); }

        ServiceDistribution with_offset(double offset_ms) const;
        ServiceDistribution with_surcharge(Surcharge surcharge) const;

        const Base &base() const noexcept { return base_; }
        double offset() const noexcept { return offset_; }
        const std::optional<Surcharge> &surcharge() const noexcept { return surcharge_; }

        double mean() const;
        unsigned draws_per_sample() const noexcept;

        /// True for exponential(0): an arrival process that never fires.
        bool is_silent() const noexcept;
        bool is_never() const noexcept;

        /// Empty when the parameters are valid.
        std::optional<std::string> check() const;
        /// Same as check() but tolerates exponential(0), which is only
        /// meaningful as an inter-arrival distribution.
        std::optional<std::string> check_as_arrival() const;

        std::string describe() const;

        friend bool operator==(const ServiceDistribution &, const ServiceDistribution &) = default;

    private:
        Base base_ = Exponential{1.0};
        double offset_ = 0.0;
        std::optional<Surcharge> surcharge_;
    };

    /// Draws one sample. Throws ConfigError on invalid parameters
    /// (including exponential rate 0).
    double draw(RngStream &stream, const ServiceDistribution &dist);

    /// Mean-preserving construction from a shape name:
    /// "exponential", "deterministic", "erlang2", "uniform" (on [0, 2*mean]).
    ServiceDistribution make_service(const std::string &shape, double mean_ms);
} // namespace qnap
