#include "qnap/distribution.hpp"

#include "qnap/errors.hpp"

#include <cmath>

#include <fmt/format.h>

namespace qnap
{
    namespace
    {
        template <class... Ts>
        struct Overloaded : Ts...
        {
            using Ts::operator()...;
        };
        template <class... Ts>
        Overloaded(Ts...) -> Overloaded<Ts...>;

        double exponential_sample(RngStream &stream, double rate)
        {
            return -std::log(stream.uniform()) / rate;
        }
    } // namespace

    ServiceDistribution ServiceDistribution::exponential_mean(double mean_ms)
    {
        if (!(mean_ms > 0.0) || !std::isfinite(mean_ms))
        {
            throw ConfigError(fmt::format("exponential mean must be positive and finite, got {}", mean_ms));
        }
        return exponential(1.0 / mean_ms);
    }

    ServiceDistribution ServiceDistribution::with_offset(double offset_ms) const
    {
        ServiceDistribution copy = *this;
        copy.offset_ += offset_ms;
        return copy;
    }

    ServiceDistribution ServiceDistribution::with_surcharge(Surcharge surcharge) const
    {
        ServiceDistribution copy = *this;
        copy.surcharge_ = surcharge;
        return copy;
    }

    double ServiceDistribution::mean() const
    {
        const double base = std::visit(Overloaded{
                                           [](const Exponential &d) { return 1.0 / d.rate; },
                                           [](const Deterministic &d) { return d.value; },
                                           [](const Erlang &d) { return d.phases / d.rate; },
                                           [](const Uniform &d) { return 0.5 * (d.lo + d.hi); },
                                       },
                                       base_);
        const double extra = surcharge_ ? surcharge_->probability * surcharge_->mean_ms : 0.0;
        return base + offset_ + extra;
    }

    unsigned ServiceDistribution::draws_per_sample() const noexcept
    {
        const unsigned base = std::visit(Overloaded{
                                             [](const Exponential &) { return 1u; },
                                             [](const Deterministic &) { return 0u; },
                                             [](const Erlang &d) { return static_cast<unsigned>(d.phases); },
                                             [](const Uniform &) { return 1u; },
                                         },
                                         base_);
        return base + (surcharge_ ? 2u : 0u);
    }

    bool ServiceDistribution::is_silent() const noexcept
    {
        const auto *e = std::get_if<Exponential>(&base_);
        return e != nullptr && e->rate == 0.0;
    }

    bool ServiceDistribution::is_never() const noexcept
    {
        const auto *d = std::get_if<Deterministic>(&base_);
        return d != nullptr && d->value >= kNeverMs;
    }

    std::optional<std::string> ServiceDistribution::check() const
    {
        auto problem = std::visit(
            Overloaded{
                [](const Exponential &d) -> std::optional<std::string> {
                    if (!(d.rate > 0.0) || !std::isfinite(d.rate))
                        return fmt::format("exponential rate must be > 0, got {}", d.rate);
                    return std::nullopt;
                },
                [](const Deterministic &d) -> std::optional<std::string> {
                    if (!(d.value >= 0.0) || !std::isfinite(d.value))
                        return fmt::format("deterministic value must be >= 0, got {}", d.value);
                    return std::nullopt;
                },
                [](const Erlang &d) -> std::optional<std::string> {
                    if (d.phases < 1)
                        return fmt::format("erlang phases must be >= 1, got {}", d.phases);
                    if (!(d.rate > 0.0) || !std::isfinite(d.rate))
                        return fmt::format("erlang rate must be > 0, got {}", d.rate);
                    return std::nullopt;
                },
                [](const Uniform &d) -> std::optional<std::string> {
                    if (!(d.lo >= 0.0) || !(d.lo <= d.hi) || !std::isfinite(d.hi))
                        return fmt::format("uniform bounds must satisfy 0 <= lo <= hi, got [{}, {}]", d.lo, d.hi);
                    return std::nullopt;
                },
            },
            base_);
        if (problem)
        {
            return problem;
        }
        if (!(offset_ >= 0.0) || !std::isfinite(offset_))
        {
            return fmt::format("offset must be >= 0, got {}", offset_);
        }
        if (surcharge_)
        {
            if (!(surcharge_->probability >= 0.0 && surcharge_->probability <= 1.0))
                return fmt::format("surcharge probability must be in [0, 1], got {}", surcharge_->probability);
            if (!(surcharge_->mean_ms >= 0.0) || !std::isfinite(surcharge_->mean_ms))
                return fmt::format("surcharge mean must be >= 0, got {}", surcharge_->mean_ms);
        }
        return std::nullopt;
    }

    std::optional<std::string> ServiceDistribution::check_as_arrival() const
    {
        if (is_silent() && offset_ == 0.0 && !surcharge_)
        {
            return std::nullopt;
        }
        return check();
    }

    std::string ServiceDistribution::describe() const
    {
        std::string text = std::visit(Overloaded{
                                          [](const Exponential &d) { return fmt::format("exponential(rate={})", d.rate); },
                                          [](const Deterministic &d) { return fmt::format("deterministic({})", d.value); },
                                          [](const Erlang &d) { return fmt::format("erlang(k={}, rate={})", d.phases, d.rate); },
                                          [](const Uniform &d) { return fmt::format("uniform({}, {})", d.lo, d.hi); },
                                      },
                                      base_);
        if (offset_ != 0.0)
        {
            text += fmt::format(" + {}", offset_);
        }
        if (surcharge_)
        {
            text += fmt::format(" + [p={}] exponential(mean={})", surcharge_->probability, surcharge_->mean_ms);
        }
        return text;
    }

    double draw(RngStream &stream, const ServiceDistribution &dist)
    {
        if (auto problem = dist.check())
        {
            throw ConfigError(*problem);
        }
        double value = std::visit(Overloaded{
                                      [&](const Exponential &d) { return exponential_sample(stream, d.rate); },
                                      [](const Deterministic &d) { return d.value; },
                                      [&](const Erlang &d) {
                                          double sum = 0.0;
                                          for (int i = 0; i < d.phases; ++i)
                                              sum += exponential_sample(stream, d.rate);
                                          return sum;
                                      },
                                      [&](const Uniform &d) { return d.lo + (d.hi - d.lo) * stream.uniform(); },
                                  },
                                  dist.base());
        value += dist.offset();
        if (const auto &s = dist.surcharge())
        {
            const double selector = stream.uniform();
            const double extra = -std::log(stream.uniform()) * s->mean_ms;
            if (selector < s->probability)
            {
                value += extra;
            }
        }
        return value;
    }

    ServiceDistribution make_service(const std::string &shape, double mean_ms)
    {
        if (!(mean_ms > 0.0) || !std::isfinite(mean_ms))
        {
            throw ConfigError(fmt::format("service mean must be positive and finite, got {}", mean_ms));
        }
        if (shape == "exponential")
            return ServiceDistribution::exponential(1.0 / mean_ms);
        if (shape == "deterministic")
            return ServiceDistribution::deterministic(mean_ms);
        if (shape == "erlang2")
            return ServiceDistribution::erlang(2, 2.0 / mean_ms);
        if (shape == "uniform")
            return ServiceDistribution::uniform(0.0, 2.0 * mean_ms);
        throw ConfigError(fmt::format("unknown distribution shape '{}'", shape));
    }
} // namespace qnap
