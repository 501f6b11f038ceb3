#pragma once

#include "qnap/sim_time.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qnap
{
    using JobId = std::uint64_t;
    using StationId = std::uint32_t;

    enum class EventKind : std::uint8_t
    {
        ExternalArrival,
        ServiceCompletion,
        Timer,
    };

    struct EventRecord
    {
        SimTime time;
        std::uint64_t seq = 0;
        EventKind kind = EventKind::Timer;
        JobId job = 0;
        StationId station = 0;
    };

    /// Pending-event set ordered by (time, seq). Sequence numbers are handed
    /// out in insertion order, so simultaneous events pop in the order they
    /// were scheduled.
    class EventCalendar
    {
    public:
        /// Throws ModelError if `time` is earlier than the clock or not finite.
        EventRecord schedule(SimTime time, EventKind kind, JobId job, StationId station);

        /// Removes the least (time, seq) event and advances the clock to it.
        std::optional<EventRecord> pop_next();

        std::optional<SimTime> peek_time() const;

        SimTime now() const noexcept { return clock_; }
        bool empty() const noexcept { return heap_.empty(); }
        std::size_t size() const noexcept { return heap_.size(); }

    private:
        std::vector<EventRecord> heap_;
        SimTime clock_{};
        std::uint64_t next_seq_ = 1;
    };
} // namespace qnap
