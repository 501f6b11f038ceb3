#include "qnap/event_calendar.hpp"

#include "qnap/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qnap
{
    namespace
    {
        // std heap algorithms build a max-heap; invert for earliest-first.
        struct Later
        {
            bool operator()(const EventRecord &a, const EventRecord &b) const noexcept
            {
                if (a.time.ms != b.time.ms)
                {
                    return a.time.ms > b.time.ms;
                }
                return a.seq > b.seq;
            }
        };
    } // namespace

    EventRecord EventCalendar::schedule(SimTime time, EventKind kind, JobId job, StationId station)
    {
        if (!std::isfinite(time.ms))
        {
            throw ModelError(fmt::format("event scheduled at non-finite time {}", time.ms));
        }
        if (time < clock_)
        {
            throw ModelError(fmt::format("event scheduled in the past: t={} < clock={}", time.ms, clock_.ms));
        }
        EventRecord ev{time, next_seq_++, kind, job, station};
        heap_.push_back(ev);
        std::push_heap(heap_.begin(), heap_.end(), Later{});
        return ev;
    }

    std::optional<EventRecord> EventCalendar::pop_next()
    {
        if (heap_.empty())
        {
            return std::nullopt;
        }
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        EventRecord ev = heap_.back();
        heap_.pop_back();
        if (ev.time < clock_)
        {
            throw ModelError(fmt::format("causality violated: popped t={} with clock={}", ev.time.ms, clock_.ms));
        }
        clock_ = ev.time;
        return ev;
    }

    std::optional<SimTime> EventCalendar::peek_time() const
    {
        if (heap_.empty())
        {
            return std::nullopt;
        }
        return heap_.front().time;
    }
} // namespace qnap
