#include "qnap/model.hpp"

#include "qnap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include <fmt/format.h>

namespace qnap
{
    std::string to_string(StationKind kind)
    {
        switch (kind)
        {
        case StationKind::FcfsQueue:
            return "fcfs";
        case StationKind::Delay:
            return "delay";
        case StationKind::Source:
            return "source";
        case StationKind::Sink:
            return "sink";
        }
        return "?";
    }

    std::string to_string(ClassMode mode)
    {
        return mode == ClassMode::Open ? "open" : "closed";
    }

    bool Station::limits_class(const std::string &job_class) const
    {
        if (!capacity)
        {
            return false;
        }
        if (capacity_classes.empty())
        {
            return true;
        }
        return std::find(capacity_classes.begin(), capacity_classes.end(), job_class) != capacity_classes.end();
    }

    JobClass JobClass::open(std::string name, ServiceDistribution arrival)
    {
        JobClass c;
        c.name = std::move(name);
        c.mode = ClassMode::Open;
        c.arrival = arrival;
        return c;
    }

    JobClass JobClass::closed(std::string name, int population, std::string reference_station)
    {
        JobClass c;
        c.name = std::move(name);
        c.mode = ClassMode::Closed;
        c.population = population;
        c.reference_station = std::move(reference_station);
        return c;
    }

    const Station *NetworkModel::find_station(const std::string &name) const
    {
        auto it = std::find_if(stations.begin(), stations.end(), [&](const Station &s) { return s.name == name; });
        return it == stations.end() ? nullptr : &*it;
    }

    Station *NetworkModel::find_station(const std::string &name)
    {
        return const_cast<Station *>(std::as_const(*this).find_station(name));
    }

    const JobClass *NetworkModel::find_class(const std::string &name) const
    {
        auto it = std::find_if(classes.begin(), classes.end(), [&](const JobClass &c) { return c.name == name; });
        return it == classes.end() ? nullptr : &*it;
    }

    JobClass *NetworkModel::find_class(const std::string &name)
    {
        return const_cast<JobClass *>(std::as_const(*this).find_class(name));
    }

    std::optional<std::size_t> NetworkModel::station_index(const std::string &name) const
    {
        for (std::size_t i = 0; i < stations.size(); ++i)
            if (stations[i].name == name)
                return i;
        return std::nullopt;
    }

    std::optional<std::size_t> NetworkModel::class_index(const std::string &name) const
    {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i].name == name)
                return i;
        return std::nullopt;
    }

    namespace
    {
        struct Collector
        {
            std::vector<Diagnostic> out;

            template <class... Args>
            void invalid(const std::string &subject, fmt::format_string<Args...> f, Args &&...args)
            {
                out.push_back({Diagnostic::Kind::Invalid, subject, fmt::format(f, std::forward<Args>(args)...)});
            }

            template <class... Args>
            void deadlock(const std::string &subject, fmt::format_string<Args...> f, Args &&...args)
            {
                out.push_back({Diagnostic::Kind::Deadlock, subject, fmt::format(f, std::forward<Args>(args)...)});
            }
        };

        void check_stations(const NetworkModel &m, Collector &c)
        {
            std::set<std::string> names;
            for (const Station &s : m.stations)
            {
                if (s.name.empty())
                {
                    c.invalid("", "station with empty name");
                    continue;
                }
                if (!names.insert(s.name).second)
                {
                    c.invalid(s.name, "duplicate station name '{}'", s.name);
                }
                if (s.kind == StationKind::Source || s.kind == StationKind::Sink)
                {
                    if (!s.service.empty())
                        c.invalid(s.name, "{} station '{}' must not have a service map", to_string(s.kind), s.name);
                }
                if (s.kind == StationKind::FcfsQueue && s.servers < 1)
                {
                    c.invalid(s.name, "station '{}' needs at least one server, got {}", s.name, s.servers);
                }
                if (s.capacity)
                {
                    if (s.kind != StationKind::FcfsQueue)
                    {
                        c.invalid(s.name, "capacity is only supported on fcfs stations ('{}')", s.name);
                    }
                    else if (*s.capacity < s.servers || *s.capacity < 1)
                    {
                        c.invalid(s.name, "station '{}' capacity {} is below its server count {}", s.name,
                                  *s.capacity, s.servers);
                    }
                }
                for (const std::string &cls : s.capacity_classes)
                {
                    const JobClass *jc = m.find_class(cls);
                    if (jc == nullptr)
                        c.invalid(s.name, "station '{}' limits unknown class '{}'", s.name, cls);
                    else if (jc->mode == ClassMode::Closed)
                        c.invalid(s.name, "station '{}' cannot drop jobs of closed class '{}'", s.name, cls);
                }
                for (const auto &[cls, dist] : s.service)
                {
                    if (m.find_class(cls) == nullptr)
                        c.invalid(s.name, "station '{}' has service for unknown class '{}'", s.name, cls);
                    if (auto problem = dist.check())
                        c.invalid(s.name, "station '{}' class '{}': {}", s.name, cls, *problem);
                }
            }
        }

        void check_classes(const NetworkModel &m, Collector &c)
        {
            std::set<std::string> names;
            for (const JobClass &jc : m.classes)
            {
                if (jc.name.empty())
                {
                    c.invalid("", "class with empty name");
                    continue;
                }
                if (!names.insert(jc.name).second)
                {
                    c.invalid(jc.name, "duplicate class name '{}'", jc.name);
                }
                if (jc.mode == ClassMode::Open)
                {
                    if (!jc.arrival)
                        c.invalid(jc.name, "open class '{}' has no arrival distribution", jc.name);
                    else if (auto problem = jc.arrival->check_as_arrival())
                        c.invalid(jc.name, "open class '{}' arrival: {}", jc.name, *problem);
                    if (jc.population != 0)
                        c.invalid(jc.name, "open class '{}' must not have a population", jc.name);
                }
                else
                {
                    if (jc.arrival)
                        c.invalid(jc.name, "closed class '{}' must not have an arrival distribution", jc.name);
                    if (jc.population < 1)
                        c.invalid(jc.name, "closed class '{}' population must be >= 1, got {}", jc.name,
                                  jc.population);
                    const Station *ref = m.find_station(jc.reference_station);
                    if (ref == nullptr)
                        c.invalid(jc.name, "closed class '{}' reference station '{}' does not exist", jc.name,
                                  jc.reference_station);
                    else if (!ref->is_service_station())
                        c.invalid(jc.name, "closed class '{}' reference station '{}' must be fcfs or delay",
                                  jc.name, jc.reference_station);
                }
                if (jc.completion_gate)
                {
                    if (jc.mode != ClassMode::Open)
                        c.invalid(jc.name, "completion gate on closed class '{}'", jc.name);
                    if (m.find_class(jc.completion_gate->gate_class) == nullptr)
                        c.invalid(jc.name, "class '{}' gated by unknown class '{}'", jc.name,
                                  jc.completion_gate->gate_class);
                    if (m.find_station(jc.completion_gate->gate_station) == nullptr)
                        c.invalid(jc.name, "class '{}' gated at unknown station '{}'", jc.name,
                                  jc.completion_gate->gate_station);
                }
            }
        }

        // Stations reachable from `start` following the class's routing.
        std::set<std::string> reachable(const std::map<std::string, std::vector<Route>> &rows, const std::string &start)
        {
            std::set<std::string> seen{start};
            std::deque<std::string> todo{start};
            while (!todo.empty())
            {
                const std::string at = todo.front();
                todo.pop_front();
                auto it = rows.find(at);
                if (it == rows.end())
                    continue;
                for (const Route &r : it->second)
                {
                    if (r.probability > 0.0 && seen.insert(r.to).second)
                        todo.push_back(r.to);
                }
            }
            return seen;
        }

        void check_routing(const NetworkModel &m, Collector &c)
        {
            for (const auto &[cls, rows] : m.routing)
            {
                if (m.find_class(cls) == nullptr)
                {
                    c.invalid(cls, "routing given for unknown class '{}'", cls);
                }
                for (const auto &[from, routes] : rows)
                {
                    const Station *src = m.find_station(from);
                    if (src == nullptr)
                    {
                        c.invalid(cls, "class '{}' routes from unknown station '{}'", cls, from);
                        continue;
                    }
                    if (src->kind == StationKind::Sink)
                    {
                        c.invalid(cls, "class '{}' routes out of sink '{}'", cls, from);
                    }
                    if (routes.empty())
                    {
                        c.invalid(cls, "class '{}' routing row at '{}' is empty", cls, from);
                        continue;
                    }
                    double sum = 0.0;
                    for (const Route &r : routes)
                    {
                        const Station *dst = m.find_station(r.to);
                        if (dst == nullptr)
                            c.invalid(cls, "class '{}' routes from '{}' to unknown station '{}'", cls, from, r.to);
                        else if (dst->kind == StationKind::Source)
                            c.invalid(cls, "class '{}' routes from '{}' into source '{}'", cls, from, r.to);
                        if (!(r.probability >= 0.0) || !std::isfinite(r.probability))
                            c.invalid(cls, "class '{}' route {} -> {} has invalid probability {}", cls, from, r.to,
                                      r.probability);
                        sum += r.probability;
                    }
                    if (std::abs(sum - 1.0) > 1e-9)
                    {
                        c.invalid(cls, "class '{}' routing row at '{}' sums to {:.12g}", cls, from, sum);
                    }
                }
            }
        }

        void check_flow(const NetworkModel &m, Collector &c)
        {
            static const std::map<std::string, std::vector<Route>> kNoRows;
            for (const JobClass &jc : m.classes)
            {
                auto rit = m.routing.find(jc.name);
                const auto &rows = rit == m.routing.end() ? kNoRows : rit->second;

                std::string start;
                if (jc.mode == ClassMode::Open)
                {
                    std::vector<std::string> sources;
                    for (const auto &[from, routes] : rows)
                    {
                        const Station *s = m.find_station(from);
                        if (s != nullptr && s->kind == StationKind::Source)
                            sources.push_back(from);
                    }
                    if (sources.size() != 1)
                    {
                        c.invalid(jc.name, "open class '{}' must be routed out of exactly one source, found {}",
                                  jc.name, sources.size());
                        continue;
                    }
                    start = sources.front();
                }
                else
                {
                    if (m.find_station(jc.reference_station) == nullptr)
                        continue;
                    start = jc.reference_station;
                }

                const std::set<std::string> reach = reachable(rows, start);
                for (const std::string &at : reach)
                {
                    const Station *s = m.find_station(at);
                    if (s == nullptr)
                        continue;
                    if (s->is_service_station() && s->service.find(jc.name) == s->service.end())
                    {
                        c.invalid(jc.name, "class '{}' visits station '{}' which has no service for it", jc.name, at);
                    }
                    if (s->kind == StationKind::Sink)
                    {
                        if (jc.mode == ClassMode::Closed)
                            c.invalid(jc.name, "closed class '{}' can reach sink '{}'", jc.name, at);
                        continue;
                    }
                    if (rows.find(at) == rows.end())
                    {
                        if (jc.mode == ClassMode::Closed)
                            c.deadlock(jc.name, "closed class '{}' is stuck at '{}' (no routing row); deadlock",
                                       jc.name, at);
                        else
                            c.invalid(jc.name, "open class '{}' has no routing row at '{}'", jc.name, at);
                        continue;
                    }
                    const std::set<std::string> onward = reachable(rows, at);
                    if (jc.mode == ClassMode::Open)
                    {
                        const bool absorbs = std::any_of(onward.begin(), onward.end(), [&](const std::string &n) {
                            const Station *t = m.find_station(n);
                            return t != nullptr && t->kind == StationKind::Sink;
                        });
                        if (!absorbs)
                            c.invalid(jc.name, "open class '{}' cannot reach a sink from '{}'", jc.name, at);
                    }
                    else if (at != start && onward.count(start) == 0)
                    {
                        c.deadlock(jc.name,
                                   "closed class '{}' (population {}) has no cycle back to reference station '{}' "
                                   "from '{}'; deadlock",
                                   jc.name, jc.population, start, at);
                    }
                }
                if (jc.mode == ClassMode::Closed)
                {
                    auto row = rows.find(start);
                    if (row != rows.end())
                    {
                        const bool returns = std::any_of(row->second.begin(), row->second.end(), [&](const Route &r) {
                            return r.probability > 0.0 && reachable(rows, r.to).count(start) > 0;
                        });
                        if (!returns)
                            c.deadlock(jc.name,
                                       "closed class '{}' (population {}) has no cycle back to reference station "
                                       "'{}'; deadlock",
                                       jc.name, jc.population, start);
                    }
                }
            }
        }
    } // namespace

    std::vector<Diagnostic> validate_model(const NetworkModel &model)
    {
        Collector c;
        check_stations(model, c);
        check_classes(model, c);
        check_routing(model, c);
        check_flow(model, c);
        return std::move(c.out);
    }

    void require_valid(const NetworkModel &model)
    {
        const auto diags = validate_model(model);
        if (diags.empty())
        {
            return;
        }
        std::string text = "invalid model:";
        const Diagnostic *deadlock = nullptr;
        for (const Diagnostic &d : diags)
        {
            text += "\n  - " + d.message;
            if (d.kind == Diagnostic::Kind::Deadlock && deadlock == nullptr)
                deadlock = &d;
        }
        if (deadlock != nullptr)
        {
            throw DeadlockError(deadlock->subject, text);
        }
        throw ConfigError(text);
    }
} // namespace qnap
