#include "qnap/simulator.hpp"

#include "qnap/errors.hpp"
#include "qnap/event_calendar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <fmt/format.h>

namespace qnap
{
    namespace
    {
        constexpr const char *kSystem = "System";

        /// Integral of a piecewise-constant level over (warmup, now].
        struct TimeAverage
        {
            double level = 0.0;
            double last = 0.0;
            double area = 0.0;

            void change(double now, double delta, double warmup) noexcept
            {
                if (now > warmup)
                {
                    area += level * (now - std::max(last, warmup));
                }
                last = now;
                level += delta;
            }
        };

        struct Cell // one (station, class) pair
        {
            const ServiceDistribution *service = nullptr;
            RngStream service_rng;
            RngStream routing_rng;
            std::vector<std::pair<double, std::uint32_t>> routes; // cumulative probability, destination
            bool limited = false;

            TimeAverage present;
            TimeAverage busy;
            double response_sum = 0.0;
            std::uint64_t completions = 0;
            std::uint64_t dropped = 0;
        };

        struct StationState
        {
            StationKind kind = StationKind::FcfsQueue;
            int servers = 1;
            int busy = 0;
            std::optional<int> capacity;
            int limited_present = 0;
            std::deque<JobId> queue;
        };

        struct ClassState
        {
            ClassMode mode = ClassMode::Open;
            int population = 0;
            std::uint32_t reference = 0;
            std::uint32_t source = 0;
            const ServiceDistribution *arrival = nullptr;
            RngStream arrival_rng;
            bool gated = false;
            std::vector<JobId> awaiting;

            TimeAverage in_system;
            double response_sum = 0.0;
            std::uint64_t completions = 0;
            std::uint64_t dropped = 0;
        };

        struct GateRule
        {
            std::uint32_t gate_class;
            std::uint32_t gate_station;
            std::uint32_t gated_class;
        };

        struct Job
        {
            std::uint32_t cls = 0;
            std::uint32_t station = 0;
            double arrived_at_station = 0.0;
            double since = 0.0; // system entry (open) or cycle start (closed)
        };

        class Replication
        {
        public:
            Replication(const NetworkModel &model, std::uint64_t seed, double horizon, double warmup,
                        const SimulationOptions &options)
                : model_(model), horizon_(horizon), warmup_(warmup), options_(options)
            {
                const std::size_t ns = model.stations.size();
                const std::size_t nc = model.classes.size();
                stations_.resize(ns);
                classes_.resize(nc);
                cells_.resize(ns * nc);

                for (std::size_t s = 0; s < ns; ++s)
                {
                    const Station &st = model.stations[s];
                    stations_[s].kind = st.kind;
                    stations_[s].servers = st.servers;
                    stations_[s].capacity = st.capacity;
                    for (std::size_t c = 0; c < nc; ++c)
                    {
                        const JobClass &jc = model.classes[c];
                        Cell &cell = cell_at(s, c);
                        cell.service_rng = RngStream(seed, StreamId{st.name, jc.name, StreamPurpose::Service});
                        cell.routing_rng = RngStream(seed, StreamId{st.name, jc.name, StreamPurpose::Routing});
                        if (auto it = st.service.find(jc.name); it != st.service.end())
                            cell.service = &it->second;
                        cell.limited = st.kind == StationKind::FcfsQueue && jc.mode == ClassMode::Open &&
                                       st.limits_class(jc.name);
                    }
                }

                for (std::size_t c = 0; c < nc; ++c)
                {
                    const JobClass &jc = model.classes[c];
                    ClassState &cs = classes_[c];
                    cs.mode = jc.mode;
                    cs.population = jc.population;
                    if (jc.mode == ClassMode::Closed)
                        cs.reference = static_cast<std::uint32_t>(*model.station_index(jc.reference_station));
                    if (jc.arrival)
                        cs.arrival = &*jc.arrival;
                    if (jc.completion_gate)
                    {
                        cs.gated = true;
                        gates_.push_back(GateRule{
                            static_cast<std::uint32_t>(*model.class_index(jc.completion_gate->gate_class)),
                            static_cast<std::uint32_t>(*model.station_index(jc.completion_gate->gate_station)),
                            static_cast<std::uint32_t>(c)});
                    }
                    auto rows = model.routing.find(jc.name);
                    if (rows == model.routing.end())
                        continue;
                    for (const auto &[from, routes] : rows->second)
                    {
                        const std::size_t s = *model.station_index(from);
                        if (model.stations[s].kind == StationKind::Source)
                        {
                            cs.source = static_cast<std::uint32_t>(s);
                            cs.arrival_rng = RngStream(seed, StreamId{from, jc.name, StreamPurpose::Arrival});
                        }
                        Cell &cell = cell_at(s, c);
                        double cumulative = 0.0;
                        for (const Route &r : routes)
                        {
                            cumulative += r.probability;
                            cell.routes.emplace_back(cumulative,
                                                     static_cast<std::uint32_t>(*model.station_index(r.to)));
                        }
                    }
                }
            }

            ReplicationResult run(std::uint64_t seed)
            {
                for (std::size_t c = 0; c < classes_.size(); ++c)
                {
                    ClassState &cs = classes_[c];
                    if (cs.mode == ClassMode::Open)
                    {
                        schedule_arrival(static_cast<std::uint32_t>(c));
                    }
                    else
                    {
                        for (int k = 0; k < cs.population; ++k)
                        {
                            const JobId id = new_job(static_cast<std::uint32_t>(c));
                            enter_station(id, cs.reference);
                        }
                    }
                }

                while (true)
                {
                    const auto next = calendar_.peek_time();
                    if (!next)
                    {
                        check_starvation();
                        break;
                    }
                    if (next->ms > horizon_)
                        break;
                    const EventRecord ev = *calendar_.pop_next();
                    now_ = ev.time.ms;
                    switch (ev.kind)
                    {
                    case EventKind::ExternalArrival:
                        on_external_arrival(ev.job);
                        break;
                    case EventKind::ServiceCompletion:
                        on_service_completion(ev.job, ev.station);
                        break;
                    case EventKind::Timer:
                        break;
                    }
                    if (options_.audit_conservation)
                        audit_conservation();
                }
                now_ = horizon_;
                return collect(seed);
            }

        private:
            Cell &cell_at(std::size_t station, std::size_t cls) { return cells_[station * classes_.size() + cls]; }

            JobId new_job(std::uint32_t cls)
            {
                JobId id;
                if (!free_.empty())
                {
                    id = free_.back();
                    free_.pop_back();
                }
                else
                {
                    id = jobs_.size();
                    jobs_.emplace_back();
                }
                jobs_[id] = Job{cls, 0, now_, now_};
                return id;
            }

            void free_job(JobId id) { free_.push_back(id); }

            void schedule_arrival(std::uint32_t cls)
            {
                ClassState &cs = classes_[cls];
                if (cs.arrival == nullptr || cs.arrival->is_silent())
                    return;
                const double at = now_ + draw(cs.arrival_rng, *cs.arrival);
                const JobId id = new_job(cls);
                calendar_.schedule(SimTime{at}, EventKind::ExternalArrival, id, cs.source);
            }

            void on_external_arrival(JobId id)
            {
                const std::uint32_t cls = jobs_[id].cls;
                ClassState &cs = classes_[cls];
                schedule_arrival(cls);
                jobs_[id].since = now_;
                cs.in_system.change(now_, +1.0, warmup_);
                route_from(id, cs.source);
            }

            void route_from(JobId id, std::uint32_t station)
            {
                Cell &cell = cell_at(station, jobs_[id].cls);
                const double u = cell.routing_rng.uniform();
                std::uint32_t dest = cell.routes.back().second;
                for (const auto &[cumulative, to] : cell.routes)
                {
                    if (u < cumulative)
                    {
                        dest = to;
                        break;
                    }
                }
                arrive(id, dest);
            }

            void arrive(JobId id, std::uint32_t station)
            {
                Job &job = jobs_[id];
                ClassState &cs = classes_[job.cls];
                const StationState &st = stations_[station];
                if (st.kind == StationKind::Sink)
                {
                    if (cs.gated)
                        cs.awaiting.push_back(id);
                    else
                        finish_open(id);
                    return;
                }
                if (cs.mode == ClassMode::Closed && station == cs.reference)
                {
                    if (now_ > warmup_)
                    {
                        cs.response_sum += now_ - job.since;
                        ++cs.completions;
                    }
                    cs.in_system.change(now_, -1.0, warmup_);
                }
                Cell &cell = cell_at(station, job.cls);
                if (cell.limited && st.limited_present >= *st.capacity)
                {
                    if (now_ > warmup_)
                    {
                        ++cell.dropped;
                        ++cs.dropped;
                    }
                    cs.in_system.change(now_, -1.0, warmup_);
                    free_job(id);
                    return;
                }
                enter_station(id, station);
            }

            void enter_station(JobId id, std::uint32_t station)
            {
                Job &job = jobs_[id];
                StationState &st = stations_[station];
                Cell &cell = cell_at(station, job.cls);
                job.station = station;
                job.arrived_at_station = now_;
                cell.present.change(now_, +1.0, warmup_);
                if (cell.limited)
                    ++st.limited_present;
                if (st.kind == StationKind::Delay || st.busy < st.servers)
                    start_service(id, station);
                else
                    st.queue.push_back(id);
            }

            void start_service(JobId id, std::uint32_t station)
            {
                StationState &st = stations_[station];
                Cell &cell = cell_at(station, jobs_[id].cls);
                if (st.kind == StationKind::FcfsQueue)
                {
                    ++st.busy;
                    cell.busy.change(now_, +1.0, warmup_);
                }
                const double service = draw(cell.service_rng, *cell.service);
                calendar_.schedule(SimTime{now_ + service}, EventKind::ServiceCompletion, id, station);
            }

            void on_service_completion(JobId id, std::uint32_t station)
            {
                Job &job = jobs_[id];
                const std::uint32_t cls = job.cls;
                StationState &st = stations_[station];
                Cell &cell = cell_at(station, cls);
                if (now_ > warmup_)
                {
                    cell.response_sum += now_ - job.arrived_at_station;
                    ++cell.completions;
                }
                cell.present.change(now_, -1.0, warmup_);
                if (cell.limited)
                    --st.limited_present;
                if (st.kind == StationKind::FcfsQueue)
                {
                    --st.busy;
                    cell.busy.change(now_, -1.0, warmup_);
                    if (!st.queue.empty())
                    {
                        const JobId next = st.queue.front();
                        st.queue.pop_front();
                        start_service(next, station);
                    }
                }
                for (const GateRule &g : gates_)
                {
                    if (g.gate_class == cls && g.gate_station == station)
                        release(g.gated_class);
                }
                ClassState &cs = classes_[cls];
                if (cs.mode == ClassMode::Closed && station == cs.reference)
                {
                    job.since = now_;
                    cs.in_system.change(now_, +1.0, warmup_);
                }
                route_from(id, station);
            }

            void release(std::uint32_t gated_class)
            {
                ClassState &cs = classes_[gated_class];
                for (JobId id : cs.awaiting)
                    finish_open(id);
                cs.awaiting.clear();
            }

            void finish_open(JobId id)
            {
                ClassState &cs = classes_[jobs_[id].cls];
                if (now_ > warmup_)
                {
                    cs.response_sum += now_ - jobs_[id].since;
                    ++cs.completions;
                }
                cs.in_system.change(now_, -1.0, warmup_);
                free_job(id);
            }

            void check_starvation() const
            {
                for (std::size_t c = 0; c < classes_.size(); ++c)
                {
                    if (classes_[c].mode == ClassMode::Closed && classes_[c].population > 0)
                    {
                        const std::string &name = model_.classes[c].name;
                        throw DeadlockError(name, fmt::format("closed class '{}' has no enabled event at t={}; "
                                                              "deadlock",
                                                              name, now_));
                    }
                }
            }

            void audit_conservation()
            {
                for (std::size_t c = 0; c < classes_.size(); ++c)
                {
                    if (classes_[c].mode != ClassMode::Closed)
                        continue;
                    double total = 0.0;
                    for (std::size_t s = 0; s < stations_.size(); ++s)
                        total += cell_at(s, c).present.level;
                    if (total != classes_[c].population)
                    {
                        throw ModelError(fmt::format("closed class '{}' holds {} jobs, population is {} (t={})",
                                                     model_.classes[c].name, total, classes_[c].population, now_));
                    }
                }
            }

            ReplicationResult collect(std::uint64_t seed)
            {
                ReplicationResult out;
                out.seed = seed;
                out.horizon = horizon_;
                out.warmup = warmup_;
                const double window = horizon_ - warmup_;
                auto emit = [&](const std::string &station, const std::string &cls, Metric metric, double value) {
                    out.samples.push_back(MetricSample{station, cls, metric, value});
                };

                for (std::size_t s = 0; s < stations_.size(); ++s)
                {
                    const Station &st = model_.stations[s];
                    if (!st.is_service_station())
                        continue;
                    const bool fcfs = st.kind == StationKind::FcfsQueue;
                    double busy_total = 0.0;
                    for (std::size_t c = 0; c < classes_.size(); ++c)
                    {
                        Cell &cell = cell_at(s, c);
                        if (cell.service == nullptr)
                            continue;
                        cell.present.change(horizon_, 0.0, warmup_);
                        cell.busy.change(horizon_, 0.0, warmup_);
                        const std::string &cls = model_.classes[c].name;
                        emit(st.name, cls, Metric::Throughput, cell.completions / window);
                        emit(st.name, cls, Metric::ResponseTime,
                             cell.completions ? cell.response_sum / cell.completions : 0.0);
                        emit(st.name, cls, Metric::QueueLength, cell.present.area / window);
                        if (fcfs)
                        {
                            emit(st.name, cls, Metric::Utilization, cell.busy.area / (st.servers * window));
                            busy_total += cell.busy.area;
                        }
                        if (cell.limited)
                        {
                            emit(st.name, cls, Metric::DroppedCount, static_cast<double>(cell.dropped));
                            emit(st.name, cls, Metric::DroppedRate, cell.dropped / window);
                        }
                    }
                    if (fcfs)
                        emit(st.name, kAllClasses, Metric::Utilization, busy_total / (st.servers * window));
                }

                for (std::size_t c = 0; c < classes_.size(); ++c)
                {
                    ClassState &cs = classes_[c];
                    cs.in_system.change(horizon_, 0.0, warmup_);
                    const std::string &cls = model_.classes[c].name;
                    emit(kSystem, cls, Metric::Throughput, cs.completions / window);
                    emit(kSystem, cls, Metric::ResponseTime, cs.completions ? cs.response_sum / cs.completions : 0.0);
                    emit(kSystem, cls, Metric::QueueLength, cs.in_system.area / window);
                    if (cs.mode == ClassMode::Open)
                    {
                        emit(kSystem, cls, Metric::DroppedCount, static_cast<double>(cs.dropped));
                        emit(kSystem, cls, Metric::DroppedRate, cs.dropped / window);
                    }
                }
                return out;
            }

            const NetworkModel &model_;
            double horizon_;
            double warmup_;
            SimulationOptions options_;
            double now_ = 0.0;

            EventCalendar calendar_;
            std::vector<StationState> stations_;
            std::vector<ClassState> classes_;
            std::vector<Cell> cells_;
            std::vector<GateRule> gates_;
            std::vector<Job> jobs_;
            std::vector<JobId> free_;
        };
    } // namespace

    ReplicationResult run_replication(const NetworkModel &model, std::uint64_t seed, SimTime horizon, SimTime warmup,
                                      const SimulationOptions &options)
    {
        if (!(warmup.ms >= 0.0) || !std::isfinite(horizon.ms) || !(warmup.ms < horizon.ms))
        {
            throw ConfigError(fmt::format("need 0 <= warmup < horizon, got warmup={} horizon={}", warmup.ms, horizon.ms));
        }
        require_valid(model);
        Replication rep(model, seed, horizon.ms, warmup.ms, options);
        return rep.run(seed);
    }
} // namespace qnap
