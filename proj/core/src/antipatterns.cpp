#include "qnap/antipatterns.hpp"

#include "qnap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace qnap
{
    std::string to_string(AntipatternKind kind)
    {
        switch (kind)
        {
        case AntipatternKind::AreWeThereYet:
            return "are-we-there-yet";
        case AntipatternKind::IsEverythingOk:
            return "is-everything-ok";
        case AntipatternKind::WhereWasI:
            return "where-was-i";
        }
        return "?";
    }

    std::optional<AntipatternKind> parse_antipattern_kind(const std::string &text)
    {
        for (auto kind : {AntipatternKind::AreWeThereYet, AntipatternKind::IsEverythingOk, AntipatternKind::WhereWasI})
            if (to_string(kind) == text)
                return kind;
        return std::nullopt;
    }

    namespace
    {
        void require_kind(const AntipatternSpec &spec, AntipatternKind expected)
        {
            if (spec.kind != expected)
            {
                throw ConfigError(fmt::format("antipattern spec of kind '{}' passed to the '{}' transform",
                                              to_string(spec.kind), to_string(expected)));
            }
        }

        // Validates the input model and rejects double application.
        NetworkModel prepare(const NetworkModel &model, AntipatternKind kind)
        {
            require_valid(model);
            const std::string tag = to_string(kind);
            const auto &applied = model.description.antipatterns;
            if (std::find(applied.begin(), applied.end(), tag) != applied.end())
            {
                throw ConfigError(fmt::format("antipattern '{}' has already been applied to this model", tag));
            }
            NetworkModel out = model;
            out.description.antipatterns.push_back(tag);
            return out;
        }

        Station &controller_of(NetworkModel &model, const AntipatternSpec &spec)
        {
            Station *s = model.find_station(spec.controller);
            if (s == nullptr || s->kind != StationKind::FcfsQueue)
            {
                throw ConfigError(fmt::format("controller station '{}' not found or not an fcfs station", spec.controller));
            }
            return *s;
        }

        void require_absent(const NetworkModel &model, const std::string &station, const std::string &job_class)
        {
            if (model.find_station(station) != nullptr)
                throw ConfigError(fmt::format("model already has a station named '{}'", station));
            if (model.find_class(job_class) != nullptr)
                throw ConfigError(fmt::format("model already has a class named '{}'", job_class));
        }

        void require_positive(double value, const char *what)
        {
            if (!(value > 0.0) || !std::isfinite(value))
                throw ConfigError(fmt::format("{} must be positive and finite, got {}", what, value));
        }
    } // namespace

    TransformResult apply_are_we_there_yet(const NetworkModel &model, const AntipatternSpec &spec)
    {
        require_kind(spec, AntipatternKind::AreWeThereYet);
        const PollingParams &p = spec.awty;
        if (!(p.f_poll >= 0.0) || !std::isfinite(p.f_poll))
            throw ConfigError(fmt::format("f_poll must be >= 0, got {}", p.f_poll));
        if (p.pollers < 1)
            throw ConfigError(fmt::format("pollers must be >= 1, got {}", p.pollers));
        require_positive(p.polling_demand, "polling_demand");

        TransformResult result{prepare(model, spec.kind), {}};
        NetworkModel &m = result.model;
        TransformReport &r = result.report;
        require_absent(m, kPollTimerStation, kPollingClass);
        Station &controller = controller_of(m, spec);
        controller.service[kPollingClass] = ServiceDistribution::exponential_mean(p.polling_demand);
        r.modified_service_entries.push_back(fmt::format("{}/{}", controller.name, kPollingClass));
        const std::string controller_name = controller.name;

        Station timer;
        timer.name = kPollTimerStation;
        timer.kind = StationKind::Delay;
        timer.service[kPollingClass] =
            p.f_poll > 0.0 ? ServiceDistribution::exponential(p.f_poll) : ServiceDistribution::never();
        m.stations.push_back(std::move(timer));
        r.added_stations.push_back(kPollTimerStation);

        m.classes.push_back(JobClass::closed(kPollingClass, p.pollers, kPollTimerStation));
        r.added_classes.push_back(kPollingClass);
        m.routing[kPollingClass][kPollTimerStation] = {Route{controller_name, 1.0}};
        m.routing[kPollingClass][controller_name] = {Route{kPollTimerStation, 1.0}};

        // With polling disabled nobody would ever observe completion, so the
        // target class is left ungated.
        if (p.f_poll > 0.0)
        {
            JobClass *target = m.find_class(spec.target_class);
            if (target == nullptr || target->mode != ClassMode::Open)
                throw ConfigError(fmt::format("polled class '{}' not found or not open", spec.target_class));
            target->completion_gate = CompletionGate{kPollingClass, controller_name};
            r.modified_class_gates.push_back(target->name);
        }
        return result;
    }

    TransformResult apply_is_everything_ok(const NetworkModel &model, const AntipatternSpec &spec)
    {
        require_kind(spec, AntipatternKind::IsEverythingOk);
        const StatusParams &p = spec.ieok;
        if (p.n_status < 1)
            throw ConfigError(fmt::format("n_status must be >= 1, got {}", p.n_status));
        require_positive(p.check_period, "check_period");
        require_positive(p.check_demand, "check_demand");
        require_positive(p.device_demand, "device_demand");
        if (!(p.exception_probability >= 0.0 && p.exception_probability <= 1.0))
            throw ConfigError(fmt::format("exception_probability must be in [0, 1], got {}", p.exception_probability));
        if (!(p.exception_demand >= 0.0) || !std::isfinite(p.exception_demand))
            throw ConfigError(fmt::format("exception_demand must be >= 0, got {}", p.exception_demand));

        TransformResult result{prepare(model, spec.kind), {}};
        NetworkModel &m = result.model;
        TransformReport &r = result.report;
        require_absent(m, kStatusTimerStation, kStatusClass);

        std::vector<std::string> devices = p.devices;
        if (devices.empty())
        {
            for (const Station &s : m.stations)
                if (s.is_service_station() && s.name.rfind("Sensor", 0) == 0)
                    devices.push_back(s.name);
        }
        std::set<std::string> seen;
        for (const std::string &d : devices)
        {
            const Station *s = m.find_station(d);
            if (s == nullptr || !s->is_service_station())
                throw ConfigError(fmt::format("checked device '{}' not found or not a service station", d));
            if (d == spec.controller)
                throw ConfigError(fmt::format("the controller '{}' cannot be a checked device", d));
            if (!seen.insert(d).second)
                throw ConfigError(fmt::format("checked device '{}' listed twice", d));
        }

        Station &controller = controller_of(m, spec);
        controller.service[kStatusClass] = ServiceDistribution::exponential_mean(p.check_demand)
                                               .with_surcharge({p.exception_probability, p.exception_demand});
        r.modified_service_entries.push_back(fmt::format("{}/{}", controller.name, kStatusClass));
        const std::string controller_name = controller.name;

        for (const std::string &d : devices)
        {
            m.find_station(d)->service[kStatusClass] = ServiceDistribution::exponential_mean(p.device_demand);
            r.modified_service_entries.push_back(fmt::format("{}/{}", d, kStatusClass));
        }

        Station timer;
        timer.name = kStatusTimerStation;
        timer.kind = StationKind::Delay;
        timer.service[kStatusClass] = p.check_period >= kNeverMs ? ServiceDistribution::never()
                                                                 : ServiceDistribution::exponential_mean(p.check_period);
        m.stations.push_back(std::move(timer));
        r.added_stations.push_back(kStatusTimerStation);

        m.classes.push_back(JobClass::closed(kStatusClass, p.n_status, kStatusTimerStation));
        r.added_classes.push_back(kStatusClass);

        // Sequential visits: timer -> controller -> device_1 -> ... -> device_n -> timer
        auto &rows = m.routing[kStatusClass];
        std::string previous = kStatusTimerStation;
        std::vector<std::string> chain{controller_name};
        chain.insert(chain.end(), devices.begin(), devices.end());
        for (const std::string &next : chain)
        {
            rows[previous] = {Route{next, 1.0}};
            previous = next;
        }
        rows[previous] = {Route{kStatusTimerStation, 1.0}};
        return result;
    }

    TransformResult apply_where_was_i(const NetworkModel &model, const AntipatternSpec &spec)
    {
        require_kind(spec, AntipatternKind::WhereWasI);
        const RecoveryParams &p = spec.wwi;
        if (p.buffer_capacity && *p.buffer_capacity < 1)
            throw ConfigError(fmt::format("buffer_capacity must be >= 1, got {}", *p.buffer_capacity));
        if (!(p.save_restore_overhead >= 0.0) || !std::isfinite(p.save_restore_overhead))
            throw ConfigError(fmt::format("save_restore_overhead must be >= 0, got {}", p.save_restore_overhead));

        TransformResult result{prepare(model, spec.kind), {}};
        NetworkModel &m = result.model;
        TransformReport &r = result.report;
        Station &controller = controller_of(m, spec);
        const JobClass *target = m.find_class(spec.target_class);
        if (target == nullptr || target->mode != ClassMode::Open)
            throw ConfigError(fmt::format("class '{}' not found or not open", spec.target_class));
        auto service = controller.service.find(spec.target_class);
        if (service == controller.service.end())
            throw ConfigError(fmt::format("class '{}' is not served by '{}'", spec.target_class, controller.name));

        if (p.save_restore_overhead > 0.0)
        {
            service->second = service->second.with_offset(p.save_restore_overhead);
            r.modified_service_entries.push_back(fmt::format("{}/{}", controller.name, spec.target_class));
        }
        if (p.buffer_capacity)
        {
            if (*p.buffer_capacity < controller.servers)
                throw ConfigError(fmt::format("buffer_capacity {} is below the {} servers of '{}'",
                                              *p.buffer_capacity, controller.servers, controller.name));
            controller.capacity = *p.buffer_capacity;
            controller.capacity_classes = {spec.target_class};
            r.modified_station_capacity.push_back(controller.name);
        }
        return result;
    }

    TransformResult apply_antipattern(const NetworkModel &model, const AntipatternSpec &spec)
    {
        switch (spec.kind)
        {
        case AntipatternKind::AreWeThereYet:
            return apply_are_we_there_yet(model, spec);
        case AntipatternKind::IsEverythingOk:
            return apply_is_everything_ok(model, spec);
        case AntipatternKind::WhereWasI:
            return apply_where_was_i(model, spec);
        }
        throw ConfigError("unknown antipattern kind");
    }
} // namespace qnap
