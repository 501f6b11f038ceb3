#include "qnap/builders.hpp"

#include "qnap/errors.hpp"

#include <cmath>

#include <fmt/format.h>

namespace qnap
{
    namespace
    {
        void require_rate(double rate, const char *what)
        {
            if (!(rate >= 0.0) || !std::isfinite(rate))
                throw ConfigError(fmt::format("{} must be >= 0, got {}", what, rate));
        }

        void require_demand(double demand, const char *what)
        {
            if (!(demand > 0.0) || !std::isfinite(demand))
                throw ConfigError(fmt::format("{} must be > 0, got {}", what, demand));
        }

        Station make_station(std::string name, StationKind kind)
        {
            Station s;
            s.name = std::move(name);
            s.kind = kind;
            return s;
        }

        ServiceDistribution arrivals(double rate)
        {
            return ServiceDistribution::exponential(rate);
        }
    } // namespace

    NetworkModel build_baseline(const BaselineParams &p)
    {
        require_rate(p.arrival_rate, "arrival_rate");
        require_demand(p.controller_demand, "controller_demand");
        if (p.controller_servers < 1)
            throw ConfigError(fmt::format("controller_servers must be >= 1, got {}", p.controller_servers));
        if (!(p.environment_latency >= 0.0) || !std::isfinite(p.environment_latency))
            throw ConfigError(fmt::format("environment_latency must be >= 0, got {}", p.environment_latency));

        const std::string cls = "Analysis";
        NetworkModel m;
        m.description.summary = "baseline: Analysis -> Environment -> Controller";
        m.stations.push_back(make_station(kSourceStation, StationKind::Source));

        auto &rows = m.routing[cls];
        std::string entry = kControllerStation;
        if (p.environment_latency > 0.0)
        {
            Station env = make_station("Environment", StationKind::Delay);
            env.service[cls] = make_service(p.distribution, p.environment_latency);
            m.stations.push_back(std::move(env));
            rows["Environment"] = {Route{kControllerStation, 1.0}};
            entry = "Environment";
        }
        rows[kSourceStation] = {Route{entry, 1.0}};

        Station controller = make_station(kControllerStation, StationKind::FcfsQueue);
        controller.servers = p.controller_servers;
        controller.service[cls] = make_service(p.distribution, p.controller_demand);
        m.stations.push_back(std::move(controller));
        rows[kControllerStation] = {Route{kSinkStation, 1.0}};

        m.stations.push_back(make_station(kSinkStation, StationKind::Sink));
        m.classes.push_back(JobClass::open(cls, arrivals(p.arrival_rate)));
        require_valid(m);
        return m;
    }

    NetworkModel build_sensor_net(const SensorNetParams &p)
    {
        if (p.sensors < 1)
            throw ConfigError(fmt::format("sensor count must be >= 1, got {}", p.sensors));
        if (p.actors < 1)
            throw ConfigError(fmt::format("actor count must be >= 1, got {}", p.actors));
        require_rate(p.analysis_rate, "analysis_rate");
        require_rate(p.actors_rate, "actors_rate");
        require_demand(p.sensor_demand, "sensor_demand");
        require_demand(p.controller_analysis_demand, "controller_analysis_demand");
        require_demand(p.controller_actor_demand, "controller_actor_demand");
        require_demand(p.actor_demand, "actor_demand");

        const std::string analysis = "Analysis";
        const std::string actors = "Actors";

        NetworkModel m;
        m.description.summary = fmt::format("sensor net: {} sensors, {} actors", p.sensors, p.actors);
        m.stations.push_back(make_station(kSourceStation, StationKind::Source));

        Station controller = make_station(kControllerStation, StationKind::FcfsQueue);
        controller.service[analysis] = make_service(p.distribution, p.controller_analysis_demand);
        controller.service[actors] = make_service(p.distribution, p.controller_actor_demand);
        m.stations.push_back(std::move(controller));

        std::vector<Route> to_sensors;
        for (int i = 1; i <= p.sensors; ++i)
        {
            Station s = make_station(fmt::format("Sensor_{}", i), StationKind::FcfsQueue);
            s.service[analysis] = make_service(p.distribution, p.sensor_demand);
            to_sensors.push_back(Route{s.name, 1.0 / p.sensors});
            m.routing[analysis][s.name] = {Route{kControllerStation, 1.0}};
            m.stations.push_back(std::move(s));
        }
        std::vector<Route> to_actors;
        for (int j = 1; j <= p.actors; ++j)
        {
            Station a = make_station(fmt::format("Actor_{}", j), StationKind::FcfsQueue);
            a.service[actors] = make_service(p.distribution, p.actor_demand);
            to_actors.push_back(Route{a.name, 1.0 / p.actors});
            m.routing[actors][a.name] = {Route{kSinkStation, 1.0}};
            m.stations.push_back(std::move(a));
        }
        m.stations.push_back(make_station(kSinkStation, StationKind::Sink));

        m.routing[analysis][kSourceStation] = to_sensors;
        m.routing[analysis][kControllerStation] = {Route{kSinkStation, 1.0}};
        m.routing[actors][kSourceStation] = {Route{kControllerStation, 1.0}};
        m.routing[actors][kControllerStation] = to_actors;

        m.classes.push_back(JobClass::open(analysis, arrivals(p.analysis_rate)));
        m.classes.push_back(JobClass::open(actors, arrivals(p.actors_rate)));
        require_valid(m);

        if (p.status)
        {
            AntipatternSpec spec;
            spec.kind = AntipatternKind::IsEverythingOk;
            spec.ieok = *p.status;
            m = apply_is_everything_ok(m, spec).model;
        }
        if (p.polling)
        {
            AntipatternSpec spec;
            spec.kind = AntipatternKind::AreWeThereYet;
            spec.awty = *p.polling;
            m = apply_are_we_there_yet(m, spec).model;
        }
        return m;
    }
} // namespace qnap
