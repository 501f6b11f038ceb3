#include "models.hpp"

#include "qnap/builders.hpp"
#include "qnap/errors.hpp"
#include "qnap/model.hpp"

#include <doctest.h>

#include <algorithm>

using namespace qnap;

namespace
{
    bool mentions(const std::vector<Diagnostic> &diags, const std::string &needle,
                  Diagnostic::Kind kind = Diagnostic::Kind::Invalid)
    {
        return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic &d) {
            return d.kind == kind && (d.message.find(needle) != std::string::npos || d.subject == needle);
        });
    }
} // namespace

TEST_CASE("reference models validate cleanly")
{
    CHECK(validate_model(fixtures::mm1(0.5, 1.0)).empty());
    CHECK(validate_model(fixtures::closed_pair(3, 1.0, 2.0)).empty());
    CHECK(validate_model(build_baseline({})).empty());
    CHECK(validate_model(build_sensor_net({})).empty());
}

TEST_CASE("routing rows must sum to one")
{
    auto m = fixtures::mm1(0.5, 1.0);
    m.routing["Jobs"]["Server"] = {Route{"Sink", 0.7}};
    const auto diags = validate_model(m);
    CHECK(mentions(diags, "sums to 0.7"));
    CHECK_THROWS_AS(require_valid(m), ConfigError);
}

TEST_CASE("routing to unknown stations and unknown classes is reported")
{
    auto m = fixtures::mm1(0.5, 1.0);
    m.routing["Jobs"]["Server"] = {Route{"Nowhere", 1.0}};
    CHECK(mentions(validate_model(m), "Nowhere"));

    auto n = fixtures::mm1(0.5, 1.0);
    n.routing["Ghost"]["Source"] = {Route{"Server", 1.0}};
    CHECK(mentions(validate_model(n), "Ghost"));
}

TEST_CASE("a visited station needs a service entry for the class")
{
    auto m = fixtures::mm1(0.5, 1.0);
    m.stations[1].service.clear();
    CHECK_FALSE(validate_model(m).empty());
}

TEST_CASE("duplicate names are rejected")
{
    auto m = fixtures::mm1(0.5, 1.0);
    m.stations.push_back(m.stations[1]);
    CHECK(mentions(validate_model(m), "Server"));
}

TEST_CASE("closed class with a bad population or reference is invalid")
{
    auto m = fixtures::closed_pair(3, 1.0, 2.0);
    m.classes[0].population = 0;
    CHECK_FALSE(validate_model(m).empty());

    auto n = fixtures::closed_pair(3, 1.0, 2.0);
    n.classes[0].reference_station = "Missing";
    CHECK_FALSE(validate_model(n).empty());
}

TEST_CASE("closed class that can leave its cycle is a deadlock")
{
    auto m = fixtures::closed_pair(3, 1.0, 2.0);
    m.stations.push_back(Station{"Sink", StationKind::Sink, 1, std::nullopt, {}, {}});
    m.routing["Jobs"]["B"] = {Route{"Sink", 1.0}};
    const auto diags = validate_model(m);
    REQUIRE_FALSE(diags.empty());
    CHECK(std::any_of(diags.begin(), diags.end(), [](const Diagnostic &d) { return d.kind == Diagnostic::Kind::Deadlock; }));
    try
    {
        require_valid(m);
        FAIL("expected a deadlock error");
    }
    catch (const DeadlockError &e)
    {
        CHECK(e.job_class() == "Jobs");
    }
}

TEST_CASE("open class stations must be able to reach a sink")
{
    auto m = fixtures::mm1(0.5, 1.0);
    m.routing["Jobs"]["Server"] = {Route{"Server", 1.0}};
    CHECK_FALSE(validate_model(m).empty());
}

TEST_CASE("capacity only on fcfs stations and at least the server count")
{
    auto m = fixtures::mm1(0.5, 1.0, 0);
    CHECK_FALSE(validate_model(m).empty());
    auto n = fixtures::mm1(0.5, 1.0, 2);
    CHECK(validate_model(n).empty());
    CHECK(n.stations[1].limits_class("Jobs"));
    n.stations[1].capacity_classes = {"Other"};
    CHECK_FALSE(n.stations[1].limits_class("Jobs"));
}

TEST_CASE("baseline builder topology")
{
    const auto m = build_baseline({});
    REQUIRE(m.find_station("Environment") != nullptr);
    CHECK(m.find_station("Environment")->kind == StationKind::Delay);
    REQUIRE(m.find_station("Controller") != nullptr);
    CHECK(m.find_station("Controller")->service.at("Analysis").mean() == doctest::Approx(5.0));
    REQUIRE(m.classes.size() == 1);
    CHECK(m.classes[0].name == "Analysis");
    CHECK(m.classes[0].arrival->mean() == doctest::Approx(1.0 / 0.0348));

    BaselineParams p;
    p.environment_latency = 0.0;
    const auto bare = build_baseline(p);
    CHECK(bare.find_station("Environment") == nullptr);
    CHECK(bare.routing.at("Analysis").at("Source").front().to == "Controller");

    p.distribution = "deterministic";
    CHECK(std::holds_alternative<Deterministic>(build_baseline(p).find_station("Controller")->service.at("Analysis").base()));
    p.controller_demand = 0.0;
    CHECK_THROWS_AS(build_baseline(p), ConfigError);
}

TEST_CASE("sensor-net builder carries the four job classes")
{
    const auto m = build_sensor_net({});
    for (const char *c : {"Analysis", "Status", "Actors", "Polling"})
        CHECK(m.find_class(c) != nullptr);
    CHECK(m.find_class("Status")->mode == ClassMode::Closed);
    CHECK(m.find_class("Polling")->mode == ClassMode::Closed);
    for (const char *s : {"Controller", "Sensor_1", "Sensor_2", "Sensor_3", "Actor_1", "Actor_2"})
        CHECK(m.find_station(s) != nullptr);
    double p = 0.0;
    for (const Route &r : m.routing.at("Analysis").at("Source"))
        p += r.probability;
    CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("sensor-net builder supports one sensor and one actor")
{
    SensorNetParams p;
    p.sensors = 1;
    p.actors = 1;
    p.status.reset();
    p.polling.reset();
    const auto m = build_sensor_net(p);
    std::size_t fcfs = 0;
    for (const Station &s : m.stations)
        fcfs += s.kind == StationKind::FcfsQueue;
    CHECK(fcfs == 3);
    CHECK(m.classes.size() == 2);
    p.sensors = 0;
    CHECK_THROWS_AS(build_sensor_net(p), ConfigError);
}
