#include "qnap/antipatterns.hpp"
#include "qnap/builders.hpp"
#include "qnap/errors.hpp"
#include "qnap/simulator.hpp"

#include <doctest.h>

#include <algorithm>

using namespace qnap;

namespace
{
    AntipatternSpec awty(double f_poll)
    {
        AntipatternSpec s;
        s.kind = AntipatternKind::AreWeThereYet;
        s.awty.f_poll = f_poll;
        return s;
    }

    AntipatternSpec ieok(int n_status, double period)
    {
        AntipatternSpec s;
        s.kind = AntipatternKind::IsEverythingOk;
        s.ieok.n_status = n_status;
        s.ieok.check_period = period;
        return s;
    }

    AntipatternSpec wwi(double overhead, std::optional<int> capacity)
    {
        AntipatternSpec s;
        s.kind = AntipatternKind::WhereWasI;
        s.wwi.save_restore_overhead = overhead;
        s.wwi.buffer_capacity = capacity;
        return s;
    }

    constexpr SimTime kHorizon{50000};
    constexpr SimTime kWarmup{5000};

    /// Every metric of `base` must appear in `other` with the same bits.
    void require_identical_on(const ReplicationResult &base, const ReplicationResult &other)
    {
        for (const MetricSample &s : base.samples)
        {
            const auto v = other.value(s.station, s.job_class, s.metric);
            INFO(s.station, "/", s.job_class, "/", to_string(s.metric));
            REQUIRE(v.has_value());
            CHECK(*v == s.value);
        }
    }

    double paired_mean(const NetworkModel &m, const std::string &station, const std::string &cls, Metric metric)
    {
        double sum = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed)
            sum += *run_replication(m, seed, kHorizon, kWarmup).value(station, cls, metric);
        return sum / 10.0;
    }

    SensorNetParams plain_sensor_net()
    {
        SensorNetParams p;
        p.status.reset();
        p.polling.reset();
        return p;
    }
} // namespace

TEST_CASE("neutral Are We There Yet? leaves the baseline metrics bit-identical")
{
    const auto base = build_baseline({});
    const auto t = apply_antipattern(base, awty(0.0));
    CHECK(t.report.modified_class_gates.empty());
    require_identical_on(run_replication(base, 5, kHorizon, kWarmup), run_replication(t.model, 5, kHorizon, kWarmup));
}

TEST_CASE("neutral Is Everything OK? leaves the baseline metrics bit-identical")
{
    const auto base = build_baseline({});
    const auto t = apply_antipattern(base, ieok(5, kNeverMs));
    require_identical_on(run_replication(base, 5, kHorizon, kWarmup), run_replication(t.model, 5, kHorizon, kWarmup));
}

TEST_CASE("neutral Where Was I? leaves the baseline metrics bit-identical")
{
    const auto base = build_baseline({});
    const auto t = apply_antipattern(base, wwi(0.0, std::nullopt));
    CHECK(t.report.modified_service_entries.empty());
    CHECK(t.report.modified_station_capacity.empty());
    require_identical_on(run_replication(base, 5, kHorizon, kWarmup), run_replication(t.model, 5, kHorizon, kWarmup));
}

TEST_CASE("transforms record provenance and report their changes")
{
    const auto base = build_baseline({});
    const auto a = apply_antipattern(base, awty(0.02));
    CHECK(a.model.description.antipatterns == std::vector<std::string>{"are-we-there-yet"});
    CHECK(a.report.added_stations == std::vector<std::string>{"PollTimer"});
    CHECK(a.report.added_classes == std::vector<std::string>{"Polling"});
    CHECK(a.report.modified_service_entries == std::vector<std::string>{"Controller/Polling"});
    CHECK(a.report.modified_class_gates == std::vector<std::string>{"Analysis"});
    CHECK(a.model.find_class("Analysis")->completion_gate.has_value());
    CHECK(validate_model(a.model).empty());

    const auto w = apply_antipattern(base, wwi(1.5, 4));
    CHECK(w.report.modified_service_entries == std::vector<std::string>{"Controller/Analysis"});
    CHECK(w.report.modified_station_capacity == std::vector<std::string>{"Controller"});
    CHECK(w.model.find_station("Controller")->capacity == 4);
    CHECK(w.model.find_station("Controller")->service.at("Analysis").mean() == doctest::Approx(6.5));

    const auto i = apply_antipattern(build_sensor_net(plain_sensor_net()), ieok(3, 50.0));
    CHECK(i.report.added_classes == std::vector<std::string>{"Status"});
    CHECK(std::count(i.report.modified_service_entries.begin(), i.report.modified_service_entries.end(),
                     "Sensor_2/Status") == 1);
    CHECK(i.model.routing.at("Status").at("StatusTimer").front().to == "Controller");
}

TEST_CASE("applying the same antipattern twice is rejected")
{
    const auto base = build_baseline({});
    for (const auto &spec : {awty(0.02), ieok(2, 100.0), wwi(1.0, 3)})
    {
        const auto once = apply_antipattern(base, spec).model;
        CHECK_THROWS_AS(apply_antipattern(once, spec), ConfigError);
    }
    // the default sensor net already carries Status and Polling
    CHECK_THROWS_AS(apply_antipattern(build_sensor_net({}), awty(0.02)), ConfigError);
}

TEST_CASE("transforms reject bad parameters and targets")
{
    const auto base = build_baseline({});
    CHECK_THROWS_AS(apply_antipattern(base, awty(-1.0)), ConfigError);
    CHECK_THROWS_AS(apply_antipattern(base, ieok(0, 100.0)), ConfigError);
    CHECK_THROWS_AS(apply_antipattern(base, wwi(-1.0, std::nullopt)), ConfigError);
    CHECK_THROWS_AS(apply_antipattern(base, wwi(0.0, 0)), ConfigError);
    auto spec = wwi(1.0, std::nullopt);
    spec.target_class = "Nope";
    CHECK_THROWS_AS(apply_antipattern(base, spec), ConfigError);
    spec = awty(0.1);
    spec.controller = "Environment";
    CHECK_THROWS_AS(apply_antipattern(base, spec), ConfigError);
    CHECK_THROWS_AS(apply_where_was_i(base, awty(0.1)), ConfigError);
}

TEST_CASE("transforms compose in either order")
{
    const auto base = build_sensor_net(plain_sensor_net());
    const auto ab = apply_antipattern(apply_antipattern(base, ieok(4, 80.0)).model, wwi(1.0, 5)).model;
    const auto ba = apply_antipattern(apply_antipattern(base, wwi(1.0, 5)).model, ieok(4, 80.0)).model;
    CHECK(ab.stations == ba.stations);
    CHECK(ab.classes == ba.classes);
    CHECK(ab.routing == ba.routing);
    const auto ra = run_replication(ab, 3, kHorizon, kWarmup);
    const auto rb = run_replication(ba, 3, kHorizon, kWarmup);
    CHECK(ra.samples == rb.samples);
}

TEST_CASE("more Status jobs load the Controller more (paired seeds)")
{
    const auto base = build_sensor_net(plain_sensor_net());
    double previous = -1.0;
    for (int n : {1, 5, 10, 20})
    {
        const double u = paired_mean(apply_antipattern(base, ieok(n, 100.0)).model, "Controller", "ALL",
                                     Metric::Utilization);
        CHECK(u >= previous);
        previous = u;
    }
}

TEST_CASE("save/restore overhead raises Analysis response time and drops (paired seeds)")
{
    auto p = plain_sensor_net();
    p.sensors = 1;
    p.actors = 1;
    const auto base = build_sensor_net(p);
    const auto light = apply_antipattern(base, wwi(0.0, 2)).model;
    const auto heavy = apply_antipattern(base, wwi(4.0, 2)).model;
    CHECK(paired_mean(heavy, "Controller", "Analysis", Metric::ResponseTime) >
          paired_mean(light, "Controller", "Analysis", Metric::ResponseTime));
    CHECK(paired_mean(heavy, "System", "Analysis", Metric::DroppedRate) >
          paired_mean(light, "System", "Analysis", Metric::DroppedRate));
    // the buffer never drops other classes
    CHECK(paired_mean(heavy, "System", "Actors", Metric::DroppedCount) == 0.0);
}

TEST_CASE("faster polling costs more Controller time (paired seeds)")
{
    const auto base = build_baseline({});
    const double slow = paired_mean(apply_antipattern(base, awty(0.005)).model, "Controller", "Polling",
                                    Metric::Utilization);
    const double fast = paired_mean(apply_antipattern(base, awty(0.05)).model, "Controller", "Polling",
                                    Metric::Utilization);
    CHECK(fast > slow);
}

TEST_CASE("polled results wait for the next poll")
{
    const auto base = build_baseline({});
    const double plain = paired_mean(base, "System", "Analysis", Metric::ResponseTime);
    const double polled = paired_mean(apply_antipattern(base, awty(0.01)).model, "System", "Analysis",
                                      Metric::ResponseTime);
    CHECK(polled > plain + 5.0);
}

TEST_CASE("Status exceptions add Controller demand")
{
    const auto base = build_sensor_net(plain_sensor_net());
    auto spec = ieok(5, 100.0);
    const double calm = paired_mean(apply_antipattern(base, spec).model, "Controller", "Status", Metric::Utilization);
    spec.ieok.exception_probability = 0.5;
    const double stormy =
        paired_mean(apply_antipattern(base, spec).model, "Controller", "Status", Metric::Utilization);
    CHECK(stormy > calm);
}
