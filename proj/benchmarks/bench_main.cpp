#include "qnap/builders.hpp"
#include "qnap/distribution.hpp"
#include "qnap/eg_solver.hpp"
#include "qnap/event_calendar.hpp"
#include "qnap/metrics.hpp"
#include "qnap/rng.hpp"
#include "qnap/simulator.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace qnap;

static void BM_Philox(benchmark::State &state)
{
    RngStream s(1, StreamId{"Controller", "Analysis", StreamPurpose::Service});
    for (auto _ : state)
        benchmark::DoNotOptimize(s.uniform());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

static void BM_ExponentialDraw(benchmark::State &state)
{
    RngStream s(1, StreamId{"Controller", "Analysis", StreamPurpose::Service});
    const auto d = ServiceDistribution::exponential_mean(5.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(draw(s, d));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExponentialDraw);

// Steady-state hold model: pop one event, schedule one in the future.
static void BM_CalendarHold(benchmark::State &state)
{
    const auto pending = static_cast<std::size_t>(state.range(0));
    EventCalendar cal;
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> gap(1.0);
    for (std::size_t i = 0; i < pending; ++i)
        cal.schedule(SimTime{gap(rng)}, EventKind::Timer, i, 0);
    for (auto _ : state)
    {
        const auto e = cal.pop_next();
        cal.schedule(SimTime{e->time.ms + gap(rng)}, EventKind::Timer, e->job, 0);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CalendarHold)->Arg(16)->Arg(256)->Arg(4096);

static void BM_ReplicationSensorNet(benchmark::State &state)
{
    const auto model = build_sensor_net({});
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_replication(model, seed++, SimTime{1e5}, SimTime{1e4}));
}
BENCHMARK(BM_ReplicationSensorNet)->Unit(benchmark::kMillisecond);

static void BM_ReplicationMM1(benchmark::State &state)
{
    NetworkModel m = build_baseline({.arrival_rate = 0.16, .controller_demand = 5.0, .controller_servers = 1,
                                     .environment_latency = 0.0, .distribution = "exponential"});
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_replication(m, seed++, SimTime{1e5}, SimTime{1e4}));
}
BENCHMARK(BM_ReplicationMM1)->Unit(benchmark::kMillisecond);

static void BM_ConfidenceInterval(benchmark::State &state)
{
    std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(3);
    for (double &x : xs)
        x = std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(confidence_interval(xs));
}
BENCHMARK(BM_ConfidenceInterval)->Arg(10)->Arg(1000);

static void BM_EgReduce(benchmark::State &state)
{
    using eg::Node;
    const Node g = Node::sequence(
        {Node::basic({{"Sensor", 0.53}}), Node::loop(2, Node::basic({{"Controller", 2.5}})),
         Node::branch({{0.7, Node::basic({{"Actor", 1.0}})}, {0.3, Node::basic({{"Actor", 1.7}})}})});
    for (auto _ : state)
        benchmark::DoNotOptimize(eg::reduce(g));
}
BENCHMARK(BM_EgReduce);
BENCHMARK_MAIN();
