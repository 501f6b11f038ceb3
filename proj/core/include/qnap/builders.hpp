#pragma once

#include "qnap/antipatterns.hpp"
#include "qnap/model.hpp"

#include <optional>
#include <string>

namespace qnap
{
    /// Baseline system: one open Analysis workload that crosses an
    /// environment delay and is then processed by the Controller.
    ///
    ///   Source -> Environment (delay) -> Controller (fcfs) -> Sink
    ///
    /// `environment_latency == 0` drops the delay station entirely.
    struct BaselineParams
    {
        double arrival_rate = 0.0348;      // per msec
        double controller_demand = 5.0;    // msec
        int controller_servers = 1;
        double environment_latency = 2.0;  // msec, mean
        std::string distribution = "exponential";
    };

    NetworkModel build_baseline(const BaselineParams &params);

    /// Sensor-net cyber-physical system.
    ///
    ///   Analysis (open): Source -> Sensor_i (uniform pick) -> Controller -> Sink
    ///   Actors   (open): Source -> Controller -> Actor_j (uniform pick) -> Sink
    ///   Status   (closed, when `status` is set): Is Everything OK? transform
    ///   Polling  (closed, when `polling` is set): Are We There Yet? transform
    struct SensorNetParams
    {
        int sensors = 3;
        int actors = 2;
        double analysis_rate = 0.0348;              // per msec
        double sensor_demand = 0.53;                // msec
        double controller_analysis_demand = 5.0;    // msec
        double actors_rate = 0.07;                  // per msec
        double controller_actor_demand = 2.3;       // msec
        double actor_demand = 1.21;                 // msec
        std::string distribution = "exponential";

        std::optional<StatusParams> status = StatusParams{};
        std::optional<PollingParams> polling = PollingParams{};
    };

    NetworkModel build_sensor_net(const SensorNetParams &params);

    inline constexpr const char *kSystemStation = "System";
    inline constexpr const char *kControllerStation = "Controller";
    inline constexpr const char *kSourceStation = "Source";
    inline constexpr const char *kSinkStation = "Sink";
} // namespace qnap
