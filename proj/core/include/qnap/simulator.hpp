#pragma once

#include "qnap/metrics.hpp"
#include "qnap/model.hpp"
#include "qnap/sim_time.hpp"

#include <cstdint>

namespace qnap
{
    struct SimulationOptions
    {
        // Check closed-class population conservation after every event and
        // throw ModelError on violation. Costs O(stations) per event.
        bool audit_conservation = false;
    };

    /// Simulates `model` from an empty state (closed jobs at their reference
    /// stations) until the clock reaches `horizon`. Statistics cover
    /// (warmup, horizon]: time averages are integrated over that window and
    /// response times are recorded for completions inside it.
    ///
    /// Emitted samples, per service station s and class c visiting it:
    ///   throughput, response-time (per visit), queue-length;
    ///   fcfs stations additionally utilization per class and for "ALL";
    ///   stations with a capacity limit: dropped-count, dropped-rate.
    /// Per class at station "System":
    ///   throughput, response-time, queue-length (jobs in system), and for
    ///   open classes dropped-count, dropped-rate.
    /// Closed-class system response time is one cycle: departure from the
    /// reference station until the next arrival there.
    ///
    /// Pure function of its arguments. Throws ConfigError for invalid models
    /// or windows and DeadlockError when a closed class cannot progress.
    ReplicationResult run_replication(const NetworkModel &model, std::uint64_t seed, SimTime horizon,
                                      SimTime warmup, const SimulationOptions &options = {});
} // namespace qnap
