#pragma once

#include "qnap/distribution.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qnap
{
    enum class StationKind : std::uint8_t
    {
        FcfsQueue,
        Delay,
        Source,
        Sink,
    };

    enum class ClassMode : std::uint8_t
    {
        Open,
        Closed,
    };

    std::string to_string(StationKind kind);
    std::string to_string(ClassMode mode);

    struct Station
    {
        std::string name;
        StationKind kind = StationKind::FcfsQueue;
        int servers = 1;

        // Finite waiting room (jobs in queue + in service), FCFS only. Only
        // jobs of `capacity_classes` count towards it and can be dropped;
        // an empty list means every open class visiting the station.
        std::optional<int> capacity;
        std::vector<std::string> capacity_classes;

        std::map<std::string, ServiceDistribution> service; // class name -> demand

        bool is_service_station() const noexcept
        {
            return kind == StationKind::FcfsQueue || kind == StationKind::Delay;
        }
        bool limits_class(const std::string &job_class) const;

        friend bool operator==(const Station &, const Station &) = default;
    };

    /// A job of an open class that reaches a sink stays in the system until
    /// the next service completion of `gate_class` at `gate_station`; its
    /// response time ends there.
    struct CompletionGate
    {
        std::string gate_class;
        std::string gate_station;
        friend bool operator==(const CompletionGate &, const CompletionGate &) = default;
    };

    struct JobClass
    {
        std::string name;
        ClassMode mode = ClassMode::Open;
        std::optional<ServiceDistribution> arrival; // open only
        int population = 0;                          // closed only
        std::string reference_station;               // closed only
        std::optional<CompletionGate> completion_gate;

        static JobClass open(std::string name, ServiceDistribution arrival);
        static JobClass closed(std::string name, int population, std::string reference_station);

        friend bool operator==(const JobClass &, const JobClass &) = default;
    };

    struct Route
    {
        std::string to;
        double probability = 1.0;
        friend bool operator==(const Route &, const Route &) = default;
    };

    /// class name -> from-station -> outgoing routes
    using RoutingTable = std::map<std::string, std::map<std::string, std::vector<Route>>>;

    struct ModelDescription
    {
        std::string summary;
        // Provenance tags of antipattern transforms applied to the model, in
        // application order (e.g. "are-we-there-yet").
        std::vector<std::string> antipatterns;
        friend bool operator==(const ModelDescription &, const ModelDescription &) = default;
    };

    struct NetworkModel
    {
        std::vector<Station> stations;
        std::vector<JobClass> classes;
        RoutingTable routing;
        ModelDescription description;

        const Station *find_station(const std::string &name) const;
        Station *find_station(const std::string &name);
        const JobClass *find_class(const std::string &name) const;
        JobClass *find_class(const std::string &name);
        std::optional<std::size_t> station_index(const std::string &name) const;
        std::optional<std::size_t> class_index(const std::string &name) const;

        friend bool operator==(const NetworkModel &, const NetworkModel &) = default;
    };

    struct Diagnostic
    {
        enum class Kind : std::uint8_t
        {
            Invalid,
            Deadlock,
        };
        Kind kind = Kind::Invalid;
        std::string subject; // station or class name the diagnostic is about
        std::string message;
    };

    /// Checks every structural invariant. Never throws; an empty result means
    /// the model can be simulated.
    std::vector<Diagnostic> validate_model(const NetworkModel &model);

    /// Throws ConfigError (or DeadlockError for deadlock diagnostics) listing
    /// every problem found by validate_model.
    void require_valid(const NetworkModel &model);
} // namespace qnap
