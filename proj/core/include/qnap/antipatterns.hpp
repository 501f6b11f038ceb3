#pragma once

#include "qnap/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qnap
{
    enum class AntipatternKind : std::uint8_t
    {
        AreWeThereYet,
        IsEverythingOk,
        WhereWasI,
    };

    /// "are-we-there-yet", "is-everything-ok", "where-was-i"
    std::string to_string(AntipatternKind kind);
    std::optional<AntipatternKind> parse_antipattern_kind(const std::string &text);

    /// Are We There Yet?: `pollers` closed Polling jobs think for an
    /// exponential time of mean 1/f_poll, then spend `polling_demand` at the
    /// Controller asking whether work has completed. Completed target-class
    /// jobs are only noticed at the next poll. f_poll == 0 disables polling.
    struct PollingParams
    {
        double f_poll = 0.02;        // per msec
        double polling_demand = 2.0; // msec at the Controller
        int pollers = 5;
    };

    /// Is Everything OK?: n_status closed Status jobs wait an exponential
    /// check period, visit the Controller, then each checked device in turn.
    /// The Controller visit carries an exception-handling surcharge with
    /// probability exception_probability.
    struct StatusParams
    {
        int n_status = 5;
        double check_period = 100.0;       // msec, mean; >= kNeverMs means never
        double check_demand = 0.78;        // msec at the Controller
        double device_demand = 0.39;       // msec at each checked device
        double exception_probability = 0.0;
        double exception_demand = 2.0;     // msec, mean
        // Checked devices, visited in this order. Empty selects every station
        // whose name starts with "Sensor".
        std::vector<std::string> devices;
    };

    /// Where Was I?: the target class pays save_restore_overhead on every
    /// Controller visit, and its Controller buffer is limited to
    /// buffer_capacity jobs (arrivals beyond that are dropped).
    struct RecoveryParams
    {
        double save_restore_overhead = 0.0;  // msec
        std::optional<int> buffer_capacity;  // nullopt: unbounded
    };

    struct AntipatternSpec
    {
        AntipatternKind kind = AntipatternKind::AreWeThereYet;
        std::string controller = "Controller";
        std::string target_class = "Analysis";
        PollingParams awty;
        StatusParams ieok;
        RecoveryParams wwi;
    };

    struct TransformReport
    {
        std::vector<std::string> added_stations;
        std::vector<std::string> added_classes;
        // "station/class" pairs whose service distribution changed
        std::vector<std::string> modified_service_entries;
        // stations whose capacity settings changed
        std::vector<std::string> modified_station_capacity;
        // classes whose completion gate changed
        std::vector<std::string> modified_class_gates;
    };

    struct TransformResult
    {
        NetworkModel model;
        TransformReport report;
    };

    inline constexpr const char *kPollingClass = "Polling";
    inline constexpr const char *kPollTimerStation = "PollTimer";
    inline constexpr const char *kStatusClass = "Status";
    inline constexpr const char *kStatusTimerStation = "StatusTimer";

    TransformResult apply_are_we_there_yet(const NetworkModel &model, const AntipatternSpec &spec);
    TransformResult apply_is_everything_ok(const NetworkModel &model, const AntipatternSpec &spec);
    TransformResult apply_where_was_i(const NetworkModel &model, const AntipatternSpec &spec);

    /// Dispatches on spec.kind.
    TransformResult apply_antipattern(const NetworkModel &model, const AntipatternSpec &spec);
} // namespace qnap
