#pragma once

#include "qnap/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace qnap::eg
{
    /// Resource name -> demand in msec.
    using DemandVector = std::map<std::string, double>;

    /// Node of a software execution graph.
    struct Node
    {
        enum class Kind : std::uint8_t
        {
            Basic,
            Sequence,
            Branch,
            Loop,
        };

        Kind kind = Kind::Basic;
        DemandVector demand;              // Basic
        std::vector<Node> children;       // Sequence, Branch, Loop (single child)
        std::vector<double> probabilities; // Branch, parallel to children
        double count = 0.0;               // Loop; expected iterations, may be fractional

        static Node basic(DemandVector demand);
        static Node sequence(std::vector<Node> children);
        static Node branch(std::vector<std::pair<double, Node>> arms);
        static Node loop(double count, Node body);
    };

    /// Reduces a graph to its expected demand per resource. Throws
    /// ConfigError for malformed nodes (branch probabilities not summing to
    /// 1 within 1e-9, negative demands or counts).
    DemandVector reduce(const Node &root);

    struct Scenario
    {
        std::string class_name;
        Node root;
        double arrival_rate = 0.0; // per msec
    };

    struct Metrics
    {
        std::string class_name;
        DemandVector demand;
        std::map<std::string, double> utilization_percent;
        double response_time = 0.0; // msec, no-contention
        std::vector<std::string> diagnostics;

        bool saturated() const noexcept { return !diagnostics.empty(); }
    };

    /// No-contention solution: response time is the total demand,
    /// utilization of each resource is arrival_rate * demand (as percent).
    /// Utilizations above 100% are reported as-is with a saturation
    /// diagnostic.
    Metrics solve(const Scenario &scenario);

    struct QnClassEstimate
    {
        std::string class_name;
        ConfidenceInterval utilization_percent;
        ConfidenceInterval response_time;
    };

    struct EgClassResult
    {
        std::string class_name;
        double utilization_percent = 0.0;
        double response_time = 0.0;
    };

    /// One row per class, in the order of `eg`. Throws ConfigError naming any
    /// class present on only one side.
    std::vector<ValidationRow> build_validation_table(const std::vector<EgClassResult> &eg,
                                                      const std::vector<QnClassEstimate> &qn);
} // namespace qnap::eg
