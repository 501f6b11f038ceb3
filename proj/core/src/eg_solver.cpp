#include "qnap/eg_solver.hpp"

#include "qnap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace qnap::eg
{
    Node Node::basic(DemandVector demand)
    {
        Node n;
        n.kind = Kind::Basic;
        n.demand = std::move(demand);
        return n;
    }

    Node Node::sequence(std::vector<Node> children)
    {
        Node n;
        n.kind = Kind::Sequence;
        n.children = std::move(children);
        return n;
    }

    Node Node::branch(std::vector<std::pair<double, Node>> arms)
    {
        Node n;
        n.kind = Kind::Branch;
        for (auto &[p, child] : arms)
        {
            n.probabilities.push_back(p);
            n.children.push_back(std::move(child));
        }
        return n;
    }

    Node Node::loop(double count, Node body)
    {
        Node n;
        n.kind = Kind::Loop;
        n.count = count;
        n.children.push_back(std::move(body));
        return n;
    }

    namespace
    {
        void accumulate(DemandVector &into, const DemandVector &from, double weight)
        {
            for (const auto &[resource, d] : from)
                into[resource] += weight * d;
        }
    } // namespace

    DemandVector reduce(const Node &node)
    {
        DemandVector out;
        switch (node.kind)
        {
        case Node::Kind::Basic:
            for (const auto &[resource, d] : node.demand)
            {
                if (!(d >= 0.0) || !std::isfinite(d))
                    throw ConfigError(fmt::format("negative or non-finite demand {} on '{}'", d, resource));
                out[resource] += d;
            }
            break;
        case Node::Kind::Sequence:
            for (const Node &child : node.children)
                accumulate(out, reduce(child), 1.0);
            break;
        case Node::Kind::Branch: {
            if (node.children.empty() || node.probabilities.size() != node.children.size())
                throw ConfigError("branch node needs one probability per child");
            double sum = 0.0;
            for (double p : node.probabilities)
            {
                if (!(p >= 0.0))
                    throw ConfigError(fmt::format("branch probability {} is negative", p));
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw ConfigError(fmt::format("branch probabilities sum to {:.12g}", sum));
            for (std::size_t i = 0; i < node.children.size(); ++i)
                accumulate(out, reduce(node.children[i]), node.probabilities[i]);
            break;
        }
        case Node::Kind::Loop:
            if (node.children.size() != 1)
                throw ConfigError("loop node needs exactly one body");
            if (!(node.count >= 0.0) || !std::isfinite(node.count))
                throw ConfigError(fmt::format("loop count {} is negative or non-finite", node.count));
            accumulate(out, reduce(node.children.front()), node.count);
            break;
        }
        return out;
    }

    Metrics solve(const Scenario &scenario)
    {
        if (!(scenario.arrival_rate >= 0.0) || !std::isfinite(scenario.arrival_rate))
            throw ConfigError(fmt::format("arrival rate must be >= 0, got {}", scenario.arrival_rate));
        Metrics m;
        m.class_name = scenario.class_name;
        m.demand = reduce(scenario.root);
        for (const auto &[resource, d] : m.demand)
        {
            m.response_time += d;
            const double u = 100.0 * scenario.arrival_rate * d;
            m.utilization_percent[resource] = u;
            if (u > 100.0)
                m.diagnostics.push_back(
                    fmt::format("resource '{}' saturated: utilization {:.2f}% for class '{}'", resource, u,
                                scenario.class_name));
        }
        return m;
    }

    std::vector<ValidationRow> build_validation_table(const std::vector<EgClassResult> &eg,
                                                      const std::vector<QnClassEstimate> &qn)
    {
        std::set<std::string> eg_names;
        std::set<std::string> qn_names;
        for (const auto &e : eg)
            eg_names.insert(e.class_name);
        for (const auto &q : qn)
            qn_names.insert(q.class_name);
        for (const auto &name : eg_names)
            if (!qn_names.count(name))
                throw ConfigError(fmt::format("class '{}' has an EG result but no QN estimate", name));
        for (const auto &name : qn_names)
            if (!eg_names.count(name))
                throw ConfigError(fmt::format("class '{}' has a QN estimate but no EG result", name));

        std::vector<ValidationRow> rows;
        for (const auto &e : eg)
        {
            const auto &q = *std::find_if(qn.begin(), qn.end(),
                                          [&](const QnClassEstimate &x) { return x.class_name == e.class_name; });
            ValidationRow row;
            row.class_name = e.class_name;
            row.eg_utilization = e.utilization_percent;
            row.qn_utilization = q.utilization_percent;
            row.utilization_error = utilization_error(e.utilization_percent, q.utilization_percent.mean);
            row.eg_response_time = e.response_time;
            row.qn_response_time = q.response_time;
            row.response_time_error = response_time_error(e.response_time, q.response_time.mean);
            rows.push_back(std::move(row));
        }
        return rows;
    }
} // namespace qnap::eg
