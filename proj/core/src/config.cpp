#include "qnap/config.hpp"

#include "qnap/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace qnap
{
    using nlohmann::json;

    std::string to_string(OutputFormat format)
    {
        switch (format)
        {
        case OutputFormat::Csv:
            return "csv";
        case OutputFormat::Svg:
            return "svg";
        case OutputFormat::Table:
            return "table";
        }
        return "?";
    }

    std::set<OutputFormat> parse_output_formats(const std::string &text)
    {
        if (text == "all")
            return {OutputFormat::Csv, OutputFormat::Svg, OutputFormat::Table};
        for (auto f : {OutputFormat::Csv, OutputFormat::Svg, OutputFormat::Table})
            if (to_string(f) == text)
                return {f};
        throw ConfigError(fmt::format("unknown output format '{}' (expected csv, svg, table or all)", text));
    }

    namespace
    {
        /// Reads one JSON object, remembering which keys were consumed so
        /// that misspelled keys are reported instead of silently ignored.
        class ObjectReader
        {
        public:
            ObjectReader(const json &object, std::string where) : object_(object), where_(std::move(where))
            {
                if (!object_.is_object())
                    throw ConfigError(fmt::format("{}: expected an object", where_));
            }

            bool has(const std::string &key) const { return object_.contains(key); }

            const json &raw(const std::string &key)
            {
                seen_.insert(key);
                if (!object_.contains(key))
                    throw ConfigError(fmt::format("{}: missing required key '{}'", where_, key));
                return object_.at(key);
            }

            std::string path(const std::string &key) const { return where_.empty() ? key : where_ + "." + key; }

            double number(const std::string &key, std::optional<double> fallback = std::nullopt)
            {
                if (!has(key))
                {
                    seen_.insert(key);
                    if (fallback)
                        return *fallback;
                }
                return as_number(raw(key), path(key));
            }

            std::int64_t integer(const std::string &key, std::optional<std::int64_t> fallback = std::nullopt)
            {
                if (!has(key))
                {
                    seen_.insert(key);
                    if (fallback)
                        return *fallback;
                }
                const json &v = raw(key);
                if (!v.is_number_integer())
                    throw ConfigError(fmt::format("{}: expected an integer", path(key)));
                return v.get<std::int64_t>();
            }

            std::uint64_t unsigned_integer(const std::string &key, std::uint64_t fallback)
            {
                seen_.insert(key);
                if (!has(key))
                    return fallback;
                const json &v = object_.at(key);
                if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
                    throw ConfigError(fmt::format("{}: expected a non-negative integer", path(key)));
                return v.get<std::uint64_t>();
            }

            std::string text(const std::string &key, std::optional<std::string> fallback = std::nullopt)
            {
                if (!has(key))
                {
                    seen_.insert(key);
                    if (fallback)
                        return *fallback;
                }
                const json &v = raw(key);
                if (!v.is_string())
                    throw ConfigError(fmt::format("{}: expected a string", path(key)));
                return v.get<std::string>();
            }

            bool flag(const std::string &key, bool fallback)
            {
                seen_.insert(key);
                if (!has(key))
                    return fallback;
                const json &v = object_.at(key);
                if (!v.is_boolean())
                    throw ConfigError(fmt::format("{}: expected true or false", path(key)));
                return v.get<bool>();
            }

            void finish() const
            {
                for (const auto &[key, value] : object_.items())
                {
                    if (!seen_.count(key))
                        throw ConfigError(fmt::format("{}: unknown key '{}'", where_.empty() ? "config" : where_, key));
                }
            }

            static double as_number(const json &v, const std::string &where)
            {
                if (v.is_number())
                    return v.get<double>();
                if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
                    return std::numeric_limits<double>::infinity();
                throw ConfigError(fmt::format("{}: expected a number", where));
            }

        private:
            const json &object_;
            std::string where_;
            std::set<std::string> seen_;
        };

        json number_json(double v)
        {
            if (v >= kNeverMs || std::isinf(v))
                return "inf";
            return v;
        }

        // ---------------------------------------------------------------- distributions

        ServiceDistribution parse_distribution(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            const std::string kind = r.text("kind");
            ServiceDistribution d;
            if (kind == "exponential")
            {
                if (r.has("mean"))
                    d = ServiceDistribution::exponential_mean(r.number("mean"));
                else
                    d = ServiceDistribution::exponential(r.number("rate"));
            }
            else if (kind == "deterministic")
            {
                const double v = r.number("value");
                d = std::isinf(v) ? ServiceDistribution::never() : ServiceDistribution::deterministic(v);
            }
            else if (kind == "erlang")
                d = ServiceDistribution::erlang(static_cast<int>(r.integer("phases")), r.number("rate"));
            else if (kind == "uniform")
                d = ServiceDistribution::uniform(r.number("lo"), r.number("hi"));
            else
                throw ConfigError(fmt::format("{}.kind: unknown distribution '{}'", where, kind));
            if (r.has("offset"))
                d = d.with_offset(r.number("offset"));
            if (r.has("surcharge"))
            {
                ObjectReader s(r.raw("surcharge"), r.path("surcharge"));
                d = d.with_surcharge({s.number("probability"), s.number("mean")});
                s.finish();
            }
            r.finish();
            return d;
        }

        json distribution_json(const ServiceDistribution &d)
        {
            json j;
            std::visit(
                [&](const auto &b) {
                    using T = std::decay_t<decltype(b)>;
                    if constexpr (std::is_same_v<T, Exponential>)
                        j = {{"kind", "exponential"}, {"rate", b.rate}};
                    else if constexpr (std::is_same_v<T, Deterministic>)
                        j = {{"kind", "deterministic"}, {"value", number_json(b.value)}};
                    else if constexpr (std::is_same_v<T, Erlang>)
                        j = {{"kind", "erlang"}, {"phases", b.phases}, {"rate", b.rate}};
                    else
                        j = {{"kind", "uniform"}, {"lo", b.lo}, {"hi", b.hi}};
                },
                d.base());
            if (d.offset() != 0.0)
                j["offset"] = d.offset();
            if (d.surcharge())
                j["surcharge"] = {{"probability", d.surcharge()->probability}, {"mean", d.surcharge()->mean_ms}};
            return j;
        }

        // ---------------------------------------------------------------- inline networks

        StationKind parse_station_kind(const std::string &text, const std::string &where)
        {
            for (auto k : {StationKind::FcfsQueue, StationKind::Delay, StationKind::Source, StationKind::Sink})
                if (to_string(k) == text)
                    return k;
            throw ConfigError(fmt::format("{}: unknown station kind '{}'", where, text));
        }

        NetworkModel parse_network_json(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            NetworkModel m;
            m.description.summary = r.text("description", std::string{"inline network"});

            const json &stations = r.raw("stations");
            if (!stations.is_array())
                throw ConfigError(fmt::format("{}.stations: expected an array", where));
            for (std::size_t i = 0; i < stations.size(); ++i)
            {
                const std::string at = fmt::format("{}.stations.{}", where, i);
                ObjectReader s(stations[i], at);
                Station st;
                st.name = s.text("name");
                st.kind = parse_station_kind(s.text("kind"), s.path("kind"));
                st.servers = static_cast<int>(s.integer("servers", 1));
                if (s.has("capacity") && !s.raw("capacity").is_null())
                    st.capacity = static_cast<int>(s.integer("capacity"));
                if (s.has("capacity_classes"))
                    st.capacity_classes = s.raw("capacity_classes").get<std::vector<std::string>>();
                if (s.has("service"))
                {
                    const json &service = s.raw("service");
                    if (!service.is_object())
                        throw ConfigError(fmt::format("{}.service: expected an object", at));
                    for (const auto &[cls, dist] : service.items())
                        st.service[cls] = parse_distribution(dist, fmt::format("{}.service.{}", at, cls));
                }
                s.finish();
                m.stations.push_back(std::move(st));
            }

            const json &classes = r.raw("classes");
            if (!classes.is_array())
                throw ConfigError(fmt::format("{}.classes: expected an array", where));
            for (std::size_t i = 0; i < classes.size(); ++i)
            {
                const std::string at = fmt::format("{}.classes.{}", where, i);
                ObjectReader c(classes[i], at);
                JobClass jc;
                jc.name = c.text("name");
                const std::string mode = c.text("mode");
                if (mode == "open")
                {
                    jc.mode = ClassMode::Open;
                    jc.arrival = parse_distribution(c.raw("arrival"), c.path("arrival"));
                }
                else if (mode == "closed")
                {
                    jc.mode = ClassMode::Closed;
                    jc.population = static_cast<int>(c.integer("population"));
                    jc.reference_station = c.text("reference");
                }
                else
                    throw ConfigError(fmt::format("{}.mode: expected 'open' or 'closed', got '{}'", at, mode));
                if (c.has("gate"))
                {
                    ObjectReader g(c.raw("gate"), c.path("gate"));
                    jc.completion_gate = CompletionGate{g.text("class"), g.text("station")};
                    g.finish();
                }
                c.finish();
                m.classes.push_back(std::move(jc));
            }

            const json &routing = r.raw("routing");
            if (!routing.is_object())
                throw ConfigError(fmt::format("{}.routing: expected an object", where));
            for (const auto &[cls, rows] : routing.items())
            {
                if (!rows.is_object())
                    throw ConfigError(fmt::format("{}.routing.{}: expected an object", where, cls));
                for (const auto &[from, routes] : rows.items())
                {
                    const std::string at = fmt::format("{}.routing.{}.{}", where, cls, from);
                    if (!routes.is_array())
                        throw ConfigError(fmt::format("{}: expected an array", at));
                    auto &row = m.routing[cls][from];
                    for (std::size_t i = 0; i < routes.size(); ++i)
                    {
                        ObjectReader rr(routes[i], fmt::format("{}.{}", at, i));
                        row.push_back(Route{rr.text("to"), rr.number("p", 1.0)});
                        rr.finish();
                    }
                }
            }
            r.finish();
            return m;
        }

        json network_json(const NetworkModel &m)
        {
            json stations = json::array();
            for (const Station &s : m.stations)
            {
                json js = {{"name", s.name}, {"kind", to_string(s.kind)}};
                if (s.kind == StationKind::FcfsQueue)
                {
                    js["servers"] = s.servers;
                    js["capacity"] = s.capacity ? json(*s.capacity) : json(nullptr);
                    js["capacity_classes"] = s.capacity_classes;
                }
                if (s.is_service_station())
                {
                    json service = json::object();
                    for (const auto &[cls, d] : s.service)
                        service[cls] = distribution_json(d);
                    js["service"] = service;
                }
                stations.push_back(js);
            }
            json classes = json::array();
            for (const JobClass &c : m.classes)
            {
                json jc = {{"name", c.name}, {"mode", to_string(c.mode)}};
                if (c.mode == ClassMode::Open)
                    jc["arrival"] = distribution_json(*c.arrival);
                else
                {
                    jc["population"] = c.population;
                    jc["reference"] = c.reference_station;
                }
                if (c.completion_gate)
                    jc["gate"] = {{"class", c.completion_gate->gate_class}, {"station", c.completion_gate->gate_station}};
                classes.push_back(jc);
            }
            json routing = json::object();
            for (const auto &[cls, rows] : m.routing)
                for (const auto &[from, routes] : rows)
                {
                    json row = json::array();
                    for (const Route &r : routes)
                        row.push_back({{"to", r.to}, {"p", r.probability}});
                    routing[cls][from] = row;
                }
            return {{"description", m.description.summary},
                    {"stations", stations},
                    {"classes", classes},
                    {"routing", routing}};
        }

        // ---------------------------------------------------------------- antipattern parameters

        PollingParams parse_polling(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            PollingParams p;
            p.f_poll = r.number("f_poll", p.f_poll);
            p.polling_demand = r.number("polling_demand", p.polling_demand);
            p.pollers = static_cast<int>(r.integer("pollers", p.pollers));
            r.finish();
            return p;
        }

        json polling_json(const PollingParams &p)
        {
            return {{"f_poll", p.f_poll}, {"polling_demand", p.polling_demand}, {"pollers", p.pollers}};
        }

        StatusParams parse_status(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            StatusParams p;
            p.n_status = static_cast<int>(r.integer("n_status", p.n_status));
            p.check_period = r.number("check_period", p.check_period);
            if (std::isinf(p.check_period))
                p.check_period = kNeverMs;
            p.check_demand = r.number("check_demand", p.check_demand);
            p.device_demand = r.number("device_demand", p.device_demand);
            p.exception_probability = r.number("exception_probability", p.exception_probability);
            p.exception_demand = r.number("exception_demand", p.exception_demand);
            if (r.has("devices"))
                p.devices = r.raw("devices").get<std::vector<std::string>>();
            r.finish();
            return p;
        }

        json status_json(const StatusParams &p)
        {
            return {{"n_status", p.n_status},
                    {"check_period", number_json(p.check_period)},
                    {"check_demand", p.check_demand},
                    {"device_demand", p.device_demand},
                    {"exception_probability", p.exception_probability},
                    {"exception_demand", p.exception_demand},
                    {"devices", p.devices}};
        }

        RecoveryParams parse_recovery(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            RecoveryParams p;
            p.save_restore_overhead = r.number("save_restore_overhead", p.save_restore_overhead);
            if (r.has("buffer_capacity"))
            {
                const json &k = r.raw("buffer_capacity");
                if (k.is_null() || (k.is_string() && (k == "unbounded" || k == "inf")))
                    p.buffer_capacity.reset();
                else if (k.is_number_integer())
                    p.buffer_capacity = k.get<int>();
                else
                    throw ConfigError(fmt::format("{}: expected an integer, null or \"unbounded\"",
                                                  r.path("buffer_capacity")));
            }
            r.finish();
            return p;
        }

        json recovery_json(const RecoveryParams &p)
        {
            return {{"save_restore_overhead", p.save_restore_overhead},
                    {"buffer_capacity", p.buffer_capacity ? json(*p.buffer_capacity) : json(nullptr)}};
        }

        AntipatternSpec parse_antipattern(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            AntipatternSpec spec;
            const std::string kind = r.text("kind");
            auto parsed = parse_antipattern_kind(kind);
            if (!parsed)
                throw ConfigError(fmt::format("{}.kind: unknown antipattern '{}'", where, kind));
            spec.kind = *parsed;
            spec.controller = r.text("controller", spec.controller);
            spec.target_class = r.text("target_class", spec.target_class);
            if (r.has("awty"))
                spec.awty = parse_polling(r.raw("awty"), r.path("awty"));
            if (r.has("ieok"))
                spec.ieok = parse_status(r.raw("ieok"), r.path("ieok"));
            if (r.has("wwi"))
                spec.wwi = parse_recovery(r.raw("wwi"), r.path("wwi"));
            r.finish();
            return spec;
        }

        json antipattern_json(const AntipatternSpec &s)
        {
            json j = {{"kind", to_string(s.kind)}, {"controller", s.controller}, {"target_class", s.target_class}};
            // Only the group matching the kind is meaningful.
            switch (s.kind)
            {
            case AntipatternKind::AreWeThereYet:
                j["awty"] = polling_json(s.awty);
                break;
            case AntipatternKind::IsEverythingOk:
                j["ieok"] = status_json(s.ieok);
                break;
            case AntipatternKind::WhereWasI:
                j["wwi"] = recovery_json(s.wwi);
                break;
            }
            return j;
        }

        // ---------------------------------------------------------------- builders

        BaselineParams parse_baseline(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            BaselineParams p;
            p.arrival_rate = r.number("arrival_rate", p.arrival_rate);
            p.controller_demand = r.number("controller_demand", p.controller_demand);
            p.controller_servers = static_cast<int>(r.integer("controller_servers", p.controller_servers));
            p.environment_latency = r.number("environment_latency", p.environment_latency);
            p.distribution = r.text("distribution", p.distribution);
            r.finish();
            return p;
        }

        json baseline_json(const BaselineParams &p)
        {
            return {{"arrival_rate", p.arrival_rate},
                    {"controller_demand", p.controller_demand},
                    {"controller_servers", p.controller_servers},
                    {"environment_latency", p.environment_latency},
                    {"distribution", p.distribution}};
        }

        SensorNetParams parse_sensor_net(const json &j, const std::string &where)
        {
            ObjectReader r(j, where);
            SensorNetParams p;
            p.sensors = static_cast<int>(r.integer("sensors", p.sensors));
            p.actors = static_cast<int>(r.integer("actors", p.actors));
            p.analysis_rate = r.number("analysis_rate", p.analysis_rate);
            p.sensor_demand = r.number("sensor_demand", p.sensor_demand);
            p.controller_analysis_demand = r.number("controller_analysis_demand", p.controller_analysis_demand);
            p.actors_rate = r.number("actors_rate", p.actors_rate);
            p.controller_actor_demand = r.number("controller_actor_demand", p.controller_actor_demand);
            p.actor_demand = r.number("actor_demand", p.actor_demand);
            p.distribution = r.text("distribution", p.distribution);
            if (r.has("status"))
            {
                const json &s = r.raw("status");
                p.status = s.is_null() ? std::nullopt : std::optional(parse_status(s, r.path("status")));
            }
            if (r.has("polling"))
            {
                const json &s = r.raw("polling");
                p.polling = s.is_null() ? std::nullopt : std::optional(parse_polling(s, r.path("polling")));
            }
            r.finish();
            return p;
        }

        json sensor_net_json(const SensorNetParams &p)
        {
            return {{"sensors", p.sensors},
                    {"actors", p.actors},
                    {"analysis_rate", p.analysis_rate},
                    {"sensor_demand", p.sensor_demand},
                    {"controller_analysis_demand", p.controller_analysis_demand},
                    {"actors_rate", p.actors_rate},
                    {"controller_actor_demand", p.controller_actor_demand},
                    {"actor_demand", p.actor_demand},
                    {"distribution", p.distribution},
                    {"status", p.status ? status_json(*p.status) : json(nullptr)},
                    {"polling", p.polling ? polling_json(*p.polling) : json(nullptr)}};
        }

        // ---------------------------------------------------------------- execution graphs

        eg::Node parse_eg_node(const json &j, const std::string &where)
        {
            if (!j.is_object() || j.size() != 1)
                throw ConfigError(fmt::format("{}: expected an object with one of basic/sequence/branch/loop", where));
            const auto &[kind, body] = *j.items().begin();
            const std::string at = where + "." + kind;
            if (kind == "basic")
            {
                eg::DemandVector d;
                if (!body.is_object())
                    throw ConfigError(fmt::format("{}: expected resource -> demand", at));
                for (const auto &[resource, v] : body.items())
                    d[resource] = ObjectReader::as_number(v, at + "." + resource);
                return eg::Node::basic(std::move(d));
            }
            if (kind == "sequence")
            {
                if (!body.is_array())
                    throw ConfigError(fmt::format("{}: expected an array", at));
                std::vector<eg::Node> children;
                for (std::size_t i = 0; i < body.size(); ++i)
                    children.push_back(parse_eg_node(body[i], fmt::format("{}.{}", at, i)));
                return eg::Node::sequence(std::move(children));
            }
            if (kind == "branch")
            {
                if (!body.is_array())
                    throw ConfigError(fmt::format("{}: expected an array", at));
                std::vector<std::pair<double, eg::Node>> arms;
                for (std::size_t i = 0; i < body.size(); ++i)
                {
                    ObjectReader r(body[i], fmt::format("{}.{}", at, i));
                    const double p = r.number("p");
                    arms.emplace_back(p, parse_eg_node(r.raw("node"), r.path("node")));
                    r.finish();
                }
                return eg::Node::branch(std::move(arms));
            }
            if (kind == "loop")
            {
                ObjectReader r(body, at);
                const double count = r.number("count");
                eg::Node node = eg::Node::loop(count, parse_eg_node(r.raw("body"), r.path("body")));
                r.finish();
                return node;
            }
            throw ConfigError(fmt::format("{}: unknown execution-graph node '{}'", where, kind));
        }

        json eg_node_json(const eg::Node &n)
        {
            switch (n.kind)
            {
            case eg::Node::Kind::Basic:
                return {{"basic", n.demand}};
            case eg::Node::Kind::Sequence: {
                json arr = json::array();
                for (const auto &c : n.children)
                    arr.push_back(eg_node_json(c));
                return {{"sequence", arr}};
            }
            case eg::Node::Kind::Branch: {
                json arr = json::array();
                for (std::size_t i = 0; i < n.children.size(); ++i)
                    arr.push_back({{"p", n.probabilities[i]}, {"node", eg_node_json(n.children[i])}});
                return {{"branch", arr}};
            }
            case eg::Node::Kind::Loop:
                return {{"loop", {{"count", n.count}, {"body", eg_node_json(n.children.front())}}}};
            }
            return nullptr;
        }

        // ---------------------------------------------------------------- whole document

        ExperimentConfig parse_document(const json &doc)
        {
            ObjectReader r(doc, "");
            ExperimentConfig cfg;
            const std::string schema = r.text("schema");
            if (schema != kSchemaVersion)
                throw ConfigError(fmt::format("schema: unsupported version '{}' (expected '{}')", schema, kSchemaVersion));
            cfg.name = r.text("experiment");
            if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos)
                throw ConfigError(fmt::format("experiment: '{}' is not a usable file-name stem", cfg.name));
            cfg.description = r.text("description", std::string{});

            {
                ObjectReader m(r.raw("model"), "model");
                cfg.model.builder = m.text("builder");
                if (cfg.model.builder == "baseline")
                    cfg.model.baseline = m.has("params") ? parse_baseline(m.raw("params"), "model.params") : BaselineParams{};
                else if (cfg.model.builder == "sensor_net")
                    cfg.model.sensor_net =
                        m.has("params") ? parse_sensor_net(m.raw("params"), "model.params") : SensorNetParams{};
                else if (cfg.model.builder == "inline")
                    cfg.model.network = parse_network_json(m.raw("network"), "model.network");
                else
                    throw ConfigError(fmt::format("model.builder: unknown builder '{}' (expected baseline, "
                                                  "sensor_net or inline)",
                                                  cfg.model.builder));
                m.finish();
            }

            if (r.has("antipattern") && !r.raw("antipattern").is_null())
                cfg.antipattern = parse_antipattern(r.raw("antipattern"), "antipattern");

            const std::int64_t reps = r.integer("replications", 10);
            if (reps < 2)
                throw ConfigError(fmt::format("replications: need at least 2, got {}", reps));
            cfg.replications = static_cast<std::size_t>(reps);
            cfg.seed = r.unsigned_integer("seed", 1);
            cfg.horizon = r.number("horizon", cfg.horizon);
            cfg.warmup = r.number("warmup", cfg.warmup);
            if (!(cfg.warmup >= 0.0) || !(cfg.warmup < cfg.horizon) || !std::isfinite(cfg.horizon))
                throw ConfigError(fmt::format("warmup/horizon: need 0 <= warmup < horizon, got {} and {}", cfg.warmup,
                                              cfg.horizon));

            if (r.has("outputs"))
            {
                const json &outs = r.raw("outputs");
                if (!outs.is_array())
                    throw ConfigError("outputs: expected an array");
                cfg.outputs.clear();
                for (const json &o : outs)
                {
                    if (!o.is_string())
                        throw ConfigError("outputs: expected strings");
                    auto f = parse_output_formats(o.get<std::string>());
                    cfg.outputs.insert(f.begin(), f.end());
                }
            }

            if (r.has("plots"))
            {
                const json &plots = r.raw("plots");
                if (!plots.is_array())
                    throw ConfigError("plots: expected an array");
                for (std::size_t i = 0; i < plots.size(); ++i)
                {
                    const std::string at = fmt::format("plots.{}", i);
                    ObjectReader p(plots[i], at);
                    PlotConfig plot;
                    plot.name = p.text("name");
                    plot.title = p.text("title", plot.name);
                    plot.y_label = p.text("y_label", std::string{});
                    const std::string scale = p.text("x_scale", std::string{"linear"});
                    if (scale != "linear" && scale != "log")
                        throw ConfigError(fmt::format("{}.x_scale: expected 'linear' or 'log'", at));
                    plot.log_x = scale == "log";
                    plot.annotate_min = p.flag("annotate_min", false);
                    const json &series = p.raw("series");
                    if (!series.is_array() || series.empty())
                        throw ConfigError(fmt::format("{}.series: expected a non-empty array", at));
                    for (std::size_t k = 0; k < series.size(); ++k)
                    {
                        ObjectReader s(series[k], fmt::format("{}.series.{}", at, k));
                        SeriesSpec spec;
                        spec.station = s.text("station");
                        spec.job_class = s.text("class");
                        const std::string metric = s.text("metric");
                        auto parsed = parse_metric(metric);
                        if (!parsed)
                            throw ConfigError(fmt::format("{}.metric: unknown metric '{}'", s.path("metric"), metric));
                        spec.metric = *parsed;
                        spec.label = s.text("label", fmt::format("{} {} {}", spec.station, spec.job_class, metric));
                        s.finish();
                        plot.series.push_back(std::move(spec));
                    }
                    p.finish();
                    cfg.plots.push_back(std::move(plot));
                }
            }

            if (r.has("validation") && !r.raw("validation").is_null())
            {
                ObjectReader v(r.raw("validation"), "validation");
                ValidationSpec spec;
                spec.station = v.text("station", spec.station);
                spec.percent_decimals = static_cast<int>(v.integer("percent_decimals", spec.percent_decimals));
                if (spec.percent_decimals < 0 || spec.percent_decimals > 6)
                    throw ConfigError("validation.percent_decimals: expected 0..6");
                const json &scenarios = v.raw("scenarios");
                if (!scenarios.is_array() || scenarios.empty())
                    throw ConfigError("validation.scenarios: expected a non-empty array");
                for (std::size_t i = 0; i < scenarios.size(); ++i)
                {
                    const std::string at = fmt::format("validation.scenarios.{}", i);
                    ObjectReader s(scenarios[i], at);
                    eg::Scenario sc;
                    sc.class_name = s.text("class");
                    sc.arrival_rate = s.number("arrival_rate");
                    sc.root = parse_eg_node(s.raw("graph"), s.path("graph"));
                    s.finish();
                    spec.scenarios.push_back(std::move(sc));
                }
                v.finish();
                cfg.validation = std::move(spec);
            }

            if (r.has("sweep") && !r.raw("sweep").is_null())
            {
                ObjectReader s(r.raw("sweep"), "sweep");
                SweepSpec sweep;
                sweep.path = s.text("path");
                const json &values = s.raw("values");
                if (!values.is_array() || values.empty())
                    throw ConfigError("sweep.values: expected a non-empty array");
                for (const json &v : values)
                    sweep.values.push_back(v.dump());
                sweep.label = s.text("label", sweep.path);
                s.finish();
                cfg.sweep = std::move(sweep);
            }
            if (cfg.sweep && cfg.validation)
                throw ConfigError("sweep: a validation experiment cannot also sweep");
            r.finish();
            return cfg;
        }

        json canonical_json(const ExperimentConfig &cfg)
        {
            json model = {{"builder", cfg.model.builder}};
            if (cfg.model.builder == "baseline")
                model["params"] = baseline_json(cfg.model.baseline);
            else if (cfg.model.builder == "sensor_net")
                model["params"] = sensor_net_json(cfg.model.sensor_net);
            else
                model["network"] = network_json(cfg.model.network);

            json outputs = json::array();
            for (OutputFormat f : cfg.outputs)
                outputs.push_back(to_string(f));

            json plots = json::array();
            for (const PlotConfig &p : cfg.plots)
            {
                json series = json::array();
                for (const SeriesSpec &s : p.series)
                    series.push_back({{"station", s.station},
                                      {"class", s.job_class},
                                      {"metric", to_string(s.metric)},
                                      {"label", s.label}});
                plots.push_back({{"name", p.name},
                                 {"title", p.title},
                                 {"y_label", p.y_label},
                                 {"x_scale", p.log_x ? "log" : "linear"},
                                 {"annotate_min", p.annotate_min},
                                 {"series", series}});
            }

            json doc = {{"schema", kSchemaVersion},
                        {"experiment", cfg.name},
                        {"description", cfg.description},
                        {"model", model},
                        {"antipattern", cfg.antipattern ? antipattern_json(*cfg.antipattern) : json(nullptr)},
                        {"replications", cfg.replications},
                        {"seed", cfg.seed},
                        {"horizon", cfg.horizon},
                        {"warmup", cfg.warmup},
                        {"outputs", outputs},
                        {"plots", plots}};
            if (cfg.sweep)
            {
                json values = json::array();
                for (const std::string &v : cfg.sweep->values)
                    values.push_back(json::parse(v));
                doc["sweep"] = {{"path", cfg.sweep->path}, {"values", values}, {"label", cfg.sweep->label}};
            }
            else
                doc["sweep"] = nullptr;
            if (cfg.validation)
            {
                json scenarios = json::array();
                for (const eg::Scenario &s : cfg.validation->scenarios)
                    scenarios.push_back(
                        {{"class", s.class_name}, {"arrival_rate", s.arrival_rate}, {"graph", eg_node_json(s.root)}});
                doc["validation"] = {{"station", cfg.validation->station},
                                     {"percent_decimals", cfg.validation->percent_decimals},
                                     {"scenarios", scenarios}};
            }
            else
                doc["validation"] = nullptr;
            return doc;
        }

        json *resolve(json &doc, const std::string &path)
        {
            json *at = &doc;
            std::stringstream ss(path);
            std::string part;
            while (std::getline(ss, part, '.'))
            {
                if (at->is_object() && at->contains(part))
                    at = &(*at)[part];
                else if (at->is_array() && !part.empty() &&
                         part.find_first_not_of("0123456789") == std::string::npos &&
                         std::stoul(part) < at->size())
                    at = &(*at)[std::stoul(part)];
                else
                    return nullptr;
            }
            return at;
        }

        ExperimentConfig finalize(const json &doc)
        {
            ExperimentConfig cfg = parse_document(doc);
            json canonical = canonical_json(cfg);
            if (cfg.sweep)
            {
                if (cfg.sweep->path.rfind("sweep", 0) == 0 || resolve(canonical, cfg.sweep->path) == nullptr)
                    throw ConfigError(fmt::format("sweep.path: '{}' does not name a configuration value",
                                                  cfg.sweep->path));
            }
            cfg.canonical = canonical.dump(2);
            return cfg;
        }
    } // namespace

    ExperimentConfig parse_config(const std::string &text)
    {
        json doc;
        try
        {
            doc = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
        }
        try
        {
            return finalize(doc);
        }
        catch (const json::exception &e)
        {
            throw ConfigError(fmt::format("config has a value of the wrong type: {}", e.what()));
        }
    }

    ExperimentConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse_config(buffer.str());
    }

    ExperimentConfig with_override(const ExperimentConfig &config, const std::string &path,
                                   const std::string &json_value)
    {
        json doc = json::parse(config.canonical);
        json *slot = resolve(doc, path);
        if (slot == nullptr)
            throw ConfigError(fmt::format("'{}' does not name a configuration value", path));
        try
        {
            *slot = json::parse(json_value);
        }
        catch (const json::parse_error &)
        {
            throw ConfigError(fmt::format("override for '{}' is not a JSON value: {}", path, json_value));
        }
        try
        {
            return finalize(doc);
        }
        catch (const json::exception &e)
        {
            throw ConfigError(fmt::format("override for '{}' has the wrong type: {}", path, e.what()));
        }
    }

    NetworkModel build_model(const ExperimentConfig &config)
    {
        NetworkModel model;
        if (config.model.builder == "baseline")
            model = build_baseline(config.model.baseline);
        else if (config.model.builder == "sensor_net")
            model = build_sensor_net(config.model.sensor_net);
        else
        {
            model = config.model.network;
            require_valid(model);
        }
        if (config.antipattern)
            model = apply_antipattern(model, *config.antipattern).model;
        return model;
    }

    NetworkModel parse_network(const std::string &json_text)
    {
        try
        {
            return parse_network_json(json::parse(json_text), "network");
        }
        catch (const json::exception &e)
        {
            throw ConfigError(fmt::format("network description: {}", e.what()));
        }
    }
} // namespace qnap
