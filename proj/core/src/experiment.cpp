#include "qnap/experiment.hpp"

#include "qnap/builders.hpp"
#include "qnap/errors.hpp"
#include "qnap/rng.hpp"
#include "qnap/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#ifndef QNAP_VERSION
#define QNAP_VERSION "0.0.0"
#endif

namespace qnap
{
    using nlohmann::json;

    std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t /*sweep_index*/, std::size_t replication) noexcept
    {
        return base_seed ^ static_cast<std::uint64_t>(replication);
    }

    std::vector<ReplicationResult> run_replications(const NetworkModel &model, std::span<const std::uint64_t> seeds,
                                                    SimTime horizon, SimTime warmup, std::size_t jobs)
    {
        require_valid(model);
        std::vector<ReplicationResult> results(seeds.size());
        std::vector<std::exception_ptr> errors(seeds.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < seeds.size(); i = next++)
            {
                try
                {
                    results[i] = run_replication(model, seeds[i], horizon, warmup);
                }
                catch (...)
                {
                    errors[i] = std::current_exception();
                }
            }
        };
        const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(seeds.size(), 1));
        if (threads == 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < threads; ++t)
                pool.emplace_back(worker);
        }
        // the lowest failing index wins, whatever the thread count
        for (const auto &e : errors)
            if (e)
                std::rethrow_exception(e);
        return results;
    }

    namespace
    {
        double sweep_x(const std::string &value, std::size_t index)
        {
            const json v = json::parse(value);
            return v.is_number() ? v.get<double>() : static_cast<double>(index);
        }

        /// Time in the fcfs stations per job of `job_class`, from Little's law
        /// on each station: sum of N_s / X. Delay stations (timers, the
        /// environment) and completion-gate waits are left out, which is
        /// what a no-contention execution graph can be compared against.
        double service_residence(const NetworkModel &model, const ReplicationResult &r, const std::string &job_class)
        {
            const auto x = r.value(kSystemStation, job_class, Metric::Throughput);
            if (!x || *x <= 0.0)
                throw StatsError(fmt::format("class '{}' completed no jobs in replication seed {}", job_class, r.seed));
            double total = 0.0;
            for (const Station &s : model.stations)
            {
                if (s.kind != StationKind::FcfsQueue)
                    continue;
                if (auto n = r.value(s.name, job_class, Metric::QueueLength))
                    total += *n / *x;
            }
            return total;
        }

        std::vector<ValidationRow> validate(const ExperimentConfig &config, const NetworkModel &model,
                                            const std::vector<ReplicationResult> &results)
        {
            const ValidationSpec &spec = *config.validation;
            std::vector<eg::EgClassResult> eg_side;
            std::vector<eg::QnClassEstimate> qn_side;
            for (const eg::Scenario &scenario : spec.scenarios)
            {
                const eg::Metrics m = eg::solve(scenario);
                const auto u = m.utilization_percent.find(spec.station);
                eg_side.push_back({scenario.class_name, u == m.utilization_percent.end() ? 0.0 : u->second,
                                   m.response_time});

                if (!model.find_class(scenario.class_name))
                    throw ConfigError(fmt::format("validation.scenarios: class '{}' is not in the model",
                                                  scenario.class_name));
                std::vector<double> util, resp;
                for (const ReplicationResult &r : results)
                {
                    const auto v = r.value(spec.station, scenario.class_name, Metric::Utilization);
                    if (!v)
                        throw ConfigError(fmt::format("validation.station: no utilization of '{}' by class '{}'",
                                                      spec.station, scenario.class_name));
                    util.push_back(100.0 * *v);
                    resp.push_back(service_residence(model, r, scenario.class_name));
                }
                qn_side.push_back({scenario.class_name, confidence_interval(util), confidence_interval(resp)});
            }
            return eg::build_validation_table(eg_side, qn_side);
        }
    } // namespace

    ExperimentResult simulate_experiment(const ExperimentConfig &config, std::size_t jobs)
    {
        ExperimentResult out;
        const std::size_t points = config.sweep ? config.sweep->values.size() : 1;
        for (std::size_t p = 0; p < points; ++p)
        {
            SweepPoint point;
            ExperimentConfig effective = config;
            if (config.sweep)
            {
                point.value = config.sweep->values[p];
                point.x = sweep_x(point.value, p);
                effective = with_override(config, config.sweep->path, point.value);
            }
            const NetworkModel model = build_model(effective);
            for (std::size_t r = 0; r < config.replications; ++r)
                point.seeds.push_back(derive_seed(config.seed, p, r));
            const auto results =
                run_replications(model, point.seeds, SimTime{config.horizon}, SimTime{config.warmup}, jobs);
            for (const ReplicationResult &r : results)
                point.metrics.add(r);

            for (const MetricKey &key : point.metrics.keys())
            {
                out.rows.push_back(EstimateRow{config.name, config.sweep ? config.sweep->path : std::string{},
                                               point.value, key.station, key.job_class, key.metric,
                                               point.metrics.estimate(key), config.seed});
            }
            if (config.validation)
                out.validation = validate(config, model, results);
            out.points.push_back(std::move(point));
        }
        return out;
    }

    namespace
    {
        std::string render_plot_for(const ExperimentConfig &config, const ExperimentResult &result,
                                    const PlotConfig &plot)
        {
            std::vector<PlotSeries> series;
            for (const SeriesSpec &s : plot.series)
            {
                PlotSeries ps;
                ps.label = s.label;
                const MetricKey key{s.station, s.job_class, s.metric};
                for (const SweepPoint &p : result.points)
                {
                    const auto keys = p.metrics.keys();
                    if (!std::binary_search(keys.begin(), keys.end(), key))
                        throw ConfigError(fmt::format("plot '{}': no metric {} for station '{}' class '{}'", plot.name,
                                                      to_string(s.metric), s.station, s.job_class));
                    const ConfidenceInterval ci = p.metrics.estimate(key);
                    ps.x.push_back(p.x);
                    ps.y.push_back(ci.mean);
                    ps.half_width.push_back(ci.half_width);
                }
                series.push_back(std::move(ps));
            }
            PlotSpec spec;
            spec.title = plot.title;
            spec.x_label = config.sweep ? config.sweep->label : std::string{};
            spec.y_label = plot.y_label;
            spec.log_x = plot.log_x;
            spec.annotate_min = plot.annotate_min;
            return render_plot(series, spec);
        }

        void write_file(const std::filesystem::path &path, const std::string &bytes)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw Error(fmt::format("cannot write '{}'", path.string()));
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            out.close();
            if (!out)
                throw Error(fmt::format("failed writing '{}'", path.string()));
        }
    } // namespace

    RunSummary run_experiment(const ExperimentConfig &config, const RunOptions &options)
    {
        const auto started = std::chrono::steady_clock::now();
        RunSummary summary;
        summary.result = simulate_experiment(config, options.jobs);
        const ExperimentResult &result = summary.result;

        std::vector<std::pair<std::string, std::string>> outputs; // file name, bytes
        const std::string &stem = config.name;
        if (config.outputs.count(OutputFormat::Csv))
            outputs.emplace_back(stem + ".csv", render_csv(result.rows));
        if (config.outputs.count(OutputFormat::Table))
            outputs.emplace_back(stem + "_table.txt", render_estimates_table(result.rows));
        if (result.validation)
        {
            const RenderedTable t =
                render_validation_table(*result.validation, TableFormat{config.validation->percent_decimals});
            if (config.outputs.count(OutputFormat::Table))
                outputs.emplace_back(stem + "_validation.txt", t.text);
            if (config.outputs.count(OutputFormat::Csv))
                outputs.emplace_back(stem + "_validation.csv", t.csv);
        }
        if (config.outputs.count(OutputFormat::Svg))
            for (const PlotConfig &plot : config.plots)
                outputs.emplace_back(fmt::format("{}_{}.svg", stem, plot.name), render_plot_for(config, result, plot));

        std::error_code ec;
        std::filesystem::create_directories(options.out_dir, ec);
        if (ec)
            throw Error(fmt::format("cannot create output directory '{}': {}", options.out_dir.string(), ec.message()));

        try
        {
            json files = json::array();
            for (const auto &[name, bytes] : outputs)
            {
                const auto path = options.out_dir / name;
                write_file(path, bytes);
                summary.files.push_back(path);
                files.push_back({{"file", name}, {"sha256", sha256_hex(bytes)}});
            }
            json seeds = json::array();
            for (const SweepPoint &p : result.points)
                seeds.push_back({{"sweep_value", p.value.empty() ? json(nullptr) : json::parse(p.value)},
                                 {"seeds", p.seeds}});
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            const json manifest = {{"tool_version", tool_version()},
                                   {"generator", std::string(RngStream::kGeneratorVersion)},
                                   {"schema", kSchemaVersion},
                                   {"experiment", config.name},
                                   {"config_sha256", sha256_hex(config.canonical)},
                                   {"base_seed", config.seed},
                                   {"replications", config.replications},
                                   {"horizon_msec", config.horizon},
                                   {"warmup_msec", config.warmup},
                                   {"seeds", seeds},
                                   {"outputs", files},
                                   {"run", {{"jobs", options.jobs}, {"wall_clock_seconds", wall}}}};
            const auto path = options.out_dir / (stem + "_manifest.json");
            write_file(path, manifest.dump(2) + "\n");
            summary.files.push_back(path);
        }
        catch (...)
        {
            for (const auto &f : summary.files)
                std::filesystem::remove(f, ec);
            throw;
        }
        return summary;
    }

    std::string sha256_hex(const std::string &bytes)
    {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
            throw Error("SHA-256 computation failed");
        std::string hex;
        for (unsigned int i = 0; i < len; ++i)
            hex += fmt::format("{:02x}", digest[i]);
        return hex;
    }

    std::string tool_version() { return std::string("qnap ") + QNAP_VERSION; }
} // namespace qnap
