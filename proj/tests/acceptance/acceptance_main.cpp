// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed here.

#include "eg_oracle.hpp"
#include "generators.hpp"
#include "models.hpp"
#include "oracles.hpp"

#include "qnap/antipatterns.hpp"
#include "qnap/builders.hpp"
#include "qnap/config.hpp"
#include "qnap/eg_solver.hpp"
#include "qnap/experiment.hpp"
#include "qnap/metrics.hpp"
#include "qnap/render.hpp"
#include "qnap/simulator.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace fs = std::filesystem;
using namespace qnap;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::size_t workers()
    {
        return std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }

    std::vector<std::uint64_t> seeds_for(std::uint64_t base, std::size_t n)
    {
        std::vector<std::uint64_t> s;
        for (std::size_t r = 0; r < n; ++r)
            s.push_back(derive_seed(base, 0, r));
        return s;
    }

    std::string read(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    const std::vector<std::string> kShippedConfigs{"baseline", "awty_sweep", "ieok_sweep", "wwi",
                                                   "table6_validation"};

    fs::path config_path(const std::string &name)
    {
        return fs::path(QNAP_SOURCE_DIR) / "configs" / (name + ".cfg");
    }

    // 1 -------------------------------------------------------------------
    Outcome mm1_oracle()
    {
        const auto exact = oracle::mm1(0.8, 1.0);
        const auto model = fixtures::mm1(0.8, 1.0);
        int u_cover = 0, r_cover = 0;
        double u_first = 0.0, r_first = 0.0;
        for (std::uint64_t trial = 0; trial < 20; ++trial)
        {
            const auto reps = run_replications(model, seeds_for((trial + 1) << 32, 30), SimTime{1e5}, SimTime{1e4},
                                               workers());
            const auto u = estimate(reps, "Server", "Jobs", Metric::Utilization);
            const auto r = estimate(reps, "System", "Jobs", Metric::ResponseTime);
            u_cover += u.covers(exact.utilization);
            r_cover += r.covers(exact.response_time);
            if (trial == 0)
            {
                u_first = u.mean;
                r_first = r.mean;
            }
        }
        const bool ok = std::abs(u_first - 0.8) <= 0.01 && std::abs(r_first - 5.0) <= 0.03 * 5.0 && u_cover >= 17 &&
                        r_cover >= 17;
        return {ok, fmt::format("U={:.4f} (0.8±0.01), R={:.4f} (5.0±3%), CI coverage U {}/20, R {}/20 (need ≥17)",
                                u_first, r_first, u_cover, r_cover)};
    }

    // 2 -------------------------------------------------------------------
    Outcome mm1k_oracle()
    {
        const double exact = oracle::mm1k_drop_probability(0.5, 1.0, 3);
        const auto reps = run_replications(fixtures::mm1(0.5, 1.0, 3), seeds_for(2, 20), SimTime{1e5}, SimTime{1e4},
                                           workers());
        double dropped = 0.0, offered = 0.0;
        for (const auto &r : reps)
        {
            const double d = *r.value("System", "Jobs", Metric::DroppedRate);
            dropped += d;
            offered += d + *r.value("System", "Jobs", Metric::Throughput);
        }
        const double p = dropped / offered;
        return {std::abs(p - 0.0667) <= 0.005,
                fmt::format("drop probability {:.5f} (closed form {:.5f}, need 0.0667±0.005)", p, exact)};
    }

    // 3 -------------------------------------------------------------------
    Outcome closed_mva_oracle()
    {
        double worst = 0.0;
        int worst_n = 0;
        for (int n = 1; n <= 10; ++n)
        {
            const auto exact = oracle::mva({1.0, 1.5}, 0.0, n);
            const auto reps = run_replications(fixtures::closed_pair(n, 1.0, 1.5), seeds_for(3000 + n, 10),
                                               SimTime{1e5}, SimTime{1e4}, workers());
            const double x = estimate(reps, "System", "Jobs", Metric::Throughput).mean;
            const double gap = std::abs(x - exact.throughput) / exact.throughput;
            if (gap > worst)
            {
                worst = gap;
                worst_n = n;
            }
        }
        return {worst <= 0.02, fmt::format("worst throughput gap {:.3f}% at population {} (need ≤2%)", 100 * worst,
                                           worst_n)};
    }

    // 4 -------------------------------------------------------------------
    Outcome validation_numerics()
    {
        struct Printed
        {
            const char *cls;
            double eg_u, qn_u, err_u;
        };
        const Printed original[]{{"Analysis", 17.4, 17.8, 0.4},
                                 {"Status", 3.9, 4.1, 0.2},
                                 {"Actors", 16.1, 15.8, 0.3},
                                 {"Polling", 10.0, 10.9, 0.9}};
        bool ok = true;
        std::string got;
        for (const auto &p : original)
        {
            const std::string printed = fmt::format("{:.1f}", utilization_error(p.eg_u, p.qn_u));
            ok &= printed == fmt::format("{:.1f}", p.err_u);
            got += (got.empty() ? "" : " ") + printed;
        }
        struct Reproduced
        {
            double eg_r, qn_r, err_r;
        };
        const Reproduced reproduced[]{{5.38, 5.33, 0.92}, {1.10, 1.12, 1.78}, {3.47, 3.62, 4.14}, {2.10, 2.13, 1.41}};
        std::string rt;
        for (const auto &r : reproduced)
        {
            const double e = response_time_error(r.eg_r, r.qn_r);
            ok &= std::abs(e - r.err_r) <= 0.1;
            rt += fmt::format("{}{:.2f}", rt.empty() ? "" : " ", e);
        }
        ValidationRow row{"Analysis", 17.4, {17.8, 0.41, 10}, 0.4, 5.53, {5.35, 0.10, 10}, 3.18};
        const auto table = render_validation_table({row}, TableFormat{1});
        const bool layout =
            table.text == "Job Class | EG [%] | QN [%] | Error [%] | EG [msec] | QN [msec] | Error [%]\n"
                          "Analysis | 17.4 | 17.8 (±0.41) | 0.4 | 5.53 | 5.35 (±0.10) | 3.18\n";
        ok &= layout;
        return {ok, fmt::format("utilization errors [{}] (want 0.4 0.2 0.3 0.9); RT errors [{}] (want 0.92 1.78 "
                                "4.14 1.41 ±0.1); layout {}",
                                got, rt, layout ? "exact" : "MISMATCH")};
    }

    // 5 -------------------------------------------------------------------
    bool identical_on(const ReplicationResult &base, const ReplicationResult &other)
    {
        for (const MetricSample &s : base.samples)
        {
            const auto v = other.value(s.station, s.job_class, s.metric);
            if (!v || *v != s.value)
                return false;
        }
        return true;
    }

    Outcome neutral_transforms()
    {
        const auto base = build_baseline({});
        const auto reference = run_replication(base, 11, SimTime{1e5}, SimTime{1e4});
        std::vector<std::pair<std::string, AntipatternSpec>> specs;
        AntipatternSpec a;
        a.kind = AntipatternKind::AreWeThereYet;
        a.awty.f_poll = 0.0;
        specs.emplace_back("are-we-there-yet f_poll=0", a);
        AntipatternSpec i;
        i.kind = AntipatternKind::IsEverythingOk;
        i.ieok.check_period = kNeverMs;
        specs.emplace_back("is-everything-ok period=inf", i);
        AntipatternSpec w;
        w.kind = AntipatternKind::WhereWasI;
        specs.emplace_back("where-was-i overhead=0 K=inf", w);
        bool ok = true;
        std::string detail;
        for (const auto &[name, spec] : specs)
        {
            const bool same =
                identical_on(reference, run_replication(apply_antipattern(base, spec).model, 11, SimTime{1e5},
                                                        SimTime{1e4}));
            ok &= same;
            detail += fmt::format("{}{}: {}", detail.empty() ? "" : "; ", name, same ? "bit-identical" : "DIFFERS");
        }
        return {ok, detail};
    }

    // 6 -------------------------------------------------------------------
    Outcome sweet_spot()
    {
        const auto cfg = load_config(config_path("awty_sweep"));
        const auto result = simulate_experiment(cfg, workers());
        const MetricKey key{"System", "Analysis", Metric::ResponseTime};
        std::size_t best = 0;
        std::string curve;
        for (std::size_t p = 0; p < result.points.size(); ++p)
        {
            const double y = result.points[p].metrics.estimate(key).mean;
            curve += fmt::format("{}{}:{:.2f}", curve.empty() ? "" : " ", result.points[p].value, y);
            if (y < result.points[best].metrics.estimate(key).mean)
                best = p;
        }
        const bool interior = best != 0 && best + 1 != result.points.size();
        const double lo = result.points.front().x, hi = result.points.back().x;
        return {interior && lo <= 0.001 && hi >= 0.1,
                fmt::format("minimum at f_poll={} over [{}, {}]; curve {}", result.points[best].value, lo, hi, curve)};
    }

    // 7 -------------------------------------------------------------------
    Outcome status_monotonicity()
    {
        const auto cfg = load_config(config_path("ieok_sweep"));
        const auto result = simulate_experiment(cfg, workers());
        const MetricKey key{"Controller", "ALL", Metric::Utilization};
        bool ok = result.points.size() == 4;
        std::string curve;
        double previous = -1.0;
        for (const auto &p : result.points)
        {
            const double u = p.metrics.estimate(key).mean;
            ok &= u >= previous;
            previous = u;
            curve += fmt::format("{}{}:{:.4f}", curve.empty() ? "" : " ", p.value, u);
            ok &= p.seeds == result.points.front().seeds;
        }
        return {ok, fmt::format("Controller utilization by N_status {} (common seeds across points)", curve)};
    }

    // 8 -------------------------------------------------------------------
    Outcome determinism(const fs::path &work)
    {
        bool ok = true;
        std::string detail;
        for (const std::string &name : kShippedConfigs)
        {
            for (const char *run : {"run1", "run2"})
            {
                const std::string cmd = fmt::format("{} --config {} --out {} > /dev/null", QNAP_CLI_PATH,
                                                    config_path(name).string(), (work / run).string());
                if (std::system(cmd.c_str()) != 0)
                {
                    ok = false;
                    detail += fmt::format("{} failed to run; ", name);
                }
            }
        }
        std::size_t compared = 0;
        for (const auto &entry : fs::directory_iterator(work / "run1"))
        {
            const auto ext = entry.path().extension();
            if (ext != ".csv" && ext != ".svg" && ext != ".txt")
                continue;
            ++compared;
            const fs::path other = work / "run2" / entry.path().filename();
            if (!fs::exists(other) || read(entry.path()) != read(other))
            {
                ok = false;
                detail += fmt::format("{} differs; ", entry.path().filename().string());
            }
        }
        return {ok && compared > 0, fmt::format("{}{} output files byte-identical across two runs of {} configs",
                                                detail, compared, kShippedConfigs.size())};
    }

    // 9 -------------------------------------------------------------------
    Outcome littles_law(const fs::path &work)
    {
        // (experiment, sweep value, class) -> metric -> mean, read back from the emitted CSV
        std::map<std::tuple<std::string, std::string, std::string>, std::map<std::string, double>> system;
        for (const std::string &name : kShippedConfigs)
        {
            std::istringstream csv(read(work / "run1" / (name + ".csv")));
            std::string line;
            std::getline(csv, line); // header
            while (std::getline(csv, line))
            {
                std::vector<std::string> f;
                std::stringstream ls(line);
                for (std::string cell; std::getline(ls, cell, ',');)
                    f.push_back(cell);
                if (f.size() != 10 || f[3] != "System")
                    continue;
                system[{f[0], f[2], f[4]}][f[5]] = std::stod(f[6]);
            }
        }
        bool ok = !system.empty();
        double worst = 0.0;
        std::string where;
        for (const auto &[k, m] : system)
        {
            const double n = m.at("queue-length"), x = m.at("throughput-per-msec"), r = m.at("response-time-msec");
            const double gap = std::abs(n - x * r) / n;
            if (!(gap <= 0.05))
                ok = false;
            if (gap > worst || std::isnan(gap))
            {
                worst = gap;
                where = fmt::format("{} {} {}", std::get<0>(k), std::get<1>(k), std::get<2>(k));
            }
        }
        return {ok, fmt::format("{} (experiment, point, class) triples; worst |N-XR|/N = {:.3f}% at {}", system.size(),
                                100 * worst, where)};
    }

    // 10 ------------------------------------------------------------------
    Outcome eg_enumeration()
    {
        gen::Rng rng(10);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i)
        {
            const auto g = gen::execution_graph(rng, 4);
            const auto fast = eg::reduce(g);
            const auto slow = oracle::expected_demand(g);
            for (const auto &[k, v] : slow)
            {
                const double w = fast.count(k) ? fast.at(k) : 0.0;
                if (v != 0.0 || w != 0.0)
                    worst = std::max(worst, std::abs(v - w) / std::max(std::abs(v), std::abs(w)));
            }
            for (const auto &[k, w] : fast)
                if (!slow.count(k) && w != 0.0)
                    worst = 1.0;
        }
        return {worst <= 1e-9, fmt::format("100 random graphs of depth ≤4; worst relative gap {:.3g} (need ≤1e-9)",
                                           worst)};
    }
} // namespace

int main()
{
    const fs::path work = fs::temp_directory_path() / "qnap_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    struct Criterion
    {
        int id;
        const char *name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "M/M/1 oracle", 120, mm1_oracle},
        {2, "M/M/1/K drop oracle", 60, mm1k_oracle},
        {3, "closed network vs MVA", 120, closed_mva_oracle},
        {4, "validation-table numerics", 1, validation_numerics},
        {5, "neutral-transform equivalence", 10, neutral_transforms},
        {6, "f_poll sweet spot", 600, sweet_spot},
        {7, "N_status monotonicity", 300, status_monotonicity},
        {8, "determinism of shipped configs", 600, [&] { return determinism(work); }},
        {9, "Little's law on shipped configs", 60, [&] { return littles_law(work); }},
        {10, "EG reduce vs path enumeration", 10, eg_enumeration},
    };

    int failures = 0;
    for (const Criterion &c : criteria)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception &e)
        {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::cout << fmt::format("{} criterion {:>2}: {} | {} | {:.1f}s (budget {:.0f}s{})", pass ? "PASS" : "FAIL",
                                 c.id, c.name, o.detail, secs, c.budget_s, in_time ? "" : ", EXCEEDED")
                  << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
    return failures == 0 ? 0 : 1;
}
