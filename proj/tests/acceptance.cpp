// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "txwin/adaptive.hpp"
#include "txwin/decomposition.hpp"
#include "txwin/frames.hpp"
#include "txwin/metrics.hpp"
#include "txwin/offline.hpp"
#include "txwin/online.hpp"

#include <CLI11.hpp>

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

using namespace txwin;
namespace fs = std::filesystem;

namespace
{
    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point start)
    {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }

    std::string fmt(const char *f, double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, v);
        return buf;
    }

    int failures = 0;

    void report(int id, bool ok, const std::string &title, const std::string &detail)
    {
        failures += ok ? 0 : 1;
        std::cout << "criterion " << std::setw(2) << id << ' ' << (ok ? "PASS" : "FAIL") << "  "
                  << title << ": " << detail << std::endl;
    }

    void note(const std::string &text) { std::cout << "              " << text << std::endl; }

    unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

    std::vector<std::unique_ptr<SchedulerPolicy>> policies(const WindowSpec &w)
    {
        std::vector<std::unique_ptr<SchedulerPolicy>> out;
        out.push_back(std::make_unique<OfflineGreedy>(w.congestion()));
        out.push_back(std::make_unique<OnlineGreedy>(w.congestion()));
        out.push_back(std::make_unique<AdaptiveGreedy>());
        return out;
    }

    // ---------------------------------------------------------------------------

    void conflict_free_baseline()
    {
        const auto start = Clock::now();
        int runs = 0, bad = 0;
        for (int m = 1; m <= 8; ++m)
        {
            for (int n = 1; n <= 8; ++n)
            {
                const auto w = WindowSpec::from_edges(m, n, {});
                for (auto &p : policies(w))
                {
                    const auto stats = run_stats(run(w, *p, static_cast<Seed>(m * 8 + n)));
                    ++runs;
                    bad += (stats.makespan != n || stats.aborts != 0) ? 1 : 0;
                }
            }
        }
        const double secs = seconds_since(start);
        report(1, bad == 0 && secs < 1.0, "conflict-free baseline",
               std::to_string(runs) + " runs over M,N in 1..8, " + std::to_string(bad) +
                   " with makespan != N or aborts > 0, " + fmt("%.3f s (limit 1 s)", secs));
    }

    void engine_safety()
    {
        const auto start = Clock::now();
        std::size_t runs = 0, violations = 0, over = 0, idle_steps = 0;
        for (Seed seed = 1; seed <= 200; ++seed)
        {
            Rng rng = make_rng(seed, "acceptance-shape");
            const int m = static_cast<int>(uniform_int(rng, 1, 16));
            const int n = static_cast<int>(uniform_int(rng, 1, 16));
            WindowSpec w = WindowSpec::from_edges(1, 1, {});
            switch (seed % 3)
            {
            case 0:
                w = generate_window(m, n, DegreeCapped{static_cast<int>(uniform_int(rng, 0, std::min(m * n - 1, 24))),
                                                       0.3},
                                    seed);
                break;
            case 1:
                w = generate_window(m, n, ObjectUniform{static_cast<int>(uniform_int(rng, 1, 40)), 0.2, 0.1},
                                    seed);
                break;
            default:
                w = generate_window(m, n, ColumnClustered{0.3, 0.02}, seed);
                break;
            }
            for (auto &p : policies(w))
            {
                const auto tr = run(w, *p, seed);
                ++runs;
                violations += verify_trace(w, tr).size();
                over += makespan(tr) > static_cast<Step>(m) * n ? 1 : 0;
                for (const auto &rec : tr.steps)
                {
                    idle_steps += rec.committed.empty() ? 1 : 0;
                }
            }
        }
        const double secs = seconds_since(start);
        report(2, violations == 0 && over == 0 && idle_steps == 0 && secs < 60.0, "engine safety",
               std::to_string(runs) + " runs, " + std::to_string(violations) + " trace violations, " +
                   std::to_string(over) + " makespans above M*N, " + std::to_string(idle_steps) +
                   " steps without a commit, " + fmt("%.1f s (limit 60 s)", secs));
    }

    // Degree-capped windows with C <= N ln(MN).
    WindowSource envelope_workload(int m, int n)
    {
        const int limit = static_cast<int>(std::floor(n * window_log(m, n)));
        return [m, n, limit](Seed s) {
            const int caps[] = {4, 8, 16, 32, 64, limit};
            const int cap = std::min(caps[s % 6], limit);
            return generate_window(m, n, DegreeCapped{cap, 0.5}, s);
        };
    }

    void offline_envelope_and_frames()
    {
        constexpr int m = 16, n = 16;
        const auto start = Clock::now();
        MonteCarloOptions opts;
        opts.trials = 500;
        opts.root_seed = 1000;
        opts.envelope = EnvelopeMode::Theory;
        opts.workers = workers();
        const auto s = monte_carlo(
            envelope_workload(m, n),
            [](const WindowSpec &w) { return std::make_unique<OfflineGreedy>(w.congestion()); }, opts);
        const double secs = seconds_since(start);
        const double c_limit = n * window_log(m, n);

        report(3, s.errors == 0 && s.violation_fraction <= 0.05 &&
                      static_cast<double>(s.max_congestion) <= c_limit,
               "offline makespan envelope",
               "16x16, 500 trials, max C " + std::to_string(s.max_congestion) + fmt(" <= %.1f", c_limit) +
                   ", violation fraction " + fmt("%.4f", s.violation_fraction) +
                   " (limit 0.05), mean makespan " + fmt("%.2f", s.mean_makespan) + ", max " +
                   std::to_string(s.max_makespan) + ", largest envelope " +
                   std::to_string(s.envelope.value_or(0)) + ", errors " + std::to_string(s.errors) +
                   fmt(", %.1f s", secs));

        bool columns_ok = true;
        std::ostringstream by_col;
        for (std::size_t j = 0; j < s.frame_miss_rate_by_column.size(); ++j)
        {
            columns_ok = columns_ok && s.frame_miss_rate_by_column[j] <= 0.05;
            by_col << (j ? " " : "") << fmt("%.3f", s.frame_miss_rate_by_column[j]);
        }
        report(4, s.errors == 0 && s.frame_miss_rate <= 0.05 && columns_ok, "offline frame containment",
               "per-transaction frame-miss rate " + fmt("%.5f", s.frame_miss_rate) + " (limit 0.05)");
        note("miss rate by column j=1..16: " + by_col.str());
        std::ostringstream resp;
        for (std::size_t j = 0; j < s.mean_response_by_column.size(); ++j)
        {
            resp << (j ? " " : "") << fmt("%.2f", s.mean_response_by_column[j]);
        }
        note("mean response by column j=1..16: " + resp.str());
    }

    void online_envelope()
    {
        constexpr int m = 16, n = 16;
        const auto start = Clock::now();
        MonteCarloOptions opts;
        opts.trials = 500;
        opts.root_seed = 1000;
        opts.envelope = EnvelopeMode::Theory;
        opts.workers = workers();
        const auto s = monte_carlo(
            envelope_workload(m, n),
            [](const WindowSpec &w) { return std::make_unique<OnlineGreedy>(w.congestion()); }, opts);
        const double secs = seconds_since(start);
        report(5, s.errors == 0 && s.violation_fraction <= 0.05, "online makespan envelope",
               "16x16, 500 trials, violation fraction " + fmt("%.4f", s.violation_fraction) +
                   " (limit 0.05), mean makespan " + fmt("%.2f", s.mean_makespan) + ", max " +
                   std::to_string(s.max_makespan) + ", largest envelope " +
                   std::to_string(s.envelope.value_or(0)) + ", frame-miss rate " +
                   fmt("%.5f", s.frame_miss_rate) + fmt(", %.1f s", secs));
    }

    struct DoublingTally
    {
        std::size_t runs = 0;
        std::size_t incomplete = 0;
        std::size_t over_bound = 0;
        int max_doublings = 0;
        std::map<std::size_t, int> max_by_c;
    };

    DoublingTally doubling_sweep(std::optional<Step> frame_length)
    {
        DoublingTally tally;
        const int targets[] = {1, 2, 4, 8, 16};
        for (Seed seed = 1; seed <= 200; ++seed)
        {
            const int c = targets[seed % 5];
            const auto w = generate_window(16, 16, DegreeCapped{c, 0.9}, seed);
            const std::size_t actual = std::max<std::size_t>(1, w.congestion());
            const int bound = static_cast<int>(std::ceil(std::log2(static_cast<double>(actual)))) + 1;
            AdaptiveGreedy p(AdaptiveOptions{frame_length});
            ++tally.runs;
            try
            {
                const auto tr = run(w, p, seed);
                tally.incomplete += tr.complete() ? 0 : 1;
            }
            catch (const std::exception &)
            {
                ++tally.incomplete;
                continue;
            }
            for (const auto &t : p.threads())
            {
                tally.over_bound += t.doublings > bound ? 1 : 0;
                tally.max_doublings = std::max(tally.max_doublings, t.doublings);
                tally.max_by_c[actual] = std::max(tally.max_by_c[actual], t.doublings);
            }
        }
        return tally;
    }

    void adaptive_doubling()
    {
        const auto start = Clock::now();
        const auto full = doubling_sweep(std::nullopt);
        const double secs = seconds_since(start);
        report(6, full.incomplete == 0 && full.over_bound == 0 && secs < 120.0, "adaptive doubling bound",
               std::to_string(full.runs) + " runs on 16x16 windows with C in {1,2,4,8,16}, " +
                   std::to_string(full.incomplete) + " incomplete, " + std::to_string(full.over_bound) +
                   " threads above ceil(log2 C)+1, max doublings " + std::to_string(full.max_doublings) +
                   fmt(", %.1f s (limit 120 s)", secs));

        // Report only: the same windows with frames shortened to 2 steps, where
        // bad events actually happen.
        const auto tight = doubling_sweep(Step{2});
        std::ostringstream by_c;
        for (const auto &[c, d] : tight.max_by_c)
        {
            by_c << " C=" << c << ":" << d;
        }
        note("with 2-step frames: " + std::to_string(tight.incomplete) + " incomplete, " +
             std::to_string(tight.over_bound) + " thread-runs above the bound, max doublings by C" +
             by_c.str());
    }

    void decomposition_oracle()
    {
        const auto start = Clock::now();
        int mismatches = 0, unachieved = 0;
        for (Seed seed = 1; seed <= 100; ++seed)
        {
            Rng rng = make_rng(seed, "acceptance-decomposition");
            const int m = static_cast<int>(uniform_int(rng, 1, 6));
            const int n = static_cast<int>(uniform_int(rng, 1, 10));
            const WindowSpec w =
                seed % 2 ? generate_window(m, n, ColumnClustered{0.5, 0.05}, seed)
                         : generate_window(m, n, DegreeCapped{std::min(m * n - 1, 5), 0.4}, seed);
            const auto dp = optimal_decomposition(w);
            const auto bf = brute_force_decomposition(w);
            mismatches += dp.max_density != bf.max_density ? 1 : 0;
            unachieved += make_decomposition(w, dp.cuts()).max_density != dp.max_density ? 1 : 0;
            unachieved += make_decomposition(w, bf.cuts()).max_density != bf.max_density ? 1 : 0;
        }
        const double secs = seconds_since(start);
        report(7, mismatches == 0 && unachieved == 0 && secs < 60.0, "decomposition oracle",
               "100 windows (M<=6, N<=10), " + std::to_string(mismatches) + " r* mismatches, " +
                   std::to_string(unachieved) + " cut sets missing their r*" +
                   fmt(", %.2f s (limit 60 s)", secs));
    }

    WindowSpec small_window(int m, int n, Seed seed)
    {
        switch (seed % 3)
        {
        case 0:
            return generate_window(m, n, DegreeCapped{std::min(m * n - 1, 3), 0.5}, seed);
        case 1:
            return generate_window(m, n, ObjectUniform{3, 0.3, 0.2}, seed);
        default:
            return generate_window(m, n, ColumnClustered{0.6, 0.2}, seed);
        }
    }

    void optimum_oracle()
    {
        const auto start = Clock::now();
        int windows = 0, disagree = 0, below = 0, free_not_one = 0;
        for (Seed seed = 1; seed <= 100; ++seed)
        {
            for (int m = 1; m <= 8; ++m)
            {
                for (int n = 1; m * n <= 8; ++n)
                {
                    const auto w = small_window(m, n, seed);
                    const Step opt = optimal_makespan(w);
                    ++windows;
                    disagree += opt != optimal_makespan_dfs(w) ? 1 : 0;
                    for (auto &p : policies(w))
                    {
                        below += makespan(run(w, *p, seed)) < opt ? 1 : 0;
                    }
                }
            }
        }
        for (int m = 1; m <= 8; ++m)
        {
            for (int n = 1; m * n <= 8; ++n)
            {
                const auto w = WindowSpec::from_edges(m, n, {});
                for (auto &p : policies(w))
                {
                    free_not_one += competitive_ratio(run(w, *p, 1), w) != Ratio(1) ? 1 : 0;
                }
            }
        }
        const double secs = seconds_since(start);
        report(8, disagree == 0 && below == 0 && free_not_one == 0 && secs < 120.0, "optimum dual oracle",
               std::to_string(windows) + " windows with M*N <= 8, " + std::to_string(disagree) +
                   " oracle disagreements, " + std::to_string(below) + " policy runs below OPT, " +
                   std::to_string(free_not_one) + " conflict-free runs with CR != 1" +
                   fmt(", %.1f s (limit 120 s)", secs));
    }

    // ---------------------------------------------------------------------------

    std::string sha256_file(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string data = buf.str();
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
        std::ostringstream hex;
        for (unsigned int k = 0; k < len; ++k)
        {
            hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
        }
        return hex.str();
    }

    // Hash of every file under dir plus the captured stdout, keyed by relative path.
    std::map<std::string, std::string> run_and_hash(const std::string &cli, const std::string &args,
                                                    const fs::path &dir, int &status)
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
        const fs::path stdout_path = dir.parent_path() / (dir.filename().string() + ".stdout");
        const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " > '" +
                                stdout_path.string() + "' 2>&1";
        status = std::system(cmd.c_str());
        std::map<std::string, std::string> out;
        for (const auto &entry : fs::recursive_directory_iterator(dir))
        {
            if (entry.is_regular_file())
            {
                out[fs::relative(entry.path(), dir).string()] = sha256_file(entry.path());
            }
        }
        out["<stdout>"] = sha256_file(stdout_path);
        return out;
    }

    void determinism(const std::string &cli, const fs::path &work)
    {
        const fs::path base = work / "determinism";
        fs::remove_all(base);
        fs::create_directories(base);
        const std::string window = (base / "window.txt").string();
        const std::vector<std::pair<std::string, std::string>> commands = {
            {"gen", "gen --gen capped:12x10:C=6,p=0.3 --seed 21 --out window.txt"},
            {"run-online", "run --gen capped:12x10:C=6,p=0.3 --seed 21 --policy online --C auto --out-dir ."},
            {"run-adaptive", "run --gen objects:8x8:s=20,r=0.2,w=0.1 --seed 5 --policy adaptive --out-dir ."},
            {"sweep", "sweep --gen clustered:8x8:intra=0.4,inter=0.02 --policy offline,online,adaptive "
                      "--C auto --trials 40 --envelope theory --per-trial --seed 9 --workers 4 --out-dir ."},
            {"decompose", "decompose --gen capped:6x10:C=4,p=0.3 --seed 3 --out-dir ."},
        };

        int invocations = 0, differing = 0, failed = 0;
        std::size_t files = 0;
        for (const auto &[name, args] : commands)
        {
            int s1 = 0, s2 = 0;
            const auto first = run_and_hash(cli, args, base / (name + "-a"), s1);
            // Same command, same working directory name, run again from scratch.
            const auto second = run_and_hash(cli, args, base / (name + "-a"), s2);
            invocations += 2;
            failed += (s1 != 0) + (s2 != 0);
            differing += first != second ? 1 : 0;
            files += first.size();
        }
        report(9, differing == 0 && failed == 0, "byte-identical reruns",
               std::to_string(invocations) + " invocations of " + std::to_string(commands.size()) +
                   " commands, " + std::to_string(files) + " hashed outputs per round, " +
                   std::to_string(differing) + " commands with differing SHA-256, " +
                   std::to_string(failed) + " nonzero exits");
    }

    std::vector<std::string> split_csv(const std::string &line)
    {
        std::vector<std::string> out;
        std::string cell;
        bool quoted = false;
        for (char ch : line)
        {
            if (ch == '"')
            {
                quoted = !quoted;
            }
            else if (ch == ',' && !quoted)
            {
                out.push_back(cell);
                cell.clear();
            }
            else
            {
                cell += ch;
            }
        }
        out.push_back(cell);
        return out;
    }

    void online_offline_ratio(const std::string &cli, const fs::path &work)
    {
        const std::vector<std::string> workloads = {
            "capped:16x16:C=8,p=0.5",
            "capped:16x16:C=64,p=0.5",
            "objects:16x16:s=64,r=0.2,w=0.1",
            "clustered:16x16:intra=0.5,inter=0.02",
        };
        bool ok = true;
        std::vector<std::string> lines;
        for (std::size_t k = 0; k < workloads.size(); ++k)
        {
            const fs::path dir = work / "ratios" / std::to_string(k);
            fs::remove_all(dir);
            const std::string cmd = "'" + cli + "' sweep --gen " + workloads[k] +
                                    " --policy offline,online --C auto --trials 100 --seed 77 --workers " +
                                    std::to_string(workers()) + " --out-dir '" + dir.string() +
                                    "' > /dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            std::ifstream in(dir / "ratios.csv");
            std::string header, row;
            if (status != 0 || !std::getline(in, header) || !std::getline(in, row))
            {
                ok = false;
                lines.push_back(workloads[k] + ": no ratios.csv");
                continue;
            }
            const auto cells = split_csv(row);
            if (cells.size() != 6)
            {
                ok = false;
                lines.push_back(workloads[k] + ": malformed row");
                continue;
            }
            const double mean = std::stod(cells[4]);
            const double max = std::stod(cells[5]);
            ok = ok && std::isfinite(mean) && std::isfinite(max) && mean > 0.0;
            lines.push_back(cells[0] + ": mean offline " + cells[2] + ", mean online " + cells[3] +
                            ", mean ratio " + cells[4] + ", max ratio " + cells[5]);
        }
        report(10, ok, "online/offline makespan ratio (report only)",
               "finite ratios logged for " + std::to_string(workloads.size()) + " workloads");
        for (const auto &l : lines)
        {
            note(l);
        }
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"txwin acceptance suite"};
    std::string cli;
    std::string work = "acceptance_work";
    app.add_option("--cli", cli, "path to the txwin executable")->required();
    app.add_option("--work", work, "scratch directory");
    CLI11_PARSE(app, argc, argv);
    const fs::path work_dir = fs::absolute(work);
    fs::create_directories(work_dir);

    const auto start = Clock::now();
    conflict_free_baseline();
    engine_safety();
    offline_envelope_and_frames();
    online_envelope();
    adaptive_doubling();
    decomposition_oracle();
    optimum_oracle();
    determinism(fs::absolute(cli).string(), work_dir);
    online_offline_ratio(fs::absolute(cli).string(), work_dir);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << fmt(" in %.1f s", seconds_since(start)) << std::endl;
    return failures == 0 ? 0 : 1;
}
