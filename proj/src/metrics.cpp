#include "txwin/metrics.hpp"

#include "txwin/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace txwin
{
    double RunStats::mean_response() const
    {
        if (response_times.empty())
        {
            return 0.0;
        }
        const auto sum = std::accumulate(response_times.begin(), response_times.end(), Step{0});
        return static_cast<double>(sum) / static_cast<double>(response_times.size());
    }

    Step makespan(const ExecutionTrace &trace)
    {
        if (!trace.complete())
        {
            throw InstanceError("makespan: trace is incomplete");
        }
        Step last = 0;
        for (const auto &r : trace.transactions)
        {
            last = std::max(last, r.commit);
        }
        return last + 1;
    }

    RunStats run_stats(const ExecutionTrace &trace)
    {
        RunStats s;
        s.threads = trace.threads;
        s.columns = trace.columns;
        s.makespan = makespan(trace);
        s.response_times.reserve(trace.transactions.size());
        for (const auto &r : trace.transactions)
        {
            s.response_times.push_back(r.commit - r.start + 1);
            s.aborts += static_cast<std::size_t>(r.restarts);
            const bool missed = r.frame_end && r.commit >= *r.frame_end;
            s.frame_missed.push_back(missed);
            if (missed)
            {
                ++s.frame_misses;
            }
        }
        s.doublings.assign(static_cast<std::size_t>(trace.threads), 0);
        for (const auto &e : trace.events)
        {
            if (e.kind == EventKind::Double)
            {
                ++s.doublings[e.tx.thread - 1];
            }
        }
        return s;
    }

    // ---------------------------------------------------------------------------
    // Optimal makespan

    namespace
    {
        void check_oracle_size(const WindowSpec &window, const char *who)
        {
            if (window.size() > kOptimalMaxTransactions)
            {
                throw RefusalError(std::string(who) + ": M*N = " + std::to_string(window.size()) +
                                   " exceeds " + std::to_string(kOptimalMaxTransactions));
            }
        }
    } // namespace

    Step optimal_makespan(const WindowSpec &window)
    {
        check_oracle_size(window, "optimal_makespan");
        const int m = window.threads();
        const int n = window.columns();

        // Dense adjacency matrix between transactions.
        const std::size_t total = window.size();
        std::vector<std::vector<bool>> adj(total, std::vector<bool>(total, false));
        for (const auto &[a, b] : window.conflicts().edges())
        {
            adj[window.dense(a)][window.dense(b)] = true;
            adj[window.dense(b)][window.dense(a)] = true;
        }

        // State: progress c_i of every thread, packed in base N+1.
        std::vector<std::size_t> radix(static_cast<std::size_t>(m), 1);
        for (int i = 1; i < m; ++i)
        {
            radix[i] = radix[i - 1] * static_cast<std::size_t>(n + 1);
        }
        const std::size_t states = radix[m - 1] * static_cast<std::size_t>(n + 1);
        std::size_t goal = 0;
        for (int i = 0; i < m; ++i)
        {
            goal += radix[i] * static_cast<std::size_t>(n);
        }

        std::vector<Step> dist(states, -1);
        std::deque<std::size_t> queue{0};
        dist[0] = 0;
        std::vector<int> progress(static_cast<std::size_t>(m));
        std::vector<int> avail_thread;
        std::vector<std::size_t> avail_tx;
        while (!queue.empty())
        {
            const std::size_t code = queue.front();
            queue.pop_front();
            if (code == goal)
            {
                return dist[code];
            }
            avail_thread.clear();
            avail_tx.clear();
            for (int i = 0; i < m; ++i)
            {
                progress[i] = static_cast<int>(code / radix[i] % static_cast<std::size_t>(n + 1));
                if (progress[i] < n)
                {
                    avail_thread.push_back(i);
                    avail_tx.push_back(static_cast<std::size_t>(i) * n + progress[i]);
                }
            }
            const std::size_t k = avail_tx.size();
            std::vector<std::uint32_t> conflict_mask(k, 0);
            for (std::size_t a = 0; a < k; ++a)
            {
                for (std::size_t b = 0; b < k; ++b)
                {
                    if (adj[avail_tx[a]][avail_tx[b]])
                    {
                        conflict_mask[a] |= 1u << b;
                    }
                }
            }
            for (std::uint32_t subset = 1; subset < (1u << k); ++subset)
            {
                bool independent = true;
                std::size_t next = code;
                for (std::size_t a = 0; a < k && independent; ++a)
                {
                    if (subset & (1u << a))
                    {
                        independent = (conflict_mask[a] & subset) == 0;
                        next += radix[avail_thread[a]];
                    }
                }
                if (independent && dist[next] < 0)
                {
                    dist[next] = dist[code] + 1;
                    queue.push_back(next);
                }
            }
        }
        throw ContractViolation("optimal_makespan: goal unreachable");
    }

    namespace
    {
        struct DepthFirst
        {
            const WindowSpec &window;
            Step best;

            void search(std::vector<int> &done, Step steps)
            {
                int longest = 0;
                std::vector<TransactionId> avail;
                for (int i = 1; i <= window.threads(); ++i)
                {
                    const int left = window.columns() - done[i - 1];
                    longest = std::max(longest, left);
                    if (left > 0)
                    {
                        avail.push_back({i, done[i - 1] + 1});
                    }
                }
                if (avail.empty())
                {
                    best = std::min(best, steps);
                    return;
                }
                if (steps + longest >= best)
                {
                    return;
                }
                const std::size_t k = avail.size();
                for (std::uint32_t subset = 1; subset < (1u << k); ++subset)
                {
                    if (!independent_and_maximal(avail, subset))
                    {
                        continue;
                    }
                    for (std::size_t a = 0; a < k; ++a)
                    {
                        if (subset & (1u << a))
                        {
                            ++done[avail[a].thread - 1];
                        }
                    }
                    search(done, steps + 1);
                    for (std::size_t a = 0; a < k; ++a)
                    {
                        if (subset & (1u << a))
                        {
                            --done[avail[a].thread - 1];
                        }
                    }
                }
            }

            bool independent_and_maximal(const std::vector<TransactionId> &avail,
                                         std::uint32_t subset) const
            {
                const ConflictGraph &g = window.conflicts();
                for (std::size_t a = 0; a < avail.size(); ++a)
                {
                    const bool in = subset & (1u << a);
                    bool touches = false;
                    for (std::size_t b = 0; b < avail.size(); ++b)
                    {
                        if (b != a && (subset & (1u << b)) && g.adjacent(avail[a], avail[b]))
                        {
                            touches = true;
                            break;
                        }
                    }
                    if (in == touches)
                    {
                        // A member with a member neighbor, or an outsider that could join.
                        return false;
                    }
                }
                return true;
            }
        };
    } // namespace

    Step optimal_makespan_dfs(const WindowSpec &window)
    {
        check_oracle_size(window, "optimal_makespan_dfs");
        DepthFirst dfs{window, static_cast<Step>(window.size()) + 1};
        std::vector<int> done(static_cast<std::size_t>(window.threads()), 0);
        dfs.search(done, 0);
        return dfs.best;
    }

    Ratio competitive_ratio(const ExecutionTrace &trace, const WindowSpec &window, RatioMode mode)
    {
        const Step ours = makespan(trace);
        const Step reference = mode == RatioMode::Exact ? optimal_makespan(window) : window.columns();
        return Ratio(ours, reference);
    }

    // ---------------------------------------------------------------------------
    // Monte Carlo

    namespace
    {
        TrialResult run_trial(const WindowSource &source, const PolicyFactory &factory,
                              const MonteCarloOptions &options, std::size_t trial)
        {
            TrialResult r;
            r.trial = trial;
            r.seed = options.root_seed + trial;
            try
            {
                const WindowSpec window = source(r.seed);
                r.congestion = window.congestion();
                auto policy = factory(window);
                r.policy = policy->name();
                const ExecutionTrace trace = run(window, *policy, r.seed);
                r.stats = run_stats(trace);
                switch (options.envelope)
                {
                case EnvelopeMode::None:
                    break;
                case EnvelopeMode::Theory:
                    r.envelope = policy->makespan_envelope();
                    break;
                case EnvelopeMode::Fixed:
                    r.envelope = options.fixed_envelope;
                    break;
                }
            }
            catch (const std::exception &e)
            {
                r.error = e.what();
            }
            return r;
        }
    } // namespace

    MonteCarloSummary monte_carlo(const WindowSource &source, const PolicyFactory &factory,
                                  const MonteCarloOptions &options)
    {
        if (options.trials < 1)
        {
            throw InstanceError("monte_carlo: trials must be >= 1");
        }
        std::vector<TrialResult> results(options.trials);
        const unsigned workers =
            std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(options.trials)));
        if (workers == 1)
        {
            for (std::size_t k = 0; k < options.trials; ++k)
            {
                results[k] = run_trial(source, factory, options, k);
            }
        }
        else
        {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w)
            {
                pool.emplace_back([&] {
                    for (std::size_t k = next++; k < options.trials; k = next++)
                    {
                        results[k] = run_trial(source, factory, options, k);
                    }
                });
            }
            for (auto &t : pool)
            {
                t.join();
            }
        }

        MonteCarloSummary s;
        s.trials = options.trials;
        std::vector<Step> spans;
        std::size_t violations = 0;
        std::size_t with_envelope = 0;
        std::size_t misses = 0;
        std::size_t transactions = 0;
        std::size_t aborts = 0;
        std::vector<double> response_sum;
        std::vector<std::size_t> response_count;
        std::vector<std::size_t> miss_count;

        for (const TrialResult &r : results)
        {
            s.seeds.push_back(r.seed);
            s.max_congestion = std::max(s.max_congestion, r.congestion);
            if (!r.stats)
            {
                ++s.errors;
                continue;
            }
            const RunStats &st = *r.stats;
            if (s.policy.empty())
            {
                s.policy = r.policy;
                s.threads = st.threads;
                s.columns = st.columns;
            }
            spans.push_back(st.makespan);
            misses += st.frame_misses;
            transactions += st.response_times.size();
            aborts += st.aborts;
            if (r.envelope)
            {
                ++with_envelope;
                if (st.makespan > *r.envelope)
                {
                    ++violations;
                }
                s.envelope = std::max(s.envelope.value_or(0), *r.envelope);
            }
            const auto columns = static_cast<std::size_t>(st.columns);
            if (response_sum.size() < columns)
            {
                response_sum.resize(columns, 0.0);
                response_count.resize(columns, 0);
                miss_count.resize(columns, 0);
            }
            for (std::size_t k = 0; k < st.response_times.size(); ++k)
            {
                response_sum[k % columns] += static_cast<double>(st.response_times[k]);
                ++response_count[k % columns];
                miss_count[k % columns] += st.frame_missed[k] ? 1 : 0;
            }
        }

        if (!spans.empty())
        {
            const double n = static_cast<double>(spans.size());
            s.mean_makespan =
                static_cast<double>(std::accumulate(spans.begin(), spans.end(), Step{0})) / n;
            std::vector<Step> sorted = spans;
            std::sort(sorted.begin(), sorted.end());
            s.max_makespan = sorted.back();
            const auto rank = static_cast<std::size_t>(std::ceil(0.95 * n));
            s.p95_makespan = sorted[std::max<std::size_t>(rank, 1) - 1];
            s.mean_aborts = static_cast<double>(aborts) / n;
        }
        if (with_envelope > 0)
        {
            s.violation_fraction = static_cast<double>(violations) / static_cast<double>(with_envelope);
        }
        if (transactions > 0)
        {
            s.frame_miss_rate = static_cast<double>(misses) / static_cast<double>(transactions);
        }
        for (std::size_t j = 0; j < response_sum.size(); ++j)
        {
            const auto count = static_cast<double>(response_count[j]);
            s.mean_response_by_column.push_back(response_count[j] ? response_sum[j] / count : 0.0);
            s.frame_miss_rate_by_column.push_back(
                response_count[j] ? static_cast<double>(miss_count[j]) / count : 0.0);
        }
        s.per_trial = std::move(results);
        return s;
    }

    void write_summary_header(std::ostream &out)
    {
        out << "policy,M,N,C,trials,mean_makespan,max_makespan,p95_makespan,envelope,"
               "violation_fraction,frame_miss_rate,mean_aborts\n";
    }

    namespace
    {
        std::string fixed6(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6f", v);
            return buf;
        }
    } // namespace

    void write_summary_row(std::ostream &out, const MonteCarloSummary &s)
    {
        out << s.policy << ',' << s.threads << ',' << s.columns << ',' << s.max_congestion << ','
            << s.trials << ',' << fixed6(s.mean_makespan) << ',' << s.max_makespan << ','
            << s.p95_makespan << ',';
        if (s.envelope)
        {
            out << *s.envelope;
        }
        out << ',' << fixed6(s.violation_fraction) << ',' << fixed6(s.frame_miss_rate) << ','
            << fixed6(s.mean_aborts) << '\n';
    }

    void write_per_trial_csv(std::ostream &out, const MonteCarloSummary &s)
    {
        out << "trial,seed,C,makespan,aborts,frame_misses,mean_response,envelope,violated,error\n";
        for (const TrialResult &r : s.per_trial)
        {
            out << r.trial << ',' << r.seed << ',' << r.congestion << ',';
            if (r.stats)
            {
                out << r.stats->makespan << ',' << r.stats->aborts << ',' << r.stats->frame_misses
                    << ',' << fixed6(r.stats->mean_response());
            }
            else
            {
                out << ",,,";
            }
            out << ',';
            if (r.envelope)
            {
                out << *r.envelope;
            }
            out << ',';
            if (r.stats && r.envelope)
            {
                out << (r.stats->makespan > *r.envelope ? 1 : 0);
            }
            out << ',';
            // Errors are free text; keep the row parseable.
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out << msg << '\n';
        }
    }
} // namespace txwin
