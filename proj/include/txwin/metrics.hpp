#pragma once

#include "txwin/core_model.hpp"
#include "txwin/engine.hpp"

#include <boost/rational.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace txwin
{
    struct RunStats
    {
        int threads = 0;
        int columns = 0;
        Step makespan = 0;
        std::vector<Step> response_times; // dense order; commit - start + 1
        std::size_t aborts = 0;
        std::size_t frame_misses = 0;
        std::vector<bool> frame_missed; // dense order
        std::vector<int> doublings; // per thread, adaptive only (zeros otherwise)

        double mean_response() const;
    };

    // Last commit step + 1. Throws InstanceError on an incomplete trace.
    Step makespan(const ExecutionTrace &trace);

    RunStats run_stats(const ExecutionTrace &trace);

    // Exact optimum over all schedules that commit an independent set per step and
    // respect per-thread order. Breadth-first search over per-thread progress
    // vectors. Refuses windows with M*N > kOptimalMaxTransactions.
    Step optimal_makespan(const WindowSpec &window);

    // Independent second route: depth-first branch and bound that only commits
    // maximal independent sets of the available transactions.
    Step optimal_makespan_dfs(const WindowSpec &window);

    inline constexpr std::size_t kOptimalMaxTransactions = 12;

    using Ratio = boost::rational<std::int64_t>;

    enum class RatioMode
    {
        Exact,      // divide by optimal_makespan
        LowerBound, // divide by N, an upper estimate of the true ratio
    };

    Ratio competitive_ratio(const ExecutionTrace &trace, const WindowSpec &window,
                            RatioMode mode = RatioMode::Exact);

    // ---------------------------------------------------------------------------
    // Monte Carlo

    using WindowSource = std::function<WindowSpec(Seed)>;
    using PolicyFactory = std::function<std::unique_ptr<SchedulerPolicy>(const WindowSpec &)>;

    struct TrialResult
    {
        std::size_t trial = 0;
        Seed seed = 0;
        std::size_t congestion = 0;
        std::string policy;
        std::optional<RunStats> stats;
        std::optional<Step> envelope;
        std::string error; // empty on success
    };

    enum class EnvelopeMode
    {
        None,
        Theory, // the policy's own (alpha + N) * phi bound
        Fixed,
    };

    struct MonteCarloOptions
    {
        std::size_t trials = 1;
        Seed root_seed = 0;
        EnvelopeMode envelope = EnvelopeMode::None;
        Step fixed_envelope = 0;
        unsigned workers = 1;
    };

    struct MonteCarloSummary
    {
        std::string policy;
        int threads = 0;
        int columns = 0;
        std::size_t max_congestion = 0;
        std::size_t trials = 0;
        std::vector<Seed> seeds;
        double mean_makespan = 0.0;
        Step max_makespan = 0;
        Step p95_makespan = 0;
        std::optional<Step> envelope; // largest per-trial envelope
        double violation_fraction = 0.0;
        double frame_miss_rate = 0.0;
        double mean_aborts = 0.0;
        std::vector<double> mean_response_by_column;
        std::vector<double> frame_miss_rate_by_column;
        std::size_t errors = 0;
        std::vector<TrialResult> per_trial;
    };

    // Trial k uses seed root_seed + k for both the window source and the policy.
    // Results are folded in trial order whatever the worker count.
    MonteCarloSummary monte_carlo(const WindowSource &source, const PolicyFactory &factory,
                                  const MonteCarloOptions &options);

    void write_summary_header(std::ostream &out);
    void write_summary_row(std::ostream &out, const MonteCarloSummary &summary);
    void write_per_trial_csv(std::ostream &out, const MonteCarloSummary &summary);
} // namespace txwin
