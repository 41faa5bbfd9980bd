#pragma once

#include "txwin/core_model.hpp"
#include "txwin/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace txwin
{
    // Discrete time in units of one transaction duration, starting at 0.
    using Step = std::int64_t;

    struct NotStarted
    {
        bool operator==(const NotStarted &) const = default;
    };
    struct Running
    {
        bool operator==(const Running &) const = default;
    };
    struct HoldOff
    {
        TransactionId blocker;
        bool operator==(const HoldOff &) const = default;
    };
    struct Committed
    {
        Step at = 0;
        bool operator==(const Committed &) const = default;
    };

    using TxStatus = std::variant<NotStarted, Running, HoldOff, Committed>;

    enum class EventKind
    {
        Commit,
        Abort,
        Restart,
        Hold,
        Pi1Draw,
        Double,
    };

    std::string_view to_string(EventKind kind);

    // One trace event. `other` is the winner of an abort or the blocker of a hold.
    // `value` carries the pi1 draw or the new contention estimate; `previous` the
    // old estimate of a Double event.
    struct TraceEvent
    {
        Step step = 0;
        EventKind kind = EventKind::Commit;
        TransactionId tx;
        std::optional<TransactionId> other = std::nullopt;
        std::optional<std::int64_t> value = std::nullopt;
        std::optional<std::int64_t> previous = std::nullopt;

        bool operator==(const TraceEvent &) const = default;
    };

    struct StepRecord
    {
        Step step = 0;
        std::vector<TransactionId> running;   // transactions that executed this step
        std::vector<TransactionId> committed; // subset of running

        bool operator==(const StepRecord &) const = default;
    };

    struct TransactionRecord
    {
        TransactionId id;
        Step start = -1;  // first step it ran (availability step)
        Step commit = -1; // -1 while uncommitted
        int restarts = 0;
        std::optional<Step> frame_end = std::nullopt; // end (exclusive) of its designated frame at commit

        bool operator==(const TransactionRecord &) const = default;
    };

    struct ExecutionTrace
    {
        int threads = 0;
        int columns = 0;
        Seed seed = 0;
        std::string policy;
        std::vector<StepRecord> steps;
        std::vector<TraceEvent> events;
        std::vector<TransactionRecord> transactions; // dense thread-major order
        std::vector<std::string> diagnostics;

        bool complete() const;
        bool operator==(const ExecutionTrace &) const = default;
    };

    enum class Visibility
    {
        FullGraph,   // the induced conflict graph on active transactions
        ActivePairs, // only the list of conflicting pairs among active transactions
    };

    struct ConflictInfo
    {
        std::vector<Edge> pairs;            // lexicographic, (smaller, larger)
        std::optional<ConflictGraph> graph; // set only for FullGraph policies
    };

    struct AbortDecision
    {
        TransactionId victim;
        TransactionId winner;
        bool hold_off = false; // wait for the winner to finish before restarting
    };

    struct StepDecision
    {
        std::vector<TransactionId> commits;
        std::vector<AbortDecision> aborts;
    };

    // What a policy may observe and record while the engine runs.
    class EngineView
    {
    public:
        virtual ~EngineView() = default;

        virtual const WindowSpec &window() const = 0;
        virtual const TxStatus &status(TransactionId id) const = 0;

        // The thread's first uncommitted transaction, if any remain.
        virtual std::optional<TransactionId> current(int thread) const = 0;

        virtual void emit(const TraceEvent &event) = 0;
        virtual void diagnose(std::string message) = 0;
    };

    // The seam between a contention manager and the shared execution loop.
    //
    // Per step t the engine (1) activates or restarts one transaction per thread,
    // calling on_activate/on_restart, (2) calls on_step_begin, (3) asks arbitrate
    // for the commit set and the fate of every other active transaction, then
    // (4) applies commits (on_commit) and aborts.
    class SchedulerPolicy
    {
    public:
        virtual ~SchedulerPolicy() = default;

        virtual std::string name() const = 0;
        virtual Visibility visibility() const = 0;

        // Called once before step 0. All randomness must derive from seed.
        virtual void start(const WindowSpec &window, Seed seed) = 0;

        virtual void on_activate(TransactionId, Step, EngineView &) {}
        virtual void on_restart(TransactionId, Step, EngineView &) {}
        virtual void on_step_begin(Step, EngineView &) {}

        virtual StepDecision arbitrate(Step t, std::span<const TransactionId> active,
                                       const ConflictInfo &info, EngineView &view) = 0;

        virtual void on_commit(TransactionId, Step, EngineView &) {}

        // End (exclusive) of the transaction's designated high-priority frame.
        virtual std::optional<Step> frame_end(TransactionId) const { return std::nullopt; }

        // Step count the whole window should finish within when no transaction
        // misses its frame, if the policy has such a bound. Valid after start().
        virtual std::optional<Step> makespan_envelope() const { return std::nullopt; }

        // Budget override; the engine default is 10 * M * N * online frame length.
        virtual std::optional<Step> step_budget() const { return std::nullopt; }
    };

    class LivelockError : public std::runtime_error
    {
    public:
        LivelockError(const std::string &what, ExecutionTrace partial)
            : std::runtime_error(what), partial_(std::move(partial))
        {
        }

        const ExecutionTrace &partial() const noexcept { return partial_; }

    private:
        ExecutionTrace partial_;
    };

    struct EngineOptions
    {
        std::optional<Step> step_budget;
    };

    Step default_step_budget(int threads, int columns);

    // Executes the window to completion. Throws ContractViolation when the policy
    // returns an invalid decision and LivelockError when the budget runs out.
    ExecutionTrace run(const WindowSpec &window, SchedulerPolicy &policy, Seed seed,
                       const EngineOptions &options = {});

    enum class ViolationKind
    {
        CommitCount,
        Ordering,
        Availability,
        Progress,
        Independence,
        Exclusivity,
        Event,
    };

    std::string_view to_string(ViolationKind kind);

    struct Violation
    {
        ViolationKind kind;
        Step step = -1;
        std::string message;
    };

    // Empty iff the trace satisfies every execution invariant for the window.
    std::vector<Violation> verify_trace(const WindowSpec &window, const ExecutionTrace &trace);

    // CSV export. Event rows: step,event,thread,index,winner_thread,winner_index,
    // value,previous. Transaction rows: thread,index,start,commit,restarts.
    void write_trace_csv(std::ostream &out, const ExecutionTrace &trace);
    void write_transactions_csv(std::ostream &out, const ExecutionTrace &trace);
} // namespace txwin
