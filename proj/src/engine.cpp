#include "txwin/engine.hpp"

#include "txwin/errors.hpp"
#include "txwin/frames.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace txwin
{
    std::string_view to_string(EventKind kind)
    {
        switch (kind)
        {
        case EventKind::Commit:
            return "commit";
        case EventKind::Abort:
            return "abort";
        case EventKind::Restart:
            return "restart";
        case EventKind::Hold:
            return "hold";
        case EventKind::Pi1Draw:
            return "pi1_draw";
        case EventKind::Double:
            return "double";
        }
        return "?";
    }

    std::string_view to_string(ViolationKind kind)
    {
        switch (kind)
        {
        case ViolationKind::CommitCount:
            return "commit-count";
        case ViolationKind::Ordering:
            return "ordering";
        case ViolationKind::Availability:
            return "availability";
        case ViolationKind::Progress:
            return "progress";
        case ViolationKind::Independence:
            return "independence";
        case ViolationKind::Exclusivity:
            return "exclusivity";
        case ViolationKind::Event:
            return "event";
        }
        return "?";
    }

    bool ExecutionTrace::complete() const
    {
        return !transactions.empty() &&
               std::all_of(transactions.begin(), transactions.end(),
                           [](const TransactionRecord &r) { return r.commit >= 0; });
    }

    Step default_step_budget(int threads, int columns)
    {
        return 10 * static_cast<Step>(threads) * columns * online_frame_length(threads, columns);
    }

    namespace
    {
        class Engine final : public EngineView
        {
        public:
            Engine(const WindowSpec &window, SchedulerPolicy &policy, Seed seed)
                : window_(window), policy_(policy), status_(window.size(), NotStarted{}),
                  aborts_(window.size(), 0), hold_snapshot_(window.size(), 0),
                  restart_pending_(window.size(), false),
                  next_index_(static_cast<std::size_t>(window.threads()), 1)
            {
                trace_.threads = window.threads();
                trace_.columns = window.columns();
                trace_.seed = seed;
                trace_.policy = policy.name();
                trace_.transactions.reserve(window.size());
                for (TransactionId id : window.all_ids())
                {
                    trace_.transactions.push_back({id});
                }
            }

            const WindowSpec &window() const override { return window_; }

            const TxStatus &status(TransactionId id) const override
            {
                if (!window_.contains(id))
                {
                    throw InstanceError("status: unknown transaction " + to_string(id));
                }
                return status_[window_.dense(id)];
            }

            std::optional<TransactionId> current(int thread) const override
            {
                if (thread < 1 || thread > window_.threads())
                {
                    return std::nullopt;
                }
                const int j = next_index_[thread - 1];
                if (j > window_.columns())
                {
                    return std::nullopt;
                }
                return TransactionId{thread, j};
            }

            void emit(const TraceEvent &event) override { trace_.events.push_back(event); }

            void diagnose(std::string message) override
            {
                trace_.diagnostics.push_back(std::move(message));
            }

            ExecutionTrace execute(Step budget)
            {
                const std::size_t total = window_.size();
                std::size_t committed = 0;
                for (Step t = 0; committed < total; ++t)
                {
                    if (t >= budget)
                    {
                        throw LivelockError("step budget of " + std::to_string(budget) +
                                                " exhausted with " +
                                                std::to_string(total - committed) +
                                                " transactions uncommitted",
                                            trace_);
                    }
                    activate(t);
                    policy_.on_step_begin(t, *this);

                    std::vector<TransactionId> active;
                    for (int i = 1; i <= window_.threads(); ++i)
                    {
                        if (auto id = current(i); id && std::holds_alternative<Running>(status(*id)))
                        {
                            active.push_back(*id);
                        }
                    }

                    ConflictInfo info;
                    const ConflictGraph &g = window_.conflicts();
                    for (std::size_t a = 0; a < active.size(); ++a)
                    {
                        for (std::size_t b = a + 1; b < active.size(); ++b)
                        {
                            if (g.adjacent(active[a], active[b]))
                            {
                                info.pairs.emplace_back(active[a], active[b]);
                            }
                        }
                    }
                    if (policy_.visibility() == Visibility::FullGraph)
                    {
                        info.graph = restrict(g, active);
                    }

                    StepDecision decision = policy_.arbitrate(t, active, info, *this);
                    validate(t, active, decision);
                    committed += apply(t, std::move(active), std::move(decision));
                }
                return std::move(trace_);
            }

        private:
            void activate(Step t)
            {
                for (int i = 1; i <= window_.threads(); ++i)
                {
                    auto id = current(i);
                    if (!id)
                    {
                        continue;
                    }
                    const std::size_t k = window_.dense(*id);
                    TxStatus &s = status_[k];
                    if (std::holds_alternative<NotStarted>(s))
                    {
                        s = Running{};
                        trace_.transactions[k].start = t;
                        policy_.on_activate(*id, t, *this);
                    }
                    else if (std::holds_alternative<Running>(s) && restart_pending_[k])
                    {
                        restart_pending_[k] = false;
                        emit({t, EventKind::Restart, *id});
                        policy_.on_restart(*id, t, *this);
                    }
                    else if (const auto *h = std::get_if<HoldOff>(&s))
                    {
                        const std::size_t b = window_.dense(h->blocker);
                        if (std::holds_alternative<Committed>(status_[b]) ||
                            aborts_[b] > hold_snapshot_[k])
                        {
                            s = Running{};
                            emit({t, EventKind::Restart, *id});
                            policy_.on_restart(*id, t, *this);
                        }
                    }
                }
            }

            [[noreturn]] void violate(Step t, const std::string &msg) const
            {
                throw ContractViolation("policy " + policy_.name() + " at step " +
                                        std::to_string(t) + ": " + msg);
            }

            void validate(Step t, const std::vector<TransactionId> &active,
                          const StepDecision &d) const
            {
                const std::set<TransactionId> live(active.begin(), active.end());
                std::set<TransactionId> seen;
                for (TransactionId c : d.commits)
                {
                    if (!live.contains(c))
                    {
                        violate(t, "commits inactive transaction " + to_string(c));
                    }
                    if (!seen.insert(c).second)
                    {
                        violate(t, "commits " + to_string(c) + " twice");
                    }
                }
                for (std::size_t a = 0; a < d.commits.size(); ++a)
                {
                    for (std::size_t b = a + 1; b < d.commits.size(); ++b)
                    {
                        if (window_.conflicts().adjacent(d.commits[a], d.commits[b]))
                        {
                            violate(t, "commit set is not independent: " + to_string(d.commits[a]) +
                                           " conflicts with " + to_string(d.commits[b]));
                        }
                    }
                }
                for (const AbortDecision &ab : d.aborts)
                {
                    if (!live.contains(ab.victim))
                    {
                        violate(t, "aborts inactive transaction " + to_string(ab.victim));
                    }
                    if (!seen.insert(ab.victim).second)
                    {
                        violate(t, "decides " + to_string(ab.victim) + " twice");
                    }
                    if (!live.contains(ab.winner) || ab.winner == ab.victim)
                    {
                        violate(t, "abort of " + to_string(ab.victim) + " names invalid winner " +
                                       to_string(ab.winner));
                    }
                }
                if (seen.size() != live.size())
                {
                    violate(t, "leaves some active transactions undecided");
                }
                if (!active.empty() && d.commits.empty())
                {
                    violate(t, "commits nothing although transactions are active");
                }
            }

            std::size_t apply(Step t, std::vector<TransactionId> active, StepDecision d)
            {
                std::sort(d.commits.begin(), d.commits.end());
                std::sort(d.aborts.begin(), d.aborts.end(),
                          [](const AbortDecision &a, const AbortDecision &b) {
                              return a.victim < b.victim;
                          });

                const std::vector<int> aborts_before = aborts_;

                for (TransactionId c : d.commits)
                {
                    const std::size_t k = window_.dense(c);
                    status_[k] = Committed{t};
                    auto &rec = trace_.transactions[k];
                    rec.commit = t;
                    rec.frame_end = policy_.frame_end(c);
                    ++next_index_[c.thread - 1];
                    emit({t, EventKind::Commit, c});
                    policy_.on_commit(c, t, *this);
                }
                for (const AbortDecision &ab : d.aborts)
                {
                    const std::size_t k = window_.dense(ab.victim);
                    ++aborts_[k];
                    ++trace_.transactions[k].restarts;
                    emit({t, EventKind::Abort, ab.victim, ab.winner});
                    if (ab.hold_off)
                    {
                        status_[k] = HoldOff{ab.winner};
                        hold_snapshot_[k] = aborts_before[window_.dense(ab.winner)];
                        emit({t, EventKind::Hold, ab.victim, ab.winner});
                    }
                    else
                    {
                        restart_pending_[k] = true;
                    }
                }

                trace_.steps.push_back({t, std::move(active), d.commits});
                return d.commits.size();
            }

            const WindowSpec &window_;
            SchedulerPolicy &policy_;
            ExecutionTrace trace_;
            std::vector<TxStatus> status_;
            std::vector<int> aborts_;
            std::vector<int> hold_snapshot_; // blocker's abort count when the hold began
            std::vector<bool> restart_pending_;
            std::vector<int> next_index_;
        };
    } // namespace

    ExecutionTrace run(const WindowSpec &window, SchedulerPolicy &policy, Seed seed,
                       const EngineOptions &options)
    {
        policy.start(window, seed);
        const Step budget = options.step_budget.value_or(
            policy.step_budget().value_or(default_step_budget(window.threads(), window.columns())));
        Engine engine(window, policy, seed);
        return engine.execute(budget);
    }

    // ---------------------------------------------------------------------------

    std::vector<Violation> verify_trace(const WindowSpec &window, const ExecutionTrace &trace)
    {
        std::vector<Violation> out;
        auto report = [&out](ViolationKind kind, Step step, std::string msg) {
            out.push_back({kind, step, std::move(msg)});
        };

        if (trace.threads != window.threads() || trace.columns != window.columns() ||
            trace.transactions.size() != window.size())
        {
            report(ViolationKind::CommitCount, -1, "trace shape does not match window");
            return out;
        }

        std::map<TransactionId, std::vector<Step>> commit_steps;
        for (std::size_t s = 0; s < trace.steps.size(); ++s)
        {
            const StepRecord &rec = trace.steps[s];
            if (rec.step != static_cast<Step>(s))
            {
                report(ViolationKind::Progress, rec.step, "step records are not contiguous");
            }
            if (rec.committed.empty())
            {
                report(ViolationKind::Progress, rec.step, "no commit at this step");
            }
            std::set<int> threads_seen;
            for (TransactionId id : rec.running)
            {
                if (!threads_seen.insert(id.thread).second)
                {
                    report(ViolationKind::Exclusivity, rec.step,
                           "thread " + std::to_string(id.thread) + " runs two transactions");
                }
            }
            const std::set<TransactionId> running(rec.running.begin(), rec.running.end());
            for (TransactionId id : rec.committed)
            {
                if (!window.contains(id))
                {
                    report(ViolationKind::CommitCount, rec.step, "unknown transaction " + to_string(id));
                    continue;
                }
                if (!running.contains(id))
                {
                    report(ViolationKind::Exclusivity, rec.step,
                           to_string(id) + " commits without running");
                }
                commit_steps[id].push_back(rec.step);
            }
            for (std::size_t a = 0; a < rec.committed.size(); ++a)
            {
                for (std::size_t b = a + 1; b < rec.committed.size(); ++b)
                {
                    if (window.conflicts().adjacent(rec.committed[a], rec.committed[b]))
                    {
                        report(ViolationKind::Independence, rec.step,
                               to_string(rec.committed[a]) + " and " + to_string(rec.committed[b]) +
                                   " conflict but commit together");
                    }
                }
            }
        }

        for (const TransactionRecord &r : trace.transactions)
        {
            const auto it = commit_steps.find(r.id);
            const std::size_t n = it == commit_steps.end() ? 0 : it->second.size();
            if (n != 1)
            {
                report(ViolationKind::CommitCount, r.commit,
                       to_string(r.id) + " commits " + std::to_string(n) + " times");
            }
            else if (it->second.front() != r.commit)
            {
                report(ViolationKind::CommitCount, r.commit,
                       to_string(r.id) + " commit step disagrees with step records");
            }
        }

        for (int i = 1; i <= window.threads(); ++i)
        {
            for (int j = 1; j <= window.columns(); ++j)
            {
                const auto &cur = trace.transactions[window.dense({i, j})];
                if (cur.commit >= 0 && cur.start > cur.commit)
                {
                    report(ViolationKind::Availability, cur.commit,
                           to_string(cur.id) + " commits before it starts");
                }
                if (j == 1)
                {
                    continue;
                }
                const auto &prev = trace.transactions[window.dense({i, j - 1})];
                if (cur.commit >= 0 && prev.commit >= 0 && cur.commit <= prev.commit)
                {
                    report(ViolationKind::Ordering, cur.commit,
                           to_string(cur.id) + " commits no later than " + to_string(prev.id));
                }
                else if (cur.start >= 0 && cur.start <= prev.commit)
                {
                    report(ViolationKind::Availability, cur.start,
                           to_string(cur.id) + " starts before its predecessor commits");
                }
            }
        }

        for (const TraceEvent &e : trace.events)
        {
            if (e.kind != EventKind::Abort && e.kind != EventKind::Hold)
            {
                continue;
            }
            if (!e.other || *e.other == e.tx)
            {
                report(ViolationKind::Event, e.step, "abort of " + to_string(e.tx) + " without a winner");
                continue;
            }
            if (e.step >= 0 && e.step < static_cast<Step>(trace.steps.size()))
            {
                const auto &committed = trace.steps[e.step].committed;
                if (std::find(committed.begin(), committed.end(), e.tx) != committed.end())
                {
                    report(ViolationKind::Event, e.step,
                           to_string(e.tx) + " is aborted and committed in the same step");
                }
            }
        }
        return out;
    }

    namespace
    {
        template <typename T>
        void cell(std::ostream &out, const std::optional<T> &v)
        {
            if (v)
            {
                out << *v;
            }
        }
    } // namespace

    void write_trace_csv(std::ostream &out, const ExecutionTrace &trace)
    {
        out << "step,event,thread,index,winner_thread,winner_index,value,previous\n";
        for (const TraceEvent &e : trace.events)
        {
            out << e.step << ',' << to_string(e.kind) << ',' << e.tx.thread << ',' << e.tx.index
                << ',';
            if (e.other)
            {
                out << e.other->thread << ',' << e.other->index;
            }
            else
            {
                out << ',';
            }
            out << ',';
            cell(out, e.value);
            out << ',';
            cell(out, e.previous);
            out << '\n';
        }
    }

    void write_transactions_csv(std::ostream &out, const ExecutionTrace &trace)
    {
        out << "thread,index,start,commit,restarts\n";
        for (const TransactionRecord &r : trace.transactions)
        {
            out << r.id.thread << ',' << r.id.index << ',' << r.start << ',' << r.commit << ','
                << r.restarts << '\n';
        }
    }
} // namespace txwin
