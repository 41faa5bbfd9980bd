#include "txwin/online.hpp"

#include "txwin/errors.hpp"

#include <algorithm>
#include <set>

namespace txwin
{
    FrameParams frame_params_online(int threads, int columns, std::size_t contention, Seed seed)
    {
        FrameParams p;
        p.phi = online_frame_length(threads, columns);
        p.alpha = offset_slots(contention, threads, columns);
        p.offsets = draw_offsets(threads, p.alpha, seed);
        return p;
    }

    int draw_pi1(int threads, Rng &stream)
    {
        return static_cast<int>(uniform_int(stream, 1, threads));
    }

    ConflictOutcome resolve_conflict(TransactionId detector, const PriorityVector &detector_key,
                                     TransactionId other, const PriorityVector &other_key)
    {
        const ConflictOutcome detector_loses{detector, other};
        const ConflictOutcome detector_wins{other, detector};

        if (detector_key.estimate && other_key.estimate &&
            *detector_key.estimate != *other_key.estimate)
        {
            return *detector_key.estimate > *other_key.estimate ? detector_wins : detector_loses;
        }
        if (detector_key.level != other_key.level)
        {
            return detector_key.level == Priority::High ? detector_wins : detector_loses;
        }
        return detector_key.tiebreak < other_key.tiebreak ? detector_wins : detector_loses;
    }

    StepDecision step_arbitrate(std::span<const TransactionId> active,
                                const std::map<TransactionId, PriorityVector> &keys,
                                std::span<const Edge> pairs)
    {
        std::set<TransactionId> alive(active.begin(), active.end());
        std::vector<Edge> sweep;
        sweep.reserve(pairs.size());
        for (auto [a, b] : pairs)
        {
            if (!alive.contains(a) || !alive.contains(b))
            {
                throw InstanceError("step_arbitrate: pair names an inactive transaction");
            }
            sweep.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(sweep.begin(), sweep.end());

        StepDecision d;
        for (const auto &[detector, other] : sweep)
        {
            if (!alive.contains(detector) || !alive.contains(other))
            {
                continue;
            }
            const auto outcome = resolve_conflict(detector, keys.at(detector), other, keys.at(other));
            alive.erase(outcome.victim);
            d.aborts.push_back({outcome.victim, outcome.blocker, true});
        }
        d.commits.assign(alive.begin(), alive.end());
        return d;
    }

    // ---------------------------------------------------------------------------

    void PairwiseGreedy::start(const WindowSpec &window, Seed seed)
    {
        threads_ = window.threads();
        columns_ = window.columns();
        streams_.clear();
        for (int i = 1; i <= threads_; ++i)
        {
            streams_.push_back(make_rng(seed, "pi1", static_cast<std::uint64_t>(i)));
        }
        pi1_.assign(window.size(), 1);
        drawn_at_.assign(window.size(), -1);
        high_seen_.assign(window.size(), false);
    }

    void PairwiseGreedy::draw(TransactionId id, Step t, EngineView &view)
    {
        const std::size_t k = dense(id);
        pi1_[k] = draw_pi1(threads_, streams_[id.thread - 1]);
        drawn_at_[k] = t;
        TraceEvent e{t, EventKind::Pi1Draw, id};
        e.value = pi1_[k];
        view.emit(e);
    }

    void PairwiseGreedy::on_activate(TransactionId id, Step t, EngineView &view)
    {
        draw(id, t, view);
    }

    void PairwiseGreedy::on_restart(TransactionId id, Step t, EngineView &view)
    {
        draw(id, t, view);
    }

    void PairwiseGreedy::on_step_begin(Step t, EngineView &view)
    {
        for (int i = 1; i <= threads_; ++i)
        {
            const auto id = view.current(i);
            if (!id || !std::holds_alternative<Running>(view.status(*id)))
            {
                continue;
            }
            const std::size_t k = dense(*id);
            if (high_seen_[k] || level(*id, t) != Priority::High)
            {
                continue;
            }
            high_seen_[k] = true;
            // Entering the high-priority frame refreshes pi1 unless this step's
            // (re)start already drew one.
            if (drawn_at_[k] != t)
            {
                draw(*id, t, view);
            }
        }
    }

    StepDecision PairwiseGreedy::arbitrate(Step t, std::span<const TransactionId> active,
                                           const ConflictInfo &info, EngineView &)
    {
        std::map<TransactionId, PriorityVector> keys;
        for (TransactionId id : active)
        {
            keys.emplace(id, PriorityVector{estimate(id.thread), level(id, t), pi1(id)});
        }
        return step_arbitrate(active, keys, info.pairs);
    }

    // ---------------------------------------------------------------------------

    OnlineGreedy::OnlineGreedy(std::size_t contention) : contention_(contention) {}

    void OnlineGreedy::start(const WindowSpec &window, Seed seed)
    {
        PairwiseGreedy::start(window, seed);
        params_ = frame_params_online(window.threads(), window.columns(), contention_, seed);
    }

    Priority OnlineGreedy::level(TransactionId id, Step t) const
    {
        return priority_at(t, params_.frame_index(id), params_.phi);
    }

    std::optional<Step> OnlineGreedy::frame_end(TransactionId id) const
    {
        return params_.frame_end(id);
    }
} // namespace txwin
