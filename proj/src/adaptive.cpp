#include "txwin/adaptive.hpp"

#include "txwin/errors.hpp"

#include <algorithm>

namespace txwin
{
    bool detect_bad_event(Step now, const FrameWindow &frame, std::optional<Step> committed_at)
    {
        if (now < frame.end())
        {
            return false;
        }
        return !committed_at || *committed_at >= frame.end();
    }

    AdaptiveGreedy::AdaptiveGreedy(AdaptiveOptions options) : options_(options)
    {
        if (options_.frame_length && *options_.frame_length < 1)
        {
            throw InstanceError("adaptive frame length must be >= 1");
        }
    }

    void AdaptiveGreedy::start(const WindowSpec &window, Seed seed)
    {
        PairwiseGreedy::start(window, seed);
        phi_ = options_.frame_length.value_or(online_frame_length(window.threads(), window.columns()));
        cap_ = std::max<std::size_t>(1, window.size() - 1);
        state_.assign(static_cast<std::size_t>(window.threads()), ThreadEstimate{});
        offset_streams_.clear();
        for (int i = 1; i <= window.threads(); ++i)
        {
            Rng rng = make_rng(seed, "adaptive-offset", static_cast<std::uint64_t>(i));
            ThreadEstimate &s = state_[i - 1];
            s.alpha = offset_slots(s.estimate, window.threads(), window.columns());
            s.offset = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(s.alpha)));
            offset_streams_.push_back(rng);
        }
    }

    FrameWindow AdaptiveGreedy::frame(TransactionId id) const
    {
        const ThreadEstimate &s = state_.at(id.thread - 1);
        return {s.origin + static_cast<Step>(s.frame_index(id.index)) * phi_, phi_};
    }

    Priority AdaptiveGreedy::level(TransactionId id, Step t) const
    {
        return t < frame(id).start ? Priority::Low : Priority::High;
    }

    std::optional<std::size_t> AdaptiveGreedy::estimate(int thread) const
    {
        return state_.at(thread - 1).estimate;
    }

    std::optional<Step> AdaptiveGreedy::frame_end(TransactionId id) const
    {
        return frame(id).end();
    }

    std::optional<Step> AdaptiveGreedy::step_budget() const
    {
        if (!options_.frame_length)
        {
            return std::nullopt;
        }
        return 10 * static_cast<Step>(threads_) * columns_ * phi_;
    }

    void AdaptiveGreedy::on_step_begin(Step t, EngineView &view)
    {
        for (int i = 1; i <= threads_; ++i)
        {
            const auto id = view.current(i);
            if (!id || std::holds_alternative<NotStarted>(view.status(*id)))
            {
                continue;
            }
            if (detect_bad_event(t, frame(*id), std::nullopt))
            {
                rebase(i, *id, t, view);
            }
        }
        PairwiseGreedy::on_step_begin(t, view);
    }

    void AdaptiveGreedy::rebase(int thread, TransactionId current, Step t, EngineView &view)
    {
        ThreadEstimate &s = state_[thread - 1];
        const std::size_t old = s.estimate;
        if (old >= cap_)
        {
            view.diagnose("thread " + std::to_string(thread) + " missed a frame at step " +
                          std::to_string(t) + " with its estimate already at the cap " +
                          std::to_string(cap_));
        }
        else
        {
            s.estimate = std::min(2 * old, cap_);
            ++s.doublings;
            TraceEvent e{t, EventKind::Double, current};
            e.value = static_cast<std::int64_t>(s.estimate);
            e.previous = static_cast<std::int64_t>(old);
            view.emit(e);
        }
        // Start over with the remaining transactions under the new guess.
        s.alpha = offset_slots(s.estimate, threads_, columns_);
        s.offset = static_cast<int>(
            uniform_below(offset_streams_[thread - 1], static_cast<std::uint64_t>(s.alpha)));
        s.origin = t;
        s.first_index = current.index;
        for (int j = current.index; j <= columns_; ++j)
        {
            forget_high({thread, j});
        }
    }
} // namespace txwin
