#pragma once

#include "txwin/online.hpp"

#include <optional>
#include <vector>

namespace txwin
{
    struct FrameWindow
    {
        Step start = 0;
        Step length = 1;

        Step end() const noexcept { return start + length; }
    };

    // A bad event: the designated frame has fully elapsed and the transaction has
    // not committed inside it. Before the frame starts there is nothing to miss.
    bool detect_bad_event(Step now, const FrameWindow &frame, std::optional<Step> committed_at);

    // Per-thread state of the contention guess.
    struct ThreadEstimate
    {
        std::size_t estimate = 1; // C_i
        int doublings = 0;
        int alpha = 1;
        int offset = 0;      // R_i for the current attempt
        Step origin = 0;     // step the current attempt started at
        int first_index = 1; // first transaction scheduled by the current attempt

        int frame_index(int index) const noexcept { return offset + (index - first_index); }
    };

    struct AdaptiveOptions
    {
        // Overrides the online frame length phi'. Used to study the doubling logic
        // on windows where the full-length frames make bad events vanishingly rare.
        std::optional<Step> frame_length;
    };

    // Online greedy run by every thread with its own contention guess, starting at
    // 1 and doubling after each bad event. Threads with larger guesses win conflicts.
    class AdaptiveGreedy final : public PairwiseGreedy
    {
    public:
        explicit AdaptiveGreedy(AdaptiveOptions options = {});

        std::string name() const override { return "adaptive"; }
        void start(const WindowSpec &window, Seed seed) override;
        void on_step_begin(Step t, EngineView &view) override;
        Priority level(TransactionId id, Step t) const override;
        std::optional<std::size_t> estimate(int thread) const override;
        std::optional<Step> frame_end(TransactionId id) const override;
        std::optional<Step> step_budget() const override;

        FrameWindow frame(TransactionId id) const;
        Step frame_length() const noexcept { return phi_; }
        std::size_t estimate_cap() const noexcept { return cap_; }
        const std::vector<ThreadEstimate> &threads() const noexcept { return state_; }

    private:
        void rebase(int thread, TransactionId current, Step t, EngineView &view);

        AdaptiveOptions options_;
        Step phi_ = 1;
        std::size_t cap_ = 1;
        std::vector<ThreadEstimate> state_;
        std::vector<Rng> offset_streams_;
    };
} // namespace txwin
