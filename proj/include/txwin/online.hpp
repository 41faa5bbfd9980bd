#pragma once

#include "txwin/core_model.hpp"
#include "txwin/engine.hpp"
#include "txwin/frames.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace txwin
{
    // Arbitration key. Lower lexicographic order wins, except for the optional
    // contention estimate in front, where the larger estimate wins.
    struct PriorityVector
    {
        std::optional<std::size_t> estimate; // pi3, adaptive only
        Priority level = Priority::Low;      // pi2
        int tiebreak = 1;                    // pi1, uniform in [1, M]

        bool operator==(const PriorityVector &) const = default;
    };

    // Online frame schedule: phi' = ceil(16 e phi ln(MN)) with the real-valued
    // offline phi; alpha and offsets as offline.
    FrameParams frame_params_online(int threads, int columns, std::size_t contention, Seed seed);

    int draw_pi1(int threads, Rng &stream);

    struct ConflictOutcome
    {
        TransactionId victim;
        TransactionId blocker;
    };

    // Pairwise rule. The detector keeps running only if it strictly wins; equal
    // vectors abort the detector.
    ConflictOutcome resolve_conflict(TransactionId detector, const PriorityVector &detector_key,
                                     TransactionId other, const PriorityVector &other_key);

    // Sweeps the conflicting pairs in lexicographic order, resolving each pair
    // whose endpoints are both still alive with the smaller id as detector.
    // Survivors commit; victims hold off on the transaction that beat them.
    StepDecision step_arbitrate(std::span<const TransactionId> active,
                                const std::map<TransactionId, PriorityVector> &keys,
                                std::span<const Edge> pairs);

    // Shared machinery of the policies that only see conflicting pairs: pi1
    // draws on every (re)start and at the switch to high priority.
    class PairwiseGreedy : public SchedulerPolicy
    {
    public:
        Visibility visibility() const override { return Visibility::ActivePairs; }

        void start(const WindowSpec &window, Seed seed) override;
        void on_activate(TransactionId id, Step t, EngineView &view) override;
        void on_restart(TransactionId id, Step t, EngineView &view) override;
        void on_step_begin(Step t, EngineView &view) override;
        StepDecision arbitrate(Step t, std::span<const TransactionId> active,
                               const ConflictInfo &info, EngineView &view) override;

        virtual Priority level(TransactionId id, Step t) const = 0;
        virtual std::optional<std::size_t> estimate(int) const { return std::nullopt; }

        int pi1(TransactionId id) const { return pi1_.at(dense(id)); }

    protected:
        std::size_t dense(TransactionId id) const
        {
            return static_cast<std::size_t>(id.thread - 1) * columns_ + (id.index - 1);
        }

        // The transaction's next switch to high priority draws a fresh pi1 again.
        void forget_high(TransactionId id) { high_seen_.at(dense(id)) = false; }

        int threads_ = 0;
        int columns_ = 0;

    private:
        void draw(TransactionId id, Step t, EngineView &view);

        std::vector<Rng> streams_;
        std::vector<int> pi1_;
        std::vector<Step> drawn_at_;
        std::vector<bool> high_seen_;
    };

    class OnlineGreedy final : public PairwiseGreedy
    {
    public:
        explicit OnlineGreedy(std::size_t contention);

        std::string name() const override { return "online"; }
        void start(const WindowSpec &window, Seed seed) override;
        Priority level(TransactionId id, Step t) const override;
        std::optional<Step> frame_end(TransactionId id) const override;

        std::optional<Step> makespan_envelope() const override { return params_.envelope(columns_); }

        const FrameParams &params() const noexcept { return params_; }

    private:
        std::size_t contention_;
        FrameParams params_;
    };
} // namespace txwin
