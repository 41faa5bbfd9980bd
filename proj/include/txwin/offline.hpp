#pragma once

#include "txwin/core_model.hpp"
#include "txwin/engine.hpp"
#include "txwin/frames.hpp"

#include <map>
#include <span>
#include <vector>

namespace txwin
{
    // Offline frame schedule: phi = ceil(1 + (e^2 + 2) ln(MN)), alpha slots, per-thread R_i.
    FrameParams frame_params(int threads, int columns, std::size_t contention, Seed seed);

    // Scans `order` and keeps every node with no neighbor kept so far. The result
    // is maximal and independent. `order` must list each node of the graph once.
    std::vector<TransactionId> greedy_mis(const ConflictGraph &graph,
                                          std::span<const TransactionId> order);
    std::vector<TransactionId> greedy_mis(const ConflictGraph &graph);

    // High-priority MIS first, then a low-priority MIS among low nodes not adjacent
    // to it. Returned sorted.
    std::vector<TransactionId> commit_set(const ConflictGraph &active,
                                          const std::map<TransactionId, Priority> &priorities,
                                          std::span<const TransactionId> order);

    enum class MisOrder
    {
        Lexicographic,
        Random,
    };

    class OfflineGreedy final : public SchedulerPolicy
    {
    public:
        explicit OfflineGreedy(std::size_t contention, MisOrder order = MisOrder::Lexicographic);

        std::string name() const override { return "offline"; }
        Visibility visibility() const override { return Visibility::FullGraph; }

        void start(const WindowSpec &window, Seed seed) override;
        StepDecision arbitrate(Step t, std::span<const TransactionId> active,
                               const ConflictInfo &info, EngineView &view) override;
        std::optional<Step> frame_end(TransactionId id) const override;

        std::optional<Step> makespan_envelope() const override { return params_.envelope(columns_); }

        const FrameParams &params() const noexcept { return params_; }
        Priority priority(TransactionId id, Step t) const;

    private:
        std::size_t contention_;
        MisOrder order_;
        int columns_ = 0;
        FrameParams params_;
        Rng order_rng_;
    };
} // namespace txwin
