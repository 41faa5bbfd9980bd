#pragma once

#include "txwin/core_model.hpp"
#include "txwin/engine.hpp"
#include "txwin/rng.hpp"

#include <vector>

namespace txwin
{
    enum class Priority
    {
        High,
        Low,
    };

    // ln(M*N).
    double window_log(int threads, int columns);

    // Real-valued frame lengths before integerization.
    double offline_frame_real(int threads, int columns);
    double online_frame_real(int threads, int columns);

    // Integer frame lengths: ceiling of the real value, never below one step.
    Step offline_frame_length(int threads, int columns);
    Step online_frame_length(int threads, int columns);

    // Number of random offset slots: ceil(C / ln(MN)), at least 1. C = 0 or a
    // single-transaction window gives 1.
    int offset_slots(std::size_t contention, int threads, int columns);

    // Frame schedule of a window: thread i starts its j-th transaction's
    // high-priority frame at frame index R_i + (j - 1).
    struct FrameParams
    {
        Step phi = 1;
        int alpha = 1;
        std::vector<int> offsets; // R_i, indexed by thread - 1

        int frame_index(TransactionId id) const { return offsets.at(id.thread - 1) + id.index - 1; }
        Step frame_start(TransactionId id) const { return frame_index(id) * phi; }
        Step frame_end(TransactionId id) const { return (frame_index(id) + 1) * phi; }

        // (alpha + N) * phi: the step count every thread finishes within when no
        // transaction overruns its frame.
        Step envelope(int columns) const { return (alpha + columns) * phi; }
    };

    // Draws R_i uniformly from [0, alpha-1], one labeled stream per thread.
    std::vector<int> draw_offsets(int threads, int alpha, Seed seed);

    Priority priority_at(Step t, int frame_index, Step phi);
} // namespace txwin
