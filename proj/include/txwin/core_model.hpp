#pragma once

#include "txwin/rng.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace txwin
{
    // T_ij: thread i in [1, M], position j in [1, N]. Ordering is (thread, index).
    struct TransactionId
    {
        int thread = 0;
        int index = 0;

        auto operator<=>(const TransactionId &) const = default;
    };

    std::string to_string(TransactionId id);

    using Edge = std::pair<TransactionId, TransactionId>;

    using ObjectId = int;

    // Objects touched by one transaction. An object that is both read and written
    // is kept only in writes.
    struct AccessSet
    {
        std::set<ObjectId> reads;
        std::set<ObjectId> writes;

        AccessSet() = default;
        AccessSet(std::set<ObjectId> r, std::set<ObjectId> w);

        bool empty() const noexcept { return reads.empty() && writes.empty(); }
        bool operator==(const AccessSet &) const = default;
    };

    // True iff the two sets produce a write-write or read-write conflict.
    bool accesses_conflict(const AccessSet &a, const AccessSet &b);

    // Undirected, self-loop free graph over transaction ids. Nodes and every
    // neighbor list are kept sorted, so iteration order is deterministic.
    class ConflictGraph
    {
    public:
        ConflictGraph() = default;
        explicit ConflictGraph(std::vector<TransactionId> nodes);

        // Throws InstanceError for self-edges or unknown endpoints. Idempotent.
        void add_edge(TransactionId a, TransactionId b);

        bool contains(TransactionId id) const;
        bool adjacent(TransactionId a, TransactionId b) const;

        const std::vector<TransactionId> &nodes() const noexcept { return nodes_; }
        const std::vector<TransactionId> &neighbors(TransactionId id) const;
        std::size_t degree(TransactionId id) const { return neighbors(id).size(); }

        std::size_t node_count() const noexcept { return nodes_.size(); }
        std::size_t edge_count() const noexcept { return edge_count_; }

        // Every edge once, as (smaller, larger), in lexicographic order.
        std::vector<Edge> edges() const;

        bool operator==(const ConflictGraph &) const = default;

    private:
        std::optional<std::size_t> find(TransactionId id) const;
        std::size_t require(TransactionId id) const;

        std::vector<TransactionId> nodes_;
        std::vector<std::vector<TransactionId>> adjacency_;
        std::size_t edge_count_ = 0;
    };

    // Largest degree; 0 for an edgeless or empty graph.
    std::size_t congestion(const ConflictGraph &graph);

    // Induced subgraph. Unknown nodes raise InstanceError.
    ConflictGraph restrict(const ConflictGraph &graph, const std::vector<TransactionId> &nodes);

    // Conflict graph over the M x N window implied by per-transaction access sets,
    // given in dense (thread-major) order.
    ConflictGraph derive_conflicts(int threads, int columns, const std::vector<AccessSet> &accesses);

    // The problem instance: M threads each issuing N unit transactions, plus the
    // static conflict relation among them.
    class WindowSpec
    {
    public:
        static WindowSpec from_edges(int threads, int columns, const std::vector<Edge> &edges);

        // Conflicts are derived from the access sets. object_count 0 means "infer
        // from the largest referenced id".
        static WindowSpec from_accesses(int threads, int columns, int object_count,
                                        std::vector<AccessSet> accesses);

        int threads() const noexcept { return threads_; }
        int columns() const noexcept { return columns_; }
        std::size_t size() const noexcept { return static_cast<std::size_t>(threads_) * columns_; }

        const ConflictGraph &conflicts() const noexcept { return conflicts_; }
        const std::optional<std::vector<AccessSet>> &accesses() const noexcept { return accesses_; }
        int object_count() const noexcept { return object_count_; }

        std::size_t congestion() const { return txwin::congestion(conflicts_); }

        bool contains(TransactionId id) const noexcept;
        std::size_t dense(TransactionId id) const noexcept
        {
            return static_cast<std::size_t>(id.thread - 1) * columns_ + (id.index - 1);
        }
        TransactionId id_at(std::size_t dense_index) const noexcept
        {
            return {static_cast<int>(dense_index / columns_) + 1,
                    static_cast<int>(dense_index % columns_) + 1};
        }
        std::vector<TransactionId> all_ids() const;

        bool operator==(const WindowSpec &) const = default;

    private:
        WindowSpec(int threads, int columns);

        int threads_ = 0;
        int columns_ = 0;
        ConflictGraph conflicts_;
        std::optional<std::vector<AccessSet>> accesses_;
        int object_count_ = 0;
    };

    // Workload models for generate_window.
    struct ObjectUniform
    {
        int objects = 1;
        double read_prob = 0.0;
        double write_prob = 0.0;
    };

    struct DegreeCapped
    {
        int max_degree = 0;
        double edge_prob = 0.0;
    };

    struct ColumnClustered
    {
        double intra_prob = 0.0;
        double inter_prob = 0.0;
    };

    using WorkloadModel = std::variant<ObjectUniform, DegreeCapped, ColumnClustered>;

    // Deterministic in (threads, columns, model, seed). Throws GenerationError
    // when the model cannot be honored.
    WindowSpec generate_window(int threads, int columns, const WorkloadModel &model, Seed seed);
} // namespace txwin
