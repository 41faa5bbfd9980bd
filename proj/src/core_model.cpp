#include "txwin/core_model.hpp"

#include "txwin/errors.hpp"

#include <algorithm>
#include <iterator>

namespace txwin
{
    std::string to_string(TransactionId id)
    {
        return "T(" + std::to_string(id.thread) + "," + std::to_string(id.index) + ")";
    }

    AccessSet::AccessSet(std::set<ObjectId> r, std::set<ObjectId> w)
        : reads(std::move(r)), writes(std::move(w))
    {
        for (ObjectId o : writes)
        {
            reads.erase(o);
        }
    }

    namespace
    {
        bool intersects(const std::set<ObjectId> &a, const std::set<ObjectId> &b)
        {
            auto ia = a.begin();
            auto ib = b.begin();
            while (ia != a.end() && ib != b.end())
            {
                if (*ia < *ib)
                {
                    ++ia;
                }
                else if (*ib < *ia)
                {
                    ++ib;
                }
                else
                {
                    return true;
                }
            }
            return false;
        }
    } // namespace

    bool accesses_conflict(const AccessSet &a, const AccessSet &b)
    {
        return intersects(a.writes, b.writes) || intersects(a.writes, b.reads) ||
               intersects(a.reads, b.writes);
    }

    // ---------------------------------------------------------------------------
    // ConflictGraph

    ConflictGraph::ConflictGraph(std::vector<TransactionId> nodes) : nodes_(std::move(nodes))
    {
        std::sort(nodes_.begin(), nodes_.end());
        nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
        adjacency_.resize(nodes_.size());
    }

    std::optional<std::size_t> ConflictGraph::find(TransactionId id) const
    {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
        if (it == nodes_.end() || *it != id)
        {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - nodes_.begin());
    }

    std::size_t ConflictGraph::require(TransactionId id) const
    {
        if (auto pos = find(id))
        {
            return *pos;
        }
        throw InstanceError("unknown transaction " + to_string(id));
    }

    void ConflictGraph::add_edge(TransactionId a, TransactionId b)
    {
        if (a == b)
        {
            throw InstanceError("self-conflict on " + to_string(a));
        }
        const std::size_t ia = require(a);
        const std::size_t ib = require(b);
        auto &na = adjacency_[ia];
        auto pos = std::lower_bound(na.begin(), na.end(), b);
        if (pos != na.end() && *pos == b)
        {
            return;
        }
        na.insert(pos, b);
        auto &nb = adjacency_[ib];
        nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
        ++edge_count_;
    }

    bool ConflictGraph::contains(TransactionId id) const
    {
        return find(id).has_value();
    }

    bool ConflictGraph::adjacent(TransactionId a, TransactionId b) const
    {
        auto ia = find(a);
        if (!ia)
        {
            return false;
        }
        const auto &na = adjacency_[*ia];
        return std::binary_search(na.begin(), na.end(), b);
    }

    const std::vector<TransactionId> &ConflictGraph::neighbors(TransactionId id) const
    {
        return adjacency_[require(id)];
    }

    std::vector<Edge> ConflictGraph::edges() const
    {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
        {
            for (TransactionId other : adjacency_[i])
            {
                if (nodes_[i] < other)
                {
                    out.emplace_back(nodes_[i], other);
                }
            }
        }
        return out;
    }

    std::size_t congestion(const ConflictGraph &graph)
    {
        std::size_t best = 0;
        for (TransactionId id : graph.nodes())
        {
            best = std::max(best, graph.degree(id));
        }
        return best;
    }

    ConflictGraph restrict(const ConflictGraph &graph, const std::vector<TransactionId> &nodes)
    {
        for (TransactionId id : nodes)
        {
            if (!graph.contains(id))
            {
                throw InstanceError("restrict: unknown transaction " + to_string(id));
            }
        }
        ConflictGraph sub(nodes);
        for (TransactionId id : sub.nodes())
        {
            for (TransactionId other : graph.neighbors(id))
            {
                if (id < other && sub.contains(other))
                {
                    sub.add_edge(id, other);
                }
            }
        }
        return sub;
    }

    // ---------------------------------------------------------------------------
    // WindowSpec

    namespace
    {
        void check_shape(int threads, int columns)
        {
            if (threads < 1 || columns < 1)
            {
                throw InstanceError("window needs M >= 1 and N >= 1, got " +
                                    std::to_string(threads) + "x" + std::to_string(columns));
            }
        }
    } // namespace

    WindowSpec::WindowSpec(int threads, int columns) : threads_(threads), columns_(columns)
    {
        check_shape(threads, columns);
        conflicts_ = ConflictGraph(all_ids());
    }

    bool WindowSpec::contains(TransactionId id) const noexcept
    {
        return id.thread >= 1 && id.thread <= threads_ && id.index >= 1 && id.index <= columns_;
    }

    std::vector<TransactionId> WindowSpec::all_ids() const
    {
        std::vector<TransactionId> ids;
        ids.reserve(size());
        for (int i = 1; i <= threads_; ++i)
        {
            for (int j = 1; j <= columns_; ++j)
            {
                ids.push_back({i, j});
            }
        }
        return ids;
    }

    WindowSpec WindowSpec::from_edges(int threads, int columns, const std::vector<Edge> &edges)
    {
        WindowSpec w(threads, columns);
        for (const auto &[a, b] : edges)
        {
            if (!w.contains(a) || !w.contains(b))
            {
                throw InstanceError("edge endpoint outside window: " + to_string(a) + " " +
                                    to_string(b));
            }
            w.conflicts_.add_edge(a, b);
        }
        return w;
    }

    WindowSpec WindowSpec::from_accesses(int threads, int columns, int object_count,
                                         std::vector<AccessSet> accesses)
    {
        check_shape(threads, columns);
        const std::size_t n = static_cast<std::size_t>(threads) * columns;
        if (accesses.size() != n)
        {
            throw InstanceError("expected " + std::to_string(n) + " access sets, got " +
                                std::to_string(accesses.size()));
        }
        int largest = 0;
        for (auto &a : accesses)
        {
            a = AccessSet(std::move(a.reads), std::move(a.writes));
            for (const auto *s : {&a.reads, &a.writes})
            {
                if (!s->empty())
                {
                    if (*s->begin() < 1)
                    {
                        throw InstanceError("object ids start at 1");
                    }
                    largest = std::max(largest, *s->rbegin());
                }
            }
        }
        if (object_count == 0)
        {
            object_count = largest;
        }
        else if (largest > object_count)
        {
            throw InstanceError("object id " + std::to_string(largest) + " exceeds s = " +
                                std::to_string(object_count));
        }
        WindowSpec w(threads, columns);
        w.conflicts_ = derive_conflicts(threads, columns, accesses);
        w.accesses_ = std::move(accesses);
        w.object_count_ = object_count;
        return w;
    }

    ConflictGraph derive_conflicts(int threads, int columns, const std::vector<AccessSet> &accesses)
    {
        check_shape(threads, columns);
        const std::size_t n = static_cast<std::size_t>(threads) * columns;
        if (accesses.size() != n)
        {
            throw InstanceError("derive_conflicts: access set count mismatch");
        }
        auto id_at = [columns](std::size_t k) {
            return TransactionId{static_cast<int>(k / columns) + 1,
                                 static_cast<int>(k % columns) + 1};
        };
        std::vector<TransactionId> ids;
        ids.reserve(n);
        for (std::size_t k = 0; k < n; ++k)
        {
            ids.push_back(id_at(k));
        }
        ConflictGraph g(ids);
        for (std::size_t a = 0; a < n; ++a)
        {
            for (std::size_t b = a + 1; b < n; ++b)
            {
                if (accesses_conflict(accesses[a], accesses[b]))
                {
                    g.add_edge(ids[a], ids[b]);
                }
            }
        }
        return g;
    }

    // ---------------------------------------------------------------------------
    // Generators

    namespace
    {
        void check_prob(double p, const char *what)
        {
            if (!(p >= 0.0 && p <= 1.0))
            {
                throw GenerationError(std::string(what) + " must lie in [0, 1]");
            }
        }

        struct Generator
        {
            int threads;
            int columns;
            Seed seed;

            WindowSpec operator()(const ObjectUniform &m) const
            {
                check_prob(m.read_prob, "read-prob");
                check_prob(m.write_prob, "write-prob");
                if (m.objects < 1)
                {
                    throw GenerationError("object-uniform needs s >= 1");
                }
                Rng rng = make_rng(seed, "generator/object-uniform");
                std::vector<AccessSet> accesses(static_cast<std::size_t>(threads) * columns);
                for (auto &a : accesses)
                {
                    for (ObjectId o = 1; o <= m.objects; ++o)
                    {
                        // Both draws are always taken so the stream layout does not
                        // depend on outcomes.
                        const bool w = bernoulli(rng, m.write_prob);
                        const bool r = bernoulli(rng, m.read_prob);
                        if (w)
                        {
                            a.writes.insert(o);
                        }
                        else if (r)
                        {
                            a.reads.insert(o);
                        }
                    }
                }
                return WindowSpec::from_accesses(threads, columns, m.objects, std::move(accesses));
            }

            WindowSpec operator()(const DegreeCapped &m) const
            {
                check_prob(m.edge_prob, "edge-prob");
                const auto n = static_cast<long long>(threads) * columns;
                if (m.max_degree < 0 || m.max_degree > n - 1)
                {
                    throw GenerationError("C_target must lie in [0, M*N-1]");
                }
                if (m.edge_prob >= 1.0 && m.max_degree < n - 1)
                {
                    throw GenerationError("edge-prob 1 demands a complete graph, which "
                                          "exceeds C_target " + std::to_string(m.max_degree));
                }
                Rng rng = make_rng(seed, "generator/degree-capped");
                const WindowSpec empty = WindowSpec::from_edges(threads, columns, {});
                const auto ids = empty.all_ids();
                std::vector<int> degree(ids.size(), 0);
                std::vector<Edge> edges;
                for (std::size_t a = 0; a < ids.size(); ++a)
                {
                    for (std::size_t b = a + 1; b < ids.size(); ++b)
                    {
                        if (!bernoulli(rng, m.edge_prob))
                        {
                            continue;
                        }
                        if (degree[a] >= m.max_degree || degree[b] >= m.max_degree)
                        {
                            continue;
                        }
                        ++degree[a];
                        ++degree[b];
                        edges.emplace_back(ids[a], ids[b]);
                    }
                }
                return WindowSpec::from_edges(threads, columns, edges);
            }

            WindowSpec operator()(const ColumnClustered &m) const
            {
                check_prob(m.intra_prob, "intra-prob");
                check_prob(m.inter_prob, "inter-prob");
                Rng rng = make_rng(seed, "generator/column-clustered");
                const WindowSpec empty = WindowSpec::from_edges(threads, columns, {});
                const auto ids = empty.all_ids();
                std::vector<Edge> edges;
                for (std::size_t a = 0; a < ids.size(); ++a)
                {
                    for (std::size_t b = a + 1; b < ids.size(); ++b)
                    {
                        const double p =
                            ids[a].index == ids[b].index ? m.intra_prob : m.inter_prob;
                        if (bernoulli(rng, p))
                        {
                            edges.emplace_back(ids[a], ids[b]);
                        }
                    }
                }
                return WindowSpec::from_edges(threads, columns, edges);
            }
        };
    } // namespace

    WindowSpec generate_window(int threads, int columns, const WorkloadModel &model, Seed seed)
    {
        if (threads < 1 || columns < 1)
        {
            throw GenerationError("window needs M >= 1 and N >= 1");
        }
        return std::visit(Generator{threads, columns, seed}, model);
    }
} // namespace txwin
