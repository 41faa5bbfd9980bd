#include "txwin/window_io.hpp"

#include "txwin/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace txwin
{
    namespace
    {
        [[noreturn]] void fail(std::size_t line, const std::string &msg)
        {
            throw InstanceError("window file line " + std::to_string(line) + ": " + msg);
        }

        int parse_int(const std::string &tok, std::size_t line)
        {
            int value = 0;
            const char *end = tok.data() + tok.size();
            auto [ptr, ec] = std::from_chars(tok.data(), end, value);
            if (ec != std::errc{} || ptr != end)
            {
                fail(line, "expected integer, got '" + tok + "'");
            }
            return value;
        }

        std::set<ObjectId> parse_objects(const std::string &list, std::size_t line)
        {
            std::set<ObjectId> out;
            if (list.empty())
            {
                return out;
            }
            std::stringstream ss(list);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                out.insert(parse_int(item, line));
            }
            return out;
        }

        std::string join(const std::set<ObjectId> &objects)
        {
            std::string s;
            for (ObjectId o : objects)
            {
                if (!s.empty())
                {
                    s += ',';
                }
                s += std::to_string(o);
            }
            return s;
        }
    } // namespace

    WindowSpec read_window(std::istream &in)
    {
        std::optional<std::pair<int, int>> shape;
        std::optional<int> objects;
        std::vector<Edge> edges;
        std::vector<std::optional<AccessSet>> accesses;
        bool saw_access = false;

        std::string raw;
        std::size_t line = 0;
        while (std::getline(in, raw))
        {
            ++line;
            if (auto hash = raw.find('#'); hash != std::string::npos)
            {
                raw.erase(hash);
            }
            std::istringstream ls(raw);
            std::vector<std::string> tok;
            for (std::string t; ls >> t;)
            {
                tok.push_back(std::move(t));
            }
            if (tok.empty())
            {
                continue;
            }

            const std::string &kw = tok[0];
            if (!shape)
            {
                if (kw != "window" || tok.size() != 3)
                {
                    fail(line, "expected header 'window M N'");
                }
                const int m = parse_int(tok[1], line);
                const int n = parse_int(tok[2], line);
                if (m < 1 || n < 1)
                {
                    fail(line, "M and N must be >= 1");
                }
                shape.emplace(m, n);
                accesses.resize(static_cast<std::size_t>(m) * n);
                continue;
            }

            const auto [m, n] = *shape;
            auto check_id = [&, m = m, n = n](TransactionId id) {
                if (id.thread < 1 || id.thread > m || id.index < 1 || id.index > n)
                {
                    fail(line, "transaction " + to_string(id) + " outside window");
                }
                return id;
            };

            if (kw == "window")
            {
                fail(line, "duplicate header");
            }
            else if (kw == "objects")
            {
                if (objects || tok.size() != 2)
                {
                    fail(line, "expected a single 'objects s' line");
                }
                objects = parse_int(tok[1], line);
                if (*objects < 1)
                {
                    fail(line, "s must be >= 1");
                }
            }
            else if (kw == "edge")
            {
                if (saw_access)
                {
                    fail(line, "edge line in an access-set file");
                }
                if (tok.size() != 5)
                {
                    fail(line, "expected 'edge i1 j1 i2 j2'");
                }
                const TransactionId a = check_id({parse_int(tok[1], line), parse_int(tok[2], line)});
                const TransactionId b = check_id({parse_int(tok[3], line), parse_int(tok[4], line)});
                if (a == b)
                {
                    fail(line, "self-edge on " + to_string(a));
                }
                edges.emplace_back(a, b);
            }
            else if (kw == "access")
            {
                if (!edges.empty())
                {
                    fail(line, "access line in an edge-list file");
                }
                saw_access = true;
                if (tok.size() < 3 || tok.size() > 5)
                {
                    fail(line, "expected 'access i j [R:...] [W:...]'");
                }
                const TransactionId id = check_id({parse_int(tok[1], line), parse_int(tok[2], line)});
                AccessSet set;
                bool have_r = false;
                bool have_w = false;
                for (std::size_t k = 3; k < tok.size(); ++k)
                {
                    const std::string &part = tok[k];
                    if (part.rfind("R:", 0) == 0 && !have_r)
                    {
                        set.reads = parse_objects(part.substr(2), line);
                        have_r = true;
                    }
                    else if (part.rfind("W:", 0) == 0 && !have_w)
                    {
                        set.writes = parse_objects(part.substr(2), line);
                        have_w = true;
                    }
                    else
                    {
                        fail(line, "bad access field '" + part + "'");
                    }
                }
                auto &slot = accesses[static_cast<std::size_t>(id.thread - 1) * n + (id.index - 1)];
                if (slot)
                {
                    fail(line, "duplicate access line for " + to_string(id));
                }
                slot = AccessSet(std::move(set.reads), std::move(set.writes));
            }
            else
            {
                fail(line, "unknown keyword '" + kw + "'");
            }
        }

        if (!shape)
        {
            throw InstanceError("window file: missing 'window M N' header");
        }
        const auto [m, n] = *shape;
        if (saw_access || objects)
        {
            if (objects && !edges.empty())
            {
                throw InstanceError("window file: 'objects' given in an edge-list file");
            }
            std::vector<AccessSet> sets;
            sets.reserve(accesses.size());
            for (auto &a : accesses)
            {
                sets.push_back(a ? std::move(*a) : AccessSet{});
            }
            return WindowSpec::from_accesses(m, n, objects.value_or(0), std::move(sets));
        }
        return WindowSpec::from_edges(m, n, edges);
    }

    void write_window(std::ostream &out, const WindowSpec &window)
    {
        out << "window " << window.threads() << ' ' << window.columns() << '\n';
        if (const auto &acc = window.accesses())
        {
            if (window.object_count() > 0)
            {
                out << "objects " << window.object_count() << '\n';
            }
            for (std::size_t k = 0; k < acc->size(); ++k)
            {
                const AccessSet &a = (*acc)[k];
                const TransactionId id = window.id_at(k);
                out << "access " << id.thread << ' ' << id.index;
                if (!a.reads.empty())
                {
                    out << " R:" << join(a.reads);
                }
                if (!a.writes.empty())
                {
                    out << " W:" << join(a.writes);
                }
                out << '\n';
            }
            return;
        }
        for (const auto &[a, b] : window.conflicts().edges())
        {
            out << "edge " << a.thread << ' ' << a.index << ' ' << b.thread << ' ' << b.index
                << '\n';
        }
    }

    WindowSpec load_window(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw InstanceError("cannot open window file " + path.string());
        }
        return read_window(in);
    }

    void save_window(const std::filesystem::path &path, const WindowSpec &window)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            throw InstanceError("cannot write window file " + path.string());
        }
        write_window(out, window);
    }
} // namespace txwin
