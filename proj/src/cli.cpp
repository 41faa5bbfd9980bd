#include "txwin/cli.hpp"

#include "txwin/adaptive.hpp"
#include "txwin/decomposition.hpp"
#include "txwin/errors.hpp"
#include "txwin/metrics.hpp"
#include "txwin/online.hpp"
#include "txwin/window_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace txwin::cli
{
    using nlohmann::ordered_json;

    namespace
    {
        std::vector<std::string> split(std::string_view text, char sep)
        {
            std::vector<std::string> out;
            std::size_t start = 0;
            while (start <= text.size())
            {
                const auto pos = text.find(sep, start);
                const auto end = pos == std::string_view::npos ? text.size() : pos;
                out.emplace_back(text.substr(start, end - start));
                if (pos == std::string_view::npos)
                {
                    break;
                }
                start = pos + 1;
            }
            return out;
        }

        template <typename T>
        T parse_number(std::string_view text, std::string_view what)
        {
            T value{};
            const char *end = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), end, value);
            if (ec != std::errc{} || ptr != end || text.empty())
            {
                throw ConfigError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
            }
            return value;
        }

        // std::from_chars for double is missing on older libstdc++.
        double parse_prob(std::string_view text, std::string_view what)
        {
            const std::string s(text);
            char *end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size())
            {
                throw ConfigError("invalid " + std::string(what) + ": '" + s + "'");
            }
            return v;
        }

        std::string fixed6(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6f", v);
            return buf;
        }

        std::ofstream open_out(const std::filesystem::path &path)
        {
            if (path.has_parent_path())
            {
                std::filesystem::create_directories(path.parent_path());
            }
            std::ofstream out(path, std::ios::binary);
            if (!out)
            {
                throw InstanceError("cannot write " + path.string());
            }
            return out;
        }
    } // namespace

    GeneratorSpec parse_generator_spec(std::string_view text)
    {
        const auto parts = split(text, ':');
        if (parts.size() < 2 || parts.size() > 3)
        {
            throw ConfigError("generator spec must look like model:MxN[:k=v,...], got '" +
                              std::string(text) + "'");
        }
        GeneratorSpec spec;
        spec.text = std::string(text);

        const auto shape = split(parts[1], 'x');
        if (shape.size() != 2)
        {
            throw ConfigError("generator shape must be MxN, got '" + parts[1] + "'");
        }
        spec.threads = parse_number<int>(shape[0], "M");
        spec.columns = parse_number<int>(shape[1], "N");
        if (spec.threads < 1 || spec.columns < 1)
        {
            throw ConfigError("generator needs M >= 1 and N >= 1");
        }

        std::map<std::string, std::string> kv;
        if (parts.size() == 3 && !parts[2].empty())
        {
            for (const auto &item : split(parts[2], ','))
            {
                const auto eq = item.find('=');
                if (eq == std::string::npos)
                {
                    throw ConfigError("generator parameter '" + item + "' lacks '='");
                }
                kv[item.substr(0, eq)] = item.substr(eq + 1);
            }
        }
        auto take = [&](const std::string &key, const std::string &fallback) {
            auto it = kv.find(key);
            if (it == kv.end())
            {
                return fallback;
            }
            std::string v = it->second;
            kv.erase(it);
            return v;
        };

        const std::string &model = parts[0];
        if (model == "capped" || model == "degree-capped-random")
        {
            const std::string c = take("C", "");
            if (c.empty())
            {
                throw ConfigError("capped generator needs C=<max degree>");
            }
            spec.model = DegreeCapped{parse_number<int>(c, "C"), parse_prob(take("p", "0.5"), "p")};
        }
        else if (model == "objects" || model == "object-uniform")
        {
            spec.model = ObjectUniform{parse_number<int>(take("s", "1"), "s"),
                                       parse_prob(take("r", "0"), "r"),
                                       parse_prob(take("w", "0"), "w")};
        }
        else if (model == "clustered" || model == "column-clustered")
        {
            spec.model = ColumnClustered{parse_prob(take("intra", "0"), "intra"),
                                         parse_prob(take("inter", "0"), "inter")};
        }
        else
        {
            throw ConfigError("unknown generator model '" + model +
                              "' (expected capped, objects or clustered)");
        }
        if (!kv.empty())
        {
            throw ConfigError("unknown generator parameter '" + kv.begin()->first + "'");
        }
        return spec;
    }

    std::string_view to_string(PolicyKind kind)
    {
        switch (kind)
        {
        case PolicyKind::Offline:
            return "offline";
        case PolicyKind::Online:
            return "online";
        case PolicyKind::Adaptive:
            return "adaptive";
        }
        return "?";
    }

    PolicyKind parse_policy(std::string_view name)
    {
        if (name == "offline")
        {
            return PolicyKind::Offline;
        }
        if (name == "online")
        {
            return PolicyKind::Online;
        }
        if (name == "adaptive")
        {
            return PolicyKind::Adaptive;
        }
        throw ConfigError("unknown policy '" + std::string(name) +
                          "' (expected offline, online or adaptive)");
    }

    // ---------------------------------------------------------------------------
    // ExperimentConfig

    void ExperimentConfig::validate() const
    {
        if (window_path.has_value() == generator.has_value())
        {
            throw ConfigError("give exactly one of --window or --gen");
        }
        if (policies.empty())
        {
            throw ConfigError("no policy selected");
        }
        bool needs_c = false;
        bool adaptive = false;
        for (PolicyKind p : policies)
        {
            needs_c = needs_c || p != PolicyKind::Adaptive;
            adaptive = adaptive || p == PolicyKind::Adaptive;
        }
        if (needs_c && !contention)
        {
            throw ConfigError("offline and online policies require --C (an integer or 'auto')");
        }
        if (!needs_c && contention)
        {
            throw ConfigError("the adaptive policy guesses C itself; --C is not accepted");
        }
        if (contention && *contention != "auto")
        {
            parse_number<std::size_t>(*contention, "--C");
        }
        if (frame_length && (!adaptive || *frame_length < 1))
        {
            throw ConfigError("--frame-length applies to the adaptive policy and must be >= 1");
        }
        if (trials < 1)
        {
            throw ConfigError("--trials must be >= 1");
        }
        if (envelope != "none" && envelope != "theory")
        {
            parse_number<Step>(envelope, "--envelope");
        }
    }

    WindowSpec ExperimentConfig::window_for(Seed s) const
    {
        if (window_path)
        {
            return load_window(*window_path);
        }
        return generate_window(generator->threads, generator->columns, generator->model, s);
    }

    std::string ExperimentConfig::workload_label() const
    {
        return window_path ? window_path->filename().string() : generator->text;
    }

    std::unique_ptr<SchedulerPolicy> ExperimentConfig::make_policy(PolicyKind kind,
                                                                   const WindowSpec &window) const
    {
        std::size_t c = 0;
        if (contention)
        {
            c = *contention == "auto" ? window.congestion()
                                      : parse_number<std::size_t>(*contention, "--C");
        }
        switch (kind)
        {
        case PolicyKind::Offline:
            return std::make_unique<OfflineGreedy>(c, mis_order);
        case PolicyKind::Online:
            return std::make_unique<OnlineGreedy>(c);
        case PolicyKind::Adaptive:
            return std::make_unique<AdaptiveGreedy>(AdaptiveOptions{frame_length});
        }
        throw ConfigError("unknown policy");
    }

    namespace
    {
        ordered_json config_json(const ExperimentConfig &cfg, std::string_view command)
        {
            ordered_json j;
            j["command"] = command;
            if (cfg.window_path)
            {
                j["window"] = cfg.window_path->string();
            }
            if (cfg.generator)
            {
                j["gen"] = cfg.generator->text;
            }
            ordered_json policies = ordered_json::array();
            for (PolicyKind p : cfg.policies)
            {
                policies.push_back(to_string(p));
            }
            j["policy"] = policies;
            j["C"] = cfg.contention ? ordered_json(*cfg.contention) : ordered_json(nullptr);
            j["trials"] = cfg.trials;
            j["seed"] = cfg.seed;
            j["envelope"] = cfg.envelope;
            j["out_dir"] = cfg.out_dir.string();
            j["per_trial"] = cfg.per_trial;
            j["mis_order"] = cfg.mis_order == MisOrder::Random ? "random" : "lex";
            j["frame_length"] = cfg.frame_length ? ordered_json(*cfg.frame_length) : ordered_json(nullptr);
            return j;
        }

        int cmd_gen(const GeneratorSpec &spec, Seed seed, const std::filesystem::path &path,
                    std::ostream &out)
        {
            const WindowSpec w = generate_window(spec.threads, spec.columns, spec.model, seed);
            auto file = open_out(path);
            write_window(file, w);
            out << "M=" << w.threads() << " N=" << w.columns() << " C=" << w.congestion()
                << " edges=" << w.conflicts().edge_count() << '\n';
            return kOk;
        }

        void write_trace_files(const std::filesystem::path &dir, const ExecutionTrace &trace)
        {
            auto events = open_out(dir / "trace.csv");
            write_trace_csv(events, trace);
            auto txs = open_out(dir / "transactions.csv");
            write_transactions_csv(txs, trace);
        }

        int cmd_run(const ExperimentConfig &cfg, std::ostream &out)
        {
            if (cfg.policies.size() != 1)
            {
                throw ConfigError("run takes exactly one policy");
            }
            const WindowSpec window = cfg.window_for(cfg.seed);
            auto policy = cfg.make_policy(cfg.policies.front(), window);

            ExecutionTrace trace;
            try
            {
                trace = run(window, *policy, cfg.seed);
            }
            catch (const LivelockError &e)
            {
                write_trace_files(cfg.out_dir, e.partial());
                throw;
            }
            write_trace_files(cfg.out_dir, trace);

            const RunStats stats = run_stats(trace);
            ordered_json j;
            j["config"] = config_json(cfg, "run");
            j["policy"] = policy->name();
            j["M"] = window.threads();
            j["N"] = window.columns();
            j["congestion"] = window.congestion();
            j["edges"] = window.conflicts().edge_count();
            j["makespan"] = stats.makespan;
            j["aborts"] = stats.aborts;
            j["frame_misses"] = stats.frame_misses;
            j["mean_response"] = stats.mean_response();
            j["envelope"] = policy->makespan_envelope() ? ordered_json(*policy->makespan_envelope())
                                                        : ordered_json(nullptr);
            if (const auto *off = dynamic_cast<const OfflineGreedy *>(policy.get()))
            {
                j["phi"] = off->params().phi;
                j["alpha"] = off->params().alpha;
            }
            else if (const auto *on = dynamic_cast<const OnlineGreedy *>(policy.get()))
            {
                j["phi"] = on->params().phi;
                j["alpha"] = on->params().alpha;
            }
            else if (const auto *ad = dynamic_cast<const AdaptiveGreedy *>(policy.get()))
            {
                j["phi"] = ad->frame_length();
                ordered_json est = ordered_json::array();
                for (const auto &t : ad->threads())
                {
                    est.push_back(t.estimate);
                }
                j["final_estimates"] = est;
                j["doublings"] = stats.doublings;
            }
            j["diagnostics"] = trace.diagnostics;
            auto file = open_out(cfg.out_dir / "stats.json");
            file << j.dump(2) << '\n';

            out << "policy=" << policy->name() << " makespan=" << stats.makespan
                << " aborts=" << stats.aborts << " frame_misses=" << stats.frame_misses << '\n';
            return kOk;
        }

        int cmd_sweep(const ExperimentConfig &cfg, std::ostream &out)
        {
            std::optional<WindowSpec> fixed;
            if (cfg.window_path)
            {
                fixed = load_window(*cfg.window_path);
            }
            const WindowSource source = [&](Seed s) { return fixed ? *fixed : cfg.window_for(s); };

            MonteCarloOptions opts;
            opts.trials = cfg.trials;
            opts.root_seed = cfg.seed;
            opts.workers = cfg.workers;
            if (cfg.envelope == "theory")
            {
                opts.envelope = EnvelopeMode::Theory;
            }
            else if (cfg.envelope != "none")
            {
                opts.envelope = EnvelopeMode::Fixed;
                opts.fixed_envelope = parse_number<Step>(cfg.envelope, "--envelope");
            }

            std::map<PolicyKind, MonteCarloSummary> results;
            std::ostringstream summary;
            write_summary_header(summary);
            for (PolicyKind kind : cfg.policies)
            {
                const PolicyFactory factory = [&cfg, kind](const WindowSpec &w) {
                    return cfg.make_policy(kind, w);
                };
                MonteCarloSummary s = monte_carlo(source, factory, opts);
                if (s.policy.empty())
                {
                    s.policy = std::string(to_string(kind));
                }
                write_summary_row(summary, s);
                if (cfg.per_trial)
                {
                    auto file = open_out(cfg.out_dir / ("per_trial_" + s.policy + ".csv"));
                    write_per_trial_csv(file, s);
                }
                results.emplace(kind, std::move(s));
            }
            {
                auto file = open_out(cfg.out_dir / "summary.csv");
                file << summary.str();
            }
            out << summary.str();

            {
                auto file = open_out(cfg.out_dir / "by_column.csv");
                file << "policy,column,mean_response,frame_miss_rate\n";
                for (PolicyKind kind : cfg.policies)
                {
                    const auto &s = results.at(kind);
                    for (std::size_t j = 0; j < s.mean_response_by_column.size(); ++j)
                    {
                        file << s.policy << ',' << (j + 1) << ',' << fixed6(s.mean_response_by_column[j])
                             << ',' << fixed6(s.frame_miss_rate_by_column[j]) << '\n';
                    }
                }
            }

            bool errors = false;
            for (const auto &[kind, s] : results)
            {
                errors = errors || s.errors > 0;
            }

            if (results.contains(PolicyKind::Offline) && results.contains(PolicyKind::Online))
            {
                const auto &off = results.at(PolicyKind::Offline).per_trial;
                const auto &on = results.at(PolicyKind::Online).per_trial;
                double ratio_sum = 0.0;
                double ratio_max = 0.0;
                double off_sum = 0.0;
                double on_sum = 0.0;
                std::size_t paired = 0;
                for (std::size_t k = 0; k < off.size(); ++k)
                {
                    if (!off[k].stats || !on[k].stats)
                    {
                        continue;
                    }
                    const double a = static_cast<double>(off[k].stats->makespan);
                    const double b = static_cast<double>(on[k].stats->makespan);
                    ratio_sum += b / a;
                    ratio_max = std::max(ratio_max, b / a);
                    off_sum += a;
                    on_sum += b;
                    ++paired;
                }
                auto file = open_out(cfg.out_dir / "ratios.csv");
                file << "workload,trials,mean_offline_makespan,mean_online_makespan,mean_ratio,"
                        "max_ratio\n";
                const double n = paired ? static_cast<double>(paired) : 1.0;
                file << '"' << cfg.workload_label() << "\"," << paired << ',' << fixed6(off_sum / n) << ','
                     << fixed6(on_sum / n) << ',' << fixed6(ratio_sum / n) << ','
                     << fixed6(ratio_max) << '\n';
                out << "online/offline makespan ratio: mean=" << fixed6(ratio_sum / n)
                    << " max=" << fixed6(ratio_max) << " over " << paired << " paired trials\n";
            }
            return errors ? kUnexpected : kOk;
        }

        int cmd_decompose(const ExperimentConfig &cfg, bool json_stdout, std::ostream &out)
        {
            const WindowSpec window = cfg.window_for(cfg.seed);
            const Decomposition d = optimal_decomposition(window);
            const Density whole = subwindow_density(window, 1, window.columns());

            ordered_json j;
            j["M"] = window.threads();
            j["N"] = window.columns();
            j["cuts"] = d.cuts();
            ordered_json parts = ordered_json::array();
            for (const SubWindow &p : d.parts)
            {
                parts.push_back({{"first", p.first},
                                 {"last", p.last},
                                 {"X", p.width()},
                                 {"C", p.contention},
                                 {"r", txwin::to_string(p.density)}});
            }
            j["subwindows"] = parts;
            j["r_star"] = txwin::to_string(d.max_density);
            j["r_whole"] = txwin::to_string(whole);
            auto file = open_out(cfg.out_dir / "decomposition.json");
            file << j.dump(2) << '\n';

            if (json_stdout)
            {
                out << j.dump(2) << '\n';
                return kOk;
            }
            out << "window " << window.threads() << "x" << window.columns()
                << "  whole-window r = " << txwin::to_string(whole) << "  optimal r* = "
                << txwin::to_string(d.max_density) << '\n';
            out << "columns     X     C     r\n";
            for (const SubWindow &p : d.parts)
            {
                char buf[128];
                std::snprintf(buf, sizeof buf, "%3d..%-3d %4d %5zu     %s\n", p.first, p.last,
                              p.width(), p.contention, txwin::to_string(p.density).c_str());
                out << buf;
            }
            return kOk;
        }
    } // namespace

    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Window-based greedy contention management simulator", "txwin"};
        app.require_subcommand(1);
        app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");

        ExperimentConfig cfg;
        std::optional<std::string> window_path;
        std::optional<std::string> gen_text;
        std::string policy_text;
        std::string mis_text = "lex";
        std::string out_file;
        bool json_stdout = false;

        auto add_source = [&](CLI::App *sub) {
            sub->add_option("--window", window_path, "window file");
            sub->add_option("--gen", gen_text, "generator spec, e.g. capped:8x8:C=4,p=0.2");
            sub->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
        };
        auto add_out_dir = [&](CLI::App *sub) {
            sub->add_option("--out-dir", cfg.out_dir, "output directory")
                ->envname("TXWIN_OUT_DIR")
                ->capture_default_str();
        };
        auto add_policy = [&](CLI::App *sub, const char *help) {
            sub->add_option("--policy", policy_text, help)->required();
            sub->add_option("--C", cfg.contention, "contention bound for offline/online, or 'auto'");
            sub->add_option("--mis-order", mis_text, "MIS scan order for offline: lex or random")
                ->capture_default_str();
            sub->add_option("--frame-length", cfg.frame_length, "adaptive frame length override");
        };

        CLI::App *gen = app.add_subcommand("gen", "generate a window file");
        gen->add_option("--gen", gen_text, "generator spec")->required();
        gen->add_option("--seed", cfg.seed, "seed")->capture_default_str();
        gen->add_option("--out", out_file, "output window file")->required();

        CLI::App *run_cmd = app.add_subcommand("run", "execute one window under one policy");
        add_source(run_cmd);
        add_out_dir(run_cmd);
        add_policy(run_cmd, "offline, online or adaptive");

        CLI::App *sweep = app.add_subcommand("sweep", "Monte Carlo sweep over seeds");
        add_source(sweep);
        add_out_dir(sweep);
        add_policy(sweep, "comma-separated policies");
        sweep->add_option("--trials", cfg.trials, "number of trials")->capture_default_str();
        sweep->add_option("--envelope", cfg.envelope, "none, theory or a step count")
            ->capture_default_str();
        sweep->add_flag("--per-trial", cfg.per_trial, "also write per-trial rows");
        sweep->add_option("--workers", cfg.workers, "parallel trial workers")->capture_default_str();

        CLI::App *decompose = app.add_subcommand("decompose", "optimal column decomposition");
        add_source(decompose);
        add_out_dir(decompose);
        decompose->add_flag("--json", json_stdout, "print the JSON report instead of a table");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &e)
        {
            return app.exit(e, out, err);
        }
        catch (const CLI::ParseError &e)
        {
            app.exit(e, out, err);
            return kConfigError;
        }

        try
        {
            if (window_path)
            {
                cfg.window_path = *window_path;
            }
            if (gen_text)
            {
                cfg.generator = parse_generator_spec(*gen_text);
            }

            if (*gen)
            {
                return cmd_gen(*cfg.generator, cfg.seed, out_file, out);
            }

            if (*decompose)
            {
                cfg.policies = {PolicyKind::Offline};
                cfg.contention = "auto";
                cfg.validate();
                return cmd_decompose(cfg, json_stdout, out);
            }

            for (const auto &name : split(policy_text, ','))
            {
                cfg.policies.push_back(parse_policy(name));
            }
            if (mis_text == "random")
            {
                cfg.mis_order = MisOrder::Random;
            }
            else if (mis_text != "lex")
            {
                throw ConfigError("--mis-order must be lex or random");
            }
            cfg.validate();
            if (*run_cmd)
            {
                return cmd_run(cfg, out);
            }
            return cmd_sweep(cfg, out);
        }
        catch (const ConfigError &e)
        {
            err << "config error: " << e.what() << '\n';
            return kConfigError;
        }
        catch (const LivelockError &e)
        {
            err << "livelock: " << e.what() << '\n';
            return kLivelock;
        }
        catch (const ContractViolation &e)
        {
            err << "contract violation: " << e.what() << '\n';
            return kContractViolation;
        }
        catch (const GenerationError &e)
        {
            err << "generation error: " << e.what() << '\n';
            return kGenerationError;
        }
        catch (const InstanceError &e)
        {
            err << "instance error: " << e.what() << '\n';
            return kInstanceError;
        }
        catch (const RefusalError &e)
        {
            err << "instance error: " << e.what() << '\n';
            return kInstanceError;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << '\n';
            return kUnexpected;
        }
    }
} // namespace txwin::cli
