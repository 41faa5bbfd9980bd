#pragma once

#include "txwin/core_model.hpp"
#include "txwin/engine.hpp"
#include "txwin/offline.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace txwin::cli
{
    // Process exit codes. Stable: scripts depend on them.
    enum ExitCode : int
    {
        kOk = 0,
        kUnexpected = 1,
        kConfigError = 2,
        kLivelock = 3,
        kContractViolation = 4,
        kInstanceError = 5,
        kGenerationError = 6,
    };

    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // "<model>:<M>x<N>[:key=value,...]", e.g. "capped:16x16:C=8,p=0.1",
    // "objects:4x4:s=8,r=0.3,w=0.1", "clustered:8x8:intra=0.4,inter=0.02".
    struct GeneratorSpec
    {
        int threads = 1;
        int columns = 1;
        WorkloadModel model;
        std::string text;
    };

    GeneratorSpec parse_generator_spec(std::string_view text);

    enum class PolicyKind
    {
        Offline,
        Online,
        Adaptive,
    };

    std::string_view to_string(PolicyKind kind);
    PolicyKind parse_policy(std::string_view name);

    struct ExperimentConfig
    {
        std::optional<std::filesystem::path> window_path;
        std::optional<GeneratorSpec> generator;
        std::vector<PolicyKind> policies;
        std::optional<std::string> contention; // integer or "auto"; offline/online only
        std::size_t trials = 1;
        Seed seed = 1;
        std::string envelope = "none"; // none | theory | <steps>
        std::filesystem::path out_dir = "out";
        bool per_trial = false;
        MisOrder mis_order = MisOrder::Lexicographic;
        std::optional<Step> frame_length; // adaptive frame override
        unsigned workers = 1;

        // Throws ConfigError.
        void validate() const;

        // Source of the window for a given trial seed.
        WindowSpec window_for(Seed seed) const;
        std::string workload_label() const;

        // Policy for `kind` on `window`; C = "auto" resolves to the window's congestion.
        std::unique_ptr<SchedulerPolicy> make_policy(PolicyKind kind, const WindowSpec &window) const;
    };

    // Entry point shared by the executable and the tests.
    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
} // namespace txwin::cli
