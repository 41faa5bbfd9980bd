#pragma once

#include <stdexcept>
#include <string>

namespace txwin
{
    // Malformed or inconsistent problem instance (bad ids, bad ranges, bad files).
    class InstanceError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // A workload generator could not satisfy its parameters.
    class GenerationError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // A scheduler policy broke the engine contract (e.g. a dependent commit set).
    class ContractViolation : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    // An exhaustive oracle was asked to solve an instance above its size limit.
    class RefusalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
} // namespace txwin
