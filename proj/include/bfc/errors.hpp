#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bfc {

/// Input or configuration violates a documented invariant. Maps to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure while executing a pipeline stage (I/O, numerical breakdown). Maps to exit code 2.
class RuntimeError : public std::runtime_error {
public:
    RuntimeError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace bfc
