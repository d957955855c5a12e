#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace normid {

// Every failure mode the library can signal carries a stable process exit
// code so the command line tool can report it distinctly.
class Error : public std::runtime_error {
public:
    Error(std::string message, int exit_code)
        : std::runtime_error(message), message_(std::move(message)), exit_code_(exit_code) {}

    int exit_code() const noexcept { return exit_code_; }

    const char* what() const noexcept override { return message_.c_str(); }

    // Prepends context (file name, run index, ...) while keeping the
    // concrete exception type, so callers can annotate and rethrow.
    void add_context(const std::string& context) {
        message_ = context + ": " + message_;
    }

private:
    std::string message_;
    int exit_code_;
};

struct NoParseError : Error {
    explicit NoParseError(std::string m) : Error(std::move(m), 2) {}
};

struct DepthCapError : Error {
    explicit DepthCapError(std::string m) : Error(std::move(m), 3) {}
};

struct GroundingExplosionError : Error {
    explicit GroundingExplosionError(std::string m) : Error(std::move(m), 4) {}
};

struct NoCompliantPlanError : Error {
    explicit NoCompliantPlanError(std::string m) : Error(std::move(m), 5) {}
};

struct InvalidThresholdError : Error {
    explicit InvalidThresholdError(std::string m) : Error(std::move(m), 6) {}
};

struct IoError : Error {
    explicit IoError(std::string m) : Error(std::move(m), 7) {}
};

struct StateMismatchError : Error {
    explicit StateMismatchError(std::string m) : Error(std::move(m), 8) {}
};

struct EmptyGrammarError : Error {
    explicit EmptyGrammarError(std::string m) : Error(std::move(m), 9) {}
};

struct DomainError : Error {
    explicit DomainError(std::string m) : Error(std::move(m), 10) {}
};

} // namespace normid
