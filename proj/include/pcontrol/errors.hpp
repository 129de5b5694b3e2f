#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pcontrol {

// Base of every error raised by the library. `code()` is a short stable token
// used by the CLI diagnostic line.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error("invalid-input", msg) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& msg) : Error("invalid-config", msg) {}
};

class NoSafeSet : public Error {
public:
    explicit NoSafeSet(const std::string& msg) : Error("no-safe-set", msg) {}
};

class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t line)
        : Error("format", "line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Raised when the value iteration hits its iteration cap. Carries the last
// iterate so callers can inspect how far it got.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& msg, std::vector<double> last, double residual, int iterations)
        : Error("non-convergence", msg),
          last_(std::move(last)),
          residual_(residual),
          iterations_(iterations) {}
    const std::vector<double>& last_iterate() const noexcept { return last_; }
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    std::vector<double> last_;
    double residual_;
    int iterations_;
};

// Controller invariant broken at runtime (e.g. an orbit that never reaches the
// safe set within the step budget).
class ControllerFailure : public Error {
public:
    explicit ControllerFailure(const std::string& msg) : Error("controller", msg) {}
};

}  // namespace pcontrol
