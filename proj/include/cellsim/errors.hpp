#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cellsim {

// Exit-code families used by the CLI: validation 2, numerical 3, I/O 4.

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::runtime_error {
    std::vector<std::string> fields;
    explicit ValidationError(std::vector<std::string> f);
    static std::string join(const std::vector<std::string>& f);
};

struct NumericalError : std::runtime_error {
    double last_iterate = 0.0;
    explicit NumericalError(const std::string& what, double last = 0.0)
        : std::runtime_error(what), last_iterate(last) {}
};

struct RangeError : NumericalError {
    using NumericalError::NumericalError;
};

struct MetricError : NumericalError {
    using NumericalError::NumericalError;
};

struct FitError : NumericalError {
    using NumericalError::NumericalError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : IoError {
    std::size_t line = 0;
    ParseError(const std::string& what, std::size_t line_no)
        : IoError("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

inline ValidationError::ValidationError(std::vector<std::string> f)
    : std::runtime_error(join(f)), fields(std::move(f)) {}

inline std::string ValidationError::join(const std::vector<std::string>& f)
{
    std::string s = "invalid configuration:";
    for (const auto& x : f) s += "\n  " + x;
    return s;
}

}  // namespace cellsim
