#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multiway {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on shapes, modes, ranks or other arguments was violated.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data. Carries optional file/line context.
class DataError : public Error {
public:
    explicit DataError(const std::string& what, std::string source = {}, std::size_t line = 0)
        : Error(format(what, source, line)), source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& what, const std::string& source, std::size_t line) {
        if (source.empty() && line == 0) return what;
        std::string prefix = source.empty() ? std::string("<input>") : source;
        if (line > 0) prefix += ":" + std::to_string(line);
        return prefix + ": " + what;
    }

    std::string source_;
    std::size_t line_ = 0;
};

/// Requested materialization would exceed the configured memory budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed (e.g. all-zero input where a norm is required).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace multiway
