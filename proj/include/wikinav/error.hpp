#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wikinav {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in wikinav" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedInput : public Error {
public:
    MalformedInput(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

// Iterative solver gave up. Carries the last iterate so callers can inspect it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate = {})
        : Error(what), last_iterate_(std::move(last_iterate)) {}
    const std::vector<double>& last_iterate() const { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

class SeparationError : public Error {
public:
    using Error::Error;
};

class SingularHessianError : public Error {
public:
    SingularHessianError(const std::string& what, std::vector<std::string> columns)
        : Error(what), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const { return columns_; }

private:
    std::vector<std::string> columns_;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class SupportError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class DependencyError : public Error {
public:
    DependencyError(const std::string& what, std::string producer)
        : Error(what), producer_(std::move(producer)) {}
    const std::string& producer() const { return producer_; }

private:
    std::string producer_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out = "invalid configuration:";
        for (const auto& s : p) out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> problems_;
};

} // namespace wikinav
