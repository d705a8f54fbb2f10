#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind {
    config,      // exit 2
    data,        // exit 3
    divergence,  // exit 4
    runtime,     // exit 1
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct PartitionError : Error {
    explicit PartitionError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct EvaluationError : Error {
    explicit EvaluationError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct DivergenceError : Error {
    explicit DivergenceError(const std::string& what) : Error(ErrorKind::divergence, what) {}
};

struct AggregationError : Error {
    explicit AggregationError(const std::string& what) : Error(ErrorKind::runtime, what) {}
};

struct StateError : Error {
    explicit StateError(const std::string& what) : Error(ErrorKind::runtime, what) {}
};

struct DiagnosticsError : Error {
    explicit DiagnosticsError(const std::string& what) : Error(ErrorKind::runtime, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::runtime, what) {}
};

inline int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::divergence: return 4;
    case ErrorKind::runtime: return 1;
    }
    return 1;
}

} // namespace fedsim
