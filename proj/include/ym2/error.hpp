#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ym2 {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed call: label arity mismatch, invalid factor tag, bad argument.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Invalid numeric parameter (out of its documented domain).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A computation would exceed a configured cap (enumeration size, cutoff).
class ResourceError : public Error {
public:
    ResourceError(const std::string& what, double needed)
        : Error(what), needed_(needed) {}

    double needed() const noexcept { return needed_; }

private:
    double needed_;
};

/// Numerical precision could not be certified (integrator error too large).
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// Truncation tolerance too loose for the requested operation.
class ToleranceError : public Error {
public:
    using Error::Error;
};

/// Machine-readable validation codes for input documents.
enum class ErrorCode { E_AREA, E_SUM, E_MULT, E_GROUP, E_SYNTAX };

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::E_AREA: return "E_AREA";
    case ErrorCode::E_SUM: return "E_SUM";
    case ErrorCode::E_MULT: return "E_MULT";
    case ErrorCode::E_GROUP: return "E_GROUP";
    case ErrorCode::E_SYNTAX: return "E_SYNTAX";
    }
    return "E_SYNTAX";
}

struct Diagnostic {
    ErrorCode code;
    std::string path;  // JSON pointer into the document
    std::string message;

    std::string format() const {
        return std::string(to_string(code)) + " " + (path.empty() ? "/" : path) + ": " + message;
    }
};

/// One or more input validation failures, each with a document path.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics)
        : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

    ValidationError(ErrorCode code, std::string path, std::string message)
        : ValidationError(std::vector<Diagnostic>{{code, std::move(path), std::move(message)}}) {}

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    static std::string join(const std::vector<Diagnostic>& ds) {
        std::string out;
        for (const auto& d : ds) {
            if (!out.empty()) out += '\n';
            out += d.format();
        }
        return out;
    }

    std::vector<Diagnostic> diagnostics_;
};

}  // namespace ym2
