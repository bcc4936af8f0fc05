#pragma once

#include <stdexcept>
#include <string>

namespace pinnhs {

// Error taxonomy shared by all modules. Every class carries a stable
// `kind()` tag so the CLI can emit machine-readable error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct UnboundVariableError : Error {
    explicit UnboundVariableError(const std::string& msg) : Error("unbound_variable", msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error("numeric_overflow", msg) {}
};

struct NonDifferentiableError : Error {
    explicit NonDifferentiableError(const std::string& msg) : Error("non_differentiable", msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("configuration", msg) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error("schema", msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error("validation", msg) {}
};

struct RegionError : Error {
    explicit RegionError(const std::string& msg) : Error("region", msg) {}
};

struct GeometryError : Error {
    explicit GeometryError(const std::string& msg) : Error("geometry", msg) {}
};

struct SamplingError : Error {
    explicit SamplingError(const std::string& msg) : Error("sampling", msg) {}
};

struct DivergenceError : Error {
    explicit DivergenceError(const std::string& msg) : Error("divergence", msg) {}
};

struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error("solver", msg) {}
};

struct UnphysicalError : Error {
    explicit UnphysicalError(const std::string& msg) : Error("unphysical_result", msg) {}
};

struct RangeError : Error {
    explicit RangeError(const std::string& msg) : Error("range", msg) {}
};

}  // namespace pinnhs
