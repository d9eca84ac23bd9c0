#pragma once

#include <stdexcept>
#include <string>

namespace fdsc {

// Base error type. `kind` is a stable machine-readable tag used by the CLI
// error record; `key` optionally names the offending input (config key,
// variable name, controller name).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message, std::string key = {})
        : std::runtime_error(message), kind_(std::move(kind)), key_(std::move(key)) {}

    const std::string& kind() const noexcept { return kind_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::string kind_;
    std::string key_;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& message, std::string key = {})
        : Error("dimension_mismatch", message, std::move(key)) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& message, std::string key = {})
        : Error("invalid_argument", message, std::move(key)) {}
};

struct SingularResolvent : Error {
    explicit SingularResolvent(const std::string& message) : Error("singular_resolvent", message) {}
};

struct SimulationDiverged : Error {
    SimulationDiverged(const std::string& message, double time)
        : Error("simulation_diverged", message), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct ConfigError : Error {
    ConfigError(const std::string& message, std::string key) : Error("config_error", message, std::move(key)) {}
};

}  // namespace fdsc
