#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace girsanov {

// Non-finite value produced by a coefficient or integrator; carries the grid
// node where it appeared.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t node)
        : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

// The supplied coefficients violate a model hypothesis, e.g. the linear
// system sigma*gamma = b - a is unsolvable at some node.
class ModelError : public std::runtime_error {
public:
    ModelError(const std::string& what, std::size_t node)
        : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

// Operation requires a model shape we do not support (e.g. a path-dependent
// diffusion where a time-only one is assumed).
class UnsupportedModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Nonlinearity has a nonzero component on a mode with zero noise, so it
// cannot be represented through the noise covariance.
class RangeConditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A diagnostic's own hypotheses fail; the main machinery may still apply.
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, const std::string& key)
        : std::runtime_error(what + " [key: " + key + "]"), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace girsanov
