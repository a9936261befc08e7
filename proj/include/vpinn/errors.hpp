#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vpinn {

/// Invalid configuration: bad shapes, out-of-range indices, incompatible options.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A closed-form denominator (w^2 - k^2 pi^2 or a Burgers pair term) is within
/// the singularity guard of zero.
class SingularFrequency : public std::domain_error {
public:
    SingularFrequency(std::size_t neuron_i, std::size_t neuron_j, int k, double denominator);

    std::size_t neuron_i() const noexcept { return i_; }
    std::size_t neuron_j() const noexcept { return j_; }
    int test_index() const noexcept { return k_; }

private:
    std::size_t i_;
    std::size_t j_;
    int k_;
};

/// A gradient or intermediate value became NaN/Inf.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& where, std::size_t parameter_index);

    std::size_t parameter_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Numerical routine failed in a way that should not happen for valid input.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// Error metrics requested for a problem without an exact solution.
class MetricUnavailable : public std::runtime_error {
public:
    explicit MetricUnavailable(const std::string& what) : std::runtime_error(what) {}
};

/// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Every seed of a multi-seed run diverged.
class AllSeedsDiverged : public std::runtime_error {
public:
    explicit AllSeedsDiverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vpinn
