#include "vpinn/errors.hpp"

#include <fmt/format.h>

namespace vpinn {

SingularFrequency::SingularFrequency(std::size_t neuron_i, std::size_t neuron_j, int k,
                                     double denominator)
    : std::domain_error(fmt::format(
          "singular frequency: neurons ({}, {}), test index k={}, denominator {:.3e}", neuron_i,
          neuron_j, k, denominator)),
      i_(neuron_i),
      j_(neuron_j),
      k_(k) {}

NonFiniteError::NonFiniteError(const std::string& where, std::size_t parameter_index)
    : std::runtime_error(
          fmt::format("non-finite value in {} at parameter index {}", where, parameter_index)),
      index_(parameter_index) {}

}  // namespace vpinn
