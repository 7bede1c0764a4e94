#pragma once

#include <cstdint>
#include <vector>

namespace pirlab {

// C(n, k); throws ParameterError if the value does not fit in 64 bits.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Checked integer power; throws ParameterError on overflow.
std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp);

// All k-subsets of {1, ..., n} in lexicographic order, each sorted ascending.
std::vector<std::vector<int>> k_subsets(int n, int k);

}  // namespace pirlab
