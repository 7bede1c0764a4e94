#include "pirlab/combinatorics.hpp"

#include <limits>
#include <string>

#include "pirlab/errors.hpp"

namespace pirlab {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  u128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw ParameterError("C(" + std::to_string(n) + "," + std::to_string(k) +
                           ") overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  u128 result = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    result *= base;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw ParameterError(std::to_string(base) + "^" + std::to_string(exp) +
                           " overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(result);
}

std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> current(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) current[static_cast<std::size_t>(i)] = i + 1;
  while (true) {
    out.push_back(current);
    int i = k - 1;
    while (i >= 0 && current[static_cast<std::size_t>(i)] == n - k + i + 1) --i;
    if (i < 0) break;
    ++current[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace pirlab
