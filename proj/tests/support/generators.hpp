#pragma once

// Seeded generators and brute-force oracles shared by the unit tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "pirlab/linalg.hpp"
#include "pirlab/plan.hpp"

namespace pirlab::testing {

// Every (N, K, T) with T + K <= N and N <= max_n.
inline std::vector<std::tuple<int, int, int>> regime_triples(int max_n) {
  std::vector<std::tuple<int, int, int>> out;
  for (int n = 2; n <= max_n; ++n)
    for (int k = 1; k < n; ++k)
      for (int t = 1; t + k <= n; ++t) out.emplace_back(n, k, t);
  return out;
}

// Plain trial-division primality, independent of the library's Miller-Rabin.
inline bool naive_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Determinant by cofactor expansion; fine for n <= 5.
inline std::int64_t det_mod(const std::vector<std::vector<std::int64_t>>& a, std::int64_t q) {
  const std::size_t n = a.size();
  if (n == 1) return ((a[0][0] % q) + q) % q;
  std::int64_t total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<std::int64_t>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<std::int64_t> row;
      for (std::size_t j = 0; j < n; ++j)
        if (j != c) row.push_back(a[r][j]);
      minor.push_back(row);
    }
    const std::int64_t sign = (c % 2 == 0) ? 1 : q - 1;
    total = (total + sign * (((a[0][c] % q) + q) % q) % q * det_mod(minor, q)) % q;
  }
  return total;
}

// Rank by trying every square minor, largest first. Tiny matrices only.
inline std::size_t brute_rank(const FieldMatrix& m) {
  const std::size_t limit = std::min(m.rows(), m.cols());
  const auto q = static_cast<std::int64_t>(m.field().modulus());
  for (std::size_t r = limit; r > 0; --r) {
    std::vector<std::size_t> rs(r), cs(r);
    // Enumerate r-subsets of rows and columns by bitmask.
    for (std::uint32_t rm = 0; rm < (1u << m.rows()); ++rm) {
      if (static_cast<std::size_t>(__builtin_popcount(rm)) != r) continue;
      for (std::uint32_t cm = 0; cm < (1u << m.cols()); ++cm) {
        if (static_cast<std::size_t>(__builtin_popcount(cm)) != r) continue;
        std::vector<std::vector<std::int64_t>> sub;
        for (std::size_t i = 0; i < m.rows(); ++i) {
          if (!(rm >> i & 1u)) continue;
          std::vector<std::int64_t> row;
          for (std::size_t j = 0; j < m.cols(); ++j)
            if (cm >> j & 1u) row.push_back(m(i, j));
          sub.push_back(row);
        }
        if (det_mod(sub, q) != 0) return r;
      }
    }
  }
  return 0;
}

inline FieldMatrix random_low_rank(const PrimeField& f, std::size_t rows, std::size_t cols, std::size_t r,
                                   Rng& rng) {
  return random_matrix(f, rows, r, rng) * random_matrix(f, r, cols, rng);
}

}  // namespace pirlab::testing
