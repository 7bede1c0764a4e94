#include "pirlab/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "pirlab/errors.hpp"

namespace pirlab {

namespace {

// Number of unreduced multiply-adds of (q-1)^2 that fit on top of a reduced
// value in a Word.
template <typename Word>
std::uint64_t accumulation_budget(std::uint32_t q) {
  const std::uint64_t step = std::uint64_t{q - 1} * (q - 1);
  const std::uint64_t top = std::numeric_limits<Word>::max();
  if (step == 0) return std::numeric_limits<std::uint64_t>::max();
  if (top < q + step) return 0;
  return (top - q) / step;
}

// Row-major working copy with lazily reduced entries. Every row remembers
// how many multiply-adds it has absorbed since its last reduction.
template <typename Word>
struct Workspace {
  std::size_t rows;
  std::size_t cols;
  std::uint32_t q;
  std::uint64_t budget;
  std::vector<Word> a;
  std::vector<std::uint64_t> pending;

  Workspace(const PrimeField& field, std::size_t r, std::size_t c)
      : rows(r), cols(c), q(field.modulus()), budget(accumulation_budget<Word>(q)),
        a(r * c, 0), pending(r, 0) {}

  Word* row(std::size_t r) { return a.data() + r * cols; }

  void reduce_row(std::size_t r, std::size_t from) {
    Word* p = row(r);
    for (std::size_t j = from; j < cols; ++j) p[j] %= q;
    pending[r] = 0;
  }

  void swap_rows(std::size_t x, std::size_t y) {
    if (x == y) return;
    std::swap_ranges(row(x), row(x) + cols, row(y));
    std::swap(pending[x], pending[y]);
  }
};

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define PIRLAB_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define PIRLAB_CLONES
#endif

// dst[j] += sum_i f[i] * u[i * stride + j] for j < len, four sources at a time
// so dst streams through once per four pivots.
template <typename Word>
PIRLAB_CLONES void multi_axpy(Word* __restrict dst, const Word* __restrict u, std::size_t stride,
                              const Word* __restrict f, std::size_t count, std::size_t len) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const Word f0 = f[i], f1 = f[i + 1], f2 = f[i + 2], f3 = f[i + 3];
    const Word* u0 = u + i * stride;
    const Word* u1 = u0 + stride;
    const Word* u2 = u1 + stride;
    const Word* u3 = u2 + stride;
    for (std::size_t j = 0; j < len; ++j) dst[j] += f0 * u0[j] + f1 * u1[j] + f2 * u2[j] + f3 * u3[j];
  }
  for (; i < count; ++i) {
    const Word fi = f[i];
    const Word* ui = u + i * stride;
    for (std::size_t j = 0; j < len; ++j) dst[j] += fi * ui[j];
  }
}

constexpr std::size_t kPanel = 64;

// Gaussian elimination with first-nonzero pivoting over columns
// [0, pivot_limit). With `jordan` the pivots are normalized to one and the
// entries above them cleared, giving the reduced row echelon form (without it
// pivots are still normalized, only the entries below are cleared). Returns
// the pivot columns; on exit every entry is reduced.
//
// Blocked: pivots are found one panel of columns at a time, and the panel's
// updates reach the columns to its right in a single pass per row.
template <typename Word>
std::vector<std::size_t> eliminate(Workspace<Word>& w, std::size_t pivot_limit, bool jordan) {
  const std::uint32_t q = w.q;
  const PrimeField field(q);
  const std::size_t rows = w.rows;
  const std::size_t cols = w.cols;
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;

  std::vector<Word> factor(rows * kPanel);  // factor[r * kPanel + i]: multiplier of panel pivot i
  std::vector<Word> u_rows(kPanel * cols);  // finalized pivot rows, trailing part
  std::vector<Residue> scale(kPanel);

  for (std::size_t c0 = 0; c0 < pivot_limit && rank < rows; c0 += kPanel) {
    const std::size_t c1 = std::min(c0 + kPanel, pivot_limit);
    const std::size_t first = rank;
    std::fill(factor.begin(), factor.end(), 0);

    // Panel: plain elimination restricted to columns [c0, c1). pending[r]
    // counts lazy steps anywhere in columns [c0, cols).
    std::size_t found = 0;
    for (std::size_t col = c0; col < c1 && rank < rows; ++col) {
      std::size_t sel = rows;
      for (std::size_t r = rank; r < rows; ++r) {
        if (w.row(r)[col] % q != 0) {
          sel = r;
          break;
        }
      }
      if (sel == rows) continue;
      if (sel != rank) {
        w.swap_rows(sel, rank);
        std::swap_ranges(factor.begin() + static_cast<std::ptrdiff_t>(sel * kPanel),
                         factor.begin() + static_cast<std::ptrdiff_t>((sel + 1) * kPanel),
                         factor.begin() + static_cast<std::ptrdiff_t>(rank * kPanel));
      }
      Word* prow = w.row(rank);
      const Residue s = field.inv(static_cast<Residue>(prow[col] % q));
      scale[found] = s;
      for (std::size_t j = col; j < c1; ++j) prow[j] = static_cast<Word>((std::uint64_t{prow[j] % q} * s) % q);
      for (std::size_t r = jordan ? 0 : rank + 1; r < rows; ++r) {
        if (r == rank) continue;
        Word* target = w.row(r);
        const Word lead = target[col] % q;
        target[col] = 0;
        if (lead == 0) continue;
        const Word f = static_cast<Word>(q - lead);
        factor[r * kPanel + found] = f;
        if (w.pending[r] >= w.budget) w.reduce_row(r, c0);
        for (std::size_t j = col + 1; j < c1; ++j) target[j] += f * prow[j];
        ++w.pending[r];
      }
      pivots.push_back(col);
      ++found;
      ++rank;
    }
    if (found == 0 || c1 == cols) continue;

    // Pivot rows in order: each absorbs the earlier pivots, then is scaled.
    const std::size_t tail = cols - c1;
    for (std::size_t i = 0; i < found; ++i) {
      const std::size_t r = first + i;
      Word* dst = w.row(r) + c1;
      std::uint64_t pending = w.pending[r];
      for (std::size_t k = 0; k < i; ++k) {
        const Word f = factor[r * kPanel + k];
        if (f == 0) continue;
        if (pending >= w.budget) {
          for (std::size_t j = 0; j < tail; ++j) dst[j] %= q;
          pending = 0;
        }
        multi_axpy(dst, u_rows.data() + k * tail, tail, &f, 1, tail);
        ++pending;
      }
      Word* u = u_rows.data() + i * tail;
      for (std::size_t j = 0; j < tail; ++j) u[j] = static_cast<Word>((std::uint64_t{dst[j] % q} * scale[i]) % q);
      std::copy(u, u + tail, dst);
      w.pending[r] = 0;
    }

    // Every other row takes all of the panel's pivots at once.
    for (std::size_t r = jordan ? 0 : first + found; r < rows; ++r) {
      if (r >= first && r < first + found) {
        // Earlier pivot rows of this panel (Jordan only) take the later pivots.
        const std::size_t i = r - first;
        Word* dst = w.row(r) + c1;
        for (std::size_t k = i + 1; k < found; ++k) {
          const Word f = factor[r * kPanel + k];
          if (f == 0) continue;
          if (w.pending[r] >= w.budget) w.reduce_row(r, c1);
          multi_axpy(dst, u_rows.data() + k * tail, tail, &f, 1, tail);
          ++w.pending[r];
        }
        continue;
      }
      const Word* f = factor.data() + r * kPanel;
      Word* dst = w.row(r) + c1;
      for (std::size_t k = 0; k < found;) {
        if (w.pending[r] >= w.budget) w.reduce_row(r, c1);
        const std::size_t room = static_cast<std::size_t>(std::min<std::uint64_t>(w.budget - w.pending[r], found - k));
        const std::size_t step = std::max<std::size_t>(room, 1);
        multi_axpy(dst, u_rows.data() + k * tail, tail, f + k, step, tail);
        w.pending[r] += step;
        k += step;
      }
    }
  }
  for (std::size_t r = 0; r < rows; ++r) w.reduce_row(r, 0);
  return pivots;
}

template <typename Word>
Workspace<Word> load(const FieldMatrix& m, std::size_t extra_cols = 0) {
  Workspace<Word> w(m.field(), m.rows(), m.cols() + extra_cols);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin(), src.end(), w.row(r));
  }
  return w;
}

template <typename Word>
struct WordTag {
  using type = Word;
};

// 32-bit accumulators halve the memory traffic; they are used whenever
// small q leaves room for a useful number of lazy steps.
template <typename Fn>
decltype(auto) with_word(std::uint32_t q, Fn&& fn) {
  if (accumulation_budget<std::uint32_t>(q) >= 16) return fn(WordTag<std::uint32_t>{});
  return fn(WordTag<std::uint64_t>{});
}

}  // namespace

Residue uniform_residue(const PrimeField& field, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> dist(0, field.modulus() - 1);
  return dist(rng);
}

FieldMatrix::FieldMatrix(const PrimeField& field, std::size_t rows, std::size_t cols)
    : field_(field), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

FieldMatrix FieldMatrix::identity(const PrimeField& field, std::size_t n) {
  FieldMatrix m(field, n, n);
  for (std::size_t i = 0; i < n; ++i) m.entries_[i * n + i] = 1;
  return m;
}

FieldMatrix FieldMatrix::from_rows(const PrimeField& field,
                                   const std::vector<std::vector<std::int64_t>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  FieldMatrix m(field, rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ShapeError("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m.entries_[r * cols + c] = field.from_signed(rows[r][c]);
  }
  return m;
}

FieldMatrix FieldMatrix::transpose() const {
  FieldMatrix t(field_, cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.entries_[c * rows_ + r] = entries_[r * cols_ + c];
  return t;
}

FieldMatrix FieldMatrix::select_rows(std::span<const std::size_t> indices) const {
  FieldMatrix out(field_, indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

FieldMatrix FieldMatrix::select_cols(std::span<const std::size_t> indices) const {
  FieldMatrix out(field_, rows_, indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= cols_) throw ShapeError("column index out of range");
  }
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t i = 0; i < indices.size(); ++i)
      out.entries_[r * indices.size() + i] = entries_[r * cols_ + indices[i]];
  return out;
}

FieldMatrix FieldMatrix::row_block(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw ShapeError("row block out of range");
  FieldMatrix out(field_, count, cols_);
  std::copy_n(entries_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_,
              out.entries_.begin());
  return out;
}

bool FieldMatrix::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](Residue v) { return v == 0; });
}

void require_same_field(const FieldMatrix& a, const FieldMatrix& b) {
  if (a.field() != b.field()) {
    throw FieldMismatchError("matrices over F_" + std::to_string(a.field().modulus()) +
                             " and F_" + std::to_string(b.field().modulus()));
  }
}

FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_field(a, b);
  if (a.cols() != b.rows()) throw ShapeError("inner dimensions differ in matrix product");
  const std::uint32_t q = a.field().modulus();
  FieldMatrix out(a.field(), a.rows(), b.cols());
  const std::uint64_t budget32 = accumulation_budget<std::uint32_t>(q);
  if (budget32 >= 4) {
    // Rows of b are contiguous, so whole runs of them feed the kernel.
    const std::size_t inner = a.cols();
    const std::size_t n = b.cols();
    const Residue* bdata = b.entries().data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      Residue* acc = out.row(i).data();
      const Residue* f = a.row(i).data();
      for (std::size_t t = 0; t < inner;) {
        const std::size_t step = static_cast<std::size_t>(std::min<std::uint64_t>(budget32, inner - t));
        multi_axpy(acc, bdata + t * n, n, f + t, step, n);
        for (std::size_t j = 0; j < n; ++j) acc[j] %= q;
        t += step;
      }
    }
    return out;
  }
  const std::uint64_t budget = accumulation_budget<std::uint64_t>(q);
  std::vector<std::uint64_t> acc(b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::fill(acc.begin(), acc.end(), 0);
    std::uint64_t pending = 0;
    auto arow = a.row(i);
    for (std::size_t t = 0; t < a.cols(); ++t) {
      const std::uint64_t f = arow[t];
      if (f == 0) continue;
      if (pending >= budget) {
        for (auto& v : acc) v %= q;
        pending = 0;
      }
      const Residue* brow = b.row(t).data();
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += f * brow[j];
      ++pending;
    }
    auto orow = out.row(i);
    for (std::size_t j = 0; j < acc.size(); ++j) orow[j] = static_cast<Residue>(acc[j] % q);
  }
  return out;
}

FieldMatrix operator+(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_field(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("shape mismatch in sum");
  FieldMatrix out(a.field(), a.rows(), a.cols());
  const auto& f = a.field();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto x = a.row(r), y = b.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) o[c] = f.add(x[c], y[c]);
  }
  return out;
}

FieldMatrix operator-(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_field(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("shape mismatch in difference");
  FieldMatrix out(a.field(), a.rows(), a.cols());
  const auto& f = a.field();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto x = a.row(r), y = b.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) o[c] = f.sub(x[c], y[c]);
  }
  return out;
}

Residue dot(const PrimeField& field, std::span<const Residue> a, std::span<const Residue> b) {
  if (a.size() != b.size()) throw ShapeError("dot product of unequal lengths");
  const std::uint32_t q = field.modulus();
  const std::uint64_t budget = accumulation_budget<std::uint64_t>(q);
  std::uint64_t acc = 0;
  std::uint64_t pending = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (pending >= budget) {
      acc %= q;
      pending = 0;
    }
    acc += std::uint64_t{a[i]} * b[i];
    ++pending;
  }
  return static_cast<Residue>(acc % q);
}

std::size_t rank(const FieldMatrix& m) {
  return with_word(m.field().modulus(), [&](auto tag) {
    using Word = typename decltype(tag)::type;
    auto w = load<Word>(m);
    return eliminate(w, m.cols(), false).size();
  });
}

EchelonForm row_reduce(const FieldMatrix& m) {
  return with_word(m.field().modulus(), [&](auto tag) {
    using Word = typename decltype(tag)::type;
    auto w = load<Word>(m);
    auto pivots = eliminate(w, m.cols(), true);
    FieldMatrix reduced(m.field(), m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto dst = reduced.row(r);
      const Word* src = w.row(r);
      for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = static_cast<Residue>(src[c]);
    }
    return EchelonForm{std::move(reduced), std::move(pivots)};
  });
}

FieldMatrix solve(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_field(a, b);
  if (a.rows() != a.cols()) throw ShapeError("solve requires a square coefficient matrix");
  if (b.rows() != a.rows()) throw ShapeError("right-hand side row count differs");
  const std::size_t n = a.rows();
  return with_word(a.field().modulus(), [&](auto tag) {
    using Word = typename decltype(tag)::type;
    auto w = load<Word>(a, b.cols());
    for (std::size_t r = 0; r < n; ++r) {
      auto src = b.row(r);
      std::copy(src.begin(), src.end(), w.row(r) + n);
    }
    auto pivots = eliminate(w, n, false);
    if (pivots.size() < n) throw SingularMatrixError("coefficient matrix is singular");
    // Unit upper triangular now; back-substitute on the right-hand side only.
    const std::size_t k = b.cols();
    const std::uint32_t q = w.q;
    const std::uint64_t budget = accumulation_budget<std::uint64_t>(q);
    FieldMatrix x(a.field(), n, k);
    std::vector<std::uint64_t> acc(k);
    for (std::size_t r = n; r-- > 0;) {
      const Word* row = w.row(r);
      for (std::size_t c = 0; c < k; ++c) acc[c] = row[n + c];
      std::uint64_t pending = 0;
      for (std::size_t j = r + 1; j < n; ++j) {
        if (row[j] == 0) continue;
        if (pending >= budget) {
          for (auto& v : acc) v %= q;
          pending = 0;
        }
        const std::uint64_t f = q - row[j];
        auto xr = x.row(j);
        for (std::size_t c = 0; c < k; ++c) acc[c] += f * xr[c];
        ++pending;
      }
      auto dst = x.row(r);
      for (std::size_t c = 0; c < k; ++c) dst[c] = static_cast<Residue>(acc[c] % q);
    }
    return x;
  });
}

FieldMatrix invert(const FieldMatrix& a) {
  return solve(a, FieldMatrix::identity(a.field(), a.rows()));
}

FieldMatrix random_matrix(const PrimeField& field, std::size_t rows, std::size_t cols, Rng& rng) {
  FieldMatrix m(field, rows, cols);
  std::uniform_int_distribution<std::uint32_t> dist(0, field.modulus() - 1);
  for (std::size_t r = 0; r < rows; ++r)
    for (auto& v : m.row(r)) v = dist(rng);
  return m;
}

FieldMatrix random_full_rank(const PrimeField& field, std::size_t n, Rng& rng,
                             std::size_t* attempts) {
  if (n == 0) throw ParameterError("random_full_rank requires n >= 1");
  for (std::size_t tries = 1;; ++tries) {
    FieldMatrix m = random_matrix(field, n, n, rng);
    if (rank(m) == n) {
      if (attempts) *attempts = tries;
      return m;
    }
  }
}

nlohmann::json matrix_to_json(const FieldMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    entries.push_back(std::vector<Residue>(row.begin(), row.end()));
  }
  return {{"q", m.field().modulus()}, {"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

FieldMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ShapeError("matrix JSON must be an object");
  for (const char* key : {"q", "rows", "cols", "entries"}) {
    if (!j.contains(key)) throw ShapeError(std::string("matrix JSON lacks \"") + key + "\"");
  }
  const PrimeField field(j.at("q").get<std::uint64_t>());
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& entries = j.at("entries");
  if (!entries.is_array() || entries.size() != rows) {
    throw ShapeError("matrix JSON entries do not match \"rows\"");
  }
  FieldMatrix m(field, rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = entries[r];
    if (!row.is_array() || row.size() != cols) {
      throw ShapeError("matrix JSON row " + std::to_string(r) + " does not match \"cols\"");
    }
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, field.from_signed(row[c].get<std::int64_t>()));
  }
  return m;
}

}  // namespace pirlab
