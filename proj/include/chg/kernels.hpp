#pragma once
// Low-level array kernels used by the discrete operators.
//
// Each kernel exists twice: the OpenMP version the library runs, and a plain
// serial loop in kernels::serial kept as a reference for tests and the
// benchmark tool. Reductions use a fixed chunk decomposition (partial sums
// combined in chunk order), so the result does not depend on the number of
// threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>
#include <cmath>
#include <algorithm>

namespace chg::kernels {

inline constexpr std::size_t reduction_chunk = 4096;
inline constexpr std::size_t parallel_threshold = 16384;

template <class F>
inline void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n >= parallel_threshold)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

// Row-wise parallelism for 2D stencils: the body handles one contiguous row.
template <class F>
inline void parallel_rows(long long nrows, long long row_work, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) \
    if (nrows > 1 && nrows * row_work >= static_cast<long long>(parallel_threshold))
#endif
  for (long long r = 0; r < nrows; ++r) {
    body(static_cast<std::size_t>(r));
  }
}

// Deterministic sum: per-chunk partials accumulated in index order.
template <class F>
inline double indexed_sum(std::size_t n, F&& term) {
  const std::size_t nchunks = (n + reduction_chunk - 1) / reduction_chunk;
  if (nchunks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(nchunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n >= parallel_threshold)
#endif
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * reduction_chunk;
    const std::size_t hi = std::min(n, lo + reduction_chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

inline double sum(std::span<const double> x) {
  return indexed_sum(x.size(), [&](std::size_t i) { return x[i]; });
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  return indexed_sum(x.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

// max |x_i|; max is order-independent so a plain OpenMP reduction is exact.
inline double max_abs(std::span<const double> x) {
  const std::size_t n = x.size();
  double m = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : m) if (n >= parallel_threshold)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    m = std::max(m, std::abs(x[static_cast<std::size_t>(i)]));
  }
  return m;
}

namespace serial {

inline double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace serial

}  // namespace chg::kernels
