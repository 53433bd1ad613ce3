#pragma once

#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bh4 {

using cdouble = std::complex<double>;
using clongd = std::complex<long double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;
inline constexpr cdouble kI{0.0, 1.0};

// Volume of S^3 and of the unit ball in R^4.
inline constexpr double kSurfS3 = 2.0 * kPi * kPi;
inline constexpr double kVolB4 = kPi * kPi / 2.0;

inline double sq(double x) { return x * x; }

// <x> = (1+|x|^2)^{1/2}
inline double jbracket(double r) { return std::sqrt(1.0 + r * r); }
// <log t> = (1+(log t)^2)^{1/2}
inline double logbracket(double t) {
  const double l = std::log(t);
  return std::sqrt(1.0 + l * l);
}

// Global worker count: THREADS env wins, then set_threads(), then hardware.
inline int& thread_count_ref() {
  static int n = [] {
    if (const char* env = std::getenv("THREADS")) {
      const int k = std::atoi(env);
      if (k > 0) return k;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return n;
}

inline void set_threads(int n) {
  if (n > 0) thread_count_ref() = n;
}

// Chunked parallel map over [0, n). Deterministic partition, no reductions.
template <class Fn>
void parallel_for(long n, Fn&& fn) {
  const int nt = std::min<long>(thread_count_ref(), n > 0 ? n : 1);
  if (nt <= 1 || n < 64) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const long chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const long lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace bh4
