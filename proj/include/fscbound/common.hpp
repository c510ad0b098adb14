#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fscbound {

using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FSCBOUND_ERROR_TYPE(Name)                                      \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

FSCBOUND_ERROR_TYPE(NonStochasticRow);
FSCBOUND_ERROR_TYPE(Reducible);
FSCBOUND_ERROR_TYPE(DeadEndConstraint);
FSCBOUND_ERROR_TYPE(ParameterOutOfRange);
FSCBOUND_ERROR_TYPE(IndexOutOfRange);
FSCBOUND_ERROR_TYPE(WindowLengthMismatch);
FSCBOUND_ERROR_TYPE(LetterOutOfRange);
FSCBOUND_ERROR_TYPE(ImpossibleObservation);
FSCBOUND_ERROR_TYPE(GridTooLarge);
FSCBOUND_ERROR_TYPE(PolicySpaceTooLarge);
FSCBOUND_ERROR_TYPE(EnumerationTooLarge);
FSCBOUND_ERROR_TYPE(DelayMismatch);
FSCBOUND_ERROR_TYPE(DigestMismatch);
FSCBOUND_ERROR_TYPE(ConfigError);

#undef FSCBOUND_ERROR_TYPE

// 0*log2(0) = 0 convention.
inline double xlog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

inline double binary_entropy(double p) { return -xlog2(p) - xlog2(1.0 - p); }

// Deterministic static partition: results never depend on num_threads.
inline void parallel_for(std::size_t n, int num_threads,
                         const std::function<void(std::size_t)>& body) {
  if (num_threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(num_threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// FNV-1a over a canonical byte string; used for channel digests.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fscbound
