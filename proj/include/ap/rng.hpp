#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace ap {

// Deterministic random stream built on std::mt19937_64 (the 64-bit Mersenne
// twister is fully specified by the C++ standard, so the raw bit stream is
// identical on every platform).  The uniform and normal transforms are coded
// explicitly here instead of using std::*_distribution, whose output is
// implementation-defined.  Draw order is part of the file-format contract:
// instances regenerate bit-identically from (generator, seed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (two uniforms per draw, no caching, so the
  // stream position is a pure function of the number of calls).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // Integer in [0, n) by 128-bit multiply-shift.
  std::uint64_t integer_below(std::uint64_t n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Column-major fill order.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal();
    return a;
  }

  // First k entries of a Fisher-Yates shuffle of {0, ..., n-1}.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(integer_below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ap
