/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace pcm {

constexpr double kInf = 1e30;  // treated as +infinity for bounds

inline bool is_inf(double v) { return v >= kInf || v <= -kInf; }

// splitmix64, used to derive independent seeds from (seed, stream ids).
inline std::uint64_t mix_seed(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
  return mix_seed(a ^ mix_seed(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
  return mix_seed(mix_seed(a, b) ^ mix_seed(c));
}

// Deterministic RNG wrapper. Distribution transforms are written out
// explicitly so generated streams do not depend on the standard library's
// distribution internals.
class rng
{
 public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01()
  {
    // 53-bit mantissa draw in [0,1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; one value per call, cache discarded for reproducibility of
  // interleaved draws.
  double normal(double mean, double sigma)
  {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * M_PI * u2);
  }

  // Integer in [0, n)
  std::uint64_t below(std::uint64_t n)
  {
    // modulo bias is < 2^-44 for our n; acceptable and deterministic
    return engine_() % n;
  }

  // Categorical draw from an unnormalized nonnegative weight vector.
  template <typename Vec>
  int categorical(const Vec& w)
  {
    double total = 0.0;
    for (double v : w) total += v;
    double u = uniform01() * total;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      u -= w[i];
      if (u <= 0.0) return i;
    }
    return static_cast<int>(w.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// Toggle between the OpenMP kernels and their serial reference twins. The
// kernels are written to produce bit-identical results either way; the
// equivalence tests and the kernel benchmark flip this switch.
inline std::atomic<bool>& parallel_kernel_flag()
{
  static std::atomic<bool> flag{true};
  return flag;
}
inline bool parallel_kernels_enabled() { return parallel_kernel_flag().load(); }
inline void set_parallel_kernels(bool on) { parallel_kernel_flag().store(on); }

// Shortest round-trip decimal text for a double; used by every text export so
// identical runs produce identical bytes.
inline std::string fmt_double(double v)
{
  if (std::isnan(v)) return "nan";
  if (v >= kInf) return "inf";
  if (v <= -kInf) return "-inf";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

// FNV-1a over a string; used for feature-spec hashes and seed derivation.
inline std::uint64_t fnv1a(const std::string& s)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pcm
