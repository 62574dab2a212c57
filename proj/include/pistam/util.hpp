#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pistam {

// splitmix64: used as the seed mixer and as the engine behind Rng.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a over a purpose name; gives stable tags for seed derivation.
constexpr std::uint64_t tag_hash(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Stream splitting: every stochastic consumer derives its own seed from the
// master seed, a purpose tag, and up to two indices. Independent purposes
// never share a stream, so adding consumers cannot shift existing draws.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(base ^ tag);
  s = splitmix64(s ^ (a + 0x9E3779B97F4A7C15ull));
  s = splitmix64(s ^ (b + 0x6A09E667F3BCC909ull));
  return s;
}

// Counter-based generator. The whole stream state is (key, counter), which
// keeps simulator snapshots small and trivially copyable.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t seed) : key_(splitmix64(seed)) {}

  std::uint64_t bits() {
    return splitmix64(key_ ^ (counter_++ * 0xD1342543DE82EF95ull));
  }

  // [0, 1)
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // [0, n), n >= 1
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(bits()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, one value per call (two uniforms consumed).
  double normal();

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

// Level parsed once from the PISTAM_LOG environment variable (off|info|debug).
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// %.17g: exact round-trip formatting for CSV and config text.
std::string fmt_g17(double v);

}  // namespace pistam
