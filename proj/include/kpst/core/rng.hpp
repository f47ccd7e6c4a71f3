#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace kpst {

// Seeded RNG with a self-contained gaussian so streams are reproducible
// across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(seed) {}

  uint64_t seed() const { return seed_; }

  // [0, 1)
  double uniform() {
    return (eng_() >> 11) * (1.0 / 9007199254740992.0);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(uniform() * static_cast<double>(n));
  }

  // N(0,1), Box-Muller with cached spare
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
  float gaussian(float mean, float stddev) {
    return mean + stddev * static_cast<float>(gaussian());
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(uniform_int(i + 1))]);
    }
  }

  // Independent deterministic substream
  Rng fork(uint64_t stream) const { return Rng(splitmix(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))); }

  std::string state() const {
    std::ostringstream os;
    // The spare is stored as raw bits; decimal text would drop low bits.
    os << eng_ << " " << (has_spare_ ? 1 : 0) << " " << std::bit_cast<uint64_t>(spare_);
    return os.str();
  }
  void set_state(const std::string& s) {
    std::istringstream is(s);
    int hs = 0;
    uint64_t spare_bits = 0;
    is >> eng_ >> hs >> spare_bits;
    spare_ = std::bit_cast<double>(spare_bits);
    has_spare_ = hs != 0;
  }

  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  uint64_t seed_ = 0;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kpst
