#ifndef VXAI_RNG_HPP_
#define VXAI_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vxai {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the distributions below are written out here
// because the std:: ones are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Subordinate seed for a subsystem: fixed offsets from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t offset);

std::uint64_t fnv1a(std::string_view text);

namespace seed_offset {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kTrain = 2;
inline constexpr std::uint64_t kExplain = 3;
inline constexpr std::uint64_t kMetrics = 4;
inline constexpr std::uint64_t kPersonas = 5;
inline constexpr std::uint64_t kSurvey = 6;
inline constexpr std::uint64_t kBackground = 7;
}  // namespace seed_offset

}  // namespace vxai

#endif  // VXAI_RNG_HPP_
