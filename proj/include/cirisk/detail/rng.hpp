#pragma once

#include <cstdint>

namespace cirisk::detail {

// splitmix64 step (Vigna); full-period, passes BigCrush as a mixer
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent stream per (seed, index): replication order and thread count
// cannot change what any index draws.
class CounterStream {
 public:
  CounterStream(uint64_t seed, uint64_t index)
      : state_(seed ^ (0xD1B54A32D192ED03ull * (index + 1))) {
    splitmix64(state_);
    splitmix64(state_);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform on the open interval (0, 1); never returns an endpoint
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  uint64_t state_;
};

}  // namespace cirisk::detail
