#include "bridgelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace bridgelab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng CounterRng::split(std::uint64_t id) const {
  return CounterRng(seed_, mix64(stream_ ^ mix64(id + 0x632be59bd9b4e019ULL)));
}

std::uint64_t CounterRng::next_u64() {
  std::uint64_t key = mix64(seed_ ^ mix64(stream_));
  return mix64(key ^ mix64(counter_++ + 0xd1b54a32d192ed03ULL));
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  // Box-Muller, one variate per call
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace bridgelab
