#include "fimci/rng.hpp"

#include "fimci/normal.hpp"

namespace fimci {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) {
  return seed_mix(seed_mix(seed, s1), s2);
}

double Rng::normal() { return normal_quantile(uniform01()); }

}  // namespace fimci
