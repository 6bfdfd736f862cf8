// Counter-based random streams: every draw is a pure function of
// (master seed, trajectory index, counter), so trajectory ensembles are
// reproducible and can be evolved in parallel without coordination.
#pragma once

#include <cstdint>

namespace ghzsim {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

// Stateless stream: value(i) mixes the key with the counter i.
class CounterRng {
  public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream)
        : key_(detail::splitmix64(detail::splitmix64(master_seed) ^
                                  (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return detail::splitmix64(key_ ^ (counter * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
    }

    // Uniform in [0,1).
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Fair coin: +1/2 or -1/2.
    double half_spin(std::uint64_t counter) const {
        return (bits(counter) & 1ULL) ? 0.5 : -0.5;
    }

  private:
    std::uint64_t key_;
};

} // namespace ghzsim
