#ifndef QQLAB_RNG_HPP_
#define QQLAB_RNG_HPP_

#include <array>
#include <cstdint>

namespace qqlab {

namespace detail {

constexpr std::uint64_t splitmix64_step(std::uint64_t &state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64_step(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// Deterministic source of i.i.d. Uniform(0,1) variates keyed by
/// (seed, stream_id). The generator is xoshiro256++ seeded through
/// splitmix64, and the uniform mapping uses only integer arithmetic plus one
/// exact scaling, so sequences are identical on every IEEE-754 platform.
class UniformStream {
public:
  constexpr UniformStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t sm = detail::mix64(seed) ^
                       detail::mix64(stream_id ^ 0xd1b54a32d192ed03ULL);
    for (auto &w : state_) {
      w = detail::splitmix64_step(sm);
    }
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent child stream; used for per-chunk substreams.
  constexpr UniformStream substream(std::uint64_t k) const noexcept {
    return UniformStream(
        seed_, detail::mix64(stream_id_ ^ detail::mix64(k + 0x632be59bd9b4e019ULL)));
  }

  constexpr std::uint64_t next_u64() noexcept {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  constexpr double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer on {0, ..., n-1}, n >= 1 (Lemire's multiply-shift with
  /// rejection).
  std::uint64_t below(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

/// Stream ids used by the library's own estimators, so that independent
/// quantities drawn under one seed never share a stream.
namespace streams {
inline constexpr std::uint64_t kIntervalPath = 0x10;
inline constexpr std::uint64_t kQuickSelect = 0x11;
inline constexpr std::uint64_t kQuickVal = 0x12;
inline constexpr std::uint64_t kGrubel = 0x13;
inline constexpr std::uint64_t kPivotTriple = 0x20;
inline constexpr std::uint64_t kDensity = 0x30;
inline constexpr std::uint64_t kCdf = 0x31;
inline constexpr std::uint64_t kPerpetuity = 0x40;
inline constexpr std::uint64_t kSeries = 0x41;
inline constexpr std::uint64_t kConvergence = 0x50;
} // namespace streams

} // namespace qqlab

#endif // QQLAB_RNG_HPP_
