#pragma once

#include <cstdint>
#include <limits>

namespace treeanova {

namespace detail {

// splitmix64 finalizer (Steele, Lea & Flood / Vigna). Used both to expand a
// 64-bit seed into engine state and to fold derivation-path elements.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// xoshiro256++ engine (Blackman & Vigna). Small state, cheap construction;
/// one instance is built per derived stream, so construction cost matters.
class Xoshiro256PlusPlus {
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256PlusPlus(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z = detail::splitmix64_mix(z);
            word = z;
            z += 0x9E3779B97F4A7C15ull;
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double strictly inside (0,1): 53-bit grid offset by half a step,
    /// so log/log1p transforms never see an endpoint.
    double next_unit() {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform double in (-1,1), never exactly 0.
    double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// Tags distinguishing the replication-data stream from bootstrap streams
/// derived from the same parent seed.
enum class StreamPurpose : std::uint64_t { data = 1, bootstrap = 2 };

/// Reproducible stream seed: a 64-bit root plus a derivation path folded in
/// one element at a time. Identical (root, path) gives an identical stream on
/// any schedule; sibling paths give statistically independent streams.
class Seed {
  public:
    explicit Seed(std::uint64_t root) : root_(root), folded_(detail::splitmix64_mix(root)) {}

    /// Child seed with one more path element (replication index, group index,
    /// resample index, or purpose tag).
    Seed derived(std::uint64_t element) const {
        Seed child(*this);
        child.folded_ =
            detail::splitmix64_mix(child.folded_ ^ detail::splitmix64_mix(element));
        return child;
    }

    Seed derived(StreamPurpose purpose) const {
        return derived(static_cast<std::uint64_t>(purpose));
    }

    std::uint64_t root() const { return root_; }
    std::uint64_t state() const { return folded_; }

    Xoshiro256PlusPlus engine() const { return Xoshiro256PlusPlus(folded_); }

  private:
    std::uint64_t root_;
    std::uint64_t folded_;
};

}  // namespace treeanova
