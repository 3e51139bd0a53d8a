#ifndef PAA_RNG_HPP
#define PAA_RNG_HPP

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace paa {

// 64-bit finalizer from the splitmix64 reference implementation. Used both as
// the generator step and as the hash for deriving child seeds, so every random
// stream in the library is a pure function of (master seed, derivation path).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derive an independent child seed from a base seed and a path of words.
// derive_seed(s, {a}) != derive_seed(s, {b}) for a != b, and chains compose:
// the planner keys node streams by their path in the sample tree.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(base);
    for (std::uint64_t w : path) h = mix64(h ^ (w + 0x9e3779b97f4a7c15ull));
    return h;
}

// Small counter-based PRNG (splitmix64 stream). Self-contained so sequences
// are identical across platforms and standard-library versions, which the
// reproducibility contract requires; std::uniform_*_distribution is not
// portable across implementations.
class Prng {
  public:
    explicit Prng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [a, b).
    double next_uniform(double a, double b) { return a + (b - a) * next_unit(); }

    // Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Prng::next_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

  private:
    std::uint64_t state_;
};

// First n entries of a seeded Fisher-Yates shuffle of {0..N-1}, returned in
// increasing order. sample_without_replacement(N, N, rng) is the identity set.
inline std::vector<int> sample_without_replacement(int population, int count, Prng& rng) {
    if (count < 0 || population < 0 || count > population)
        throw std::invalid_argument("sample_without_replacement: need 0 <= count <= population");
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(population - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace paa

#endif  // PAA_RNG_HPP
