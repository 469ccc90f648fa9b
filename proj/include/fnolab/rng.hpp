#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fnolab {

// splitmix64: used only to derive independent stream seeds from a master seed.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t s) : state(s) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

// Seed for a (stream, index) pair under a master seed. Chained splitmix hops
// keep streams decorrelated without coordinating a global counter.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    SplitMix64 a(master);
    std::uint64_t s = a.next() ^ (0x9e3779b97f4a7c15ull * (stream + 1));
    SplitMix64 b(s);
    std::uint64_t t = b.next() ^ (0xbf58476d1ce4e5b9ull * (index + 1));
    SplitMix64 c(t);
    return c.next();
}

// All stochastic sampling goes through this wrapper. The uint64 -> double
// mapping is pinned here (top 53 bits) instead of relying on
// std::uniform_real_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer on [0, n), rejection-sampled so it is exactly unbiased
    std::uint64_t uniform_index(std::uint64_t n) {
        std::uint64_t x, r;
        do {
            x = next_u64();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);  // reject the final partial block
        return r;
    }

private:
    std::mt19937_64 eng_;
};

// std::shuffle's draw pattern is implementation-defined; this one is pinned.
template <class T>
void fisher_yates(std::vector<T>& a, Rng& rng) {
    for (std::size_t i = a.size(); i > 1; --i) std::swap(a[i - 1], a[rng.uniform_index(i)]);
}

}  // namespace fnolab
