#pragma once

#include <cstdint>
#include <cmath>
#include <utility>
#include <vector>

namespace tpso {

// All randomness in the library flows through this generator so that runs are
// reproducible bit-for-bit across platforms and across serial/parallel
// execution. Streams are derived from a master seed with derive_seed(), never
// shared between concurrent workers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base) {
    std::uint64_t s = base;
    return splitmix64(s);
}

template <typename... Salts>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt, Salts... rest) {
    std::uint64_t s = base;
    std::uint64_t mixed = splitmix64(s) ^ (salt + 0x9e3779b97f4a7c15ULL);
    return derive_seed(mixed, rest...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // warm up so that small seeds do not produce correlated first draws
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Box-Muller; one normal per pair of uniforms, second discarded
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace tpso
