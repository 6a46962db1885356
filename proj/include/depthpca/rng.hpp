#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace depthpca {

// xoshiro256++ with splitmix64 seeding. Self-contained so that every seeded
// run is bit-reproducible across platforms and thread counts; stream
// derivation gives independent per-replication / per-batch generators.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
        has_spare_ = false;
        spare_ = 0.0;
    }

    static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
        std::uint64_t x = master ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        splitmix64(x);
        return splitmix64(x);
    }

    std::uint64_t next_u64() {
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

    // uniform on [0,1) with 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via the polar method (cached second variate)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    void normal_fill(std::span<double> out) {
        for (double& x : out) x = normal();
    }

    // chi-square with integer df as a sum of squared normals (df stays small
    // here: t-sampler mixing draws)
    double chi_square(int df) {
        double s = 0.0;
        for (int i = 0; i < df; ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool has_spare_;
    double spare_;
};

} // namespace depthpca
