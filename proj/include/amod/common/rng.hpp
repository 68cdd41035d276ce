#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace amod {

// Independent substreams of one run seed. Keeping request generation, fleet
// placement, policy decisions and forecast noise on separate streams makes
// runs comparable across policies under the same seed.
enum class RngStream : std::uint64_t {
    generic = 0,
    requests = 1,
    placement = 2,
    policy = 3,
    forecast = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// mt19937_64 engine with hand-rolled transforms. The standard distributions
// are implementation-defined, so sampling goes through explicit formulas to
// keep a seed's byte stream stable.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, RngStream stream)
        : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream) + 0x51ED2701))) {}

    std::uint64_t bits() { return engine_(); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, n), rejection keeps it unbiased
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = bits();
        while (v >= limit) v = bits();
        return v % n;
    }

    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    // Marsaglia polar method; one spare draw cached.
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return mean + stddev * u * f;
    }

    // Dirichlet(1,...,1): uniform over the probability simplex.
    std::vector<double> dirichlet_uniform(std::size_t k) {
        std::vector<double> w(k);
        double total = 0.0;
        for (auto& x : w) {
            x = exponential(1.0);
            total += x;
        }
        for (auto& x : w) x /= total;
        return w;
    }

    // index sampled from unnormalized nonnegative weights
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double t = uniform01() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            t -= weights[i];
            if (t < 0.0) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    // k distinct values from [0, n), partial Fisher-Yates
    std::vector<int> sample_distinct(int n, int k) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace amod
