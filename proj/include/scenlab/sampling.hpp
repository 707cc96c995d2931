#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "scenlab/dyadic_measure.hpp"
#include "scenlab/errors.hpp"
#include "scenlab/ifs.hpp"

namespace scenlab {

namespace detail {

/// Deterministic per-task generator: stream `index` of a base seed.
/// Every random draw in the library goes through this, so results are
/// independent of evaluation order and thread schedule.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0,1) with 53 random bits; avoids the
    /// implementation-defined std::uniform_real_distribution.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Index i with probability weights[i] (weights need not be normalized).
    int pick(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace detail

/// i.i.d. samples from the discretized measure, reported as cell centers.
/// Deterministic per (seed, index) stream.
inline std::vector<std::array<double, 2>> sample_points(const DyadicMeasure& mu, int count,
                                                        std::uint64_t seed) {
    if (count < 1) throw DomainError("sample_points: count must be positive");
    std::vector<double> cum;
    std::vector<std::array<double, 2>> centers;
    cum.reserve(mu.support_size());
    centers.reserve(mu.support_size());
    double run = 0.0;
    for (const auto& [key, m] : mu.cells()) {
        run += m;
        cum.push_back(run);
        centers.push_back(mu.cell_center(key));
    }
    std::vector<std::array<double, 2>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        detail::Rng rng(seed, static_cast<std::uint64_t>(i));
        const double u = rng.next_double() * run;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const std::size_t idx =
            std::min(static_cast<std::size_t>(it - cum.begin()), centers.size() - 1);
        out.push_back(centers[idx]);
    }
    return out;
}

struct WordSample {
    Word word;
    double x;
    double y; // 0 for 1-D systems
};

/// Symbolic sampling: words drawn from the weight model symbol by symbol,
/// projected via the canonical projection.  Deterministic per seed.
inline std::vector<WordSample> sample_words(const IfsSystem& sys, int word_length, int count,
                                            std::uint64_t seed) {
    if (count < 1 || word_length < 1) throw DomainError("sample_words: count and length must be positive");
    const int alphabet = static_cast<int>(sys.size());
    std::vector<WordSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        detail::Rng rng(seed, static_cast<std::uint64_t>(i));
        Word w;
        w.reserve(static_cast<std::size_t>(word_length));
        int prev = -1;
        std::vector<double> row(static_cast<std::size_t>(alphabet));
        for (int pos = 0; pos < word_length; ++pos) {
            for (int k = 0; k < alphabet; ++k) row[static_cast<std::size_t>(k)] = sys.weights().step(prev, k);
            const int sym = rng.pick(row);
            w.push_back(sym);
            prev = sym;
        }
        const ProjectedPoint p = canonical_project(sys, w);
        out.push_back({std::move(w), p.x, p.y});
    }
    return out;
}

} // namespace scenlab
