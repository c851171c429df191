#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"
#include "escape_lab/maps.hpp"
#include "escape_lab/parallel.hpp"
#include "escape_lab/partition.hpp"

namespace escape_lab {

// Counter-based generator: draw c of stream `seed` is the SplitMix64 output
// function applied to mix(seed) + (c + 1) * golden-gamma. Any draw can be produced
// independently of the others, so results do not depend on how samples are
// split between workers. Reproducible for a fixed seed on one build.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

enum class InitialLaw { UniformOnComplement, UniformOnUnitInterval };

// S(n) = number of samples whose first n iterates avoid the hole.
struct SurvivalSeries {
  std::vector<std::uint64_t> counts;  // counts[n] for n = 0..nMax
  std::uint64_t sampleCount = 0;
  std::uint64_t seed = 0;

  int nMax() const noexcept { return static_cast<int>(counts.size()) - 1; }
  double fraction(int n) const { return static_cast<double>(counts.at(static_cast<std::size_t>(n))) / static_cast<double>(sampleCount); }
};

inline constexpr std::uint64_t kSimulationChunk = 1 << 16;

// Iterates every sample until T^n(x) lands in the hole (n >= 1) or n = nMax.
// Hole membership is [lo, hi), closed at 1 when hi = 1.
inline SurvivalSeries simulateSurvival(const PiecewiseLinearMap& map, const Interval& hole, long nMax, long samples,
                                       std::uint64_t seed, InitialLaw initial = InitialLaw::UniformOnComplement,
                                       unsigned workers = workerCount()) {
  if (nMax <= 0) throw DomainError("nMax must be positive");
  if (samples <= 0) throw DomainError("sample count must be positive");
  const double holeLength = hole.length();
  if (initial == InitialLaw::UniformOnComplement && holeLength >= 1.0)
    throw DomainError("hole covers [0, 1]; its complement is empty");

  const CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(samples);
  const std::size_t chunks = static_cast<std::size_t>((n + kSimulationChunk - 1) / kSimulationChunk);
  const std::size_t bins = static_cast<std::size_t>(nMax) + 2;  // escape at 1..nMax, or survived
  std::vector<std::vector<std::uint64_t>> escapes(chunks, std::vector<std::uint64_t>(bins, 0));

  parallelFor(
      chunks,
      [&](std::size_t c) {
        auto& hist = escapes[c];
        const std::uint64_t begin = c * kSimulationChunk;
        const std::uint64_t end = std::min(n, begin + kSimulationChunk);
        for (std::uint64_t s = begin; s < end; ++s) {
          double x = rng.uniform(s);
          if (initial == InitialLaw::UniformOnComplement) {
            x *= 1.0 - holeLength;
            if (x >= hole.lo) x += holeLength;
            x = std::min(x, 1.0);
          }
          long t = 1;
          for (; t <= nMax; ++t) {
            x = map.step(x);
            if (hole.containsHalfOpen(x)) break;
          }
          ++hist[static_cast<std::size_t>(t)];  // t = nMax + 1 means it survived
        }
      },
      workers);

  SurvivalSeries out;
  out.sampleCount = n;
  out.seed = seed;
  out.counts.assign(static_cast<std::size_t>(nMax) + 1, 0);
  std::vector<std::uint64_t> total(bins, 0);
  for (const auto& h : escapes)
    for (std::size_t b = 0; b < bins; ++b) total[b] += h[b];
  std::uint64_t alive = n;
  out.counts[0] = alive;
  for (std::size_t t = 1; t <= static_cast<std::size_t>(nMax); ++t) {
    alive -= total[t];
    out.counts[t] = alive;
  }
  return out;
}

struct RateFit {
  double rate = 0.0;    // nats per iteration
  double standardError = 0.0;  // of the fitted slope
  std::pair<int, int> window{0, 0};  // window actually used
};

inline constexpr std::uint64_t kDefaultMinCount = 100;

// Ordinary least squares of ln S(n) on n over the window. The upper end is cut
// back to the last n with S(n) >= minCount; at least three points must remain.
inline RateFit fitEscapeRate(const SurvivalSeries& s, std::pair<int, int> window,
                             std::uint64_t minCount = kDefaultMinCount) {
  auto [lo, hi] = window;
  if (lo < 0 || hi > s.nMax() || lo >= hi)
    throw DomainError("fit window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] must lie in [0, " +
                      std::to_string(s.nMax()) + "] with lo < hi");
  if (s.counts[static_cast<std::size_t>(lo)] < minCount)
    throw InsufficientDataError("only " + std::to_string(s.counts[static_cast<std::size_t>(lo)]) +
                                " survivors at n = " + std::to_string(lo) + " (need " + std::to_string(minCount) + ")");
  while (hi > lo && s.counts[static_cast<std::size_t>(hi)] < minCount) --hi;
  const int points = hi - lo + 1;
  if (points < 3)
    throw InsufficientDataError("fit window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "] has fewer than 3 points with at least " + std::to_string(minCount) + " survivors");

  double mx = 0.0, my = 0.0;
  std::vector<double> ys;
  for (int t = lo; t <= hi; ++t) {
    ys.push_back(std::log(static_cast<double>(s.counts[static_cast<std::size_t>(t)])));
    mx += t;
    my += ys.back();
  }
  mx /= points;
  my /= points;
  double sxx = 0.0, sxy = 0.0;
  for (int t = lo; t <= hi; ++t) {
    const double dx = t - mx;
    sxx += dx * dx;
    sxy += dx * (ys[static_cast<std::size_t>(t - lo)] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (int t = lo; t <= hi; ++t) {
    const double e = ys[static_cast<std::size_t>(t - lo)] - (my + slope * (t - mx));
    ssr += e * e;
  }
  RateFit fit;
  fit.rate = -slope;
  fit.standardError = points > 2 ? std::sqrt(ssr / (points - 2) / sxx) : 0.0;
  fit.window = {lo, hi};
  return fit;
}

inline std::string survivalToCsv(const SurvivalSeries& s) {
  std::ostringstream out;
  out << "n,survivors,fraction\n";
  for (int t = 0; t <= s.nMax(); ++t)
    out << t << ',' << s.counts[static_cast<std::size_t>(t)] << ',' << formatReal(s.fraction(t)) << '\n';
  return out.str();
}

}  // namespace escape_lab
