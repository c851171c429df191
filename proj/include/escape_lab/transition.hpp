#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"
#include "escape_lab/maps.hpp"
#include "escape_lab/partition.hpp"
#include "escape_lab/substochastic.hpp"

namespace escape_lab {

inline constexpr double kMarkovTolerance = 1e-10;
// Pulled-back breakpoints closer than this are the same point up to roundoff.
inline constexpr double kBreakpointMergeTolerance = 1e-14;

namespace detail {

// Index of the breakpoint within tol of y, if any.
inline std::optional<std::size_t> matchBreakpoint(const std::vector<double>& b, double y, double tol) {
  auto it = std::lower_bound(b.begin(), b.end(), y - tol);
  if (it != b.end() && std::abs(*it - y) <= tol) return static_cast<std::size_t>(it - b.begin());
  return std::nullopt;
}

// Index of the branch whose domain contains the whole cell, if any.
inline std::optional<std::size_t> branchContaining(const PiecewiseLinearMap& map, const Interval& cell,
                                                   double tol) {
  const auto& br = map.branches();
  for (std::size_t i = 0; i < br.size(); ++i)
    if (cell.lo >= br[i].domain.lo - tol && cell.hi <= br[i].domain.hi + tol) return i;
  return std::nullopt;
}

}  // namespace detail

// Markov refinement by pulling breakpoints back through every branch inverse,
// `levels` times. Existing breakpoints win over roundoff-level duplicates.
inline IntervalPartition refine(const PiecewiseLinearMap& map, const IntervalPartition& base, int levels) {
  if (levels < 0) throw DomainError("refinement levels must be nonnegative");
  std::vector<double> current = base.breakpoints();
  for (int level = 0; level < levels; ++level) {
    struct Candidate {
      double x;
      bool existing;
    };
    std::vector<Candidate> cand;
    cand.reserve(current.size() * (map.branches().size() + 1));
    for (double b : current) cand.push_back({b, true});
    for (const auto& br : map.branches()) {
      const double a = br.apply(br.domain.lo), c = br.apply(br.domain.hi);
      const double imgLo = std::min(a, c), imgHi = std::max(a, c);
      for (double y : current) {
        if (y < imgLo - kImageTolerance || y > imgHi + kImageTolerance) continue;
        const double x = std::clamp(br.inverse(y), br.domain.lo, br.domain.hi);
        cand.push_back({x, false});
      }
    }
    std::sort(cand.begin(), cand.end(), [](const Candidate& l, const Candidate& r) { return l.x < r.x; });

    std::vector<double> next;
    next.reserve(cand.size());
    std::size_t i = 0;
    while (i < cand.size()) {
      std::size_t j = i;
      double pick = cand[i].x;
      bool havePreferred = cand[i].existing;
      while (j + 1 < cand.size() && cand[j + 1].x - cand[i].x <= kBreakpointMergeTolerance) {
        ++j;
        if (!havePreferred && cand[j].existing) {
          pick = cand[j].x;
          havePreferred = true;
        }
      }
      next.push_back(pick);
      i = j + 1;
    }
    next.front() = 0.0;
    next.back() = 1.0;
    for (std::size_t k = 0; k + 1 < next.size(); ++k) {
      if (next[k + 1] - next[k] < kMinCellLength)
        throw RefinementDegenerateError("refinement level " + std::to_string(level + 1) +
                                        " produced a cell of length " +
                                        formatReal(next[k + 1] - next[k]) + " near " + formatReal(next[k]));
    }
    current = std::move(next);
  }
  return IntervalPartition(std::move(current));
}

struct MarkovCheck {
  struct Violation {
    std::size_t cell;
    std::string reason;
  };
  std::vector<Violation> violations;

  bool isMarkov() const noexcept { return violations.empty(); }
  std::optional<std::size_t> firstViolation() const {
    if (violations.empty()) return std::nullopt;
    return violations.front().cell;
  }
};

// Each cell must lie in one branch and map onto a union of cells.
inline MarkovCheck checkMarkov(const PiecewiseLinearMap& map, const IntervalPartition& p,
                               double tol = kMarkovTolerance) {
  MarkovCheck report;
  const auto& b = p.breakpoints();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Interval cell = p.cell(i);
    const auto branch = detail::branchContaining(map, cell, tol);
    if (!branch) {
      report.violations.push_back({i, "cell straddles a branch boundary"});
      continue;
    }
    const auto& br = map.branches()[*branch];
    for (double y : {br.apply(cell.lo), br.apply(cell.hi)}) {
      if (!detail::matchBreakpoint(b, y, tol)) {
        report.violations.push_back({i, "image endpoint " + formatReal(y) + " falls strictly inside a cell"});
        break;
      }
    }
  }
  return report;
}

// Closed system transition matrix p_ij = m(E_i ∩ T^-1 E_j) / m(E_i). On a Markov cell
// the branch carries uniform mass onto T(E_i), so p_ij = m(E_j) / m(T(E_i)) for the
// cells covering the image. Normalising by the covered measure keeps rows stochastic to
// roundoff; it equals |s| m(E_i) exactly on Markov partitions.
inline SubstochasticMatrix transitionMatrix(const PiecewiseLinearMap& map, const IntervalPartition& p) {
  const auto check = checkMarkov(map, p);
  if (!check.isMarkov()) {
    const auto& v = check.violations.front();
    throw MarkovViolationError(v.cell, "partition is not Markov at cell " + std::to_string(v.cell) + ": " +
                                           v.reason);
  }
  const std::size_t k = p.size();
  const auto& b = p.breakpoints();
  std::vector<double> entries(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const Interval cell = p.cell(i);
    const auto& br = map.branches()[*detail::branchContaining(map, cell, kMarkovTolerance)];
    std::size_t first = *detail::matchBreakpoint(b, br.apply(cell.lo), kMarkovTolerance);
    std::size_t last = *detail::matchBreakpoint(b, br.apply(cell.hi), kMarkovTolerance);
    if (first > last) std::swap(first, last);
    const double covered = b[last] - b[first];
    for (std::size_t j = first; j < last; ++j) entries[i * k + j] = (b[j + 1] - b[j]) / covered;
  }
  return SubstochasticMatrix(k, std::move(entries));
}

inline SubstochasticMatrix transitionMatrix(const SymbolicMarkovModel& model) { return model.transition; }

inline SubstochasticMatrix punchHole(const SubstochasticMatrix& m, std::size_t hole) { return m.withHole(hole); }

// Chain on words (s_0..s_n) of length levels+1, i.e. the cells E_{s_0} ∩ T^-1 E_{s_1} ∩ ...
// Inadmissible words are kept with zero measure; nothing flows into them.
struct RefinedChain {
  SymbolicMarkovModel model;
  std::vector<std::size_t> parent;  // first symbol: the coarse cell each word lies in
};

inline RefinedChain refineSymbolic(const SymbolicMarkovModel& base, int levels) {
  if (levels < 0) throw DomainError("refinement levels must be nonnegative");
  const std::size_t k = base.stateCount();
  std::size_t words = k;
  for (int l = 0; l < levels; ++l) {
    words *= k;
    if (words > 4096) throw DomainError("symbolic refinement too large (more than 4096 states)");
  }
  const std::size_t tailSpan = words / k;  // k^levels
  const auto& T = base.transition;

  std::vector<double> entries(words * words, 0.0);
  std::vector<double> measure(words, 0.0);
  std::vector<std::size_t> parent(words);
  for (std::size_t w = 0; w < words; ++w) {
    // Digits of w, most significant first, are s_0..s_levels.
    std::size_t rest = w;
    std::vector<std::size_t> sym(static_cast<std::size_t>(levels) + 1);
    for (std::size_t d = sym.size(); d-- > 0;) {
      sym[d] = rest % k;
      rest /= k;
    }
    parent[w] = sym.front();
    double mass = base.stateMeasure[sym.front()];
    for (std::size_t d = 0; d + 1 < sym.size(); ++d) mass *= T(sym[d], sym[d + 1]);
    measure[w] = mass;
    const std::size_t shifted = (w % tailSpan) * k;
    for (std::size_t t = 0; t < k; ++t) entries[w * words + shifted + t] = T(sym.back(), t);
  }
  double total = 0.0;
  for (double m : measure) total += m;
  for (double& m : measure) m /= total;
  return {SymbolicMarkovModel(SubstochasticMatrix(words, std::move(entries)), MeasureVector(std::move(measure))),
          std::move(parent)};
}

// Zero every row whose word starts in the given coarse cell.
inline SubstochasticMatrix punchCoarseHole(const RefinedChain& chain, std::size_t coarseHole) {
  SubstochasticMatrix out = chain.model.transition;
  bool any = false;
  for (std::size_t w = 0; w < chain.parent.size(); ++w)
    if (chain.parent[w] == coarseHole) {
      out = out.withHole(w);
      any = true;
    }
  if (!any) throw DomainError("coarse hole index out of range");
  return out;
}

}  // namespace escape_lab
