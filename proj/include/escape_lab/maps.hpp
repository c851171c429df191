#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"
#include "escape_lab/partition.hpp"
#include "escape_lab/substochastic.hpp"

namespace escape_lab {

inline constexpr double kImageTolerance = 1e-12;

// Affine piece x -> slope * x + intercept on a closed domain.
struct Branch {
  Interval domain;
  double slope = 0.0;
  double intercept = 0.0;

  double apply(double x) const noexcept { return slope * x + intercept; }
  double inverse(double y) const noexcept { return (y - intercept) / slope; }

  // Image of the domain, ordered low to high.
  Interval image() const {
    double a = apply(domain.lo), b = apply(domain.hi);
    if (a > b) std::swap(a, b);
    return Interval(std::max(0.0, a), std::min(1.0, b));
  }
};

// Expanding interval map given by affine branches whose domains partition [0,1].
class PiecewiseLinearMap {
 public:
  explicit PiecewiseLinearMap(std::vector<Branch> branches) : branches_(std::move(branches)) {
    if (branches_.empty()) throw DomainError("map needs at least one branch");
    std::vector<Interval> domains;
    for (const auto& b : branches_) {
      if (!(std::abs(b.slope) > 1.0)) throw DomainError("branch slope must satisfy |slope| > 1");
      const double a = b.apply(b.domain.lo), c = b.apply(b.domain.hi);
      if (std::min(a, c) < -kImageTolerance || std::max(a, c) > 1.0 + kImageTolerance)
        throw DomainError("branch image leaves [0, 1]");
      domains.push_back(b.domain);
    }
    const auto check = validatePartition(domains);
    if (!check.valid())
      throw DomainError("branch domains: " + check.issues.front().describe());
  }

  const std::vector<Branch>& branches() const noexcept { return branches_; }

  // Branch domains as a partition; this is the Markov base for full-branch maps.
  IntervalPartition basePartition() const {
    std::vector<Interval> d;
    for (const auto& b : branches_) d.push_back(b.domain);
    return IntervalPartition::fromCells(d);
  }

  // Index of the branch containing x (shared endpoints go left).
  std::size_t branchAt(double x) const noexcept {
    for (std::size_t i = 0; i + 1 < branches_.size(); ++i)
      if (x <= branches_[i].domain.hi) return i;
    return branches_.size() - 1;
  }

  // Unchecked evaluation, clamped to [0, 1]; for hot loops.
  double step(double x) const noexcept {
    const double y = branches_[branchAt(x)].apply(x);
    return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
  }

  bool isFullBranch(double tol = kImageTolerance) const {
    for (const auto& b : branches_) {
      const double a = b.apply(b.domain.lo), c = b.apply(b.domain.hi);
      if (std::abs(std::min(a, c)) > tol || std::abs(std::max(a, c) - 1.0) > tol) return false;
    }
    return true;
  }

 private:
  std::vector<Branch> branches_;
};

inline double applyMap(const PiecewiseLinearMap& map, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("applyMap: x outside [0, 1]: " + formatReal(x));
  return map.step(x);
}

inline PiecewiseLinearMap makeSkewedTent(double x0) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("tent peak x0 must lie in (0, 1)");
  const double right = 1.0 / (1.0 - x0);
  return PiecewiseLinearMap({
      Branch{Interval(0.0, x0), 1.0 / x0, 0.0},
      Branch{Interval(x0, 1.0), -right, right},
  });
}

inline PiecewiseLinearMap makeDoubling(double skew) {
  if (!(skew > 0.0 && skew < 1.0)) throw DomainError("doubling skew must lie in (0, 1)");
  const double s = 1.0 / (1.0 - skew);
  return PiecewiseLinearMap({
      Branch{Interval(0.0, skew), 1.0 / skew, 0.0},
      Branch{Interval(skew, 1.0), s, -skew * s},
  });
}

// Finite-state chain: row-stochastic transitions plus the invariant state measure.
struct SymbolicMarkovModel {
  SymbolicMarkovModel(SubstochasticMatrix transition_, MeasureVector stateMeasure_)
      : transition(std::move(transition_)), stateMeasure(std::move(stateMeasure_)) {
    if (transition.order() != stateMeasure.size())
      throw DimensionError("state measure length does not match transition order");
    if (!transition.isStochastic(1e-12)) throw DomainError("symbolic transition matrix must be row-stochastic");
  }

  std::size_t stateCount() const noexcept { return transition.order(); }

  SubstochasticMatrix transition;
  MeasureVector stateMeasure;
};

namespace cat_map {

inline const double kSqrt5 = std::sqrt(5.0);
inline const double kA = (3.0 - kSqrt5) / 2.0;    // (3-√5)/2
inline const double kB = kSqrt5 - 2.0;            // √5-2
inline const double kC = (kSqrt5 - 1.0) / 2.0;    // (√5-1)/2
inline const double kR = std::sqrt((kSqrt5 + 3.0) / 10.0);

// Closed-form leading eigenvalues of the five hole-punched chains.
inline std::array<double, 5> referenceEigenvalues() {
  const double l = 3.0 - kSqrt5;
  return {l, l, l, l, (1.0 + std::sqrt(2.0)) / 2.0 * l};
}

// Lebesgue areas of the five partition elements.
inline std::array<double, 5> elementAreas() {
  return {kA * kR, kB * kR, kA * kR, kC * (1.0 - kR), kA * (1.0 - kR)};
}

}  // namespace cat_map

// Five-state model of the cat map on its generating Markov partition.
inline SymbolicMarkovModel makeCatMapModel() {
  using namespace cat_map;
  const std::vector<std::vector<double>> rows = {
      {kA, 0.0, kA, kB, 0.0},
      {kA, 0.0, kA, kB, 0.0},
      {kA, 0.0, kA, kB, 0.0},
      {0.0, kC, 0.0, 0.0, kA},
      {0.0, kC, 0.0, 0.0, kA},
  };
  const auto areas = elementAreas();
  return SymbolicMarkovModel(SubstochasticMatrix::fromRows(rows),
                             MeasureVector(std::vector<double>(areas.begin(), areas.end())));
}

// Monotone change of coordinates with its inverse.
struct Conjugacy {
  std::function<double(double)> forward;
  std::function<double(double)> inverse;

  // Largest |inverse(forward(x)) - x| over a uniform grid on [0,1].
  double roundTripError(std::size_t gridPoints = 10000) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < gridPoints; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(gridPoints - 1);
      worst = std::max(worst, std::abs(inverse(forward(x)) - x));
    }
    return worst;
  }
};

inline double logisticMap(double x) noexcept { return 4.0 * x * (1.0 - x); }

// U(x) = sin^2(pi x / 2), carrying the symmetric tent map onto the logistic map.
inline Conjugacy makeLogisticConjugacy() {
  return Conjugacy{
      [](double x) {
        const double s = std::sin(std::numbers::pi * x / 2.0);
        return s * s;
      },
      // atan2 form stays accurate near both endpoints, unlike asin(sqrt(y)).
      [](double y) {
        return 2.0 / std::numbers::pi * std::atan2(std::sqrt(y), std::sqrt(1.0 - y));
      },
  };
}

struct LogisticPartition {
  IntervalPartition partition;
  MeasureVector measure;  // invariant measure of each cell: 1 / 2^n
};

// 2^n cells with breakpoints sin^2(i pi / 2^(n+1)).
inline LogisticPartition makeLogisticPartition(int n) {
  if (n < 1) throw DomainError("logistic partition level must be >= 1");
  if (n > 20) throw DomainError("logistic partition level above 20 gives cells below the minimum length");
  const std::size_t k = std::size_t{1} << n;
  std::vector<double> b(k + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    const double s = std::sin(static_cast<double>(i) * std::numbers::pi / static_cast<double>(2 * k));
    b[i] = s * s;
  }
  b.front() = 0.0;
  b.back() = 1.0;
  return {IntervalPartition(std::move(b)), MeasureVector::uniform(k)};
}

// Map-spec document: {"kind": "tent"|"doubling"|"cat"|"logistic", "x0"/"skew": real, "level": int}.
struct MapSpec {
  enum class Kind { Tent, Doubling, Cat, Logistic };
  Kind kind = Kind::Tent;
  double parameter = 0.5;  // x0 for tent, skew for doubling
  int level = 0;

  static std::string kindName(Kind k) {
    switch (k) {
      case Kind::Tent: return "tent";
      case Kind::Doubling: return "doubling";
      case Kind::Cat: return "cat";
      case Kind::Logistic: return "logistic";
    }
    return {};
  }
};

inline MapSpec mapSpecFromJson(const nlohmann::json& doc) {
  MapSpec spec;
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "tent") {
    spec.kind = MapSpec::Kind::Tent;
    spec.parameter = doc.at("x0").get<double>();
    if (!(spec.parameter > 0.0 && spec.parameter < 1.0)) throw DomainError("x0 must lie in (0, 1)");
  } else if (kind == "doubling") {
    spec.kind = MapSpec::Kind::Doubling;
    spec.parameter = doc.at("skew").get<double>();
    if (!(spec.parameter > 0.0 && spec.parameter < 1.0)) throw DomainError("skew must lie in (0, 1)");
  } else if (kind == "cat") {
    spec.kind = MapSpec::Kind::Cat;
  } else if (kind == "logistic") {
    spec.kind = MapSpec::Kind::Logistic;
  } else {
    throw DomainError("unknown map kind: " + kind);
  }
  spec.level = doc.value("level", spec.kind == MapSpec::Kind::Logistic ? 1 : 0);
  if (spec.level < 0) throw DomainError("level must be nonnegative");
  if (spec.kind == MapSpec::Kind::Logistic && spec.level < 1)
    throw DomainError("logistic level must be >= 1");
  return spec;
}

inline nlohmann::json mapSpecToJson(const MapSpec& spec) {
  nlohmann::json doc{{"kind", MapSpec::kindName(spec.kind)}, {"level", spec.level}};
  if (spec.kind == MapSpec::Kind::Tent) doc["x0"] = spec.parameter;
  if (spec.kind == MapSpec::Kind::Doubling) doc["skew"] = spec.parameter;
  return doc;
}

}  // namespace escape_lab
