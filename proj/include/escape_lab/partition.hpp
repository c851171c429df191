#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"

namespace escape_lab {

inline constexpr double kMinCellLength = 1e-12;
inline constexpr double kMeasureSumTolerance = 1e-12;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
      throw DomainError("interval [" + formatReal(lo) + ", " + formatReal(hi) +
                        "] must satisfy 0 <= lo < hi <= 1");
  }

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  // [lo, hi), closed at 1 when hi == 1.
  bool containsHalfOpen(double x) const noexcept {
    return x >= lo && (x < hi || (hi == 1.0 && x == 1.0));
  }
};

// Result of checking a candidate cell list against the partition invariants.
struct PartitionValidation {
  enum class Kind { Gap, Overlap, ShortCell, BadEndpoint };
  struct Issue {
    Kind kind;
    std::size_t cell;  // index of the first cell involved
    double lo;
    double hi;
    std::string describe() const {
      switch (kind) {
        case Kind::Gap:
          return "gap at (" + formatReal(lo) + ", " + formatReal(hi) + ")";
        case Kind::Overlap:
          return "overlap on (" + formatReal(lo) + ", " + formatReal(hi) + ")";
        case Kind::ShortCell:
          return "cell " + std::to_string(cell) + " shorter than minimum length";
        case Kind::BadEndpoint:
          return "partition does not span [0, 1]";
      }
      return {};
    }
  };

  std::vector<Issue> issues;
  bool valid() const noexcept { return issues.empty(); }
};

inline PartitionValidation validatePartition(std::span<const Interval> cells,
                                             double minCellLength = kMinCellLength) {
  using Kind = PartitionValidation::Kind;
  PartitionValidation report;
  if (cells.empty()) {
    report.issues.push_back({Kind::BadEndpoint, 0, 0.0, 1.0});
    return report;
  }
  if (cells.front().lo != 0.0 || cells.back().hi != 1.0)
    report.issues.push_back({Kind::BadEndpoint, 0, cells.front().lo, cells.back().hi});
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (cells[j].length() < minCellLength)
      report.issues.push_back({Kind::ShortCell, j, cells[j].lo, cells[j].hi});
    if (j + 1 == cells.size()) continue;
    const double a = cells[j].hi, b = cells[j + 1].lo;
    if (a < b) report.issues.push_back({Kind::Gap, j, a, b});
    if (a > b) report.issues.push_back({Kind::Overlap, j, b, a});
  }
  return report;
}

// Ordered cover of [0,1] by closed cells sharing endpoints. Stored as breakpoints.
class IntervalPartition {
 public:
  explicit IntervalPartition(std::vector<double> breakpoints,
                             double minCellLength = kMinCellLength)
      : breaks_(std::move(breakpoints)) {
    if (breaks_.size() < 2) throw DomainError("partition needs at least two breakpoints");
    std::vector<Interval> cells;
    cells.reserve(breaks_.size() - 1);
    for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
      if (!(breaks_[j] < breaks_[j + 1]) || breaks_[j] < 0.0 || breaks_[j + 1] > 1.0)
        throw DomainError("breakpoints must increase strictly within [0, 1]");
      cells.emplace_back(breaks_[j], breaks_[j + 1]);
    }
    const auto check = validatePartition(cells, minCellLength);
    if (!check.valid()) throw DomainError("invalid partition: " + check.issues.front().describe());
  }

  static IntervalPartition fromCells(std::span<const Interval> cells) {
    const auto check = validatePartition(cells);
    if (!check.valid()) throw DomainError("invalid partition: " + check.issues.front().describe());
    std::vector<double> b;
    b.reserve(cells.size() + 1);
    for (const auto& c : cells) b.push_back(c.lo);
    b.push_back(1.0);
    return IntervalPartition(std::move(b));
  }

  static IntervalPartition uniform(std::size_t cells) {
    if (cells == 0) throw DomainError("uniform partition needs at least one cell");
    std::vector<double> b(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) b[j] = static_cast<double>(j) / static_cast<double>(cells);
    return IntervalPartition(std::move(b));
  }

  std::size_t size() const noexcept { return breaks_.size() - 1; }
  Interval cell(std::size_t j) const { return Interval(breaks_.at(j), breaks_.at(j + 1)); }
  std::vector<Interval> cells() const {
    std::vector<Interval> out;
    out.reserve(size());
    for (std::size_t j = 0; j < size(); ++j) out.push_back(cell(j));
    return out;
  }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }

  // Index of the cell containing x; a shared endpoint belongs to the left cell.
  std::size_t locate(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("point outside [0, 1]: " + formatReal(x));
    auto it = std::lower_bound(breaks_.begin() + 1, breaks_.end(), x);
    return static_cast<std::size_t>(it - (breaks_.begin() + 1));
  }

  bool operator==(const IntervalPartition&) const = default;

 private:
  std::vector<double> breaks_;
};

// Probability weights, one per cell.
class MeasureVector {
 public:
  explicit MeasureVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw DomainError("measure vector is empty");
    double sum = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("measure weights must be finite and >= 0");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kMeasureSumTolerance)
      throw DomainError("measure weights sum to " + formatReal(sum) + ", not 1");
  }

  static MeasureVector uniform(std::size_t k) {
    return MeasureVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const noexcept { return w_; }

 private:
  std::vector<double> w_;
};

inline MeasureVector lebesgueMeasure(const IntervalPartition& p) {
  const auto& b = p.breakpoints();
  std::vector<double> w(p.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = b[j + 1] - b[j];
  return MeasureVector(std::move(w));
}

// JSON form: ordered array of breakpoints [0, b1, ..., 1].
inline nlohmann::json partitionToJson(const IntervalPartition& p) { return p.breakpoints(); }

inline IntervalPartition partitionFromJson(const nlohmann::json& doc) {
  const auto& arr = doc.is_object() ? doc.at("breakpoints") : doc;
  if (!arr.is_array()) throw DomainError("partition JSON must be an array of breakpoints");
  return IntervalPartition(arr.get<std::vector<double>>());
}

}  // namespace escape_lab
