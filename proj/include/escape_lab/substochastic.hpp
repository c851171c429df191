#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"

namespace escape_lab {

inline constexpr double kRowSumSlack = 1e-12;

// Dense k x k nonnegative matrix with row sums <= 1. Rows listed in holes() are zero.
class SubstochasticMatrix {
 public:
  SubstochasticMatrix() = default;

  SubstochasticMatrix(std::size_t order, std::vector<double> rowMajor)
      : order_(order), entries_(std::move(rowMajor)) {
    if (order_ == 0) throw DimensionError("matrix order must be positive");
    if (entries_.size() != order_ * order_)
      throw DimensionError("expected " + std::to_string(order_ * order_) + " entries, got " +
                           std::to_string(entries_.size()));
    for (std::size_t i = 0; i < order_; ++i) {
      double sum = 0.0;
      for (double v : row(i)) {
        if (!(v >= 0.0) || !std::isfinite(v))
          throw DomainError("matrix entries must be finite and nonnegative (row " +
                            std::to_string(i) + ")");
        sum += v;
      }
      if (sum > 1.0 + kRowSumSlack)
        throw DomainError("row " + std::to_string(i) + " sums to " + formatReal(sum) + " > 1");
    }
  }

  static SubstochasticMatrix fromRows(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.size());
    for (const auto& r : rows) {
      if (r.size() != rows.size()) throw DimensionError("matrix rows must be square");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return SubstochasticMatrix(rows.size(), std::move(flat));
  }

  std::size_t order() const noexcept { return order_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * order_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * order_, order_};
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

  double rowSum(std::size_t i) const {
    double s = 0.0;
    for (double v : row(i)) s += v;
    return s;
  }

  bool isStochastic(double tol = kRowSumSlack) const {
    for (std::size_t i = 0; i < order_; ++i)
      if (std::abs(rowSum(i) - 1.0) > tol) return false;
    return true;
  }

  const std::vector<std::size_t>& holes() const noexcept { return holes_; }
  std::optional<std::size_t> holeIndex() const {
    if (holes_.empty()) return std::nullopt;
    return holes_.front();
  }

  // Copy with row i zeroed; punching an existing hole again is a no-op.
  SubstochasticMatrix withHole(std::size_t i) const {
    if (i >= order_)
      throw DomainError("hole index " + std::to_string(i) + " out of range for order " +
                        std::to_string(order_));
    SubstochasticMatrix out = *this;
    std::fill_n(out.entries_.begin() + static_cast<std::ptrdiff_t>(i * order_), order_, 0.0);
    if (std::find(out.holes_.begin(), out.holes_.end(), i) == out.holes_.end()) {
      out.holes_.push_back(i);
      std::sort(out.holes_.begin(), out.holes_.end());
    }
    return out;
  }

  bool operator==(const SubstochasticMatrix&) const = default;

 private:
  std::size_t order_ = 0;
  std::vector<double> entries_;
  std::vector<std::size_t> holes_;
};

// Row-major CSV, 17 significant digits, no header.
inline std::string matrixToCsv(const SubstochasticMatrix& m) {
  std::ostringstream out;
  for (std::size_t i = 0; i < m.order(); ++i) {
    for (std::size_t j = 0; j < m.order(); ++j) {
      if (j) out << ',';
      out << formatReal(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

inline SubstochasticMatrix matrixFromCsv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) r.push_back(parseReal(cell));
    rows.push_back(std::move(r));
  }
  return SubstochasticMatrix::fromRows(rows);
}

}  // namespace escape_lab
