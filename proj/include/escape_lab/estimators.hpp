#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"
#include "escape_lab/parallel.hpp"
#include "escape_lab/partition.hpp"
#include "escape_lab/spectral.hpp"
#include "escape_lab/substochastic.hpp"
#include "escape_lab/transition.hpp"

namespace escape_lab {

inline constexpr double kInequalitySlack = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Survival factor p (leading eigenvalue with the hole punched) and escape rate rho = -ln p.
struct HoleRate {
  std::size_t holeIndex = 0;
  double p = 0.0;
  double rho = kInfinity;
  bool stronglyConnected = true;
  int period = 1;
};

struct EstimateReport {
  std::vector<HoleRate> holeRates;
  double averageRho = 0.0;      // sum mu_i rho_i
  double lowerBound = 0.0;      // -ln sum mu_i p_i
  double n1 = 0.0;              // -ln(1 - 1/k)
  double n2 = 0.0;              // -sum h_i ln(1 - h_i)
  double quadraticBound = 0.0;  // -ln(1 - sum h_i^2), sits between n1 and n2
  bool jensenHolds = false;
  bool n2GeN1Holds = false;

  bool allIrreducible() const {
    for (const auto& h : holeRates)
      if (!h.stronglyConnected) return false;
    return true;
  }
};

inline double escapeRateFromEigenvalue(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0 + kInequalitySlack))
    throw DomainError("survival factor must lie in [0, 1], got " + formatReal(lambda));
  if (lambda == 0.0) return kInfinity;
  return lambda >= 1.0 ? 0.0 : -std::log(lambda);
}

// Punch each cell in turn and take the leading eigenvalue; holes are solved in parallel.
inline std::vector<HoleRate> perHoleRates(const SubstochasticMatrix& closed, double tol = kDefaultTolerance,
                                          unsigned workers = workerCount()) {
  if (!closed.isStochastic()) throw DomainError("perHoleRates expects a stochastic (closed-system) matrix");
  std::vector<HoleRate> out(closed.order());
  SpectralOptions opts;
  opts.tol = tol;
  parallelFor(
      closed.order(),
      [&](std::size_t i) {
        const auto open = punchHole(closed, i);
        SpectralResult res;
        try {
          res = leadingEigenvalue(open, opts);
        } catch (const ConvergenceError& e) {
          throw ConvergenceError("hole " + std::to_string(i) + ": " + e.what(), e.residual(), i);
        }
        const auto structure = chainStructure(open);
        out[i] = HoleRate{i, res.eigenvalue, escapeRateFromEigenvalue(res.eigenvalue), structure.stronglyConnected,
                          structure.period};
      },
      workers);
  return out;
}

namespace detail {
inline void requireSameLength(const MeasureVector& mu, const std::vector<HoleRate>& rates) {
  if (mu.size() != rates.size())
    throw DimensionError("measure has " + std::to_string(mu.size()) + " cells but " +
                         std::to_string(rates.size()) + " hole rates were given");
}
}  // namespace detail

// An infinite rate on a cell of positive measure makes the average infinite.
inline double averageEscapeRate(const MeasureVector& mu, const std::vector<HoleRate>& rates) {
  detail::requireSameLength(mu, rates);
  double sum = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (mu[i] == 0.0) continue;
    if (std::isinf(rates[i].rho)) return kInfinity;
    sum += mu[i] * rates[i].rho;
  }
  return sum;
}

inline double lowerBoundEstimate(const MeasureVector& mu, const std::vector<HoleRate>& rates) {
  detail::requireSameLength(mu, rates);
  double sum = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) sum += mu[i] * rates[i].p;
  if (sum <= 0.0) return kInfinity;
  return sum >= 1.0 ? 0.0 : -std::log(sum);
}

inline double naiveN1(std::size_t k) {
  if (k < 2) throw DomainError("N1 needs at least two cells");
  return -std::log1p(-1.0 / static_cast<double>(k));
}

inline double naiveN2(const MeasureVector& mu) {
  double sum = 0.0;
  for (double h : mu.weights()) {
    if (h == 0.0) continue;
    if (h >= 1.0) return kInfinity;
    sum -= h * std::log1p(-h);
  }
  return sum;
}

inline double quadraticBound(const MeasureVector& mu) {
  double s = 0.0;
  for (double h : mu.weights()) s += h * h;
  if (s >= 1.0) return kInfinity;
  return -std::log1p(-s);
}

inline EstimateReport assembleReport(std::vector<HoleRate> rates, const MeasureVector& mu) {
  EstimateReport r;
  detail::requireSameLength(mu, rates);
  r.holeRates = std::move(rates);
  r.averageRho = averageEscapeRate(mu, r.holeRates);
  r.lowerBound = lowerBoundEstimate(mu, r.holeRates);
  r.n1 = naiveN1(mu.size());
  r.n2 = naiveN2(mu);
  r.quadraticBound = quadraticBound(mu);
  r.jensenHolds = r.averageRho >= r.lowerBound - kInequalitySlack;
  r.n2GeN1Holds = r.n2 >= r.n1 - kInequalitySlack;
  return r;
}

inline EstimateReport buildReport(const SubstochasticMatrix& closed, const MeasureVector& mu,
                                  double tol = kDefaultTolerance, unsigned workers = workerCount()) {
  if (closed.order() != mu.size()) throw DimensionError("matrix order and measure length differ");
  return assembleReport(perHoleRates(closed, tol, workers), mu);
}

// ---------------------------------------------------------------------------
// Serialization. Reals keep full precision; infinities are the string "inf".
// Hole numbers in files are 1-based.

namespace detail {
inline nlohmann::json realToJson(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
inline double realFromJson(const nlohmann::json& j) {
  if (j.is_string()) return parseReal(j.get<std::string>());
  return j.get<double>();
}
}  // namespace detail

inline nlohmann::json reportToJson(const EstimateReport& r) {
  nlohmann::json holes = nlohmann::json::array();
  for (const auto& h : r.holeRates)
    holes.push_back({{"hole", h.holeIndex + 1},
                     {"p", detail::realToJson(h.p)},
                     {"rho", detail::realToJson(h.rho)},
                     {"strongly_connected", h.stronglyConnected},
                     {"period", h.period}});
  return {{"holes", holes},
          {"average_rho", detail::realToJson(r.averageRho)},
          {"lower_bound", detail::realToJson(r.lowerBound)},
          {"n1", detail::realToJson(r.n1)},
          {"n2", detail::realToJson(r.n2)},
          {"quadratic_bound", detail::realToJson(r.quadraticBound)},
          {"jensen_holds", r.jensenHolds},
          {"n2_ge_n1_holds", r.n2GeN1Holds}};
}

inline EstimateReport reportFromJson(const nlohmann::json& doc) {
  EstimateReport r;
  for (const auto& h : doc.at("holes")) {
    HoleRate rate;
    const auto hole = h.at("hole").get<std::size_t>();
    if (hole == 0) throw DomainError("hole numbers are 1-based");
    rate.holeIndex = hole - 1;
    rate.p = detail::realFromJson(h.at("p"));
    rate.rho = detail::realFromJson(h.at("rho"));
    rate.stronglyConnected = h.value("strongly_connected", true);
    rate.period = h.value("period", 1);
    r.holeRates.push_back(rate);
  }
  r.averageRho = detail::realFromJson(doc.at("average_rho"));
  r.lowerBound = detail::realFromJson(doc.at("lower_bound"));
  r.n1 = detail::realFromJson(doc.at("n1"));
  r.n2 = detail::realFromJson(doc.at("n2"));
  r.quadraticBound = detail::realFromJson(doc.at("quadratic_bound"));
  r.jensenHolds = doc.at("jensen_holds").get<bool>();
  r.n2GeN1Holds = doc.at("n2_ge_n1_holds").get<bool>();
  return r;
}

// Long-format CSV: "field,hole,value". Per-hole rows carry the hole number;
// summary rows leave it empty.
inline std::string reportToCsv(const EstimateReport& r) {
  std::ostringstream out;
  out << "field,hole,value\n";
  for (const auto& h : r.holeRates) {
    const auto n = std::to_string(h.holeIndex + 1);
    out << "p," << n << ',' << formatReal(h.p) << '\n';
    out << "rho," << n << ',' << formatReal(h.rho) << '\n';
    out << "strongly_connected," << n << ',' << (h.stronglyConnected ? 1 : 0) << '\n';
    out << "period," << n << ',' << h.period << '\n';
  }
  out << "average_rho,," << formatReal(r.averageRho) << '\n';
  out << "lower_bound,," << formatReal(r.lowerBound) << '\n';
  out << "n1,," << formatReal(r.n1) << '\n';
  out << "n2,," << formatReal(r.n2) << '\n';
  out << "quadratic_bound,," << formatReal(r.quadraticBound) << '\n';
  out << "jensen_holds,," << (r.jensenHolds ? 1 : 0) << '\n';
  out << "n2_ge_n1_holds,," << (r.n2GeN1Holds ? 1 : 0) << '\n';
  return out.str();
}

inline EstimateReport reportFromCsv(const std::string& text) {
  EstimateReport r;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "field,hole,value") throw DomainError("unexpected report CSV header: " + line);
  auto holeAt = [&](std::size_t n) -> HoleRate& {
    if (n == 0) throw DomainError("hole numbers are 1-based");
    if (r.holeRates.size() < n) r.holeRates.resize(n);
    r.holeRates[n - 1].holeIndex = n - 1;
    return r.holeRates[n - 1];
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw DomainError("malformed report CSV row: " + line);
    const std::string field = line.substr(0, a), hole = line.substr(a + 1, b - a - 1), value = line.substr(b + 1);
    if (!hole.empty()) {
      auto& h = holeAt(std::stoul(hole));
      if (field == "p") h.p = parseReal(value);
      else if (field == "rho") h.rho = parseReal(value);
      else if (field == "strongly_connected") h.stronglyConnected = value == "1";
      else if (field == "period") h.period = std::stoi(value);
      else throw DomainError("unknown per-hole field: " + field);
    } else if (field == "average_rho") r.averageRho = parseReal(value);
    else if (field == "lower_bound") r.lowerBound = parseReal(value);
    else if (field == "n1") r.n1 = parseReal(value);
    else if (field == "n2") r.n2 = parseReal(value);
    else if (field == "quadratic_bound") r.quadraticBound = parseReal(value);
    else if (field == "jensen_holds") r.jensenHolds = value == "1";
    else if (field == "n2_ge_n1_holds") r.n2GeN1Holds = value == "1";
    else throw DomainError("unknown report field: " + field);
  }
  return r;
}

}  // namespace escape_lab
