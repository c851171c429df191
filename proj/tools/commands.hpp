#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "escape_lab/escape_lab.hpp"

namespace escape_lab::cli {

enum class Format { Pretty, Csv, Json };

struct Output {
  std::string text;
  int exitCode = 0;
};

// Tables print 5 truncated decimals.
inline double truncateTo5(double v) { return std::trunc(v * 1e5) / 1e5; }

// ---------------------------------------------------------------------------
// tent-table

struct TentCell {
  double x0 = 0.0;
  std::size_t cells = 0;
  std::optional<EstimateReport> report;
  std::string error;  // set when the configuration could not be computed
};

struct TentTable {
  std::vector<double> x0s;
  std::vector<std::size_t> cellCounts;
  std::vector<TentCell> entries;  // row-major: x0 outer, cell count inner

  const TentCell& at(std::size_t row, std::size_t col) const { return entries[row * cellCounts.size() + col]; }
};

inline EstimateReport tentReport(double x0, std::size_t cells, double tol) {
  MapSpec spec;
  spec.kind = MapSpec::Kind::Tent;
  spec.parameter = x0;
  spec.level = levelsForCells(2, cells);
  if ((std::size_t{2} << spec.level) != cells)
    throw DomainError("cell count " + std::to_string(cells) + " is not a power of two");
  const auto sys = buildSystem(spec);
  return buildReport(sys.closed, sys.measure, tol);
}

inline TentTable cmdTentTable(const std::vector<double>& x0s, const std::vector<std::size_t>& cellCounts,
                              double tol = kDefaultTolerance) {
  TentTable table{x0s, cellCounts, {}};
  table.entries.resize(x0s.size() * cellCounts.size());
  // Entries are independent; each one parallelises its own holes internally.
  for (std::size_t r = 0; r < x0s.size(); ++r)
    for (std::size_t c = 0; c < cellCounts.size(); ++c) {
      auto& e = table.entries[r * cellCounts.size() + c];
      e.x0 = x0s[r];
      e.cells = cellCounts[c];
      try {
        e.report = tentReport(x0s[r], cellCounts[c], tol);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  return table;
}

// Published lower bound for (x0, k), if the pair is in the reference table.
inline std::optional<double> referenceLowerBound(double x0, std::size_t cells) {
  for (std::size_t r = 0; r < reference::kTentPeaks.size(); ++r) {
    if (std::abs(reference::kTentPeaks[r] - x0) > 1e-12) continue;
    for (std::size_t c = 0; c < reference::kCellCounts.size(); ++c)
      if (reference::kCellCounts[c] == cells) return reference::kTentLowerBound[r][c];
  }
  return std::nullopt;
}

inline Output renderTentTable(const TentTable& t, Format format, bool full, bool check) {
  Output out;
  std::ostringstream s;
  bool verdicts = true, matches = true;
  for (const auto& e : t.entries) {
    if (!e.report) {
      verdicts = false;
      continue;
    }
    verdicts = verdicts && e.report->jensenHolds && e.report->n2GeN1Holds;
    if (const auto ref = referenceLowerBound(e.x0, e.cells))
      matches = matches && std::abs(e.report->lowerBound - *ref) <= reference::kTableTolerance;
  }

  struct Quantity {
    const char* name;
    double (*get)(const EstimateReport&);
  };
  std::vector<Quantity> quantities = {{"lower_bound", [](const EstimateReport& r) { return r.lowerBound; }}};
  if (full) {
    quantities.push_back({"average_rho", [](const EstimateReport& r) { return r.averageRho; }});
    quantities.push_back({"n1", [](const EstimateReport& r) { return r.n1; }});
    quantities.push_back({"n2", [](const EstimateReport& r) { return r.n2; }});
  }

  if (format == Format::Json) {
    nlohmann::json doc;
    doc["cells"] = t.cellCounts;
    doc["x0"] = t.x0s;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : t.entries) {
      nlohmann::json row{{"x0", e.x0}, {"cells", e.cells}};
      if (e.report) {
        row["report"] = reportToJson(*e.report);
        if (const auto ref = referenceLowerBound(e.x0, e.cells)) row["reference_lower_bound"] = *ref;
      } else {
        row["error"] = e.error;
      }
      rows.push_back(row);
    }
    doc["entries"] = rows;
    s << doc.dump(2) << '\n';
  } else if (format == Format::Csv) {
    s << "quantity,x0";
    for (auto k : t.cellCounts) s << ',' << k;
    s << '\n';
    for (const auto& q : quantities)
      for (std::size_t r = 0; r < t.x0s.size(); ++r) {
        s << q.name << ',' << formatReal(t.x0s[r]);
        for (std::size_t c = 0; c < t.cellCounts.size(); ++c) {
          const auto& e = t.at(r, c);
          s << ',' << (e.report ? formatReal(q.get(*e.report)) : std::string("error"));
        }
        s << '\n';
      }
  } else {
    for (const auto& q : quantities) {
      s << q.name << '\n' << "  x0   ";
      for (auto k : t.cellCounts) s << ' ' << std::string(9 - std::min<std::size_t>(9, std::to_string(k).size()), ' ') << k;
      s << '\n';
      for (std::size_t r = 0; r < t.x0s.size(); ++r) {
        s << "  " << formatFixed(t.x0s[r], 2) << ' ';
        for (std::size_t c = 0; c < t.cellCounts.size(); ++c) {
          const auto& e = t.at(r, c);
          const std::string cell = e.report ? formatFixed(truncateTo5(q.get(*e.report)), 5) : "error";
          s << ' ' << std::string(9 - std::min<std::size_t>(9, cell.size()), ' ') << cell;
        }
        s << '\n';
      }
    }
    for (const auto& e : t.entries)
      if (!e.report) s << "error at x0=" << formatReal(e.x0) << " k=" << e.cells << ": " << e.error << '\n';
    if (check) s << "reference check: " << (matches ? "pass" : "FAIL") << '\n';
  }
  out.text = s.str();
  out.exitCode = (verdicts && (!check || matches)) ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// naive-table

struct NaiveRow {
  std::size_t cells;
  double n1;
};

inline std::vector<NaiveRow> cmdNaiveTable(const std::vector<std::size_t>& cellCounts) {
  std::vector<NaiveRow> rows;
  for (auto k : cellCounts) rows.push_back({k, naiveN1(k)});
  return rows;
}

inline std::optional<double> referenceN1(std::size_t cells) {
  for (std::size_t c = 0; c < reference::kCellCounts.size(); ++c)
    if (reference::kCellCounts[c] == cells) return reference::kNaiveN1[c];
  return std::nullopt;
}

inline bool n1MatchesReference(std::size_t cells, double n1) {
  const auto ref = referenceN1(cells);
  return !ref || std::abs(truncateTo5(n1) - *ref) < 5e-7;
}

inline Output renderNaiveTable(const std::vector<NaiveRow>& rows, Format format, bool check) {
  Output out;
  std::ostringstream s;
  bool matches = true;
  for (const auto& r : rows) matches = matches && n1MatchesReference(r.cells, r.n1);
  if (format == Format::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back({{"cells", r.cells}, {"n1", r.n1}});
    s << nlohmann::json{{"n1", arr}}.dump(2) << '\n';
  } else if (format == Format::Csv) {
    s << "cells,n1\n";
    for (const auto& r : rows) s << r.cells << ',' << formatReal(r.n1) << '\n';
  } else {
    s << "  k       N1\n";
    for (const auto& r : rows) s << "  " << r.cells << std::string(8 - std::min<std::size_t>(7, std::to_string(r.cells).size()), ' ') << formatFixed(truncateTo5(r.n1), 5) << '\n';
    if (check) s << "reference check: " << (matches ? "pass" : "FAIL") << '\n';
  }
  out.text = s.str();
  out.exitCode = (!check || matches) ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// cat

struct CatResult {
  EstimateReport report;
  std::array<double, 5> closedForm;
  std::array<double, 5> measure;
  int levels = 0;
  std::vector<double> refinedEigenvalues;  // per coarse hole, when levels > 0
};

inline CatResult cmdCat(double tol = kDefaultTolerance, int levels = 0) {
  const auto model = makeCatMapModel();
  CatResult r{buildReport(model.transition, model.stateMeasure, tol), cat_map::referenceEigenvalues(),
              cat_map::elementAreas(), levels, {}};
  if (levels > 0) {
    const auto chain = refineSymbolic(model, levels);
    SpectralOptions opts;
    opts.tol = tol;
    for (std::size_t i = 0; i < model.stateCount(); ++i)
      r.refinedEigenvalues.push_back(leadingEigenvalue(punchCoarseHole(chain, i), opts).eigenvalue);
  }
  return r;
}

inline bool catMatchesReference(const CatResult& c) {
  for (std::size_t i = 0; i < 5; ++i)
    if (std::abs(c.report.holeRates[i].p - c.closedForm[i]) > 1e-10) return false;
  for (std::size_t i = 0; i < c.refinedEigenvalues.size(); ++i)
    if (std::abs(c.refinedEigenvalues[i] - c.closedForm[i]) > 1e-10) return false;
  return std::abs(c.report.averageRho - reference::kCatAverageRho) <= reference::kCatTolerance &&
         std::abs(c.report.lowerBound - reference::kCatLowerBound) <= reference::kCatTolerance;
}

inline Output renderCat(const CatResult& c, Format format, bool check) {
  Output out;
  std::ostringstream s;
  const bool matches = catMatchesReference(c);
  if (format == Format::Json) {
    auto doc = reportToJson(c.report);
    doc["closed_form_eigenvalues"] = c.closedForm;
    doc["measures"] = c.measure;
    if (!c.refinedEigenvalues.empty()) {
      doc["refinement_levels"] = c.levels;
      doc["refined_eigenvalues"] = c.refinedEigenvalues;
    }
    s << doc.dump(2) << '\n';
  } else if (format == Format::Csv) {
    s << reportToCsv(c.report);
    for (std::size_t i = 0; i < 5; ++i) {
      s << "closed_form_p," << i + 1 << ',' << formatReal(c.closedForm[i]) << '\n';
      s << "measure," << i + 1 << ',' << formatReal(c.measure[i]) << '\n';
    }
    for (std::size_t i = 0; i < c.refinedEigenvalues.size(); ++i)
      s << "refined_p," << i + 1 << ',' << formatReal(c.refinedEigenvalues[i]) << '\n';
  } else {
    s << "hole  measure    p (computed)       p (closed form)    rho\n";
    for (std::size_t i = 0; i < 5; ++i) {
      const auto& h = c.report.holeRates[i];
      s << "  L" << i + 1 << "  " << formatFixed(c.measure[i], 5) << "    " << formatFixed(h.p, 12) << "     "
        << formatFixed(c.closedForm[i], 12) << "     " << formatFixed(h.rho, 5)
        << (h.stronglyConnected ? "" : "   (reducible)") << '\n';
    }
    if (!c.refinedEigenvalues.empty()) {
      s << "after " << c.levels << " refinement step(s):";
      for (double v : c.refinedEigenvalues) s << ' ' << formatFixed(v, 12);
      s << '\n';
    }
    s << "average rho  " << formatFixed(c.report.averageRho, 5) << '\n'
      << "lower bound  " << formatFixed(c.report.lowerBound, 5) << '\n'
      << "N1 (k=5)     " << formatFixed(c.report.n1, 5) << '\n'
      << "N2           " << formatFixed(c.report.n2, 5) << '\n'
      << "average >= lower bound: " << (c.report.jensenHolds ? "yes" : "NO") << '\n'
      << "N2 >= N1: " << (c.report.n2GeN1Holds ? "yes" : "NO") << '\n';
    if (check) s << "reference check: " << (matches ? "pass" : "FAIL") << '\n';
  }
  out.text = s.str();
  out.exitCode = (c.report.jensenHolds && c.report.n2GeN1Holds && (!check || matches)) ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// logistic

struct LogisticResult {
  int n = 1;
  IntervalPartition partition;
  MeasureVector measure;
  EstimateReport report;
  EstimateReport tentReference;
  double maxDifference = 0.0;  // largest |logistic - tent| over all report reals
};

inline double reportDistance(const EstimateReport& a, const EstimateReport& b) {
  auto diff = [](double x, double y) {
    if (std::isinf(x) || std::isinf(y)) return x == y ? 0.0 : kInfinity;
    return std::abs(x - y);
  };
  if (a.holeRates.size() != b.holeRates.size()) return kInfinity;
  double d = 0.0;
  for (std::size_t i = 0; i < a.holeRates.size(); ++i)
    d = std::max({d, diff(a.holeRates[i].p, b.holeRates[i].p), diff(a.holeRates[i].rho, b.holeRates[i].rho)});
  return std::max({d, diff(a.averageRho, b.averageRho), diff(a.lowerBound, b.lowerBound), diff(a.n1, b.n1),
                   diff(a.n2, b.n2), diff(a.quadraticBound, b.quadraticBound)});
}

inline LogisticResult cmdLogistic(int n, double tol = kDefaultTolerance) {
  MapSpec spec;
  spec.kind = MapSpec::Kind::Logistic;
  spec.level = n;
  const auto sys = buildSystem(spec);
  auto report = buildReport(sys.closed, sys.measure, tol);
  auto tent = tentReport(0.5, std::size_t{1} << n, tol);
  const double d = reportDistance(report, tent);
  return {n, *sys.partition, sys.measure, std::move(report), std::move(tent), d};
}

inline constexpr double kTransferTolerance = 1e-12;

inline Output renderLogistic(const LogisticResult& l, Format format, bool check) {
  Output out;
  std::ostringstream s;
  const bool equal = l.maxDifference <= kTransferTolerance;
  const auto ref = referenceLowerBound(0.5, l.partition.size());
  const bool matches = !ref || std::abs(l.report.lowerBound - *ref) <= reference::kTableTolerance;
  if (format == Format::Json) {
    auto doc = reportToJson(l.report);
    doc["n"] = l.n;
    doc["partition"] = partitionToJson(l.partition);
    doc["measure"] = l.measure.weights();
    doc["max_difference_from_tent"] = l.maxDifference;
    doc["equals_tent_report"] = equal;
    s << doc.dump(2) << '\n';
  } else if (format == Format::Csv) {
    s << reportToCsv(l.report);
    for (std::size_t i = 0; i <= l.partition.size(); ++i)
      s << "breakpoint," << i << ',' << formatReal(l.partition.breakpoints()[i]) << '\n';
    s << "max_difference_from_tent,," << formatReal(l.maxDifference) << '\n';
  } else {
    s << "logistic partition, n = " << l.n << " (" << l.partition.size() << " cells, mu = 1/" << l.partition.size()
      << " each)\n  breakpoints:";
    for (double b : l.partition.breakpoints()) s << ' ' << formatFixed(b, 6);
    s << "\naverage rho  " << formatFixed(l.report.averageRho, 5) << '\n'
      << "lower bound  " << formatFixed(l.report.lowerBound, 5) << '\n'
      << "N1           " << formatFixed(l.report.n1, 5) << '\n'
      << "N2           " << formatFixed(l.report.n2, 5) << '\n'
      << "max |logistic - tent(x0=0.5)| = " << formatReal(l.maxDifference) << (equal ? " (equal)" : " (DIFFERENT)")
      << '\n';
    if (check) s << "reference check: " << (matches ? "pass" : "FAIL") << '\n';
  }
  out.text = s.str();
  out.exitCode = (equal && l.report.jensenHolds && l.report.n2GeN1Holds && (!check || matches)) ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateRequest {
  MapSpec spec;
  std::size_t hole = 0;  // 0-based
  long samples = 10'000'000;
  long nMax = 20;
  std::uint64_t seed = 1;
  std::pair<int, int> window{5, 20};
  InitialLaw initial = InitialLaw::UniformOnComplement;
  double tol = kDefaultTolerance;
};

struct SimulateResult {
  SimulateRequest request;
  Interval hole;
  double spectralRho = 0.0;
  bool holeStronglyConnected = true;
  SurvivalSeries series;
  RateFit fit;
  double discrepancy = 0.0;  // |fit - spectral| / spectral
  double allowed = 0.0;      // max(2% of spectral, 3 stderr) in absolute units
  bool pass = false;
};

inline constexpr double kOracleRelativeTolerance = 0.02;
inline constexpr double kOracleSigmas = 3.0;

inline bool oracleAgrees(double spectral, const RateFit& fit) {
  return std::abs(fit.rate - spectral) <= std::max(kOracleRelativeTolerance * spectral, kOracleSigmas * fit.standardError);
}

inline SimulateResult cmdSimulate(const SimulateRequest& req) {
  if (req.samples <= 0) throw DomainError("--samples must be positive");
  if (req.nMax <= 0) throw DomainError("--nmax must be positive");
  if (req.spec.kind == MapSpec::Kind::Cat || req.spec.kind == MapSpec::Kind::Logistic)
    throw DomainError("simulate needs a piecewise-linear interval map (tent or doubling)");
  const auto sys = buildSystem(req.spec);
  if (req.hole >= sys.closed.order())
    throw DomainError("hole " + std::to_string(req.hole + 1) + " outside 1.." + std::to_string(sys.closed.order()));

  SimulateResult r;
  r.request = req;
  r.hole = sys.partition->cell(req.hole);
  SpectralOptions opts;
  opts.tol = req.tol;
  const auto open = punchHole(sys.closed, req.hole);
  r.spectralRho = escapeRateFromEigenvalue(leadingEigenvalue(open, opts).eigenvalue);
  r.holeStronglyConnected = chainStructure(open).stronglyConnected;
  r.series = simulateSurvival(*sys.map, r.hole, req.nMax, req.samples, req.seed, req.initial);
  r.fit = fitEscapeRate(r.series, {req.window.first, static_cast<int>(std::min<long>(req.window.second, req.nMax))});
  r.discrepancy = std::abs(r.fit.rate - r.spectralRho) / r.spectralRho;
  r.allowed = std::max(kOracleRelativeTolerance * r.spectralRho, kOracleSigmas * r.fit.standardError);
  r.pass = oracleAgrees(r.spectralRho, r.fit);
  return r;
}

inline Output renderSimulate(const SimulateResult& r, Format format, bool check) {
  Output out;
  std::ostringstream s;
  const char* law = r.request.initial == InitialLaw::UniformOnComplement ? "uniform on complement of hole"
                                                                         : "uniform on [0,1]";
  if (format == Format::Json) {
    nlohmann::json doc{{"map", mapSpecToJson(r.request.spec)},
                       {"hole", r.request.hole + 1},
                       {"hole_interval", {r.hole.lo, r.hole.hi}},
                       {"samples", r.request.samples},
                       {"seed", r.request.seed},
                       {"initial_law", law},
                       {"spectral_rho", detail::realToJson(r.spectralRho)},
                       {"fit_rate", r.fit.rate},
                       {"fit_stderr", r.fit.standardError},
                       {"fit_window", {r.fit.window.first, r.fit.window.second}},
                       {"relative_discrepancy", r.discrepancy},
                       {"hole_strongly_connected", r.holeStronglyConnected},
                       {"pass", r.pass}};
    nlohmann::json counts = nlohmann::json::array();
    for (auto c : r.series.counts) counts.push_back(c);
    doc["survivors"] = counts;
    s << doc.dump(2) << '\n';
  } else if (format == Format::Csv) {
    s << survivalToCsv(r.series);
  } else {
    s << "map " << mapSpecToJson(r.request.spec).dump() << ", hole " << r.request.hole + 1 << " = ["
      << formatFixed(r.hole.lo, 6) << ", " << formatFixed(r.hole.hi, 6) << "]\n"
      << "initial law: " << law << ", N = " << r.request.samples << ", seed = " << r.request.seed << '\n'
      << "spectral rho     " << formatFixed(r.spectralRho, 5) << '\n'
      << "Monte Carlo fit  " << formatFixed(r.fit.rate, 5) << " +- " << formatFixed(r.fit.standardError, 5)
      << " over n in [" << r.fit.window.first << ", " << r.fit.window.second << "]\n"
      << "discrepancy      " << formatFixed(100.0 * r.discrepancy, 2) << "% (allowed "
      << formatFixed(r.allowed, 5) << " absolute)\n"
      << (r.holeStronglyConnected ? "" : "note: the open chain is reducible; survival may carry a polynomial prefactor\n")
      << "agreement: " << (r.pass ? "pass" : "FAIL") << '\n';
  }
  out.text = s.str();
  out.exitCode = (!check || r.pass) ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// report

inline Output renderReport(const MarkovSystem& sys, const EstimateReport& rep, Format format) {
  Output out;
  std::ostringstream s;
  if (format == Format::Json) {
    auto doc = reportToJson(rep);
    doc["map"] = mapSpecToJson(sys.spec);
    doc["measure"] = sys.measure.weights();
    if (sys.partition) doc["partition"] = partitionToJson(*sys.partition);
    s << doc.dump(2) << '\n';
  } else if (format == Format::Csv) {
    s << reportToCsv(rep);
  } else {
    s << "map " << mapSpecToJson(sys.spec).dump() << ", " << sys.closed.order() << " cells\n"
      << "hole  measure     p          rho\n";
    for (const auto& h : rep.holeRates)
      s << "  " << h.holeIndex + 1 << "   " << formatFixed(sys.measure[h.holeIndex], 5) << "   "
        << formatFixed(h.p, 5) << "   " << formatFixed(h.rho, 5) << (h.stronglyConnected ? "" : "   (reducible)")
        << '\n';
    s << "average rho  " << formatFixed(rep.averageRho, 5) << '\n'
      << "lower bound  " << formatFixed(rep.lowerBound, 5) << '\n'
      << "N1           " << formatFixed(rep.n1, 5) << '\n'
      << "N2           " << formatFixed(rep.n2, 5) << '\n'
      << "average >= lower bound: " << (rep.jensenHolds ? "yes" : "NO") << '\n'
      << "N2 >= N1: " << (rep.n2GeN1Holds ? "yes" : "NO") << '\n';
  }
  out.text = s.str();
  out.exitCode = (rep.jensenHolds && rep.n2GeN1Holds) ? 0 : 1;
  return out;
}

}  // namespace escape_lab::cli
