// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "escape_lab/escape_lab.hpp"

using namespace escape_lab;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct TentSystem {
  PiecewiseLinearMap map;
  IntervalPartition partition;
  SubstochasticMatrix closed;
};

TentSystem tentSystem(double x0, std::size_t cells) {
  auto map = makeSkewedTent(x0);
  int levels = 0;
  while ((std::size_t{2} << levels) < cells) ++levels;
  auto p = refine(map, map.basePartition(), levels);
  auto closed = transitionMatrix(map, p);
  return {std::move(map), std::move(p), std::move(closed)};
}

// Noise-free survival fraction for the uniform-on-complement start: cell-uniform
// densities stay cell-uniform under the affine branches, so S(n) = pi0 Q^n 1 where
// Q is the closed matrix with the hole column removed.
std::vector<double> exactSurvival(const TentSystem& s, std::size_t hole, int nMax) {
  const std::size_t k = s.closed.order();
  const auto mu = lebesgueMeasure(s.partition);
  std::vector<double> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = i == hole ? 0.0 : mu[i] / (1.0 - mu[hole]);
  std::vector<double> out{1.0};
  for (int n = 1; n <= nMax; ++n) {
    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (j != hole) w[j] += v[i] * s.closed(i, j);
    v = w;
    double total = 0.0;
    for (double x : v) total += x;
    out.push_back(total);
  }
  return out;
}

double olsRate(const std::vector<double>& survival, int lo, int hi) {
  double mx = 0, my = 0;
  const int n = hi - lo + 1;
  for (int t = lo; t <= hi; ++t) {
    mx += t;
    my += std::log(survival[t]);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int t = lo; t <= hi; ++t) {
    sxx += (t - mx) * (t - mx);
    sxy += (t - mx) * (std::log(survival[t]) - my);
  }
  return -sxy / sxx;
}

void criterionNaive() {
  const auto t0 = Clock::now();
  std::vector<double> n1;
  for (auto k : reference::kCellCounts) n1.push_back(naiveN1(k));
  const double elapsed = secondsSince(t0);
  bool ok = true;
  std::string detail;
  for (std::size_t c = 0; c < n1.size(); ++c) {
    const double shown = std::trunc(n1[c] * 1e5) / 1e5;
    const bool match = std::abs(shown - reference::kNaiveN1[c]) < 5e-7;
    ok = ok && match;
    detail += "k=" + std::to_string(reference::kCellCounts[c]) + fmt(":%.5f", shown) + (match ? " " : "(x) ");
  }
  ok = ok && elapsed < 1e-3;
  verdict(1, ok, "naive N1 against the 5-decimal reference values", detail + fmt("in %.2e s", elapsed));
}

void criterionTentGrid() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad = 0;
  std::string where;
  for (std::size_t r = 0; r < reference::kTentPeaks.size(); ++r)
    for (std::size_t c = 0; c < reference::kCellCounts.size(); ++c) {
      const double x0 = reference::kTentPeaks[r];
      const auto s = tentSystem(x0, reference::kCellCounts[c]);
      const double lb = buildReport(s.closed, lebesgueMeasure(s.partition)).lowerBound;
      const double err = std::abs(lb - reference::kTentLowerBound[r][c]);
      if (err > worst) {
        worst = err;
        where = fmt("x0=%.1f", x0) + " k=" + std::to_string(reference::kCellCounts[c]);
      }
      if (err > reference::kTableTolerance) ++bad;
    }
  const double elapsed = secondsSince(t0);
  verdict(2, bad == 0 && elapsed < 10.0, "tent-map lower bound on 35 (x0, k) pairs within 1e-4",
          std::to_string(35 - bad) + "/35 within tolerance, worst error " + fmt("%.2e", worst) + " at " + where +
              fmt(", %.2f s", elapsed));
}

void criterionCat() {
  const auto model = makeCatMapModel();
  const auto r = buildReport(model.transition, model.stateMeasure);
  const double l = 3.0 - std::sqrt(5.0);
  const double l5 = (1.0 + std::sqrt(2.0)) / 2.0 * l;
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::abs(r.holeRates[i].p - (i < 4 ? l : l5)));
  const bool avg = std::abs(r.averageRho - reference::kCatAverageRho) <= reference::kCatTolerance;
  const bool lb = std::abs(r.lowerBound - reference::kCatLowerBound) <= reference::kCatTolerance;
  verdict(3, worst <= 1e-10 && avg && lb, "cat map eigenvalues and averaged rates",
          fmt("max |lambda_i - closed form| = %.2e", worst) + fmt(", <rho> = %.6f", r.averageRho) +
              fmt(" (ref 0.2494), lower bound = %.6f (ref 0.2476)", r.lowerBound));
}

void criterionJensen() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  int bad = 0, badEquality = 0;
  double worstEq = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng() % 63;
    std::vector<double> w(k);
    double sum = 0.0;
    for (auto& x : w) sum += x = e(rng);
    for (auto& x : w) x /= sum;
    double t = 0.0;
    for (double x : w) t += x;
    *std::max_element(w.begin(), w.end()) += 1.0 - t;
    const MeasureVector mu(std::move(w));
    std::vector<HoleRate> rates(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double p = u(rng);
      rates[i] = {i, p, escapeRateFromEigenvalue(p)};
    }
    const auto r = assembleReport(rates, mu);
    if (!(r.averageRho >= r.lowerBound - 1e-12 && r.n2 >= r.quadraticBound - 1e-12 &&
          r.quadraticBound >= r.n1 - 1e-12))
      ++bad;

    // Equality cases: uniform measure collapses N2 and the quadratic bound onto N1,
    // equal p_i collapse the average onto the bound.
    const auto uniform = MeasureVector::uniform(k);
    const double p = u(rng);
    const auto eq = assembleReport(std::vector<HoleRate>(k, HoleRate{0, p, escapeRateFromEigenvalue(p)}), uniform);
    const double gap = std::max({std::abs(eq.n2 - eq.n1), std::abs(eq.quadraticBound - eq.n1),
                                 std::abs(eq.averageRho - eq.lowerBound)});
    const auto eq2 = assembleReport(std::vector<HoleRate>(k, HoleRate{0, p, escapeRateFromEigenvalue(p)}), mu);
    const double gap2 = std::abs(eq2.averageRho - eq2.lowerBound);
    worstEq = std::max({worstEq, gap, gap2});
    if (gap > 1e-12 || gap2 > 1e-12) ++badEquality;
  }
  verdict(4, bad == 0 && badEquality == 0, "Jensen and naive-estimate ordering on 1000 random pairs (k <= 64)",
          std::to_string(1000 - bad) + "/1000 inequalities hold, " + std::to_string(1000 - badEquality) +
              "/1000 equality cases within 1e-12" + fmt(" (worst gap %.1e)", worstEq));
}

void criterionOracle() {
  const auto t0 = Clock::now();
  constexpr long kSamples = 10'000'000;
  constexpr std::uint64_t kSeed = 42;
  int total = 0, passed = 0;
  std::string failed;
  for (double x0 : {0.2, 0.5})
    for (std::size_t k : {2u, 4u}) {
      const auto s = tentSystem(x0, k);
      for (std::size_t h = 0; h < k; ++h) {
        const auto open = punchHole(s.closed, h);
        const double rho = escapeRateFromEigenvalue(leadingEigenvalue(open).eigenvalue);
        const auto series = simulateSurvival(s.map, s.partition.cell(h), 20, kSamples, kSeed);
        const auto fit = fitEscapeRate(series, {5, 20});
        const double allowed = std::max(0.02 * rho, 3.0 * fit.standardError);
        const bool ok = std::abs(fit.rate - rho) <= allowed;
        ++total;
        passed += ok;
        std::printf("    x0=%.1f k=%zu hole %zu: spectral %.5f, fit %.5f +- %.5f, |diff| %.5f (allowed %.5f)%s\n", x0, k,
                    h + 1, rho, fit.rate, fit.standardError, std::abs(fit.rate - rho), allowed, ok ? "" : "  <- outside");
        if (!ok) {
          // Evidence: the noise-free survival curve of this chain, fitted the same way.
          const double exact = olsRate(exactSurvival(s, h, 20), 5, 20);
          const auto cs = chainStructure(open);
          std::printf("      exact survival fit over [5, 20] = %.5f; open chain has %zu communicating classes "
                      "with the same Perron root, so S(n) ~ (n + c) lambda^n\n",
                      exact, cs.cyclicClasses.size());
          failed += fmt(" x0=%.1f", x0) + " k=" + std::to_string(k) + " hole " + std::to_string(h + 1) + ";";
        }
      }
    }
  const double elapsed = secondsSince(t0);
  verdict(5, passed == total && elapsed < 60.0, "Monte Carlo fit vs spectral rate (N = 1e7, n in [5, 20])",
          std::to_string(passed) + "/" + std::to_string(total) + " holes agree" +
              (failed.empty() ? "" : ", outside:" + failed) + fmt(" %.1f s", elapsed));
}

void criterionLogistic() {
  double worst = 0.0;
  for (int n : {2, 3}) {
    MapSpec spec;
    spec.kind = MapSpec::Kind::Logistic;
    spec.level = n;
    const auto sys = buildSystem(spec);
    const auto a = buildReport(sys.closed, sys.measure);
    const auto s = tentSystem(0.5, std::size_t{1} << n);
    const auto b = buildReport(s.closed, lebesgueMeasure(s.partition));
    if (a.holeRates.size() != b.holeRates.size()) {
      worst = INFINITY;
      continue;
    }
    for (std::size_t i = 0; i < a.holeRates.size(); ++i)
      worst = std::max({worst, std::abs(a.holeRates[i].p - b.holeRates[i].p),
                        std::abs(a.holeRates[i].rho - b.holeRates[i].rho)});
    worst = std::max({worst, std::abs(a.averageRho - b.averageRho), std::abs(a.lowerBound - b.lowerBound),
                      std::abs(a.n1 - b.n1), std::abs(a.n2 - b.n2), std::abs(a.quadraticBound - b.quadraticBound)});
    if (a.jensenHolds != b.jensenHolds || a.n2GeN1Holds != b.n2GeN1Holds) worst = INFINITY;
  }
  verdict(6, worst <= 1e-12, "logistic report equals symmetric tent report (n = 2, 3)",
          fmt("max difference %.2e", worst));
}

void criterionRefinement() {
  const auto model = makeCatMapModel();
  const auto chain = refineSymbolic(model, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double coarse = leadingEigenvalue(punchHole(model.transition, i)).eigenvalue;
    const double fine = leadingEigenvalue(punchCoarseHole(chain, i)).eigenvalue;
    worst = std::max(worst, std::abs(fine - coarse));
  }
  verdict(7, worst <= 1e-10, "cat map leading eigenvalues unchanged by one refinement step",
          fmt("max change %.2e over 5 holes on 25 states", worst));
}

void criterionTwoCell() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double x0 = u(rng);
    const auto map = makeSkewedTent(x0);
    const auto r = buildReport(transitionMatrix(map, map.basePartition()), lebesgueMeasure(map.basePartition()));
    worst = std::max({worst, std::abs(r.holeRates[0].p - (1.0 - x0)), std::abs(r.holeRates[1].p - x0)});
  }
  verdict(8, worst <= 1e-12, "two-cell tent survival factors p1 = 1 - x0, p2 = x0 (20 random x0)",
          fmt("max error %.2e", worst));
}

}  // namespace

int main() {
  criterionNaive();
  criterionTentGrid();
  criterionCat();
  criterionJensen();
  criterionOracle();
  criterionLogistic();
  criterionRefinement();
  criterionTwoCell();
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
