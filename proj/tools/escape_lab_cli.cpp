#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace escape_lab;
using namespace escape_lab::cli;

namespace {

struct Common {
  double tol = kDefaultTolerance;
  std::string format = "pretty";
  bool check = false;
  std::string out;
};

Format parseFormat(const std::string& f) {
  if (f == "csv") return Format::Csv;
  if (f == "json") return Format::Json;
  return Format::Pretty;
}

void addCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--tol", c.tol, "Spectral residual tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json", "pretty"}))
      ->capture_default_str();
  cmd->add_flag("--check", c.check, "Compare against published reference values");
  cmd->add_option("--out", c.out, "Write output to FILE instead of stdout");
}

int emit(const Output& o, const Common& c) {
  if (c.out.empty()) {
    std::cout << o.text;
  } else {
    std::ofstream f(c.out);
    if (!f) throw DomainError("cannot open " + c.out + " for writing");
    f << o.text;
  }
  return o.exitCode;
}

// Cells requested either directly (--k) or as refinement levels (--levels) of a two-branch map.
std::vector<std::size_t> cellCounts(const std::vector<std::size_t>& ks, const std::vector<int>& levels) {
  std::vector<std::size_t> out = ks;
  for (int l : levels) out.push_back(std::size_t{2} << l);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Escape rates of open Markov systems"};
  app.require_subcommand(1);

  // tent-table
  Common tentOpts;
  std::vector<double> tentX0{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> tentK;
  std::vector<int> tentLevels;
  bool full = false;
  auto* tent = app.add_subcommand("tent-table", "Lower-bound estimates for the skewed tent map");
  tent->add_option("--x0", tentX0, "Peak positions")->check(CLI::Range(0.0, 1.0))->delimiter(',');
  tent->add_option("--k", tentK, "Cell counts (powers of two)")->delimiter(',');
  tent->add_option("--levels", tentLevels, "Refinement levels (k = 2^(levels+1))")->delimiter(',');
  tent->add_flag("--full", full, "Also print average rho, N1 and N2");
  addCommon(tent, tentOpts);

  // naive-table
  Common naiveOpts;
  std::vector<std::size_t> naiveK;
  auto* naive = app.add_subcommand("naive-table", "Naive estimate N1 = -ln(1 - 1/k)");
  naive->add_option("--k", naiveK, "Cell counts")->delimiter(',');
  addCommon(naive, naiveOpts);

  // cat
  Common catOpts;
  int catLevels = 0;
  auto* cat = app.add_subcommand("cat", "Arnold's cat map on its five-element Markov partition");
  cat->add_option("--levels", catLevels, "Also solve on the symbolic refinement")->check(CLI::Range(0, 4));
  addCommon(cat, catOpts);

  // logistic
  Common logOpts;
  int logN = 2;
  auto* logistic = app.add_subcommand("logistic", "Logistic map via its conjugacy to the symmetric tent map");
  logistic->add_option("--levels,-n", logN, "Partition has 2^n cells")->check(CLI::Range(1, 12))->capture_default_str();
  addCommon(logistic, logOpts);

  // simulate
  Common simOpts;
  SimulateRequest req;
  std::string simMap = "tent";
  std::string specFile;
  double simX0 = 0.5, simSkew = 0.5;
  std::size_t simK = 0;
  int simLevels = 0;
  std::size_t simHole = 1;
  std::vector<int> window{5, 20};
  bool fromUnit = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo survival check of one hole");
  sim->add_option("--map", simMap, "tent or doubling")->check(CLI::IsMember({"tent", "doubling"}))->capture_default_str();
  sim->add_option("--spec", specFile, "Map-spec JSON file (overrides --map/--x0/--skew/--levels)");
  sim->add_option("--x0", simX0, "Tent peak")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--skew", simSkew, "Doubling-map branch split")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--levels", simLevels, "Refinement levels")->check(CLI::NonNegativeNumber);
  sim->add_option("--k", simK, "Cell count (power of two)");
  sim->add_option("--hole", simHole, "Hole cell, 1-based")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--samples", req.samples, "Sample count")->capture_default_str();
  sim->add_option("--nmax", req.nMax, "Maximum iterations")->capture_default_str();
  sim->add_option("--seed", req.seed, "RNG seed")->capture_default_str();
  sim->add_option("--window", window, "Fit window lo hi")->expected(2);
  sim->add_flag("--from-unit-interval", fromUnit, "Start uniformly on [0,1] instead of off the hole");
  addCommon(sim, simOpts);

  // report
  Common repOpts;
  std::string repMap = "tent", repSpec, matrixOut, partitionOut;
  double repX0 = 0.5, repSkew = 0.5;
  std::size_t repK = 0;
  int repLevels = 1;
  auto* rep = app.add_subcommand("report", "Full estimator report for one map");
  rep->add_option("--map", repMap, "tent, doubling, cat or logistic")
      ->check(CLI::IsMember({"tent", "doubling", "cat", "logistic"}))
      ->capture_default_str();
  rep->add_option("--spec", repSpec, "Map-spec JSON file");
  rep->add_option("--x0", repX0, "Tent peak")->check(CLI::Range(0.0, 1.0));
  rep->add_option("--skew", repSkew, "Doubling-map branch split")->check(CLI::Range(0.0, 1.0));
  rep->add_option("--levels", repLevels, "Refinement level")->check(CLI::NonNegativeNumber)->capture_default_str();
  rep->add_option("--k", repK, "Cell count (overrides --levels for interval maps)");
  rep->add_option("--matrix-out", matrixOut, "Write the closed transition matrix as CSV");
  rep->add_option("--partition-out", partitionOut, "Write the partition as JSON");
  addCommon(rep, repOpts);

  CLI11_PARSE(app, argc, argv);

  auto specFrom = [](const std::string& kind, double x0, double skew, int levels, std::size_t k) {
    nlohmann::json doc{{"kind", kind}, {"level", levels}};
    if (kind == "tent") doc["x0"] = x0;
    if (kind == "doubling") doc["skew"] = skew;
    auto spec = mapSpecFromJson(doc);
    if (k != 0) {
      if (spec.kind == MapSpec::Kind::Logistic) {
        spec.level = levelsForCells(2, k) + 1;
        if ((std::size_t{1} << spec.level) != k) throw DomainError("--k must be a power of two");
      } else if (spec.kind != MapSpec::Kind::Cat) {
        spec.level = levelsForCells(2, k);
        if ((std::size_t{2} << spec.level) != k) throw DomainError("--k must be a power of two, at least 2");
      }
    }
    return spec;
  };
  auto readSpec = [](const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot read " + path);
    return mapSpecFromJson(nlohmann::json::parse(f));
  };

  try {
    if (*tent) {
      auto ks = cellCounts(tentK, tentLevels);
      if (ks.empty()) ks.assign(reference::kCellCounts.begin(), reference::kCellCounts.end());
      for (auto k : ks)
        if (k < 2) throw DomainError("cell counts must be at least 2");
      const auto table = cmdTentTable(tentX0, ks, tentOpts.tol);
      return emit(renderTentTable(table, parseFormat(tentOpts.format), full, tentOpts.check), tentOpts);
    }
    if (*naive) {
      if (naiveK.empty()) naiveK.assign(reference::kCellCounts.begin(), reference::kCellCounts.end());
      for (auto k : naiveK)
        if (k < 2) throw DomainError("k must be at least 2");
      return emit(renderNaiveTable(cmdNaiveTable(naiveK), parseFormat(naiveOpts.format), naiveOpts.check), naiveOpts);
    }
    if (*cat) return emit(renderCat(cmdCat(catOpts.tol, catLevels), parseFormat(catOpts.format), catOpts.check), catOpts);
    if (*logistic)
      return emit(renderLogistic(cmdLogistic(logN, logOpts.tol), parseFormat(logOpts.format), logOpts.check), logOpts);
    if (*sim) {
      if (req.samples <= 0) throw CLI::ValidationError("--samples", "must be positive");
      if (req.nMax <= 0) throw CLI::ValidationError("--nmax", "must be positive");
      req.spec = specFile.empty() ? specFrom(simMap, simX0, simSkew, simLevels, simK) : readSpec(specFile);
      req.hole = simHole - 1;
      req.window = {window[0], window[1]};
      req.initial = fromUnit ? InitialLaw::UniformOnUnitInterval : InitialLaw::UniformOnComplement;
      req.tol = simOpts.tol;
      return emit(renderSimulate(cmdSimulate(req), parseFormat(simOpts.format), simOpts.check), simOpts);
    }
    if (*rep) {
      const auto spec = repSpec.empty() ? specFrom(repMap, repX0, repSkew, repLevels, repK) : readSpec(repSpec);
      const auto sys = buildSystem(spec);
      const auto report = buildReport(sys.closed, sys.measure, repOpts.tol);
      if (!matrixOut.empty()) {
        std::ofstream f(matrixOut);
        f << matrixToCsv(sys.closed);
      }
      if (!partitionOut.empty() && sys.partition) {
        std::ofstream f(partitionOut);
        f << partitionToJson(*sys.partition).dump(2) << '\n';
      }
      return emit(renderReport(sys, report, parseFormat(repOpts.format)), repOpts);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
