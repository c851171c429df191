#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "escape_lab/errors.hpp"
#include "escape_lab/maps.hpp"
#include "escape_lab/partition.hpp"
#include "escape_lab/substochastic.hpp"
#include "escape_lab/transition.hpp"

namespace escape_lab {

// A closed system ready for estimation: its stochastic matrix and the invariant
// measure of each cell, plus the interval geometry when there is one.
struct MarkovSystem {
  MapSpec spec;
  std::optional<PiecewiseLinearMap> map;        // piecewise-linear systems only
  std::optional<IntervalPartition> partition;  // interval systems only
  SubstochasticMatrix closed;
  MeasureVector measure;
};

// Refinement levels giving `cells` cells from a base of `branches` cells.
inline int levelsForCells(std::size_t branches, std::size_t cells) {
  std::size_t count = branches;
  int levels = 0;
  while (count < cells) {
    count *= branches;
    ++levels;
  }
  if (count != cells)
    throw DomainError(std::to_string(cells) + " cells is not reachable by refining a " + std::to_string(branches) +
                      "-cell base");
  return levels;
}

inline MarkovSystem buildSystem(const MapSpec& spec) {
  switch (spec.kind) {
    case MapSpec::Kind::Tent:
    case MapSpec::Kind::Doubling: {
      auto map = spec.kind == MapSpec::Kind::Tent ? makeSkewedTent(spec.parameter) : makeDoubling(spec.parameter);
      auto p = refine(map, map.basePartition(), spec.level);
      auto closed = transitionMatrix(map, p);
      auto mu = lebesgueMeasure(p);
      return MarkovSystem{spec, std::move(map), std::move(p), std::move(closed), std::move(mu)};
    }
    case MapSpec::Kind::Cat: {
      auto model = makeCatMapModel();
      if (spec.level > 0) model = refineSymbolic(model, spec.level).model;
      return MarkovSystem{spec, std::nullopt, std::nullopt, model.transition, model.stateMeasure};
    }
    case MapSpec::Kind::Logistic: {
      // The logistic partition is the image of the dyadic tent partition under the
      // conjugacy, so it shares the symmetric tent's transition matrix.
      auto logistic = makeLogisticPartition(spec.level);
      const auto tent = makeSkewedTent(0.5);
      const auto dyadic = refine(tent, tent.basePartition(), spec.level - 1);
      return MarkovSystem{spec, std::nullopt, std::move(logistic.partition), transitionMatrix(tent, dyadic),
                          std::move(logistic.measure)};
    }
  }
  throw DomainError("unknown map kind");
}

}  // namespace escape_lab
