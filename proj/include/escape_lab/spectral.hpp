#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "escape_lab/errors.hpp"
#include "escape_lab/format.hpp"
#include "escape_lab/substochastic.hpp"

namespace escape_lab {

inline constexpr double kDefaultTolerance = 1e-12;
inline constexpr double kCollapsedMass = 1e-300;

struct SpectralOptions {
  double tol = kDefaultTolerance;
  long maxIterations = 1'000'000;
  // Fall back to the dense solver if the residual has not halved within this many iterations.
  long stallWindow = 2000;
};

// Leading eigenvalue with its left (row) eigenvector v M = lambda v, sum(v) = 1.
struct SpectralResult {
  enum class Method { PowerIteration, DenseEigensolve, Collapsed };

  double eigenvalue = 0.0;
  std::vector<double> eigenvector;
  long iterations = 0;
  double residual = 0.0;
  Method method = Method::PowerIteration;
};

inline const char* methodName(SpectralResult::Method m) {
  switch (m) {
    case SpectralResult::Method::PowerIteration: return "power";
    case SpectralResult::Method::DenseEigensolve: return "dense";
    case SpectralResult::Method::Collapsed: return "collapsed";
  }
  return "";
}

namespace detail {

// out = v M
inline void leftMultiply(const SubstochasticMatrix& m, const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t k = m.order();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const auto row = m.row(i);
    for (std::size_t j = 0; j < k; ++j) out[j] += vi * row[j];
  }
}

inline double leftResidual(const SubstochasticMatrix& m, const std::vector<double>& v, double lambda) {
  std::vector<double> w(v.size());
  leftMultiply(m, v, w);
  double r = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) r = std::max(r, std::abs(w[j] - lambda * v[j]));
  return r;
}

inline Eigen::MatrixXd toEigen(const SubstochasticMatrix& m) {
  const auto k = static_cast<Eigen::Index>(m.order());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return out;
}

}  // namespace detail

// Full spectrum via a dense nonsymmetric eigensolve.
inline std::vector<std::complex<double>> denseSpectrum(const SubstochasticMatrix& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(detail::toEigen(m), false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolve failed", 0.0);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

inline double denseSpectralRadius(const SubstochasticMatrix& m) {
  double r = 0.0;
  for (const auto& z : denseSpectrum(m)) r = std::max(r, std::abs(z));
  return r;
}

namespace detail {

inline SpectralResult denseLeading(const SubstochasticMatrix& m, double tol) {
  // Left eigenvectors of M are right eigenvectors of M^T.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(toEigen(m).transpose(), true);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolve failed", INFINITY);
  const auto& values = solver.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) radius = std::max(radius, std::abs(values[i]));

  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const auto z = values[i];
    if (std::abs(z.imag()) > 1e-9 * std::max(1.0, radius) || z.real() < -1e-14) continue;
    if (best < 0 || z.real() > values[best].real()) best = i;
  }
  if (best < 0) throw ConvergenceError("no real nonnegative eigenvalue found", INFINITY);

  const double lambda = std::max(0.0, values[best].real());
  const Eigen::VectorXcd vec = solver.eigenvectors().col(best);
  std::vector<double> v(m.order());
  double sum = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    v[j] = vec[static_cast<Eigen::Index>(j)].real();
    sum += v[j];
  }
  if (sum < 0) {
    for (double& x : v) x = -x;
    sum = -sum;
  }
  // The Perron vector is nonnegative; clip roundoff-level negatives.
  for (double& x : v) x = std::max(0.0, x);
  sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(sum > 0.0)) throw ConvergenceError("dense eigenvector has no positive mass", INFINITY);
  for (double& x : v) x /= sum;

  SpectralResult out;
  out.eigenvalue = lambda;
  out.eigenvector = std::move(v);
  out.residual = leftResidual(m, out.eigenvector, lambda);
  out.method = SpectralResult::Method::DenseEigensolve;
  if (out.residual > tol)
    throw ConvergenceError("dense eigenvector residual " + formatReal(out.residual) + " exceeds tolerance",
                           out.residual);
  return out;
}

}  // namespace detail


// Support-graph structure of the part of the chain that carries cycles.
struct ChainStructure {
  bool stronglyConnected = false;  // cyclic part is a single communicating class
  int period = 1;                  // gcd of cycle lengths on the cyclic part
  std::vector<std::vector<std::size_t>> cyclicClasses;

  bool aperiodic() const noexcept { return period == 1; }
};

inline ChainStructure chainStructure(const SubstochasticMatrix& m) {
  const std::size_t k = m.order();
  std::vector<std::vector<std::size_t>> adj(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (m(i, j) > 0.0) adj[i].push_back(j);

  // Tarjan's strongly connected components.
  std::vector<int> index(k, -1), low(k, 0);
  std::vector<char> onStack(k, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    index[u] = low[u] = counter++;
    stack.push_back(u);
    onStack[u] = 1;
    for (std::size_t v : adj[u]) {
      if (index[v] < 0) {
        visit(v);
        low[u] = std::min(low[u], low[v]);
      } else if (onStack[v]) {
        low[u] = std::min(low[u], index[v]);
      }
    }
    if (low[u] == index[u]) {
      std::vector<std::size_t> comp;
      std::size_t v;
      do {
        v = stack.back();
        stack.pop_back();
        onStack[v] = 0;
        comp.push_back(v);
      } while (v != u);
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  };
  for (std::size_t u = 0; u < k; ++u)
    if (index[u] < 0) visit(u);

  ChainStructure out;
  int period = 0;
  std::vector<int> member(k, -1);
  for (auto& comp : components) {
    const bool selfLoop = comp.size() == 1 && m(comp[0], comp[0]) > 0.0;
    if (comp.size() < 2 && !selfLoop) continue;
    const int id = static_cast<int>(out.cyclicClasses.size());
    for (std::size_t u : comp) member[u] = id;

    // BFS levels inside the class; the period is the gcd of level defects over class edges.
    std::vector<long> level(k, -1);
    std::vector<std::size_t> queue{comp.front()};
    level[comp.front()] = 0;
    int g = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t v : adj[u]) {
        if (member[v] != id) continue;
        if (level[v] < 0) {
          level[v] = level[u] + 1;
          queue.push_back(v);
        } else {
          g = std::gcd(g, static_cast<int>(std::abs(level[u] + 1 - level[v])));
        }
      }
    }
    period = std::gcd(period, g);
    out.cyclicClasses.push_back(comp);
  }
  std::sort(out.cyclicClasses.begin(), out.cyclicClasses.end());
  out.stronglyConnected = out.cyclicClasses.size() == 1;
  out.period = period == 0 ? 1 : period;
  return out;
}

namespace detail {

inline SubstochasticMatrix restrictTo(const SubstochasticMatrix& m, const std::vector<std::size_t>& states) {
  std::vector<double> e;
  e.reserve(states.size() * states.size());
  for (std::size_t i : states)
    for (std::size_t j : states) e.push_back(m(i, j));
  return SubstochasticMatrix(states.size(), std::move(e));
}

// Dense route through the communicating-class structure. The Perron root of an
// irreducible class is simple, so each class solve is well conditioned even when
// several classes share the spectral radius (a defective eigenvalue of M).
// The eigenvector lives on the most downstream class C attaining the radius and
// on the states D reachable from it: v_D (lambda I - M_DD) = v_C M_CD.
inline SpectralResult classwiseLeading(const SubstochasticMatrix& m, double tol) {
  const std::size_t k = m.order();
  const auto structure = chainStructure(m);
  if (structure.cyclicClasses.empty()) {
    // No cycles: nilpotent, spectral radius 0. Any vector killed by M works.
    std::vector<double> v(k, 0.0);
    std::vector<double> w(k);
    v.assign(k, 1.0 / static_cast<double>(k));
    for (std::size_t step = 0; step <= k; ++step) {
      leftMultiply(m, v, w);
      const double mass = std::accumulate(w.begin(), w.end(), 0.0);
      if (mass < kCollapsedMass) break;
      for (std::size_t j = 0; j < k; ++j) v[j] = w[j] / mass;
    }
    SpectralResult out;
    out.eigenvector = v;
    out.residual = leftResidual(m, v, 0.0);
    out.method = SpectralResult::Method::Collapsed;
    return out;
  }

  std::vector<SpectralResult> perClass;
  double radius = 0.0;
  for (const auto& cls : structure.cyclicClasses) {
    perClass.push_back(denseLeading(restrictTo(m, cls), std::max(tol, 1e-13)));
    radius = std::max(radius, perClass.back().eigenvalue);
  }

  // Forward reachability from each class.
  auto reachable = [&](const std::vector<std::size_t>& from) {
    std::vector<char> seen(k, 0);
    std::vector<std::size_t> queue(from.begin(), from.end());
    for (std::size_t u : from) seen[u] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (std::size_t v = 0; v < k; ++v)
        if (!seen[v] && m(queue[head], v) > 0.0) {
          seen[v] = 1;
          queue.push_back(v);
        }
    return seen;
  };
  const double tie = 1e-12 * std::max(1.0, radius);
  std::size_t chosen = 0;
  bool found = false;
  for (std::size_t c = 0; c < structure.cyclicClasses.size() && !found; ++c) {
    if (perClass[c].eigenvalue < radius - tie) continue;
    const auto seen = reachable(structure.cyclicClasses[c]);
    bool downstreamTie = false;
    for (std::size_t d = 0; d < structure.cyclicClasses.size(); ++d)
      if (d != c && perClass[d].eigenvalue >= radius - tie && seen[structure.cyclicClasses[d].front()])
        downstreamTie = true;
    if (!downstreamTie) {
      chosen = c;
      found = true;
    }
  }

  const auto& cls = structure.cyclicClasses[chosen];
  const double lambda = perClass[chosen].eigenvalue;
  const auto seen = reachable(cls);
  std::vector<char> inClass(k, 0);
  for (std::size_t u : cls) inClass[u] = 1;
  std::vector<std::size_t> down;
  for (std::size_t u = 0; u < k; ++u)
    if (seen[u] && !inClass[u]) down.push_back(u);

  std::vector<double> v(k, 0.0);
  for (std::size_t a = 0; a < cls.size(); ++a) v[cls[a]] = perClass[chosen].eigenvector[a];
  if (!down.empty() && lambda > 0.0) {
    const auto n = static_cast<Eigen::Index>(down.size());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b)
        A(a, b) = (a == b ? lambda : 0.0) - m(down[static_cast<std::size_t>(b)], down[static_cast<std::size_t>(a)]);
      for (std::size_t u : cls) rhs[a] += v[u] * m(u, down[static_cast<std::size_t>(a)]);
    }
    const Eigen::VectorXd x = A.fullPivLu().solve(rhs);
    for (Eigen::Index a = 0; a < n; ++a) v[down[static_cast<std::size_t>(a)]] = std::max(0.0, x[a]);
  }
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;

  SpectralResult out;
  out.eigenvalue = lambda;
  out.eigenvector = std::move(v);
  out.residual = leftResidual(m, out.eigenvector, lambda);
  out.method = SpectralResult::Method::DenseEigensolve;
  if (out.residual > tol)
    throw ConvergenceError("class-wise dense eigenvector residual " + formatReal(out.residual) +
                               " exceeds tolerance",
                           out.residual);
  return out;
}

}  // namespace detail

// Spectral radius and nonnegative left eigenvector of a nonnegative matrix.
// Power iteration from the uniform vector; the stopping test is the residual
// max|vM - lambda v|. Stalls (e.g. periodic chains) go to the dense solver.
inline SpectralResult leadingEigenvalue(const SubstochasticMatrix& m, const SpectralOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be positive");
  const std::size_t k = m.order();
  std::vector<double> v(k, 1.0 / static_cast<double>(k));
  std::vector<double> w(k);

  double best = INFINITY;
  long bestAt = 0;
  double lastResidual = INFINITY;
  for (long it = 1; it <= opts.maxIterations; ++it) {
    detail::leftMultiply(m, v, w);
    const double lambda = std::accumulate(w.begin(), w.end(), 0.0);
    if (lambda < kCollapsedMass) {
      SpectralResult out;
      out.eigenvalue = 0.0;
      out.eigenvector = v;
      out.iterations = it;
      out.residual = *std::max_element(w.begin(), w.end());
      out.method = SpectralResult::Method::Collapsed;
      return out;
    }
    double r = 0.0;
    for (std::size_t j = 0; j < k; ++j) r = std::max(r, std::abs(w[j] - lambda * v[j]));
    lastResidual = r;
    if (r <= opts.tol) {
      SpectralResult out;
      out.eigenvalue = lambda;
      out.eigenvector = v;
      out.iterations = it;
      out.residual = r;
      return out;
    }
    if (r < 0.5 * best) {
      best = r;
      bestAt = it;
    } else if (it - bestAt > opts.stallWindow) {
      break;
    }
    for (std::size_t j = 0; j < k; ++j) v[j] = w[j] / lambda;
  }

  try {
    return detail::classwiseLeading(m, opts.tol);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string("power iteration stalled (residual ") + formatReal(lastResidual) +
                               ") and " + e.what(),
                           lastResidual);
  }
}

}  // namespace escape_lab
