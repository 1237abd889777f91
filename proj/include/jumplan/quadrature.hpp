#pragma once

#include <vector>

namespace jumplan {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Throws std::invalid_argument if order < 1.
  static GaussLegendre unit_interval(int order);

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

}  // namespace jumplan
