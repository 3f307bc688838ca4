#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mrraps::quad {

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n), exact for degree 2n-1.
Rule gauss_legendre(int n);

/// E[f(Z)] for Z ~ N(0,1), integrated panel-wise with a 64-node Gauss-Legendre
/// rule. `breakpoints` (e.g. kinks of f) are added to a fixed set of panel
/// edges spanning [-40, 40]; mass outside that range is below 1e-300.
double normal_expectation(const std::function<double(double)>& f, std::span<const double> breakpoints = {});

}  // namespace mrraps::quad
