#pragma once

#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace dhym {

// Full Gauss-Legendre rule on [a,b]; boost stores the nonnegative half.
template <unsigned N>
std::vector<std::pair<double, double>> gauss_legendre(double a, double b) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i < x.size(); ++i) {
    out.emplace_back(c + h * x[i], h * w[i]);
    if (x[i] != 0.0) out.emplace_back(c - h * x[i], h * w[i]);
  }
  return out;
}

// Composite rule with equal panels; used for integrands that are flat but not analytic at the ends.
template <unsigned N>
std::vector<std::pair<double, double>> composite_gauss_legendre(double a, double b, int panels) {
  std::vector<std::pair<double, double>> out;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    auto r = gauss_legendre<N>(a + p * h, a + (p + 1) * h);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace dhym
