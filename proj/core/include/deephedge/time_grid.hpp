#pragma once

#include <stdexcept>

namespace deephedge {

// Discrete trading grid 0 = t_0 < t_1 < ... < t_n = T with equidistant steps.
struct TimeGrid {
  int n_steps;
  double maturity;

  TimeGrid(int n_steps_, double maturity_)
      : n_steps(n_steps_), maturity(maturity_) {
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    if (!(maturity > 0.0)) throw std::invalid_argument("TimeGrid: maturity must be > 0");
  }

  double dt() const { return maturity / n_steps; }

  // t_k; endpoints are exact (time(0) == 0, time(n_steps) == maturity).
  double time(int k) const {
    return maturity * (static_cast<double>(k) / n_steps);
  }

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace deephedge
