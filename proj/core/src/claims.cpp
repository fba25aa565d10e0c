#include "deephedge/claims.hpp"

namespace deephedge {

double gains(std::span<const double> deltas, std::span<const double> spots) {
  if (spots.size() != deltas.size() + 1)
    throw std::invalid_argument("gains: need one spot per grid point and one delta per interval");
  double acc = 0.0;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    acc += deltas[k] * (spots[k + 1] - spots[k]);
  }
  return acc;
}

double terminal_pnl(const Claim& claim, std::span<const double> deltas,
                    std::span<const double> spots, bool include_premium, double premium) {
  double pnl = payoff(claim, spots.back()) + gains(deltas, spots);
  if (include_premium) pnl += premium;
  return pnl;
}

}  // namespace deephedge
