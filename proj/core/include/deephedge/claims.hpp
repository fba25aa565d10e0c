#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>

namespace deephedge {

// European call with a position sign: +1 long, -1 short. The experiments
// hedge a short at-the-money call, for which the claim cashflow is
// Z = -(S_T - K)^+.
struct Claim {
  double strike;
  int sign;

  Claim(double strike_, int sign_) : strike(strike_), sign(sign_) {
    if (!(strike > 0.0)) throw std::invalid_argument("Claim: strike must be > 0");
    if (sign != 1 && sign != -1) throw std::invalid_argument("Claim: sign must be +1 or -1");
  }

  static Claim short_call(double strike_) { return Claim(strike_, -1); }
  static Claim long_call(double strike_) { return Claim(strike_, +1); }
};

// Claim cashflow at maturity: sign * max(S_T - K, 0).
inline double payoff(const Claim& claim, double terminal_spot) {
  const double intrinsic = terminal_spot - claim.strike;
  return claim.sign * (intrinsic > 0.0 ? intrinsic : 0.0);
}

// Gains from trading along one path: sum_k deltas[k] * (spots[k+1] - spots[k]).
// deltas has one entry per trading interval, spots one per grid point.
double gains(std::span<const double> deltas, std::span<const double> spots);

// Terminal hedged PnL: Z + (delta . S)_T, plus the premium when requested.
// Training and the reported tables use include_premium = false; the premium
// is carried separately.
double terminal_pnl(const Claim& claim, std::span<const double> deltas,
                    std::span<const double> spots, bool include_premium, double premium);

// Hedging outcome for one task: per-path delta sequences, terminal PnL per
// path (premium excluded) and the task's premium reported separately.
struct HedgeResult {
  int task_id = 0;
  Eigen::MatrixXd deltas;  // n_paths x n_steps
  Eigen::VectorXd pnl;     // n_paths
  double premium = 0.0;    // p0 >= 0

  int n_paths() const { return static_cast<int>(pnl.size()); }
};

}  // namespace deephedge
