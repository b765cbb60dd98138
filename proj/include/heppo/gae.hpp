#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace heppo {

// One agent's rollout: per-timestep rewards and critic values, plus the
// critic's estimate for the state after the last step (0 when terminal).
struct Trajectory {
  std::vector<double> rewards;
  std::vector<double> values;
  double bootstrap_value = 0.0;

  std::size_t length() const { return rewards.size(); }

  // Throws ValidationError on length mismatch, empty input or non-finite entries.
  void validate() const;
};

// Discount and GAE smoothing factor. The decay C = gamma * lambda is always
// derived from the pair, never stored.
class GaeParams {
public:
  GaeParams(double gamma, double lambda);

  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }
  double decay() const { return gamma_ * lambda_; }

private:
  double gamma_;
  double lambda_;
};

struct AdvantageResult {
  std::vector<double> advantages;
  std::vector<double> rtgs;
};

/// delta_t = r_t + gamma * V_{t+1} - V_t, with V_{T+1} = bootstrap_value.
std::vector<double> td_residuals(const Trajectory& traj, const GaeParams& params);

/// Reverse-time recurrence A_t = delta_t + C * A_{t+1}, A_T = delta_T.
/// `on_visit`, when set, is called with each index in the order it is consumed.
std::vector<double> gae_sequential(std::span<const double> deltas, double decay,
                                   const std::function<void(std::size_t)>& on_visit = {});

/// O(T^2) reference: A_t = sum_{l=0}^{T-t} C^l delta_{t+l}. Test oracle only.
std::vector<double> gae_truncated_sum(std::span<const double> deltas, double decay);

/// k-step lookahead form A_t = C^k A_{t+k} + sum_{i<k} C^i delta_{t+i}.
/// Entries past the end of the trajectory are treated as zero.
std::vector<double> gae_lookahead(std::span<const double> deltas, double decay, int k);

/// RTG_t = V_t + A_t.
std::vector<double> rewards_to_go(std::span<const double> values,
                                  std::span<const double> advantages);

/// td_residuals -> gae_lookahead(k) -> rewards_to_go for one trajectory.
AdvantageResult compute_advantages(const Trajectory& traj, const GaeParams& params, int k = 1);

} // namespace heppo
