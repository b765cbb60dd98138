#include "heppo/gae.hpp"

#include <cmath>
#include <string>

#include "heppo/error.hpp"

namespace heppo {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw ValidationError(std::string(what) + "[" + std::to_string(i) + "] is not finite");
    }
  }
}

void require_deltas(std::span<const double> deltas, double decay) {
  if (deltas.empty()) throw ValidationError("deltas must be nonempty");
  require_finite(deltas, "deltas");
  if (!(decay >= 0.0 && decay <= 1.0)) throw ValidationError("decay must lie in [0, 1]");
}

} // namespace

void Trajectory::validate() const {
  if (rewards.empty()) throw ValidationError("trajectory must contain at least one timestep");
  if (rewards.size() != values.size()) {
    throw ValidationError("rewards and values differ in length (" + std::to_string(rewards.size()) +
                          " vs " + std::to_string(values.size()) + ")");
  }
  require_finite(rewards, "rewards");
  require_finite(values, "values");
  if (!std::isfinite(bootstrap_value)) throw ValidationError("bootstrap_value is not finite");
}

GaeParams::GaeParams(double gamma, double lambda) : gamma_(gamma), lambda_(lambda) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
}

std::vector<double> td_residuals(const Trajectory& traj, const GaeParams& params) {
  traj.validate();
  const std::size_t n = traj.length();
  std::vector<double> deltas(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = (t + 1 < n) ? traj.values[t + 1] : traj.bootstrap_value;
    deltas[t] = traj.rewards[t] + params.gamma() * next - traj.values[t];
  }
  return deltas;
}

std::vector<double> gae_sequential(std::span<const double> deltas, double decay,
                                   const std::function<void(std::size_t)>& on_visit) {
  require_deltas(deltas, decay);
  std::vector<double> adv(deltas.size());
  double carry = 0.0;
  for (std::size_t t = deltas.size(); t-- > 0;) {
    if (on_visit) on_visit(t);
    carry = deltas[t] + decay * carry;
    adv[t] = carry;
  }
  return adv;
}

std::vector<double> gae_truncated_sum(std::span<const double> deltas, double decay) {
  require_deltas(deltas, decay);
  const std::size_t n = deltas.size();
  std::vector<double> adv(n);
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    double weight = 1.0;
    for (std::size_t l = 0; t + l < n; ++l) {
      sum += weight * deltas[t + l];
      weight *= decay;
    }
    adv[t] = sum;
  }
  return adv;
}

std::vector<double> gae_lookahead(std::span<const double> deltas, double decay, int k) {
  if (k < 1) throw ValidationError("lookahead depth k must be >= 1");
  require_deltas(deltas, decay);
  const std::size_t n = deltas.size();
  const std::size_t depth = static_cast<std::size_t>(k);

  std::vector<double> powers(depth + 1, 1.0);
  for (std::size_t i = 1; i <= depth; ++i) powers[i] = powers[i - 1] * decay;

  std::vector<double> adv(n);
  for (std::size_t t = n; t-- > 0;) {
    double fir = 0.0;
    for (std::size_t i = 0; i < depth && t + i < n; ++i) fir += powers[i] * deltas[t + i];
    const double feedback = (t + depth < n) ? adv[t + depth] : 0.0;
    adv[t] = powers[depth] * feedback + fir;
  }
  return adv;
}

std::vector<double> rewards_to_go(std::span<const double> values,
                                  std::span<const double> advantages) {
  if (values.size() != advantages.size()) {
    throw ValidationError("values and advantages differ in length (" +
                          std::to_string(values.size()) + " vs " +
                          std::to_string(advantages.size()) + ")");
  }
  std::vector<double> rtg(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) rtg[t] = values[t] + advantages[t];
  return rtg;
}

AdvantageResult compute_advantages(const Trajectory& traj, const GaeParams& params, int k) {
  const auto deltas = td_residuals(traj, params);
  AdvantageResult out;
  out.advantages = gae_lookahead(deltas, params.decay(), k);
  out.rtgs = rewards_to_go(traj.values, out.advantages);
  return out;
}

} // namespace heppo
