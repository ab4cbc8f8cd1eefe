#include "trapsim/urn.hpp"

#include "trapsim/errors.hpp"

namespace trapsim {

UrnOutcomeProbs urn_outcome_probs(double w) {
  return {w * w, (1.0 - w) * (1.0 - w), 2.0 * w * (1.0 - w)};
}

UrnState urn_step(const UrnState& state, double x, Rng& rng) {
  if (!(state.total() > 0.0)) {
    throw DomainError("urn_step: total weight must be positive");
  }
  if (!(x >= 0.0 && x < 1.0)) {
    throw ConfigError("urn_step: x must lie in [0,1)");
  }
  const double w = state.fraction();
  UrnState next = state;
  const bool first_red = rng.next_unit() < w;
  const bool second_red = rng.next_unit() < w;
  if (first_red && second_red) {
    next.red += 1.0;
  } else if (!first_red && !second_red) {
    next.black += 1.0;
  } else {
    next.red += 1.0;
    next.black += 1.0;
  }
  next.red *= (1.0 - x);
  next.black *= (1.0 - x);
  next.t += 1;
  return next;
}

double urn_drift(double w, double total) {
  return w * (1.0 - w) * (1.0 - 2.0 * w) * total / ((total + 1.0) * (total + 2.0));
}

double urn_stationary_total(double w, double x) {
  return (1.0 - x) * (1.0 + 2.0 * w * (1.0 - w)) / x;
}

}  // namespace trapsim
