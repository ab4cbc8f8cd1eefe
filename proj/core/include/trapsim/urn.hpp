#pragma once

#include "trapsim/rng.hpp"

namespace trapsim {

struct UrnState {
  double red = 0.0;
  double black = 0.0;
  long long t = 0;

  double total() const { return red + black; }
  double fraction() const { return red / (red + black); }
};

struct UrnOutcomeProbs {
  double both_red;    // w^2      -> +1 red
  double both_black;  // (1-w)^2  -> +1 black
  double mixed;       // 2w(1-w)  -> +1 each
};

UrnOutcomeProbs urn_outcome_probs(double w);

// Draw two balls with replacement, reinforce (same color: +1 to it; mixed:
// +1 to each), then decay both weights by (1-x).
UrnState urn_step(const UrnState& state, double x, Rng& rng);

// Exact expected one-step change of the fraction w at total weight S (the
// decay cancels in the fraction): w(1-w)(1-2w) * S / ((S+1)(S+2)).
double urn_drift(double w, double total);

// Fixed point of E[S'] = (1-x)(S + 1 + 2w(1-w)) at frozen fraction w.
double urn_stationary_total(double w, double x);

}  // namespace trapsim
