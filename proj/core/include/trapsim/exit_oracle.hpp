#pragma once

#include <vector>

#include "trapsim/increments.hpp"

namespace trapsim {

// Interior states 0..n-1 of a birth-death chain; stepping below state 0 or
// above state n-1 absorbs. stay[i] = 1 - up[i] - down[i] must be >= 0.
struct BirthDeathChain {
  std::vector<double> up;
  std::vector<double> down;
  std::vector<double> states;  // optional labels (walk positions)

  void validate() const;  // rows must be probability rows; <= 1e4 states
};

// Expected absorption time from each interior state: the first-step-analysis
// tridiagonal system (I - P_interior) h = 1, solved directly (Thomas
// elimination; the matrix is an irreducible M-matrix when absorption is
// reachable). DomainError if no absorption is reachable.
std::vector<double> exact_exit_oracle(const BirthDeathChain& chain);

// Second moments E[tau^2] per state, from (I - P) v = 2h - 1.
std::vector<double> exit_time_second_moment(const BirthDeathChain& chain,
                                            const std::vector<double>& h);

// P(absorbed within `horizon` steps) from each state, by value iteration.
std::vector<double> exit_probability_by_horizon(const BirthDeathChain& chain,
                                                long long horizon);

// The finite chain a walk on the lattice {a_x + k*x} induces: requires every
// atom offset in {-1, 0, +1}. States run across [a_x, 1-a_x].
BirthDeathChain induced_chain(const IncrementFamily& family, double x, double a_x);

}  // namespace trapsim
