#pragma once

#include <map>
#include <string>
#include <vector>

#include "trapsim/rng.hpp"

namespace trapsim {

struct Atom {
  double y;  // offset, in increment units
  double p;  // probability
};

struct AtomList {
  std::vector<Atom> atoms;
};

// A w-parametrized finite-support step law on [0,1]. Probabilities are
// evaluated lazily from the parameters at each w; both one-sided masses are
// computed from the shared intermediate a = kappa*(1/2 - w) as 1/2 + a and
// 1/2 - a, which makes the mirror law at 1-w bit-exact rather than merely
// close (see tests/test_increments.cpp for the exact-equality check).
struct IncrementFamily {
  std::string family_id;
  std::map<std::string, double> parameters;
  double y_max = 1.0;          // bound on |offset|
  int atom_count = 2;
  double lipschitz_mean = 1.0;  // declared bound on |mean(w+h)-mean(w)|/h
  double p_min = 0.0;           // lower bound on each one-sided mass, w in (0,1)
};

// Built-in families.
//   binary:  atoms {+1,-1}, up-probability p(w) = 1/2 + kappa*(1/2 - w).
//   trinary: atoms {+1,0,-1} with probabilities (p(w)(1-q), q, (1-p(w))(1-q));
//            exercises solvers off the two-atom closed-form path.
IncrementFamily make_binary_family(double kappa = 0.5);
IncrementFamily make_trinary_family(double kappa = 0.5, double q = 0.2);

// Resolve a family by id ("binary" | "trinary") with a parameter map
// (recognized keys: kappa, q). Unknown id or out-of-range parameter throws
// ConfigError naming the offender.
IncrementFamily family_from_id(const std::string& id,
                               const std::map<std::string, double>& params);

AtomList atoms(const IncrementFamily& family, double w);
double mean(const IncrementFamily& family, double w);

// All offsets negated, probabilities and order unchanged.
AtomList negate(const AtomList& list);

double sample_atoms(const AtomList& list, Rng& rng);
double sample(const IncrementFamily& family, double w, Rng& rng);

}  // namespace trapsim
