#include "trapsim/increments.hpp"

#include <cmath>

#include "trapsim/errors.hpp"

namespace trapsim {

namespace {

void check_w(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw DomainError("increments: w must lie in [0,1], got " + std::to_string(w));
  }
}

double get_param(const IncrementFamily& family, const std::string& key) {
  auto it = family.parameters.find(key);
  if (it == family.parameters.end()) {
    throw ConfigError("increments: family '" + family.family_id +
                      "' is missing parameter '" + key + "'");
  }
  return it->second;
}

}  // namespace

IncrementFamily make_binary_family(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw ConfigError("binary family requires 0 < kappa <= 1, got " +
                      std::to_string(kappa));
  }
  IncrementFamily f;
  f.family_id = "binary";
  f.parameters["kappa"] = kappa;
  f.y_max = 1.0;
  f.atom_count = 2;
  f.lipschitz_mean = 2.0 * kappa;
  // Worst one-sided mass over w in (0,1) is 1/2 - kappa/2, approached at the
  // endpoints; declare slightly below it.
  f.p_min = 0.5 * (1.0 - kappa) * 0.99;
  return f;
}

IncrementFamily make_trinary_family(double kappa, double q) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw ConfigError("trinary family requires 0 < kappa <= 1, got " +
                      std::to_string(kappa));
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw ConfigError("trinary family requires 0 < q < 1, got " + std::to_string(q));
  }
  IncrementFamily f;
  f.family_id = "trinary";
  f.parameters["kappa"] = kappa;
  f.parameters["q"] = q;
  f.y_max = 1.0;
  f.atom_count = 3;
  f.lipschitz_mean = 2.0 * kappa * (1.0 - q);
  f.p_min = 0.5 * (1.0 - kappa) * (1.0 - q) * 0.99;
  return f;
}

IncrementFamily family_from_id(const std::string& id,
                               const std::map<std::string, double>& params) {
  auto value_or = [&params](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (id == "binary") {
    return make_binary_family(value_or("kappa", 0.5));
  }
  if (id == "trinary") {
    return make_trinary_family(value_or("kappa", 0.5), value_or("q", 0.2));
  }
  throw ConfigError("unknown increment family id '" + id + "'");
}

AtomList atoms(const IncrementFamily& family, double w) {
  check_w(w);
  if (family.family_id == "binary") {
    const double kappa = get_param(family, "kappa");
    const double a = kappa * (0.5 - w);
    return AtomList{{{+1.0, 0.5 + a}, {-1.0, 0.5 - a}}};
  }
  if (family.family_id == "trinary") {
    const double kappa = get_param(family, "kappa");
    const double q = get_param(family, "q");
    const double a = kappa * (0.5 - w);
    const double keep = 1.0 - q;
    return AtomList{{{+1.0, (0.5 + a) * keep}, {0.0, q}, {-1.0, (0.5 - a) * keep}}};
  }
  throw ConfigError("unknown increment family id '" + family.family_id + "'");
}

double mean(const IncrementFamily& family, double w) {
  double m = 0.0;
  for (const Atom& atom : atoms(family, w).atoms) {
    m += atom.p * atom.y;
  }
  return m;
}

AtomList negate(const AtomList& list) {
  AtomList out = list;
  for (Atom& atom : out.atoms) {
    atom.y = -atom.y;
  }
  return out;
}

double sample_atoms(const AtomList& list, Rng& rng) {
  const double u = rng.next_unit();
  double cum = 0.0;
  for (const Atom& atom : list.atoms) {
    cum += atom.p;
    if (u < cum) {
      return atom.y;
    }
  }
  return list.atoms.back().y;  // u landed in the rounding slack at the top
}

double sample(const IncrementFamily& family, double w, Rng& rng) {
  const AtomList list = atoms(family, w);
  return sample_atoms(list, rng);
}

}  // namespace trapsim
