#include "trapsim/rate.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

namespace {

constexpr double k_exp_guard = 700.0;  // exp overflows double a little past 709

double node_w(int j, int panels) { return (0.5 * j) / panels; }

}  // namespace

double z_value(const IncrementFamily& family, double w, double lambda) {
  if (!std::isfinite(lambda)) {
    throw DomainError("z_value: lambda must be finite");
  }
  if (std::abs(lambda) * family.y_max > k_exp_guard) {
    throw NumericError("z_value: |lambda|*y_max = " +
                       fmt17(std::abs(lambda) * family.y_max) +
                       " exceeds the overflow guard " + fmt17(k_exp_guard));
  }
  double z = 0.0;
  for (const Atom& atom : atoms(family, w).atoms) {
    z += atom.p * std::exp(-lambda * atom.y);
  }
  return z;
}

double lambda_root(const IncrementFamily& family, double w, double tol) {
  if (!(tol > 0.0)) {
    throw ConfigError("lambda_root: tol must be positive");
  }
  if (!(w >= 0.0 && w < 0.5)) {
    throw DomainError("lambda_root: requires 0 <= w < 1/2, got " + fmt17(w));
  }
  if (!(mean(family, w) > 0.0)) {
    throw DomainError("lambda_root: mean of the step law is not positive at w = " +
                      fmt17(w));
  }
  // z(0) = 1, z'(0) = -mean < 0, z convex, z -> infinity: exactly one positive
  // root. Grow the upper bracket until z > 1, then bisect, then one secant step.
  double lo = 0.0;
  double hi = 1.0;
  double z_hi = z_value(family, w, hi);
  while (z_hi <= 1.0) {
    hi *= 2.0;
    if (hi * family.y_max > k_exp_guard) {
      throw NumericError("lambda_root: no sign change found before the bracket "
                         "growth limit at w = " + fmt17(w));
    }
    z_hi = z_value(family, w, hi);
  }
  double z_lo = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double z_mid = z_value(family, w, mid);
    if (z_mid > 1.0) {
      hi = mid;
      z_hi = z_mid;
    } else {
      lo = mid;
      z_lo = z_mid;
    }
  }
  double root = 0.5 * (lo + hi);
  if (z_hi != z_lo) {
    const double secant = lo + (1.0 - z_lo) * (hi - lo) / (z_hi - z_lo);
    if (secant > 0.0 && std::isfinite(secant) &&
        std::abs(z_value(family, w, secant) - 1.0) <=
            std::abs(z_value(family, w, root) - 1.0)) {
      root = secant;
    }
  }
  if (std::abs(z_value(family, w, root) - 1.0) > tol) {
    throw NumericError("lambda_root: residual above tol at w = " + fmt17(w));
  }
  return root;
}

namespace {

// lambda at all nodes and panel midpoints of a uniform grid over [0, 1/2];
// the value at w = 1/2 itself is 0 by continuity (the mean vanishes there).
struct LambdaTable {
  std::vector<double> node;  // size panels+1
  std::vector<double> mid;   // size panels
  bool clipped_at_zero = false;
};

LambdaTable solve_lambda_table(const IncrementFamily& family, int panels, double tol) {
  LambdaTable t;
  t.node.resize(panels + 1);
  t.mid.resize(panels);
  for (int j = 0; j <= panels; ++j) {
    const double w = node_w(j, panels);
    if (j == panels) {
      t.node[j] = 0.0;
      continue;
    }
    try {
      t.node[j] = lambda_root(family, w, tol);
    } catch (const DomainError&) {
      if (j != 0) {
        throw;
      }
      // Families whose mean degenerates at w = 0 are clipped to w_min; the
      // bias is confined to the first panel and flagged on the profile.
      t.node[j] = lambda_root(family, 1e-4, tol);
      t.clipped_at_zero = true;
    }
    if (!std::isfinite(t.node[j])) {
      throw NumericError("build_profile: non-finite lambda at w = " + fmt17(w));
    }
  }
  for (int j = 0; j < panels; ++j) {
    const double w = (0.5 * (2 * j + 1)) / (2 * panels);
    t.mid[j] = lambda_root(family, w, tol);
    if (!std::isfinite(t.mid[j])) {
      throw NumericError("build_profile: non-finite lambda at w = " + fmt17(w));
    }
  }
  return t;
}

// Cumulative integral of lambda from each node to 1/2, one Simpson rule per
// panel, accumulated right to left. Every partial sum is itself a composite
// Simpson value, so all tabulated Lambda entries share fourth-order accuracy.
std::vector<double> integrate_right_to_left(const LambdaTable& t, int panels) {
  const double h = 0.5 / panels;
  std::vector<double> big(panels + 1, 0.0);
  for (int j = panels - 1; j >= 0; --j) {
    big[j] = big[j + 1] + (h / 6.0) * (t.node[j] + 4.0 * t.mid[j] + t.node[j + 1]);
  }
  return big;
}

}  // namespace

RateProfile build_profile(const IncrementFamily& family, int grid_size, double tol) {
  if (grid_size < 16) {
    throw ConfigError("build_profile: grid_size must be >= 16");
  }
  const LambdaTable table = solve_lambda_table(family, grid_size, tol);
  RateProfile p;
  p.family_id = family.family_id;
  p.parameters = family.parameters;
  p.grid_size = grid_size;
  p.tol = tol;
  p.grid.resize(grid_size + 1);
  for (int j = 0; j <= grid_size; ++j) {
    p.grid[j] = node_w(j, grid_size);
  }
  p.lambda = table.node;
  p.biglambda = integrate_right_to_left(table, grid_size);
  p.C = p.biglambda[0];
  p.clipped_at_zero = table.clipped_at_zero;
  return p;
}

double biglambda_at(const RateProfile& profile, double w) {
  if (!(w >= 0.0 && w <= 0.5)) {
    throw DomainError("biglambda_at: w must lie in [0, 1/2], got " + fmt17(w));
  }
  const auto& g = profile.grid;
  const auto it = std::upper_bound(g.begin(), g.end(), w);
  size_t j = (it == g.begin()) ? 0 : (it - g.begin() - 1);
  if (j >= g.size() - 1) {
    j = g.size() - 2;
  }
  if (w == g[j]) {
    return profile.biglambda[j];
  }
  if (w == g[j + 1]) {
    return profile.biglambda[j + 1];
  }
  const double f = (w - g[j]) / (g[j + 1] - g[j]);
  return profile.biglambda[j] + f * (profile.biglambda[j + 1] - profile.biglambda[j]);
}

double biglambda_reflected(const RateProfile& profile, double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw DomainError("biglambda_reflected: w must lie in [0, 1], got " + fmt17(w));
  }
  const double wr = std::min(w, 1.0 - w);
  return biglambda_at(profile, std::clamp(wr, 0.0, 0.5));
}

TiltedKernel tilt_kernel(const IncrementFamily& family, const RateProfile& profile,
                         double w, double x, double delta) {
  if (!(x > 0.0 && x < 1.0)) {
    throw ConfigError("tilt_kernel: x must lie in (0,1)");
  }
  if (delta < -1.0) {
    throw ConfigError("tilt_kernel: delta must be >= -1");
  }
  if (!(w >= 0.0 && w <= 1.0) || w - x * family.y_max < -1e-12 ||
      w + x * family.y_max > 1.0 + 1e-12) {
    throw DomainError("tilt_kernel: w and w +- x*y_max must stay inside [0,1]");
  }
  const double theta = (1.0 + delta) / x;
  const double base_potential = biglambda_reflected(profile, w);
  const AtomList base = atoms(family, w);

  TiltedKernel k;
  k.base_family = family.family_id;
  k.delta = delta;
  k.w = w;
  k.x = x;

  std::vector<double> logits(base.atoms.size());
  double max_logit = -HUGE_VAL;
  for (size_t i = 0; i < base.atoms.size(); ++i) {
    const Atom& atom = base.atoms[i];
    const double target = std::clamp(w + x * atom.y, 0.0, 1.0);
    const double shift = theta * (biglambda_reflected(profile, target) - base_potential);
    logits[i] = (atom.p > 0.0 ? std::log(atom.p) : -HUGE_VAL) + shift;
    max_logit = std::max(max_logit, logits[i]);
  }
  if (!std::isfinite(max_logit)) {
    throw NumericError("tilt_kernel: normalization underflow (all atoms vanished)");
  }
  double sum = 0.0;
  for (double l : logits) {
    sum += std::exp(l - max_logit);
  }
  k.log_normalizer = max_logit + std::log(sum);
  if (!std::isfinite(k.log_normalizer)) {
    throw NumericError("tilt_kernel: normalization underflow");
  }
  k.atoms.atoms.resize(base.atoms.size());
  for (size_t i = 0; i < base.atoms.size(); ++i) {
    k.atoms.atoms[i].y = base.atoms[i].y;
    k.atoms.atoms[i].p = std::exp(logits[i] - k.log_normalizer);
  }
  return k;
}

SupermartingaleWindow certify_supermartingale(const IncrementFamily& family,
                                              double delta, double x,
                                              double tolerance) {
  if (!(x > 0.0 && x < 0.5)) {
    throw ConfigError("certify_supermartingale: x must lie in (0, 1/2)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("certify_supermartingale: delta must lie in (0, 1)");
  }
  const double half_over_x = 0.5 / x;
  const long long m = std::llround(half_over_x);
  if (m < 2 || std::abs(half_over_x - static_cast<double>(m)) > 1e-9) {
    throw ConfigError("certify_supermartingale: x must divide 1/2 so the scan "
                      "grid can align with the step scale");
  }
  // Grid spacing x / pps with pps chosen so spacing <= 1/1024; every atom
  // offset must then land a whole number of grid steps away, which keeps the
  // exponent free of interpolation error.
  const int pps = std::max<int>(8, static_cast<int>(std::ceil(1024.0 * x)));
  const int panels = static_cast<int>(m) * pps;
  const double spacing = 0.5 / panels;
  const AtomList probe = atoms(family, 0.25);
  std::vector<long long> shift(probe.atoms.size());
  for (size_t i = 0; i < probe.atoms.size(); ++i) {
    const double steps = probe.atoms[i].y * x / spacing;
    shift[i] = std::llround(steps);
    if (std::abs(static_cast<double>(shift[i]) * spacing - probe.atoms[i].y * x) >
        1e-12) {
      throw ConfigError("certify_supermartingale: atom offset " +
                        fmt17(probe.atoms[i].y) +
                        " is not grid-aligned for this x");
    }
  }

  const LambdaTable table = solve_lambda_table(family, panels, 1e-12);
  const std::vector<double> big = integrate_right_to_left(table, panels);

  SupermartingaleWindow out;
  out.delta = delta;
  out.x = x;
  out.a_x = std::max(x * family.y_max, 0.02);
  out.tolerance = tolerance;

  const int j_start = static_cast<int>(std::ceil(out.a_x / spacing - 1e-9));
  const double theta = (1.0 - delta) / x;
  bool violated = false;
  for (int j = j_start; j <= panels; ++j) {
    const double w = node_w(j, panels);
    const AtomList list = atoms(family, w);
    double sum = 0.0;
    for (size_t i = 0; i < list.atoms.size(); ++i) {
      long long idx = j + shift[i];
      if (idx > panels) {
        idx = 2LL * panels - idx;  // mirror: Lambda(w) = Lambda(1 - w)
      }
      if (idx < 0) {
        throw ContractViolation("certify_supermartingale: scan left the table");
      }
      sum += list.atoms[i].p * std::exp(theta * (big[idx] - big[j]));
    }
    out.grid.push_back(w);
    out.excess.push_back(sum - 1.0);
    if (!violated && sum - 1.0 > tolerance) {
      violated = true;
      out.first_violation_w = w;
      out.first_violation_excess = sum - 1.0;
    }
  }
  out.window_start = out.grid.front();
  out.holds_on_full_grid = !violated;
  if (violated) {
    if (out.first_violation_w == out.grid.front()) {
      out.window_start = std::nan("");
      out.window_end = std::nan("");
    } else {
      const auto it = std::find(out.grid.begin(), out.grid.end(), out.first_violation_w);
      out.window_end = *(it - 1);
    }
  } else {
    out.window_end = out.grid.back();
  }
  return out;
}

std::string profile_to_csv(const RateProfile& profile) {
  std::string csv = "w,lambda,biglambda\n";
  for (size_t j = 0; j < profile.grid.size(); ++j) {
    csv += fmt17(profile.grid[j]);
    csv += ',';
    csv += fmt17(profile.lambda[j]);
    csv += ',';
    csv += fmt17(profile.biglambda[j]);
    csv += '\n';
  }
  return csv;
}

std::string profile_to_json(const RateProfile& profile) {
  nlohmann::ordered_json j;
  j["family_id"] = profile.family_id;
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : profile.parameters) {
    j["parameters"][key] = value;
  }
  j["grid_size"] = profile.grid_size;
  j["tol"] = profile.tol;
  j["C"] = profile.C;
  j["clipped_at_zero"] = profile.clipped_at_zero;
  return j.dump(2) + "\n";
}

RateProfile profile_from_csv_json(const std::string& csv, const std::string& json) {
  RateProfile p;
  const nlohmann::json j = nlohmann::json::parse(json);
  p.family_id = j.at("family_id").get<std::string>();
  for (const auto& [key, value] : j.at("parameters").items()) {
    p.parameters[key] = value.get<double>();
  }
  p.grid_size = j.at("grid_size").get<int>();
  p.tol = j.at("tol").get<double>();
  p.C = j.at("C").get<double>();
  p.clipped_at_zero = j.value("clipped_at_zero", false);

  const std::vector<std::string> lines = split_trimmed(csv, '\n');
  if (lines.empty() || lines[0] != "w,lambda,biglambda") {
    throw ConfigError("profile CSV: missing or wrong header row");
  }
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      continue;
    }
    const std::vector<std::string> cells = split_trimmed(lines[i], ',');
    if (cells.size() != 3) {
      throw ConfigError("profile CSV: row " + std::to_string(i) + " is malformed");
    }
    p.grid.push_back(std::strtod(cells[0].c_str(), nullptr));
    p.lambda.push_back(std::strtod(cells[1].c_str(), nullptr));
    p.biglambda.push_back(std::strtod(cells[2].c_str(), nullptr));
  }
  return p;
}

}  // namespace trapsim
