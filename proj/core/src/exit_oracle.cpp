#include "trapsim/exit_oracle.hpp"

#include <cmath>
#include <cstdlib>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

void BirthDeathChain::validate() const {
  if (up.size() != down.size() || up.empty()) {
    throw ConfigError("birth-death chain: up/down must be nonempty and equal length");
  }
  if (up.size() > 10000) {
    throw ConfigError("birth-death chain: at most 1e4 states supported");
  }
  for (size_t i = 0; i < up.size(); ++i) {
    if (up[i] < 0.0 || down[i] < 0.0 || up[i] + down[i] > 1.0 + 1e-12) {
      throw ConfigError("birth-death chain: row " + std::to_string(i) +
                        " is not a probability row");
    }
  }
}

namespace {

// Solve (I - P_interior) sol = rhs. Tridiagonal: diagonal 1 - stay[i]
// (= up[i] + down[i] up to rounding), sub -down[i], super -up[i].
std::vector<double> solve_first_step(const BirthDeathChain& chain,
                                     std::vector<double> rhs) {
  const size_t n = chain.up.size();
  std::vector<double> diag(n), super(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    diag[i] = chain.up[i] + chain.down[i];
    if (i + 1 < n) {
      super[i] = -chain.up[i];
    }
  }
  // Forward elimination of the sub-diagonal -down[i].
  for (size_t i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) < 1e-300) {
      throw DomainError("exact_exit_oracle: singular system, absorption "
                        "unreachable from state " + std::to_string(i - 1));
    }
    const double m = -chain.down[i] / diag[i - 1];
    diag[i] -= m * super[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) < 1e-300) {
    throw DomainError("exact_exit_oracle: singular system, absorption "
                      "unreachable from state " + std::to_string(n - 1));
  }
  std::vector<double> sol(n);
  sol[n - 1] = rhs[n - 1] / diag[n - 1];
  for (size_t i = n - 1; i-- > 0;) {
    sol[i] = (rhs[i] - super[i] * sol[i + 1]) / diag[i];
  }
  return sol;
}

}  // namespace

std::vector<double> exact_exit_oracle(const BirthDeathChain& chain) {
  chain.validate();
  return solve_first_step(chain, std::vector<double>(chain.up.size(), 1.0));
}

std::vector<double> exit_time_second_moment(const BirthDeathChain& chain,
                                            const std::vector<double>& h) {
  chain.validate();
  if (h.size() != chain.up.size()) {
    throw ConfigError("exit_time_second_moment: h has wrong length");
  }
  std::vector<double> rhs(h.size());
  for (size_t i = 0; i < h.size(); ++i) {
    rhs[i] = 2.0 * h[i] - 1.0;
  }
  return solve_first_step(chain, std::move(rhs));
}

std::vector<double> exit_probability_by_horizon(const BirthDeathChain& chain,
                                                long long horizon) {
  chain.validate();
  if (horizon < 0) {
    throw ConfigError("exit_probability_by_horizon: horizon must be >= 0");
  }
  const size_t n = chain.up.size();
  std::vector<double> f(n, 0.0), g(n, 0.0);
  for (long long s = 0; s < horizon; ++s) {
    for (size_t i = 0; i < n; ++i) {
      const double up_term = (i + 1 < n) ? f[i + 1] : 1.0;
      const double down_term = (i > 0) ? f[i - 1] : 1.0;
      const double stay = 1.0 - chain.up[i] - chain.down[i];
      g[i] = chain.up[i] * up_term + chain.down[i] * down_term + stay * f[i];
    }
    f.swap(g);
  }
  return f;
}

BirthDeathChain induced_chain(const IncrementFamily& family, double x, double a_x) {
  if (!(x > 0.0 && x < 0.5) || !(a_x > 0.0 && a_x < 0.5)) {
    throw ConfigError("induced_chain: need 0 < x < 1/2 and 0 < a_x < 1/2");
  }
  BirthDeathChain chain;
  const long long k_max =
      static_cast<long long>(std::floor((1.0 - 2.0 * a_x) / x + 1e-9));
  for (long long k = 0; k <= k_max; ++k) {
    const double w = a_x + static_cast<double>(k) * x;
    double up = 0.0, down = 0.0, stay = 0.0;
    for (const Atom& atom : atoms(family, std::min(w, 1.0)).atoms) {
      const long long dir = std::llround(atom.y);
      if (std::abs(atom.y - static_cast<double>(dir)) > 1e-12 ||
          dir < -1 || dir > 1) {
        throw DomainError("induced_chain: family offsets must lie in {-1,0,+1}");
      }
      (dir > 0 ? up : dir < 0 ? down : stay) += atom.p;
    }
    chain.up.push_back(up);
    chain.down.push_back(down);
    chain.states.push_back(w);
  }
  chain.validate();
  return chain;
}

}  // namespace trapsim
