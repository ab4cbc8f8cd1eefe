#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"
#include "trapsim/meanfield.hpp"

namespace trapsim {

namespace {

// Deterministic standard normal from our own uniform stream (library normal
// distributions are implementation-defined and would break reproducibility).
double gaussian(Rng& rng) {
  double u1 = rng.next_unit();
  while (u1 <= 0.0) {
    u1 = rng.next_unit();
  }
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

std::vector<double> unit_zero_sum(std::vector<double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) /
                      static_cast<double>(v.size());
  double norm_sq = 0.0;
  for (double& c : v) {
    c -= mean;
    norm_sq += c * c;
  }
  const double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0)) {
    throw NumericError("lyapunov_certificate: degenerate direction");
  }
  for (double& c : v) {
    c /= norm;
  }
  return v;
}

struct AgentTable {
  std::vector<double> prob;
  std::vector<std::array<int, 3>> edges;
};

std::vector<AgentTable> agent_tables(const NetworkState& state) {
  std::vector<AgentTable> all(state.N);
  for (int i = 0; i < state.N; ++i) {
    auto dist = trio_distribution(state, i);
    all[i].prob.reserve(dist.size());
    all[i].edges.reserve(dist.size());
    for (const auto& [choice, p] : dist) {
      const auto& m = choice.members;
      all[i].prob.push_back(p);
      all[i].edges.push_back({state.edge_index(m[0], m[1]),
                              state.edge_index(m[0], m[2]),
                              state.edge_index(m[1], m[2])});
    }
  }
  return all;
}

// Exact mean displacement and the trace of its covariance for one step from
// `state`, in normalized coordinates (total pinned at the stationary value).
struct StepMoments {
  std::vector<double> mean;  // of h1 = normalized(next) - center
  double trace_cov = 0.0;
};

StepMoments step_moments(const NetworkState& state,
                         const std::vector<AgentTable>& agents, double S0) {
  const double E = static_cast<double>(state.edge_count());
  const double kappa = E / S0;
  const size_t n_edges = state.w.size();
  std::vector<double> er(n_edges, 0.0);
  double trace_r = 0.0;  // sum over edges of Var(R_e)
  std::vector<double> q(n_edges);
  for (const AgentTable& agent : agents) {
    std::fill(q.begin(), q.end(), 0.0);
    for (size_t j = 0; j < agent.prob.size(); ++j) {
      for (int e : agent.edges[j]) {
        q[e] += agent.prob[j];
      }
    }
    for (size_t e = 0; e < n_edges; ++e) {
      er[e] += q[e];
      trace_r += q[e] * (1.0 - q[e]);  // per-agent indicator variance
    }
  }
  StepMoments m;
  m.mean.resize(n_edges);
  for (size_t e = 0; e < n_edges; ++e) {
    m.mean[e] = kappa * ((1.0 - state.x) * state.w[e] + er[e]) - 1.0;
  }
  m.trace_cov = kappa * kappa * trace_r;
  return m;
}

// E[exp(lam_gap * |h1|^2)] by exhaustive enumeration of the joint trio
// outcome of all agents; |h1|^2 is maintained incrementally along the
// depth-first walk through base + kappa*R.
class JointEnumerator {
 public:
  JointEnumerator(const std::vector<AgentTable>& agents,
                  std::vector<double> base, double kappa, double lam_gap)
      : agents_(agents),
        base_(std::move(base)),
        kappa_(kappa),
        lam_gap_(lam_gap),
        r_(base_.size(), 0) {
    for (double b : base_) {
      base_sq_ += b * b;
    }
  }

  double run() {
    acc_ = 0.0;
    dfs(0, 1.0, 0.0, 0.0);
    return acc_;
  }

 private:
  void dfs(size_t level, double prob, double dot, double sq) {
    if (level == agents_.size()) {
      const double h1_sq = base_sq_ + 2.0 * kappa_ * dot + kappa_ * kappa_ * sq;
      acc_ += prob * std::exp(lam_gap_ * h1_sq);
      return;
    }
    const AgentTable& agent = agents_[level];
    for (size_t j = 0; j < agent.prob.size(); ++j) {
      double d = dot, s = sq;
      for (int e : agent.edges[j]) {
        d += base_[e];
        s += 2.0 * r_[e] + 1.0;
        r_[e] += 1;
      }
      dfs(level + 1, prob * agent.prob[j], d, s);
      for (int e : agent.edges[j]) {
        r_[e] -= 1;
      }
    }
  }

  const std::vector<AgentTable>& agents_;
  std::vector<double> base_;
  double base_sq_ = 0.0;
  double kappa_ = 0.0;
  double lam_gap_ = 0.0;
  std::vector<int> r_;
  double acc_ = 0.0;
};

NetworkState shell_state(int N, double x, TrioRule rule, double s0,
                         const std::vector<double>& h) {
  NetworkState s = init_state(N, x, InitMode::stationary);
  s.rule = rule;
  for (size_t e = 0; e < s.w.size(); ++e) {
    const double scaled = (1.0 + h[e]) * s0;
    if (!(scaled > 0.0)) {
      throw ConfigError("lyapunov_certificate: radius too large, a probe state "
                        "left the positive cone");
    }
    s.w[e] = scaled;
  }
  return s;
}

}  // namespace

LyapunovCertificate lyapunov_certificate(int n, double x, double radius,
                                         int grid_resolution,
                                         std::uint64_t seed, TrioRule rule) {
  const int N = n + 1;
  if (N < 4 || N > 8) {
    throw DomainError("lyapunov_certificate: exact joint enumeration supports "
                      "4 <= n+1 <= 8");
  }
  if (!(x > 0.0 && x <= 0.1)) {
    throw ConfigError("lyapunov_certificate: x must lie in (0, 0.1]");
  }
  if (!(radius > 0.0 && radius < 1.0)) {
    throw ConfigError("lyapunov_certificate: radius must lie in (0, 1)");
  }
  if (grid_resolution < 1) {
    throw ConfigError("lyapunov_certificate: grid_resolution must be >= 1");
  }

  const int E = N * (N - 1) / 2;
  const double S0 = 3.0 * N / x;  // stationary total; one step maps it to itself
  const double s0 = S0 / E;
  const double kappa = E / S0;

  LyapunovCertificate cert;
  cert.n = n;
  cert.x = x;
  cert.radius = radius;
  cert.center.assign(E, 1.0);
  cert.q_scale = 1.0 - spectrum(n).eigenvalues[1];  // spectral gap
  cert.V0 = 2.0 * cert.q_scale * radius * radius;
  cert.q_structure = "V(h) = V0 - q_scale * h^T (I - ones ones^T / E) h";

  // Shell of displacement directions: random zero-sum Gaussians plus the
  // three edge-distance patterns around the pair (0,1).
  Rng rng(seed);
  std::vector<std::vector<double>> shell;
  shell.reserve(grid_resolution + 3);
  for (int g = 0; g < grid_resolution; ++g) {
    std::vector<double> v(E);
    for (double& c : v) {
      c = gaussian(rng);
    }
    shell.push_back(unit_zero_sum(std::move(v)));
  }
  {
    NetworkState probe = init_state(N, x, InitMode::unit);
    for (int dist = 0; dist <= 2; ++dist) {
      std::vector<double> v(E, 0.0);
      for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
          const int shared = (i == 0 || i == 1 ? 1 : 0) + (j == 0 || j == 1 ? 1 : 0);
          if (2 - shared == dist) {
            v[probe.edge_index(i, j)] = 1.0;
          }
        }
      }
      shell.push_back(unit_zero_sum(std::move(v)));
    }
  }
  for (auto& dir : shell) {
    for (double& c : dir) {
      c *= radius;
    }
  }
  cert.grid_checked = static_cast<int>(shell.size());

  // Stage 1: exact mean condition E[V(next)] > V(point) on the whole shell.
  std::vector<std::vector<AgentTable>> tables(shell.size());
  std::vector<std::vector<double>> bases(shell.size());
  cert.worst_mean_margin = HUGE_VAL;
  bool mean_ok = true;
  for (size_t g = 0; g < shell.size(); ++g) {
    const NetworkState state = shell_state(N, x, rule, s0, shell[g]);
    tables[g] = agent_tables(state);
    bases[g].resize(E);
    for (int e = 0; e < E; ++e) {
      bases[g][e] = kappa * (1.0 - x) * state.w[e] - 1.0;
    }
    const StepMoments m = step_moments(state, tables[g], S0);
    double h_sq = 0.0, m_sq = 0.0;
    for (int e = 0; e < E; ++e) {
      h_sq += shell[g][e] * shell[g][e];
      m_sq += m.mean[e] * m.mean[e];
    }
    const double margin = cert.q_scale * (h_sq - m_sq - m.trace_cov);
    if (margin <= 0.0) {
      mean_ok = false;
    }
    if (margin < cert.worst_mean_margin) {
      cert.worst_mean_margin = margin;
      cert.worst_point = shell[g];
    }
  }
  cert.mean_condition_ok = mean_ok;

  {  // Center diagnostic: the one-step noise strictly lowers E[V] at the top.
    const NetworkState center = shell_state(N, x, rule, s0,
                                            std::vector<double>(E, 0.0));
    const StepMoments m = step_moments(center, agent_tables(center), S0);
    double m_sq = 0.0;
    for (double c : m.mean) {
      m_sq += c * c;
    }
    cert.center_mean_change = -cert.q_scale * (m_sq + m.trace_cov);
  }

  // Probes at twice the radius must put V below zero.
  for (int p = 0; p < 8; ++p) {
    std::vector<double> v(E);
    for (double& c : v) {
      c = gaussian(rng);
    }
    v = unit_zero_sum(std::move(v));
    double v_val = cert.V0;
    for (double& c : v) {
      c *= 2.0 * radius;
    }
    double norm_sq = 0.0;
    for (double c : v) {
      norm_sq += c * c;
    }
    v_val -= cert.q_scale * norm_sq;
    ++cert.outside_probes_total;
    if (v_val < 0.0) {
      ++cert.outside_probes_negative;
    }
  }

  if (!mean_ok) {
    cert.failure_reason =
        "mean condition failed: E[V(next)] <= V at the worst shell point "
        "(margin " + fmt17(cert.worst_mean_margin) + "); by convexity no "
        "lambda can make exp(-lambda V) a supermartingale there";
    return cert;
  }

  // Stage 2: search lambda in {2^-k} for the exponential inequality
  // E[exp(lambda*q_scale*|h1|^2)] <= exp(lambda*q_scale*|h|^2) on the shell
  // (both sides share the exp(-lambda*V0) factor, which is divided out).
  for (int k = 0; k <= 20 && !cert.verified; ++k) {
    const double lambda = std::ldexp(1.0, -k);
    bool ok = true;
    double worst_margin = HUGE_VAL;
    std::vector<double> worst_point;
    for (size_t g = 0; g < shell.size() && ok; ++g) {
      double h_sq = 0.0;
      for (double c : shell[g]) {
        h_sq += c * c;
      }
      JointEnumerator enumerator(tables[g], bases[g], kappa,
                                 lambda * cert.q_scale);
      const double lhs = enumerator.run();
      const double rhs = std::exp(lambda * cert.q_scale * h_sq);
      const double margin = rhs - lhs;
      if (margin < worst_margin) {
        worst_margin = margin;
        worst_point = shell[g];
      }
      if (margin <= 0.0) {
        ok = false;
      }
    }
    if (ok) {
      cert.verified = true;
      cert.lambda = lambda;
      cert.gamma = lambda * cert.V0 / 4.0;
    } else if (k == 20) {
      cert.worst_mean_margin = worst_margin;
      cert.worst_point = worst_point;
      cert.failure_reason = "no lambda down to 2^-20 satisfies the exponential "
                            "inequality on the whole shell";
    }
  }
  return cert;
}

std::string certificate_to_json(const LyapunovCertificate& cert) {
  nlohmann::ordered_json j;
  j["n"] = cert.n;
  j["x"] = cert.x;
  j["radius"] = cert.radius;
  j["grid_checked"] = cert.grid_checked;
  j["center"] = cert.center;
  j["V0"] = cert.V0;
  j["q_scale"] = cert.q_scale;
  j["q_structure"] = cert.q_structure;
  j["lambda"] = cert.lambda;
  j["gamma"] = cert.gamma;
  j["mean_condition_ok"] = cert.mean_condition_ok;
  j["verified"] = cert.verified;
  j["worst_mean_margin"] = cert.worst_mean_margin;
  j["worst_point"] = cert.worst_point;
  j["center_mean_change"] = cert.center_mean_change;
  j["outside_probes_negative"] = cert.outside_probes_negative;
  j["outside_probes_total"] = cert.outside_probes_total;
  j["failure_reason"] = cert.failure_reason;
  return j.dump(2) + "\n";
}

}  // namespace trapsim
