#include "trapsim/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

namespace {

double comb2(int m) { return 0.5 * m * (m - 1); }

// Per-agent trio outcomes: probability plus the three packed edge ids.
struct AgentOutcomes {
  std::vector<double> prob;
  std::vector<std::array<int, 3>> edges;
};

std::vector<AgentOutcomes> enumerate_agents(const NetworkState& state) {
  std::vector<AgentOutcomes> all(state.N);
  for (int i = 0; i < state.N; ++i) {
    auto dist = trio_distribution(state, i);
    AgentOutcomes& out = all[i];
    out.prob.reserve(dist.size());
    out.edges.reserve(dist.size());
    for (const auto& [choice, p] : dist) {
      out.prob.push_back(p);
      const auto& m = choice.members;
      out.edges.push_back({state.edge_index(m[0], m[1]),
                           state.edge_index(m[0], m[2]),
                           state.edge_index(m[1], m[2])});
    }
  }
  return all;
}

}  // namespace

std::vector<double> expected_reinforcement(const NetworkState& state) {
  if (state.N > 10) {
    throw DomainError("expected_reinforcement: exact enumeration supports N <= 10; "
                      "use mc_drift for larger populations");
  }
  std::vector<double> er(state.w.size(), 0.0);
  for (const AgentOutcomes& agent : enumerate_agents(state)) {
    for (size_t j = 0; j < agent.prob.size(); ++j) {
      for (int e : agent.edges[j]) {
        er[e] += agent.prob[j];
      }
    }
  }
  return er;
}

DriftField drift(const NetworkState& state) {
  if (state.N > 10) {
    throw DomainError("drift: exact enumeration supports N <= 10; use mc_drift "
                      "for larger populations");
  }
  const double E = static_cast<double>(state.edge_count());
  const double S = state.total();
  const double S1 = state.decay_after_add
                        ? (1.0 - state.x) * (S + 3.0 * state.N)
                        : (1.0 - state.x) * S + 3.0 * state.N;
  const std::vector<double> er = expected_reinforcement(state);

  DriftField f;
  f.n = state.N - 1;
  f.at.resize(state.w.size());
  f.value.resize(state.w.size());
  for (size_t e = 0; e < state.w.size(); ++e) {
    f.at[e] = state.w[e] * (E / S);
    const double next_raw = state.decay_after_add
                                ? (1.0 - state.x) * (state.w[e] + er[e])
                                : (1.0 - state.x) * state.w[e] + er[e];
    f.value[e] = next_raw * (E / S1) - f.at[e];
  }
  return f;
}

DriftField mc_drift(const NetworkState& state, long long replicates, Rng& rng,
                    std::vector<double>* se_out) {
  if (replicates < 1000) {
    throw ConfigError("mc_drift: at least 1e3 replicates required");
  }
  const double E = static_cast<double>(state.edge_count());
  const double S = state.total();
  const double S1 = state.decay_after_add
                        ? (1.0 - state.x) * (S + 3.0 * state.N)
                        : (1.0 - state.x) * S + 3.0 * state.N;
  const auto agents = enumerate_agents(state);
  const size_t n_edges = state.w.size();
  std::vector<double> sum(n_edges, 0.0), sum_sq(n_edges, 0.0);
  std::vector<double> r(n_edges);
  for (long long rep = 0; rep < replicates; ++rep) {
    std::fill(r.begin(), r.end(), 0.0);
    for (const AgentOutcomes& agent : agents) {
      const double u = rng.next_unit();
      double cum = 0.0;
      size_t pick = agent.prob.size() - 1;
      for (size_t j = 0; j < agent.prob.size(); ++j) {
        cum += agent.prob[j];
        if (u < cum) {
          pick = j;
          break;
        }
      }
      for (int e : agent.edges[pick]) {
        r[e] += 1.0;
      }
    }
    for (size_t e = 0; e < n_edges; ++e) {
      sum[e] += r[e];
      sum_sq[e] += r[e] * r[e];
    }
  }

  DriftField f;
  f.n = state.N - 1;
  f.at.resize(n_edges);
  f.value.resize(n_edges);
  if (se_out) {
    se_out->assign(n_edges, 0.0);
  }
  const double m = static_cast<double>(replicates);
  for (size_t e = 0; e < n_edges; ++e) {
    f.at[e] = state.w[e] * (E / S);
    const double mean_r = sum[e] / m;
    const double next_raw = state.decay_after_add
                                ? (1.0 - state.x) * (state.w[e] + mean_r)
                                : (1.0 - state.x) * state.w[e] + mean_r;
    f.value[e] = next_raw * (E / S1) - f.at[e];
    if (se_out) {
      const double var = std::max(0.0, (sum_sq[e] - m * mean_r * mean_r) / (m - 1.0));
      const double scale = state.decay_after_add ? (1.0 - state.x) : 1.0;
      (*se_out)[e] = scale * (E / S1) * std::sqrt(var / m);
    }
  }
  return f;
}

std::array<double, 3> bj_coefficients(int n) {
  if (n < 3) {
    throw DomainError("bj_coefficients: n must be >= 3");
  }
  const double nn = n;
  return {2.0 * (nn - 2.0) / (3.0 * nn), 0.0, -4.0 / (3.0 * nn * (nn - 1.0))};
}

std::array<std::array<double, 3>, 3> reduced_matrix(int n) {
  if (n < 4) {
    throw DomainError("reduced_matrix: n must be >= 4");
  }
  const double f = 4.0 / (3.0 * n * (n - 1.0));
  const double c1 = comb2(n - 1);
  const double c2 = comb2(n - 2);
  return {{{f * c1, 0.0, f * -1.0},
           {0.0, f * c2, f * -2.0 * (n - 3.0)},
           {f * -c1, f * -c2, f * (2.0 * n - 5.0)}}};
}

MeanFieldLinearization spectrum(int n) {
  MeanFieldLinearization lin;
  lin.n = n;
  const auto bj = bj_coefficients(n);
  lin.B0 = bj[0];
  lin.B1 = bj[1];
  lin.B2 = bj[2];
  lin.reduced = reduced_matrix(n);
  const double e1 = (2.0 / 3.0) * (n + 1.0) * (n - 2.0) / (n * (n - 1.0));
  const double e2 = (2.0 / 3.0) * (n - 3.0) / (n - 1.0);
  lin.eigenvalues = {0.0, e1, e2};
  lin.left_eigenvectors = {{{1.0, 1.0, 1.0},
                            {(n - 1.0) / 2.0, (n - 3.0) / 4.0, -1.0},
                            {(n - 1.0) * (n - 2.0) / 2.0, -(n - 2.0) / 2.0, 1.0}}};

  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m(r, c) = lin.reduced[r][c];
    }
  }
  Eigen::EigenSolver<Eigen::Matrix3d> solver(m);
  std::array<double, 3> numeric{};
  for (int k = 0; k < 3; ++k) {
    const auto ev = solver.eigenvalues()(k);
    if (std::abs(ev.imag()) > 1e-9) {
      throw NumericError("spectrum: unexpected complex eigenvalue at n = " +
                         std::to_string(n));
    }
    numeric[k] = ev.real();
  }
  std::array<double, 3> closed = lin.eigenvalues;
  std::sort(closed.begin(), closed.end());
  std::sort(numeric.begin(), numeric.end());
  for (int k = 0; k < 3; ++k) {
    if (std::abs(closed[k] - numeric[k]) > 1e-9) {
      throw NumericError("spectrum: closed-form/numeric eigenvalue mismatch at n = " +
                         std::to_string(n));
    }
  }
  lin.attracting = e1 < 1.0 && e2 < 1.0;
  return lin;
}

std::string linearization_to_json(const MeanFieldLinearization& lin) {
  nlohmann::ordered_json j;
  j["n"] = lin.n;
  j["B0"] = lin.B0;
  j["B1"] = lin.B1;
  j["B2"] = lin.B2;
  j["reduced"] = {{lin.reduced[0][0], lin.reduced[0][1], lin.reduced[0][2]},
                  {lin.reduced[1][0], lin.reduced[1][1], lin.reduced[1][2]},
                  {lin.reduced[2][0], lin.reduced[2][1], lin.reduced[2][2]}};
  j["eigenvalues"] = {lin.eigenvalues[0], lin.eigenvalues[1], lin.eigenvalues[2]};
  j["left_eigenvectors"] = {
      {lin.left_eigenvectors[0][0], lin.left_eigenvectors[0][1], lin.left_eigenvectors[0][2]},
      {lin.left_eigenvectors[1][0], lin.left_eigenvectors[1][1], lin.left_eigenvectors[1][2]},
      {lin.left_eigenvectors[2][0], lin.left_eigenvectors[2][1], lin.left_eigenvectors[2][2]}};
  j["attracting"] = lin.attracting;
  return j.dump(2) + "\n";
}

std::string spectrum_scan_to_csv(int n_min, int n_max) {
  if (n_min < 4 || n_max < n_min) {
    throw ConfigError("spectrum_scan: need 4 <= n_min <= n_max");
  }
  std::string csv = "n,lambda2,lambda3,attracting\n";
  for (int n = n_min; n <= n_max; ++n) {
    const MeanFieldLinearization lin = spectrum(n);
    csv += std::to_string(n);
    csv += ',';
    csv += fmt17(lin.eigenvalues[1]);
    csv += ',';
    csv += fmt17(lin.eigenvalues[2]);
    csv += ',';
    csv += lin.attracting ? '1' : '0';
    csv += '\n';
  }
  return csv;
}

}  // namespace trapsim
