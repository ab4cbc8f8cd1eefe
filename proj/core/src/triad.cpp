#include "trapsim/triad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trapsim/errors.hpp"
#include "trapsim/io.hpp"

namespace trapsim {

int NetworkState::edge_index(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= N || j >= N) {
    throw ContractViolation("edge_index: invalid pair (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");
  }
  if (i > j) {
    std::swap(i, j);
  }
  return i * (2 * N - i - 1) / 2 + (j - i - 1);
}

double NetworkState::total() const {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

NetworkState init_state(int N, double x, InitMode mode) {
  if (N < 4) {
    throw DomainError("init_state: N must be >= 4 (a trio plus a nonmember)");
  }
  if (!(x > 0.0 && x < 1.0)) {
    throw ConfigError("init_state: x must lie in (0,1)");
  }
  NetworkState s;
  s.N = N;
  s.x = x;
  s.t = 0;
  double w0 = 1.0;
  if (mode == InitMode::stationary) {
    // Scale the unit matrix so the unordered total sits at its fixed point
    // 3N/x of S <- (1-x)S + 3N.
    w0 = (3.0 * N / x) / (N * (N - 1) / 2.0);
  }
  s.w.assign(N * (N - 1) / 2, w0);
  return s;
}

namespace {

double trio_weight(const NetworkState& s, int i, int j, int k) {
  const double cross = s.pair(i, j) * s.pair(i, k);
  if (s.rule == TrioRule::chooser_pairs_only) {
    return cross;
  }
  return cross * s.pair(j, k);
}

}  // namespace

std::vector<std::pair<TrioChoice, double>> trio_distribution(const NetworkState& state,
                                                             int i) {
  if (i < 0 || i >= state.N) {
    throw DomainError("trio_distribution: agent id out of range");
  }
  std::vector<std::pair<TrioChoice, double>> out;
  out.reserve((state.N - 1) * (state.N - 2) / 2);
  double total = 0.0;
  for (int j = 0; j < state.N; ++j) {
    if (j == i) continue;
    for (int k = j + 1; k < state.N; ++k) {
      if (k == i) continue;
      const double wt = trio_weight(state, i, j, k);
      std::array<int, 3> members{i, j, k};
      std::sort(members.begin(), members.end());
      out.push_back({TrioChoice{i, members}, wt});
      total += wt;
    }
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DomainError("trio_distribution: agent " + std::to_string(i) +
                      " has no trio with positive weight product");
  }
  for (auto& entry : out) {
    entry.second /= total;
  }
  return out;
}

std::vector<TrioChoice> step(NetworkState& state, Rng& rng) {
  const int N = state.N;
  std::vector<TrioChoice> choices;
  choices.reserve(N);
  std::vector<double> increments(state.w.size(), 0.0);
  // All agents sample from the same pre-step weights (synchronous play).
  for (int i = 0; i < N; ++i) {
    double total = 0.0;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k < N; ++k) {
        if (k == i) continue;
        total += trio_weight(state, i, j, k);
      }
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw DomainError("step: agent " + std::to_string(i) +
                        " has no trio with positive weight product");
    }
    const double u = rng.next_unit() * total;
    double cum = 0.0;
    int cj = -1, ck = -1;
    for (int j = 0; j < N && cj < 0; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k < N; ++k) {
        if (k == i) continue;
        cum += trio_weight(state, i, j, k);
        if (u < cum) {
          cj = j;
          ck = k;
          break;
        }
      }
    }
    if (cj < 0) {  // u landed in the rounding slack at the top
      for (int j = N - 1; j >= 0 && cj < 0; --j) {
        if (j == i) continue;
        for (int k = N - 1; k > j; --k) {
          if (k == i) continue;
          cj = j;
          ck = k;
          break;
        }
      }
    }
    std::array<int, 3> members{i, cj, ck};
    std::sort(members.begin(), members.end());
    choices.push_back(TrioChoice{i, members});
    increments[state.edge_index(members[0], members[1])] += 1.0;
    increments[state.edge_index(members[0], members[2])] += 1.0;
    increments[state.edge_index(members[1], members[2])] += 1.0;
  }
  const double keep = 1.0 - state.x;
  if (state.decay_after_add) {
    for (size_t e = 0; e < state.w.size(); ++e) {
      state.w[e] = keep * (state.w[e] + increments[e]);
    }
  } else {
    for (size_t e = 0; e < state.w.size(); ++e) {
      state.w[e] = keep * state.w[e] + increments[e];
    }
  }
  state.t += 1;
  return choices;
}

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

PartitionReport detect_partition(const NetworkState& state, double threshold,
                                 const TrioHistory& history, int persistence) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("detect_partition: threshold must lie in (0,1)");
  }
  if (persistence < 1) {
    throw ConfigError("detect_partition: persistence must be >= 1");
  }
  const int N = state.N;
  const double S = state.total();
  const double cut = threshold * (S / state.edge_count());

  Dsu dsu(N);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      if (state.pair(i, j) >= cut) {
        dsu.unite(i, j);
      }
    }
  }
  std::vector<int> root_of(N);
  for (int i = 0; i < N; ++i) {
    root_of[i] = dsu.find(i);
  }

  PartitionReport report;
  std::vector<bool> emitted(N, false);
  for (int i = 0; i < N; ++i) {
    if (emitted[i]) {
      continue;
    }
    std::vector<int> block;
    for (int j = i; j < N; ++j) {
      if (root_of[j] == root_of[i]) {
        block.push_back(j);
        emitted[j] = true;
      }
    }
    report.blocks.push_back(std::move(block));
  }
  for (const auto& block : report.blocks) {
    report.block_sizes.push_back(static_cast<int>(block.size()));
  }
  std::sort(report.block_sizes.begin(), report.block_sizes.end());

  double cross = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      if (root_of[i] != root_of[j]) {
        cross += state.pair(i, j);
      }
    }
  }
  report.cross_weight_fraction = S > 0.0 ? cross / S : 0.0;

  const bool sizes_ok = std::all_of(report.block_sizes.begin(),
                                    report.block_sizes.end(),
                                    [](int s) { return s >= 3 && s <= 5; });
  if (sizes_ok && static_cast<int>(history.size()) >= persistence) {
    bool clean = true;
    const size_t start = history.size() - static_cast<size_t>(persistence);
    for (size_t h = start; h < history.size() && clean; ++h) {
      for (const TrioChoice& c : history[h]) {
        if (root_of[c.members[0]] != root_of[c.members[1]] ||
            root_of[c.members[0]] != root_of[c.members[2]]) {
          clean = false;
          break;
        }
      }
    }
    if (clean) {
      report.trapped = true;
      report.detected_at = state.t;
    }
  }
  return report;
}

TrapRunResult run_until_trap(NetworkState state, long long max_steps,
                             double threshold, int persistence, Rng& rng,
                             int log_stride) {
  if (max_steps < 0) {
    throw ConfigError("run_until_trap: max_steps must be >= 0");
  }
  TrapRunResult result;
  TrioHistory history;
  PartitionReport report = detect_partition(state, threshold, history, persistence);
  while (state.t < max_steps && !report.trapped) {
    std::vector<TrioChoice> choices = step(state, rng);
    history.push_back(std::move(choices));
    if (static_cast<int>(history.size()) > persistence) {
      history.pop_front();
    }
    report = detect_partition(state, threshold, history, persistence);
    if (log_stride > 0 && (state.t % log_stride == 0 || report.trapped)) {
      result.log.push_back({state.t, state.total(),
                            report.cross_weight_fraction, report.trapped});
    }
  }
  result.report = std::move(report);
  result.steps_taken = state.t;
  return result;
}

std::vector<TrapRunResult> trap_ensemble(int N, double x, InitMode mode,
                                         TrioRule rule, long long n_runs,
                                         long long max_steps, double threshold,
                                         int persistence,
                                         std::uint64_t master_seed) {
  std::vector<TrapRunResult> results;
  results.reserve(n_runs);
  for (long long i = 0; i < n_runs; ++i) {
    NetworkState s = init_state(N, x, mode);
    s.rule = rule;
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    results.push_back(run_until_trap(std::move(s), max_steps, threshold,
                                     persistence, rng, 0));
  }
  return results;
}

std::string trajectory_to_csv(const std::vector<TrajectoryRow>& rows) {
  std::string csv = "t,S_t,cross_weight_fraction,trapped_flag\n";
  for (const TrajectoryRow& row : rows) {
    csv += std::to_string(row.t);
    csv += ',';
    csv += fmt17(row.total);
    csv += ',';
    csv += fmt17(row.cross_weight_fraction);
    csv += ',';
    csv += row.trapped ? '1' : '0';
    csv += '\n';
  }
  return csv;
}

}  // namespace trapsim
