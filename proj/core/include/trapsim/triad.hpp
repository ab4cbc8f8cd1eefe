#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "trapsim/rng.hpp"

namespace trapsim {

// Which pair weights enter an agent's trio-choice product.
//   product_all_pairs: all three pairs inside the trio (the default).
//   chooser_pairs_only: only the two pairs touching the chooser.
// The two rules genuinely differ: see tests/test_meanfield.cpp for a
// first-order divergence at the symmetric point.
enum class TrioRule { product_all_pairs, chooser_pairs_only };

enum class InitMode { unit, stationary };

struct TrioChoice {
  int chooser = 0;
  std::array<int, 3> members{};  // ascending, contains chooser
};

// Symmetric nonnegative pair weights, stored once per unordered pair.
struct NetworkState {
  int N = 0;
  double x = 0.0;
  long long t = 0;
  std::vector<double> w;  // packed upper triangle, size N*(N-1)/2
  TrioRule rule = TrioRule::product_all_pairs;
  bool decay_after_add = false;  // compat: W <- (1-x)(W + R) instead of (1-x)W + R

  int edge_count() const { return N * (N - 1) / 2; }
  int edge_index(int i, int j) const;  // unordered; i != j
  double pair(int i, int j) const { return w[edge_index(i, j)]; }
  double& pair(int i, int j) { return w[edge_index(i, j)]; }
  double total() const;  // S_t, the unordered total
};

struct PartitionReport {
  bool trapped = false;
  std::vector<std::vector<int>> blocks;  // partition of {0..N-1}
  std::vector<int> block_sizes;          // ascending
  long long detected_at = -1;            // state.t when trapped, else -1
  double cross_weight_fraction = 0.0;    // cross-block weight / S_t
};

struct TrajectoryRow {
  long long t = 0;
  double total = 0.0;
  double cross_weight_fraction = 0.0;
  bool trapped = false;
};

struct TrapRunResult {
  PartitionReport report;
  long long steps_taken = 0;
  std::vector<TrajectoryRow> log;
};

using TrioHistory = std::deque<std::vector<TrioChoice>>;

NetworkState init_state(int N, double x, InitMode mode);

// All C(N-1,2) trios containing agent i with their selection probabilities
// (proportional to the rule's pair-weight product).
std::vector<std::pair<TrioChoice, double>> trio_distribution(const NetworkState& state,
                                                             int i);

// One synchronous round: every agent samples a trio from the pre-step
// weights, each sampled trio reinforces its three pair weights by 1, then
// the discount applies. Returns the N choices in agent order.
std::vector<TrioChoice> step(NetworkState& state, Rng& rng);

// Components of the graph keeping edges with weight >= threshold * S_t/C(N,2).
// Trapped requires every component size in {3,4,5} and a full persistence
// window of recorded choices none of which crossed components.
PartitionReport detect_partition(const NetworkState& state, double threshold,
                                 const TrioHistory& history, int persistence);

// Iterate step() until detect_partition reports trapped or max_steps is hit.
// log_stride > 0 records every log_stride-th row (plus the final one).
TrapRunResult run_until_trap(NetworkState state, long long max_steps,
                             double threshold, int persistence, Rng& rng,
                             int log_stride = 0);

// Independent seeded replicas of run_until_trap (logs omitted).
std::vector<TrapRunResult> trap_ensemble(int N, double x, InitMode mode,
                                         TrioRule rule, long long n_runs,
                                         long long max_steps, double threshold,
                                         int persistence,
                                         std::uint64_t master_seed);

std::string trajectory_to_csv(const std::vector<TrajectoryRow>& rows);

}  // namespace trapsim
