#pragma once

#include "fedostc/common.hpp"
#include "fedostc/graph.hpp"

#include <vector>

namespace fedostc {

/// Projection applied to concatenated hidden-state pairs, plus the
/// LeakyReLU slope. The projection is drawn once per run and frozen;
/// set_projection is the hook for anyone who wants to drive it
/// externally.
struct AttentionParams {
  Vec projection;  // length 2 * enc_hidden
  double leaky_slope = 0.2;

  void set_projection(Vec a) { projection = std::move(a); }
};

AttentionParams init_attention_params(int enc_hidden, uint64_t seed, double leaky_slope = 0.2);

/// Scores xi(m,n) = a . [h_n || h_m] for every in-neighbor m of n,
/// self-first concatenation, in the graph's ascending neighbor order.
Vec attention_scores(const AttentionParams& params, const std::vector<Vec>& h_all,
                     const TrafficGraph& graph, int n);

/// Softmax over LeakyReLU'd scores, max-subtracted.
Vec attention_coefficients(const Vec& scores, double leaky_slope);

/// h' = sigmoid(sum_m alpha_m h_m), elementwise.
Vec aggregate_hidden(const Vec& coefficients, const std::vector<Vec>& h_neighbors);

/// Diagonal of d h' / d h_self with coefficients frozen:
/// alpha_self * h' .* (1 - h').
Vec self_jacobian_diag(const Vec& h_prime, double alpha_self);

/// One round of server-side spatial evaluation for all clients.
struct AttentionResult {
  std::vector<Vec> h_prime;          // per client
  std::vector<double> alpha_self;    // per client
  std::vector<Vec> coefficients;     // per client, aligned with graph.neighbors(n)
};

}  // namespace fedostc
