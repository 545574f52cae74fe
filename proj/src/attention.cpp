#include "fedostc/attention.hpp"

#include <cmath>

namespace fedostc {

AttentionParams init_attention_params(int enc_hidden, uint64_t seed, double leaky_slope) {
  require(enc_hidden >= 1, Errc::out_of_range_input, "enc_hidden must be >= 1");
  require(leaky_slope > 0.0 && leaky_slope < 1.0, Errc::out_of_range_input,
          "leaky slope must lie in (0,1)");
  AttentionParams params;
  params.leaky_slope = leaky_slope;
  params.projection.resize(2 * enc_hidden);
  UniformRng rng(mix_seed(seed, 0x6174746eULL));
  const double bound = 1.0 / std::sqrt(2.0 * enc_hidden);
  for (Eigen::Index i = 0; i < params.projection.size(); ++i)
    params.projection(i) = rng.range(-bound, bound);
  return params;
}

Vec attention_scores(const AttentionParams& params, const std::vector<Vec>& h_all,
                     const TrafficGraph& graph, int n) {
  const auto& neighbors = graph.neighbors(n);
  const auto d = static_cast<Eigen::Index>(params.projection.size() / 2);
  require(params.projection.size() == 2 * d, Errc::shape_mismatch,
          "projection length must be even");
  require(n >= 0 && n < static_cast<int>(h_all.size()), Errc::shape_mismatch,
          "client index outside the hidden-state set");
  require(h_all[static_cast<size_t>(n)].size() == d, Errc::shape_mismatch,
          "hidden state width does not match the projection");
  const Vec& h_self = h_all[static_cast<size_t>(n)];
  const auto a_self = params.projection.head(d);
  const auto a_other = params.projection.tail(d);
  const double self_part = a_self.dot(h_self);

  Vec scores(static_cast<Eigen::Index>(neighbors.size()));
  for (size_t i = 0; i < neighbors.size(); ++i) {
    const Vec& h_m = h_all[static_cast<size_t>(neighbors[i])];
    require(h_m.size() == d, Errc::shape_mismatch, "hidden state width mismatch in neighbor set");
    scores(static_cast<Eigen::Index>(i)) = self_part + a_other.dot(h_m);
  }
  return scores;
}

Vec attention_coefficients(const Vec& scores, double leaky_slope) {
  require(scores.size() >= 1, Errc::empty_neighbor_set, "no scores to normalize");
  Vec acts(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double s = scores(i);
    acts(i) = s >= 0.0 ? s : leaky_slope * s;
  }
  const double shift = acts.maxCoeff();
  Vec coeff = (acts.array() - shift).exp().matrix();
  coeff /= coeff.sum();
  return coeff;
}

Vec aggregate_hidden(const Vec& coefficients, const std::vector<Vec>& h_neighbors) {
  require(static_cast<size_t>(coefficients.size()) == h_neighbors.size(), Errc::length_mismatch,
          "one coefficient per neighbor hidden state required");
  require(!h_neighbors.empty(), Errc::empty_neighbor_set, "empty neighbor set");
  Vec acc = Vec::Zero(h_neighbors.front().size());
  for (size_t i = 0; i < h_neighbors.size(); ++i) {
    require(h_neighbors[i].size() == acc.size(), Errc::length_mismatch,
            "neighbor hidden states have mixed widths");
    acc.noalias() += coefficients(static_cast<Eigen::Index>(i)) * h_neighbors[i];
  }
  return (1.0 + (-acc.array()).exp()).inverse().matrix();
}

Vec self_jacobian_diag(const Vec& h_prime, double alpha_self) {
  require(alpha_self > 0.0 && alpha_self <= 1.0, Errc::out_of_range_input,
          "alpha_self must lie in (0,1]");
  for (Eigen::Index i = 0; i < h_prime.size(); ++i)
    require(h_prime(i) > 0.0 && h_prime(i) < 1.0, Errc::out_of_range_input,
            "h' entries must lie in (0,1)");
  return alpha_self * h_prime.cwiseProduct(Vec::Ones(h_prime.size()) - h_prime);
}

}  // namespace fedostc
