#pragma once

#include <optional>
#include <vector>

#include "tmag/dataset.hpp"
#include "tmag/types.hpp"

namespace tmag {

struct AugmentParams {
  Mat Wg;  // d x d, graph structure channel
  Mat Wa;  // d_z x d_z, attribute channel
};

struct AugmentConfig {
  double alpha = 0.8;      // channel blend, graph weight
  double t = 0.8;          // edge threshold, strict inequality
  Index neg_per_pos = 4;   // generator-loss negative sampling
  Index top_candidates = 500;  // per-user candidate cap before thresholding
};

double stable_sigmoid(double x);

// E1_{u,i} = sigmoid(sum_{j in N_u} e_j(L)^T Wg e_i(L)); nullopt for users
// with no neighbors (they are skipped, never scored 0.5).
std::optional<double> score_graph(const Mat& eL_items, const Mat& Wg,
                                  const std::vector<Index>& neighbors, Index item);

// E2_{u,i} = sigmoid(sum_{j in N_u} z_j^T Wa z_i).
std::optional<double> score_attr(const Mat& z_items, const Mat& Wa,
                                 const std::vector<Index>& neighbors, Index item);

// Convex combination alpha * e1 + (1 - alpha) * e2.
double blend(double e1, double e2, double alpha);

// Mean squared error between sampled scores and adjacency targets.
double gen_loss(const std::vector<double>& scores, const std::vector<double>& targets);

struct ScoredEdge {
  Index user = 0;
  Index item = 0;
  double score = 0.0;
};

// Keep scored cells with score strictly above t. Observed edges are never
// produced here; graph construction preserves them unconditionally.
std::vector<ScoredEdge> threshold_edges(const std::vector<ScoredEdge>& scored, double t);

struct AugmentResult {
  std::vector<ScoredEdge> edges;
  double mean_score = 0.0;
};

// Full generation pass: for each user with observed neighbors, score the
// top-candidate unobserved items through both channels, blend and threshold.
AugmentResult generate_edges(const Mat& eL_items, const Mat& z_items, const AugmentParams& params,
                             const ImplicitMatrix& observed, const AugmentConfig& cfg);

}  // namespace tmag
