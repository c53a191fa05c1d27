#include "tmag/augment.hpp"

#include <algorithm>
#include <cmath>

#include "tmag/error.hpp"

namespace tmag {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::optional<double> score_graph(const Mat& eL_items, const Mat& Wg,
                                  const std::vector<Index>& neighbors, Index item) {
  if (neighbors.empty()) return std::nullopt;
  Vec s = Vec::Zero(eL_items.cols());
  for (Index j : neighbors) s += eL_items.row(j).transpose();
  return stable_sigmoid(s.dot(Wg * eL_items.row(item).transpose()));
}

std::optional<double> score_attr(const Mat& z_items, const Mat& Wa,
                                 const std::vector<Index>& neighbors, Index item) {
  if (neighbors.empty()) return std::nullopt;
  Vec s = Vec::Zero(z_items.cols());
  for (Index j : neighbors) s += z_items.row(j).transpose();
  return stable_sigmoid(s.dot(Wa * z_items.row(item).transpose()));
}

double blend(double e1, double e2, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw UsageError("blend alpha must be in [0,1]");
  return alpha * e1 + (1.0 - alpha) * e2;
}

double gen_loss(const std::vector<double>& scores, const std::vector<double>& targets) {
  if (scores.empty()) throw DataError("gen_loss: empty sample");
  if (scores.size() != targets.size()) throw DataError("gen_loss: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(scores.size());
}

std::vector<ScoredEdge> threshold_edges(const std::vector<ScoredEdge>& scored, double t) {
  if (t <= 0.0 || t >= 1.0) throw UsageError("edge threshold must be in (0,1)");
  std::vector<ScoredEdge> out;
  for (const auto& e : scored)
    if (e.score > t) out.push_back(e);
  return out;
}

AugmentResult generate_edges(const Mat& eL_items, const Mat& z_items, const AugmentParams& params,
                             const ImplicitMatrix& observed, const AugmentConfig& cfg) {
  const Index N = observed.N;
  // Precompute the item-side transforms so a user's scores over all items are
  // two matrix-vector products.
  Mat Pg = eL_items * params.Wg.transpose();  // row i = (Wg e_i)^T
  Mat Pa = z_items * params.Wa.transpose();

  std::vector<ScoredEdge> scored;
  for (Index u = 0; u < observed.M; ++u) {
    const auto& nbrs = observed.row(u);
    if (nbrs.empty()) continue;  // zero-degree users are skipped
    Vec s = Vec::Zero(eL_items.cols());
    Vec zs = Vec::Zero(z_items.cols());
    for (Index j : nbrs) {
      s += eL_items.row(j).transpose();
      zs += z_items.row(j).transpose();
    }
    Vec g1 = Pg * s;  // pre-sigmoid graph-channel scores for every item
    Vec g2 = Pa * zs;

    std::vector<ScoredEdge> cand;
    cand.reserve(static_cast<std::size_t>(N - static_cast<Index>(nbrs.size())));
    for (Index i = 0; i < N; ++i) {
      if (observed.contains(u, i)) continue;
      double e = blend(stable_sigmoid(g1[i]), stable_sigmoid(g2[i]), cfg.alpha);
      cand.push_back({u, i, e});
    }
    if (static_cast<Index>(cand.size()) > cfg.top_candidates) {
      std::nth_element(cand.begin(), cand.begin() + cfg.top_candidates, cand.end(),
                       [](const ScoredEdge& a, const ScoredEdge& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.item < b.item;
                       });
      cand.resize(static_cast<std::size_t>(cfg.top_candidates));
    }
    for (auto& e : cand)
      if (e.score > cfg.t) scored.push_back(e);
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
    if (a.user != b.user) return a.user < b.user;
    return a.item < b.item;
  });
  AugmentResult res;
  res.edges = std::move(scored);
  double sum = 0.0;
  for (const auto& e : res.edges) sum += e.score;
  res.mean_score = res.edges.empty() ? 0.0 : sum / static_cast<double>(res.edges.size());
  return res;
}

}  // namespace tmag
