#include "tmag/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tmag/error.hpp"

namespace tmag {

BipartiteGraph BipartiteGraph::build(const ImplicitMatrix& m,
                                     const std::vector<std::pair<Index, Index>>& augmented) {
  BipartiteGraph g;
  g.M_ = m.M;
  g.N_ = m.N;

  // Merge observed and augmented edges; an augmented duplicate of an observed
  // edge collapses to a single observed edge.
  std::vector<std::vector<std::pair<Index, char>>> user_adj(static_cast<std::size_t>(m.M));
  for (Index u = 0; u < m.M; ++u)
    for (Index i : m.row(u)) user_adj[static_cast<std::size_t>(u)].emplace_back(i, 0);
  for (const auto& [u, i] : augmented) {
    if (u < 0 || u >= m.M || i < 0 || i >= m.N) throw DataError("augmented edge out of bounds");
    user_adj[static_cast<std::size_t>(u)].emplace_back(i, 1);
  }
  Index edge_count = 0;
  for (auto& adj : user_adj) {
    std::sort(adj.begin(), adj.end());  // observed (0) sorts before augmented (1)
    adj.erase(std::unique(adj.begin(), adj.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              adj.end());
    edge_count += static_cast<Index>(adj.size());
  }

  const Index nodes = m.M + m.N;
  std::vector<Index> deg(static_cast<std::size_t>(nodes), 0);
  for (Index u = 0; u < m.M; ++u) {
    deg[static_cast<std::size_t>(u)] = static_cast<Index>(user_adj[static_cast<std::size_t>(u)].size());
    for (const auto& [i, aug] : user_adj[static_cast<std::size_t>(u)])
      ++deg[static_cast<std::size_t>(m.M + i)];
  }
  g.row_ptr_.assign(static_cast<std::size_t>(nodes) + 1, 0);
  for (Index v = 0; v < nodes; ++v)
    g.row_ptr_[static_cast<std::size_t>(v) + 1] = g.row_ptr_[static_cast<std::size_t>(v)] + deg[static_cast<std::size_t>(v)];
  g.col_.assign(static_cast<std::size_t>(edge_count) * 2, 0);
  g.prov_.assign(static_cast<std::size_t>(edge_count) * 2, EdgeProvenance::kObserved);

  std::vector<Index> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
  for (Index u = 0; u < m.M; ++u) {
    for (const auto& [i, aug] : user_adj[static_cast<std::size_t>(u)]) {
      EdgeProvenance p = aug ? EdgeProvenance::kAugmented : EdgeProvenance::kObserved;
      if (aug) ++g.augmented_count_;
      Index pos_u = cursor[static_cast<std::size_t>(u)]++;
      g.col_[static_cast<std::size_t>(pos_u)] = m.M + i;
      g.prov_[static_cast<std::size_t>(pos_u)] = p;
      Index pos_i = cursor[static_cast<std::size_t>(m.M + i)]++;
      g.col_[static_cast<std::size_t>(pos_i)] = u;
      g.prov_[static_cast<std::size_t>(pos_i)] = p;
    }
  }
  return g;
}

std::vector<Index> BipartiteGraph::item_neighbors(Index u) const {
  std::vector<Index> out;
  for (Index e = row_ptr_[static_cast<std::size_t>(u)]; e < row_ptr_[static_cast<std::size_t>(u) + 1]; ++e)
    out.push_back(col_[static_cast<std::size_t>(e)] - M_);
  return out;
}

void BipartiteGraph::export_edges_tsv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write edge list: " + path);
  for (Index u = 0; u < M_; ++u) {
    for (Index e = row_ptr_[static_cast<std::size_t>(u)]; e < row_ptr_[static_cast<std::size_t>(u) + 1]; ++e) {
      f << u << '\t' << (col_[static_cast<std::size_t>(e)] - M_) << '\t'
        << (prov_[static_cast<std::size_t>(e)] == EdgeProvenance::kObserved ? "observed" : "augmented")
        << '\n';
    }
  }
}

std::vector<Mat> propagate(const BipartiteGraph& g, const Mat& e0, Index L) {
  if (L < 0) throw UsageError("propagate: L must be >= 0");
  if (e0.rows() != g.num_nodes()) throw DataError("propagate: embedding row count mismatch");

  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(g.num_nodes()), 0.0);
  for (Index v = 0; v < g.num_nodes(); ++v) {
    Index d = g.degree(v);
    if (d > 0) inv_sqrt_deg[static_cast<std::size_t>(v)] = 1.0 / std::sqrt(static_cast<double>(d));
  }

  std::vector<Mat> layers;
  layers.reserve(static_cast<std::size_t>(L) + 1);
  layers.push_back(e0);
  const auto& row_ptr = g.row_ptr();
  const auto& col = g.col();
  for (Index l = 0; l < L; ++l) {
    const Mat& prev = layers.back();
    Mat next = Mat::Zero(e0.rows(), e0.cols());
    for (Index v = 0; v < g.num_nodes(); ++v) {
      const double sv = inv_sqrt_deg[static_cast<std::size_t>(v)];
      if (sv == 0.0) continue;  // isolated node: empty sum stays zero
      auto row = next.row(v);
      for (Index e = row_ptr[static_cast<std::size_t>(v)]; e < row_ptr[static_cast<std::size_t>(v) + 1]; ++e) {
        const Index w = col[static_cast<std::size_t>(e)];
        row += sv * inv_sqrt_deg[static_cast<std::size_t>(w)] * prev.row(w);
      }
    }
    layers.push_back(std::move(next));
  }
  return layers;
}

Vec final_embedding(const Eigen::RowVectorXd& eL, const Eigen::RowVectorXd& z) {
  if (z.size() == 0) throw DataError("final_embedding: missing attribute embedding");
  Vec f(eL.size() + z.size());
  f.head(eL.size()) = eL.transpose();
  f.tail(z.size()) = z.transpose();
  return f;
}

}  // namespace tmag
