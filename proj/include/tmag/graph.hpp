#pragma once

#include <string>
#include <vector>

#include "tmag/dataset.hpp"
#include "tmag/types.hpp"

namespace tmag {

enum class EdgeProvenance : std::uint8_t { kObserved = 0, kAugmented = 1 };

// Undirected user-item bipartite graph in CSR form over M+N nodes
// (user rows first, then item rows). Immutable after construction.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  static BipartiteGraph build(const ImplicitMatrix& m,
                              const std::vector<std::pair<Index, Index>>& augmented = {});

  Index num_users() const { return M_; }
  Index num_items() const { return N_; }
  Index num_nodes() const { return M_ + N_; }
  Index degree(Index node) const { return row_ptr_[static_cast<std::size_t>(node) + 1] - row_ptr_[static_cast<std::size_t>(node)]; }
  Index num_undirected_edges() const { return static_cast<Index>(col_.size()) / 2; }
  Index num_augmented_edges() const { return augmented_count_; }

  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col() const { return col_; }
  const std::vector<EdgeProvenance>& provenance() const { return prov_; }

  // Item neighbors of user u taken from the graph (observed + augmented).
  std::vector<Index> item_neighbors(Index u) const;

  // Debug export: `user<TAB>item<TAB>provenance` lines.
  void export_edges_tsv(const std::string& path) const;

 private:
  Index M_ = 0;
  Index N_ = 0;
  Index augmented_count_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_;
  std::vector<EdgeProvenance> prov_;
};

// L layers of light graph convolution: symmetric-normalized neighbor sums,
// no self loops, no transform, no nonlinearity. Returns layers 0..L.
// E0 is (M+N) x d with user rows first.
std::vector<Mat> propagate(const BipartiteGraph& g, const Mat& e0, Index L);

// f = e_L ++ z; attributes are mandatory inputs.
Vec final_embedding(const Eigen::RowVectorXd& eL, const Eigen::RowVectorXd& z);

}  // namespace tmag
