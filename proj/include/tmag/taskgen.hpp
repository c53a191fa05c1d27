#pragma once

#include <vector>

#include "tmag/dataset.hpp"
#include "tmag/types.hpp"

namespace tmag {

struct Clustering {
  Index K = 0;
  Mat centroids;                  // K x d
  std::vector<Index> assignment;  // per input row, argmin distance (ties -> lowest k)
  double inertia = 0.0;
};

struct Task {
  Index cluster = 0;
  std::vector<Index> users;
  std::vector<std::pair<Index, Index>> support_pairs;
  std::vector<std::pair<Index, Index>> query_pairs;
};

struct TaskSet {
  std::vector<Task> tasks;
  Index dropped = 0;  // clusters with zero support interactions
};

// Lloyd's algorithm with k-means++ seeding, best of n_init restarts by
// inertia. Empty clusters are repaired by reseeding to the farthest point.
Clustering kmeans(const Mat& points, Index K, Index max_iters, Index n_init, std::uint64_t seed,
                  std::vector<double>* inertia_trace = nullptr);

// Nearest-centroid assignment for rows of Z; centroids are not updated.
std::vector<Index> assign_new_users(const Mat& Z, const Clustering& c);

// Collect each cluster's member users and their support/query interactions.
// `users[r]` is the user id behind clustering row r.
TaskSet build_tasks(const Clustering& c, const std::vector<Index>& users,
                    const ImplicitMatrix& support, const ImplicitMatrix& query);

}  // namespace tmag
