#include "tmag/taskgen.hpp"

#include <algorithm>
#include <limits>

#include "tmag/error.hpp"
#include "tmag/rng.hpp"

namespace tmag {
namespace {

// (nearest centroid, squared distance) with ties broken toward lower k.
std::pair<Index, double> nearest(const Mat& centroids, const Eigen::RowVectorXd& p) {
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < centroids.rows(); ++k) {
    double d = (centroids.row(k) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

Mat kmeanspp_seed(const Mat& points, Index K, RngStream& rng) {
  const Index n = points.rows();
  Mat centroids(K, points.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  Index first = rng.index(n);
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;

  Vec d2 = Vec::Zero(n);
  for (Index r = 0; r < n; ++r) d2[r] = (points.row(r) - centroids.row(0)).squaredNorm();

  for (Index k = 1; k < K; ++k) {
    double total = d2.sum();
    Index pick = -1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index r = 0; r < n; ++r) {
        acc += d2[r];
        if (acc >= target) {
          pick = r;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // All remaining mass is zero (duplicate points); take the first unchosen.
      for (Index r = 0; r < n; ++r)
        if (!chosen[static_cast<std::size_t>(r)]) {
          pick = r;
          break;
        }
      if (pick < 0) pick = rng.index(n);
    }
    centroids.row(k) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Index r = 0; r < n; ++r)
      d2[r] = std::min(d2[r], (points.row(r) - centroids.row(k)).squaredNorm());
  }
  return centroids;
}

struct LloydResult {
  Mat centroids;
  std::vector<Index> assignment;
  double inertia = 0.0;
  std::vector<double> inertia_trace;
};

LloydResult lloyd(const Mat& points, Mat centroids, Index max_iters) {
  const Index n = points.rows();
  const Index K = centroids.rows();
  LloydResult res;
  res.assignment.assign(static_cast<std::size_t>(n), 0);

  for (Index iter = 0; iter < max_iters; ++iter) {
    // Assignment phase.
    double inertia = 0.0;
    bool moved = false;
    for (Index r = 0; r < n; ++r) {
      auto [k, d] = nearest(centroids, points.row(r));
      if (res.assignment[static_cast<std::size_t>(r)] != k) moved = true;
      res.assignment[static_cast<std::size_t>(r)] = k;
      inertia += d;
    }
    res.inertia_trace.push_back(inertia);
    res.inertia = inertia;
    if (!moved && iter > 0) break;

    // Update phase.
    Mat sums = Mat::Zero(K, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(K), 0);
    for (Index r = 0; r < n; ++r) {
      Index k = res.assignment[static_cast<std::size_t>(r)];
      sums.row(k) += points.row(r);
      ++counts[static_cast<std::size_t>(k)];
    }
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (Index k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        centroids.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
      } else {
        // Reseed an empty cluster to the farthest point from its centroid.
        Index far = -1;
        double far_d = -1.0;
        for (Index r = 0; r < n; ++r) {
          if (used[static_cast<std::size_t>(r)]) continue;
          Index a = res.assignment[static_cast<std::size_t>(r)];
          double d = (points.row(r) - centroids.row(a)).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = r;
          }
        }
        centroids.row(k) = points.row(far);
        used[static_cast<std::size_t>(far)] = 1;
      }
    }
  }
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

Clustering kmeans(const Mat& points, Index K, Index max_iters, Index n_init, std::uint64_t seed,
                  std::vector<double>* inertia_trace) {
  const Index n = points.rows();
  if (K < 1) throw UsageError("kmeans: K must be >= 1");
  if (K > n) throw UsageError("kmeans: K exceeds point count");

  Clustering best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (Index init = 0; init < std::max<Index>(1, n_init); ++init) {
    RngStream rng = RngStream::keyed(seed, 401, static_cast<std::uint64_t>(init));
    LloydResult run = lloyd(points, kmeanspp_seed(points, K, rng), max_iters);
    if (run.inertia < best.inertia) {
      best.K = K;
      best.centroids = run.centroids;
      best.assignment = run.assignment;
      best.inertia = run.inertia;
      if (inertia_trace) *inertia_trace = run.inertia_trace;
    }
  }
  // Final assignment is nearest-centroid by construction; re-derive so that the
  // stored labels use the tie rule exactly.
  for (Index r = 0; r < n; ++r)
    best.assignment[static_cast<std::size_t>(r)] = nearest(best.centroids, points.row(r)).first;
  return best;
}

std::vector<Index> assign_new_users(const Mat& Z, const Clustering& c) {
  if (Z.cols() != c.centroids.cols()) throw DataError("latent dimension mismatch");
  std::vector<Index> out(static_cast<std::size_t>(Z.rows()));
  for (Index r = 0; r < Z.rows(); ++r) out[static_cast<std::size_t>(r)] = nearest(c.centroids, Z.row(r)).first;
  return out;
}

TaskSet build_tasks(const Clustering& c, const std::vector<Index>& users,
                    const ImplicitMatrix& support, const ImplicitMatrix& query) {
  if (users.size() != c.assignment.size()) throw DataError("build_tasks: user list size mismatch");
  TaskSet out;
  for (Index k = 0; k < c.K; ++k) {
    Task task;
    task.cluster = k;
    for (std::size_t r = 0; r < users.size(); ++r) {
      if (c.assignment[r] != k) continue;
      Index u = users[r];
      task.users.push_back(u);
      for (Index i : support.row(u)) task.support_pairs.emplace_back(u, i);
      for (Index i : query.row(u)) task.query_pairs.emplace_back(u, i);
    }
    if (task.support_pairs.empty()) {
      ++out.dropped;
      continue;
    }
    out.tasks.push_back(std::move(task));
  }
  return out;
}

}  // namespace tmag
