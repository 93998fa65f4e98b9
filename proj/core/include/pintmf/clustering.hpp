#pragma once

// Agglomerative clustering with Ward's minimum-variance linkage (the ward.D2 convention:
// Lance-Williams updates on squared Euclidean distances, heights reported as distances).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pintmf::clustering {

/// One agglomeration step. Leaves are nodes 0..n-1; merge t creates node n+t.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<Merge> merges;
  int leaf_count = 0;
  std::vector<std::string> leaf_labels;
};

/// Cluster assignment; labels are 1-based.
struct Partition {
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  int cluster_count() const;
};

/// Ward clustering of the rows of `points`. Ties resolve to the lexicographically smallest pair,
/// where a cluster is identified by its smallest member index.
Dendrogram ward_cluster(const Eigen::MatrixXd& points);

/// Same algorithm from a symmetric matrix of (not necessarily Euclidean) dissimilarities.
Dendrogram ward_cluster_distances(const Eigen::MatrixXd& distances);

/// Cuts the tree into `clusters` groups by undoing the last clusters-1 merges.
/// Labels are numbered by first appearance in leaf order.
Partition cut(const Dendrogram& tree, int clusters);

/// Ward clustering followed by a cut.
Partition ward_partition(const Eigen::MatrixXd& points, int clusters);

/// Position of pair (i, j), i < j, in a condensed n(n-1)/2 vector (row-major upper triangle).
inline std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) {
  return n * i - i * (i + 1) / 2 + (j - i - 1);
}

std::vector<double> condensed_distances(const Eigen::MatrixXd& points);

/// Merge height of the lowest common ancestor, for every leaf pair (condensed order).
std::vector<double> cophenetic_distances(const Dendrogram& tree);

/// Pearson correlation; throws DegenerateCorrelationError when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Correlation between Euclidean distances of the rows and their Ward cophenetic distances.
double cophenetic_correlation(const Eigen::MatrixXd& points);

}  // namespace pintmf::clustering
