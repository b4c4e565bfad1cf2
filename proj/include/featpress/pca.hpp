#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "featpress/table.hpp"

namespace featpress {

// Train-fitted standardization + principal components. Components are stored
// row-major (k x n_features), rows orthonormal, eigenvalues descending. The
// sign of each component is fixed so its largest-magnitude entry is positive,
// which makes the decomposition unique for distinct eigenvalues.
struct PcaModel {
  std::vector<std::string> feature_names;  // training schema
  std::vector<double> mean;
  std::vector<double> scale;       // training std dev; 1 where deviation is 0
  std::vector<double> components;  // k x n_features, row-major
  std::vector<double> eigenvalues; // k entries, descending
  double variance_target = 1.0;
  double total_variance = 0.0;     // sum over all eigenvalues, not just kept
  std::size_t k = 0;
  std::size_t n_features = 0;

  double component(std::size_t comp, std::size_t feature) const {
    return components[comp * n_features + feature];
  }
};

// Fits on the given rows only. k is the smallest count whose cumulative
// eigenvalue mass reaches variance_target; target 1.0 keeps every strictly
// positive eigenvalue. standardize=false centers but skips the z-scoring.
PcaModel fit_pca(const FeatureTable& train, double variance_target,
                 bool standardize = true);

// Projects rows into component space; output features are pc1..pck and
// labels/timestamps/groups carry through.
FeatureTable project(const FeatureTable& table, const PcaModel& model);

namespace detail {
// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns unsorted eigenvalues; V holds eigenvectors as columns.
void jacobi_eigen(std::vector<double>& matrix, std::size_t n,
                  std::vector<double>& eigenvalues, std::vector<double>& V);
}  // namespace detail

}  // namespace featpress
