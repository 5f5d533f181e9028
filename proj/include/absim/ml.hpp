#pragma once

#include <cstdint>
#include <vector>

#include <absim/types.hpp>

namespace absim {

/// Trained soft-margin kernel classifier. The multipliers satisfy
/// 0 <= alpha_l <= lambda and sum_l alpha_l y_l = 0.
struct SvmModel {
  RVector alphas;
  double bias = 0.0;
  std::vector<int> labels;  // training labels, +-1
  double lambda = 50.0;
};

/// Maximises the dual by repeated optimisation of the most violating pair
/// until the KKT gap closes below 1e-7. Kernels with eigenvalues below
/// -1e-8 are clipped to PSD first (with a warning on stderr).
SvmModel svm_train(const RMatrix& kernel, const std::vector<int>& y,
                   double lambda = 50.0);

double svm_decision(const SvmModel& model, const RVector& k_row);

/// +-1; a decision value of exactly zero resolves to +1.
int svm_predict(const SvmModel& model, const RVector& k_row);

struct KmeansResult {
  RMatrix centroids;            // k x dim
  std::vector<int> assignment;  // per point
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // per Lloyd iteration
};

/// Lloyd iterations from a kmeans++ start until the assignment is a
/// fixpoint (at most 300 rounds); empty clusters are reseeded to the point
/// farthest from its centroid. Deterministic per seed.
KmeansResult kmeans(const RMatrix& points, int k, std::uint64_t seed);

struct Dataset2D {
  RMatrix points;           // N x 2
  std::vector<int> labels;  // +-1
};

/// Two interleaved half-circle arcs with isotropic Gaussian coordinate
/// noise; `count` must be even, half the points per arc.
Dataset2D make_moons(int count = 200, double noise_sigma = 0.1,
                     std::uint64_t seed = 0);

struct Dataset1D {
  std::vector<double> xs;
  std::vector<int> labels;          // +-1
  std::vector<int> outcome_index;   // into [0, D)
};

/// Default 1D task: D points at p/(D-1) with a +1 band over the middle
/// seven positions, not linearly separable. Fully replaceable via CSV.
Dataset1D default_line_dataset(int d = 15);

struct CrossValidation {
  double mean_accuracy = 0.0;
  std::vector<double> per_split;
};

/// Stratified 80/20 partitions, trained on the induced kernel submatrix;
/// deterministic per seed.
CrossValidation cross_validate(const RMatrix& kernel,
                               const std::vector<int>& outcome_of_point,
                               const std::vector<int>& labels, int splits = 100,
                               double train_fraction = 0.8,
                               double lambda = 50.0, std::uint64_t seed = 0);

/// 2D pipeline: k-means clustering, centroid indices ordered by x (then y),
/// then cross-validation on the lifted kernel.
CrossValidation classify_2d_pipeline(const Dataset2D& dataset,
                                     const RMatrix& kernel, int k = 15,
                                     int splits = 100, double lambda = 50.0,
                                     std::uint64_t seed = 0);

}  // namespace absim
