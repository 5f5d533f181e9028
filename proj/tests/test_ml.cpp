#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <doctest.h>

#include <absim/errors.hpp>
#include <absim/ml.hpp>
#include <absim/rng.hpp>

#include "oracles.hpp"

using namespace absim;

namespace {

// KKT residual of a trained model: max violation over the three multiplier
// regimes.
double kkt_violation(const SvmModel& model, const RMatrix& kernel) {
  const int n = static_cast<int>(kernel.rows());
  double worst = 0.0;
  for (int l = 0; l < n; ++l) {
    double f = model.bias;
    for (int j = 0; j < n; ++j)
      f += model.alphas[j] * model.labels[static_cast<std::size_t>(j)] *
           kernel(j, l);
    const double margin = model.labels[static_cast<std::size_t>(l)] * f;
    const double a = model.alphas[l];
    if (a < 1e-8)
      worst = std::max(worst, 1.0 - margin);
    else if (a > model.lambda - 1e-8)
      worst = std::max(worst, margin - 1.0);
    else
      worst = std::max(worst, std::abs(margin - 1.0));
  }
  return worst;
}

RMatrix random_psd_kernel(int n, std::uint64_t seed) {
  Rng rng(seed);
  RMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  RMatrix k = g * g.transpose();
  // Unit diagonal, as kernels downstream always have.
  RVector scale = k.diagonal().cwiseSqrt().cwiseInverse();
  return scale.asDiagonal() * k * scale.asDiagonal();
}

}  // namespace

TEST_CASE("symmetric two-point problem") {
  RMatrix kernel = RMatrix::Identity(2, 2);
  const std::vector<int> y = {1, -1};
  const SvmModel model = svm_train(kernel, y, 50.0);
  CHECK(model.alphas[0] == doctest::Approx(model.alphas[1]).epsilon(1e-8));
  CHECK(model.alphas[0] > 0.0);
  CHECK(model.bias == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(svm_predict(model, (RVector(2) << 1.0, 0.0).finished()) == 1);
  CHECK(svm_predict(model, (RVector(2) << 0.0, 1.0).finished()) == -1);
}

TEST_CASE("svm input validation") {
  RMatrix kernel = RMatrix::Identity(2, 2);
  CHECK_THROWS_AS(svm_train(kernel, {1, 1}, 50.0), ValidationError);
  RMatrix skew = kernel;
  skew(0, 1) = 0.5;
  CHECK_THROWS_AS(svm_train(skew, {1, -1}, 50.0), ValidationError);
}

TEST_CASE("separable problems train to zero error with interior multipliers") {
  // Points on a line with an inner-product kernel plus offset.
  const int n = 8;
  RMatrix kernel(n, n);
  std::vector<int> y;
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    xs.push_back(i < n / 2 ? -2.0 - i * 0.3 : 2.0 + i * 0.3);
    y.push_back(i < n / 2 ? -1 : 1);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) kernel(i, j) = xs[static_cast<std::size_t>(i)] * xs[static_cast<std::size_t>(j)] + 1.0;

  const SvmModel model = svm_train(kernel, y, 50.0);
  for (int i = 0; i < n; ++i) {
    CHECK(svm_predict(model, kernel.col(i)) == y[static_cast<std::size_t>(i)]);
    CHECK(model.alphas[i] < 50.0 - 1e-9);  // no box-saturated multiplier
  }
  CHECK(kkt_violation(model, kernel) < 1e-6);
}

TEST_CASE("trained models satisfy the dual constraints and match the oracle") {
  Rng label_rng(17);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const int n = 6;
    const RMatrix kernel = random_psd_kernel(n, 900 + trial);
    std::vector<int> y;
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      const int label = label_rng.uniform() < 0.5 ? -1 : 1;
      y.push_back(label);
      (label == 1 ? pos : neg) = true;
    }
    if (!pos) y[0] = 1;
    if (!neg) y[1] = -1;

    const double lambda = 50.0;
    const SvmModel model = svm_train(kernel, y, lambda);

    double alpha_dot_y = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(model.alphas[i] >= -1e-9);
      CHECK(model.alphas[i] <= lambda + 1e-9);
      alpha_dot_y += model.alphas[i] * y[static_cast<std::size_t>(i)];
    }
    CHECK(std::abs(alpha_dot_y) < 1e-6);
    CHECK(kkt_violation(model, kernel) < 1e-6);

    const oracle::QpSolution reference =
        oracle::exhaustive_qp(kernel, y, lambda);
    REQUIRE(reference.found);
    const double trained = oracle::dual_objective(kernel, y, model.alphas);
    CHECK(std::abs(trained - reference.objective) < 1e-6);
  }
}

TEST_CASE("local pairwise perturbations cannot improve the dual") {
  const RMatrix kernel = random_psd_kernel(10, 5);
  std::vector<int> y = {1, 1, 1, -1, -1, 1, -1, -1, 1, -1};
  const SvmModel model = svm_train(kernel, y, 50.0);
  const double base = oracle::dual_objective(kernel, y, model.alphas);

  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int i = static_cast<int>(rng.below(10));
    int j = static_cast<int>(rng.below(10));
    if (i == j) continue;
    const double step = (rng.uniform() - 0.5) * 0.1;
    RVector alpha = model.alphas;
    alpha[i] += step * y[static_cast<std::size_t>(j)];
    alpha[j] -= step * y[static_cast<std::size_t>(i)];
    if (alpha[i] < 0 || alpha[i] > 50.0 || alpha[j] < 0 || alpha[j] > 50.0)
      continue;
    CHECK(oracle::dual_objective(kernel, y, alpha) <= base + 1e-9);
  }
}

TEST_CASE("svm_predict validates and resolves ties to +1") {
  RMatrix kernel = RMatrix::Identity(2, 2);
  const SvmModel model = svm_train(kernel, {1, -1}, 50.0);
  CHECK_THROWS_AS(svm_predict(model, RVector::Zero(3)), ValidationError);
  // Symmetric point: decision value exactly zero.
  CHECK(svm_predict(model, (RVector(2) << 0.5, 0.5).finished()) == 1);
}

TEST_CASE("kmeans with k equal to the point count") {
  RMatrix points(4, 2);
  points << 0, 0, 1, 0, 0, 1, 5, 5;
  const KmeansResult result = kmeans(points, 4, 3);
  CHECK(result.inertia == doctest::Approx(0.0));
  std::set<int> clusters(result.assignment.begin(), result.assignment.end());
  CHECK(clusters.size() == 4);
}

TEST_CASE("kmeans recovers separated blobs") {
  Rng rng(23);
  const int blobs = 15, per_blob = 20;
  RMatrix points(blobs * per_blob, 2);
  std::vector<int> truth;
  for (int b = 0; b < blobs; ++b) {
    const double cx = (b % 5) * 10.0;
    const double cy = (b / 5) * 10.0;
    for (int i = 0; i < per_blob; ++i) {
      points(b * per_blob + i, 0) = cx + 0.2 * rng.gaussian();
      points(b * per_blob + i, 1) = cy + 0.2 * rng.gaussian();
      truth.push_back(b);
    }
  }
  const KmeansResult result = kmeans(points, blobs, 29);

  // Adjusted Rand index against the generating labels.
  const int n = blobs * per_blob;
  Eigen::MatrixXi contingency = Eigen::MatrixXi::Zero(blobs, blobs);
  for (int i = 0; i < n; ++i)
    contingency(truth[static_cast<std::size_t>(i)],
                result.assignment[static_cast<std::size_t>(i)])++;
  auto choose2 = [](double v) { return v * (v - 1.0) / 2.0; };
  double index = 0.0, row_sum = 0.0, col_sum = 0.0;
  for (int a = 0; a < blobs; ++a) {
    row_sum += choose2(contingency.row(a).sum());
    col_sum += choose2(contingency.col(a).sum());
    for (int b = 0; b < blobs; ++b) index += choose2(contingency(a, b));
  }
  const double expected = row_sum * col_sum / choose2(n);
  const double max_index = (row_sum + col_sum) / 2.0;
  const double ari = (index - expected) / (max_index - expected);
  CHECK(ari == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kmeans inertia never increases and errors on short input") {
  RMatrix points(30, 2);
  Rng rng(31);
  for (int i = 0; i < 30; ++i) {
    points(i, 0) = rng.gaussian();
    points(i, 1) = rng.gaussian();
  }
  const KmeansResult result = kmeans(points, 5, 37);
  for (std::size_t i = 0; i + 1 < result.inertia_trace.size(); ++i)
    CHECK(result.inertia_trace[i + 1] <= result.inertia_trace[i] + 1e-9);

  CHECK_THROWS_AS(kmeans(points, 31, 1), ValidationError);
}

TEST_CASE("make_moons geometry") {
  const Dataset2D clean = make_moons(200, 0.0, 1);
  REQUIRE(clean.points.rows() == 200);
  int pos = 0;
  for (int label : clean.labels) pos += label == 1;
  CHECK(pos == 100);

  for (int i = 0; i < 100; ++i) {
    // Upper arc: unit circle.
    CHECK(clean.points.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    // Lower arc: unit circle around (1, 0.5).
    const double dx = clean.points(100 + i, 0) - 1.0;
    const double dy = clean.points(100 + i, 1) - 0.5;
    CHECK(std::hypot(dx, dy) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_moons(201, 0.1, 1), ValidationError);
}

TEST_CASE("noise-free moons are not linearly separable") {
  const Dataset2D clean = make_moons(200, 0.0, 2);
  // Linear kernel, effectively hard margin.
  RMatrix kernel(200, 200);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j)
      kernel(i, j) = clean.points.row(i).dot(clean.points.row(j)) + 1.0;
  const SvmModel model = svm_train(kernel, clean.labels, 10000.0);
  int errors = 0;
  for (int i = 0; i < 200; ++i)
    errors += svm_predict(model, kernel.col(i)) !=
              clean.labels[static_cast<std::size_t>(i)];
  CHECK(errors > 0);
}

TEST_CASE("default 1D task is balanced-ish and not threshold separable") {
  const Dataset1D data = default_line_dataset(15);
  REQUIRE(data.xs.size() == 15);
  // +1 band strictly inside: every threshold misclassifies something.
  CHECK(data.labels.front() == -1);
  CHECK(data.labels.back() == -1);
  CHECK(std::count(data.labels.begin(), data.labels.end(), 1) == 7);
}

TEST_CASE("cross_validate is perfect on a block-informative kernel") {
  const Dataset1D data = default_line_dataset(15);
  RMatrix kernel(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      kernel(i, j) =
          data.labels[static_cast<std::size_t>(i)] ==
                  data.labels[static_cast<std::size_t>(j)]
              ? 1.0
              : 0.0;
  const CrossValidation cv =
      cross_validate(kernel, data.outcome_index, data.labels, 100, 0.8, 50.0, 3);
  CHECK(cv.mean_accuracy == doctest::Approx(1.0));
  CHECK(cv.per_split.size() == 100);
}

TEST_CASE("cross_validate rejects single-class input") {
  const RMatrix kernel = RMatrix::Identity(4, 4);
  CHECK_THROWS_AS(
      cross_validate(kernel, {0, 1, 2, 3}, {1, 1, 1, 1}, 10, 0.8, 50.0, 1),
      ValidationError);
}

TEST_CASE("cross_validate is deterministic per seed") {
  const Dataset1D data = default_line_dataset(15);
  const RMatrix kernel = random_psd_kernel(15, 77);
  const CrossValidation a =
      cross_validate(kernel, data.outcome_index, data.labels, 25, 0.8, 50.0, 9);
  const CrossValidation b =
      cross_validate(kernel, data.outcome_index, data.labels, 25, 0.8, 50.0, 9);
  CHECK(a.per_split == b.per_split);
  const CrossValidation c =
      cross_validate(kernel, data.outcome_index, data.labels, 25, 0.8, 50.0, 10);
  CHECK(a.mean_accuracy != doctest::Approx(c.mean_accuracy).epsilon(1e-15));
}

TEST_CASE("2d pipeline with the identity kernel matches cluster majorities") {
  const Dataset2D data = make_moons(200, 0.1, 5);
  const RMatrix kernel = RMatrix::Identity(15, 15);
  const std::uint64_t seed = 6;
  const int splits = 40;
  const CrossValidation cv =
      classify_2d_pipeline(data, kernel, 15, splits, 50.0, seed);

  // With the identity kernel the trained classifier carries no information
  // beyond the cluster index, so per split it must score exactly like the
  // training-majority predictor (ties and empty clusters read as +1).
  const KmeansResult clusters =
      kmeans(data.points, 15, split_seed(seed, 0xC1));
  std::vector<int> cluster_of(200);
  for (int i = 0; i < 200; ++i)
    cluster_of[static_cast<std::size_t>(i)] =
        clusters.assignment[static_cast<std::size_t>(i)];

  std::vector<int> pos, neg;
  for (int i = 0; i < 200; ++i)
    (data.labels[static_cast<std::size_t>(i)] == 1 ? pos : neg).push_back(i);

  const std::uint64_t cv_seed = split_seed(seed, 0xC2);
  for (int split = 0; split < splits; ++split) {
    Rng rng(split_seed(cv_seed, static_cast<std::uint64_t>(split)));
    auto shuffled = [&](std::vector<int> idx) {
      for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
      return idx;
    };
    const std::vector<int> pos_order = shuffled(pos);
    const std::vector<int> neg_order = shuffled(neg);
    std::vector<int> train, test;
    for (std::size_t i = 0; i < pos_order.size(); ++i)
      (i < 80 ? train : test).push_back(pos_order[i]);
    for (std::size_t i = 0; i < neg_order.size(); ++i)
      (i < 80 ? train : test).push_back(neg_order[i]);

    std::vector<int> votes(15, 0);
    for (int point : train)
      votes[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(point)])] +=
          data.labels[static_cast<std::size_t>(point)];
    int correct = 0;
    for (int point : test) {
      const int predicted =
          votes[static_cast<std::size_t>(
              cluster_of[static_cast<std::size_t>(point)])] >= 0
              ? 1
              : -1;
      correct += predicted == data.labels[static_cast<std::size_t>(point)];
    }
    const double majority =
        static_cast<double>(correct) / static_cast<double>(test.size());
    CHECK(cv.per_split[static_cast<std::size_t>(split)] ==
          doctest::Approx(majority).epsilon(1e-12));
  }
}

TEST_CASE("2d pipeline succeeds with a kernel aligned to the moon geometry") {
  const Dataset2D data = make_moons(200, 0.1, 7);
  const std::uint64_t seed = 8;

  // Block kernel aligned with the clustering: clusters sharing a majority
  // label are fully similar, others orthogonal.
  const KmeansResult clusters = kmeans(data.points, 15, split_seed(seed, 0xC1));
  std::vector<int> order(15);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (clusters.centroids(a, 0) != clusters.centroids(b, 0))
      return clusters.centroids(a, 0) < clusters.centroids(b, 0);
    return clusters.centroids(a, 1) < clusters.centroids(b, 1);
  });
  std::vector<int> votes(15, 0);
  for (int i = 0; i < 200; ++i)
    votes[static_cast<std::size_t>(
        clusters.assignment[static_cast<std::size_t>(i)])] +=
        data.labels[static_cast<std::size_t>(i)];
  RMatrix kernel(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) {
      const bool same =
          (votes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] >= 0) ==
          (votes[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] >= 0);
      kernel(i, j) = same ? 1.0 : 0.0;
    }

  const CrossValidation cv =
      classify_2d_pipeline(data, kernel, 15, 50, 50.0, seed);
  CHECK(cv.mean_accuracy > 0.9);
}
