#include <absim/ml.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include <absim/errors.hpp>
#include <absim/rng.hpp>

namespace absim {

namespace {

RMatrix clip_to_psd(const RMatrix& kernel) {
  const RMatrix symmetric = (kernel + kernel.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(symmetric);
  if (solver.eigenvalues().minCoeff() >= -1e-8) return symmetric;
  std::cerr << "svm_train: clipping indefinite kernel (min eigenvalue "
            << solver.eigenvalues().minCoeff() << ")\n";
  RVector eigs = solver.eigenvalues();
  for (int i = 0; i < eigs.size(); ++i) eigs[i] = std::max(eigs[i], 0.0);
  return solver.eigenvectors() * eigs.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace

SvmModel svm_train(const RMatrix& kernel, const std::vector<int>& y,
                   double lambda) {
  const int n = static_cast<int>(kernel.rows());
  if (kernel.cols() != n) throw ValidationError("svm_train: kernel not square");
  if (static_cast<int>(y.size()) != n)
    throw ValidationError("svm_train: label count != kernel size");
  if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw ValidationError("svm_train: kernel is not symmetric");
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) has_pos = true;
    else if (label == -1) has_neg = true;
    else throw ValidationError("svm_train: labels must be +-1");
  }
  if (!has_pos || !has_neg)
    throw ValidationError("svm_train: both classes required");
  if (lambda <= 0.0) throw ValidationError("svm_train: lambda must be > 0");

  const RMatrix k = clip_to_psd(kernel);

  RVector alpha = RVector::Zero(n);
  RVector f = RVector::Zero(n);  // f_l = sum_j alpha_j y_j K_jl
  const double tol = 1e-7;
  const double bound_eps = 1e-9;

  // Most-violating-pair loop: c_l = y_l - f_l must admit a common bias with
  // max over the raisable set <= min over the lowerable set.
  const long max_steps = 1000000;
  long steps = 0;
  double c_i = 0.0, c_j = 0.0;
  while (true) {
    int i = -1, j = -1;
    double best_up = -std::numeric_limits<double>::infinity();
    double best_low = std::numeric_limits<double>::infinity();
    for (int l = 0; l < n; ++l) {
      const double c = y[static_cast<std::size_t>(l)] - f[l];
      const bool can_raise =
          (y[static_cast<std::size_t>(l)] == 1 && alpha[l] < lambda - bound_eps) ||
          (y[static_cast<std::size_t>(l)] == -1 && alpha[l] > bound_eps);
      const bool can_lower =
          (y[static_cast<std::size_t>(l)] == 1 && alpha[l] > bound_eps) ||
          (y[static_cast<std::size_t>(l)] == -1 && alpha[l] < lambda - bound_eps);
      if (can_raise && c > best_up) {
        best_up = c;
        i = l;
      }
      if (can_lower && c < best_low) {
        best_low = c;
        j = l;
      }
    }
    c_i = best_up;
    c_j = best_low;
    if (i < 0 || j < 0 || best_up - best_low <= tol) break;
    if (++steps > max_steps)
      throw NumericalError("svm_train: pair optimisation did not converge");

    const int yi = y[static_cast<std::size_t>(i)];
    const int yj = y[static_cast<std::size_t>(j)];
    const double s = yi * yj;
    double low, high;
    if (s < 0) {
      low = std::max(0.0, alpha[j] - alpha[i]);
      high = std::min(lambda, lambda + alpha[j] - alpha[i]);
    } else {
      low = std::max(0.0, alpha[i] + alpha[j] - lambda);
      high = std::min(lambda, alpha[i] + alpha[j]);
    }

    const double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
    double aj_new;
    if (eta > 1e-12) {
      const double e_i = f[i] - yi;
      const double e_j = f[j] - yj;
      aj_new = std::clamp(alpha[j] + yj * (e_i - e_j) / eta, low, high);
    } else {
      // Flat direction: evaluate the dual gain at both box ends.
      auto gain_at = [&](double aj) {
        const double dj = aj - alpha[j];
        const double di = -s * dj;
        return di + dj - di * yi * f[i] - dj * yj * f[j] -
               0.5 * (di * di * k(i, i) + dj * dj * k(j, j)) -
               di * dj * yi * yj * k(i, j);
      };
      aj_new = gain_at(low) > gain_at(high) ? low : high;
    }
    const double dj = aj_new - alpha[j];
    if (std::abs(dj) < 1e-14) {
      // Pair pinned against the box; nothing movable at this tolerance.
      if (++steps > max_steps)
        throw NumericalError("svm_train: stalled pair optimisation");
      break;
    }
    const double di = -s * dj;
    alpha[i] += di;
    alpha[j] += dj;
    f += di * yi * k.col(i) + dj * yj * k.col(j);
  }

  SvmModel model;
  model.alphas = alpha;
  model.labels = y;
  model.lambda = lambda;

  // Bias: average over margin support vectors, else the midpoint of the
  // feasible bias interval.
  double bias_sum = 0.0;
  int margin_count = 0;
  for (int l = 0; l < n; ++l)
    if (alpha[l] > bound_eps && alpha[l] < lambda - bound_eps) {
      bias_sum += y[static_cast<std::size_t>(l)] - f[l];
      ++margin_count;
    }
  if (margin_count > 0)
    model.bias = bias_sum / margin_count;
  else
    model.bias = (c_i + c_j) / 2.0;
  return model;
}

double svm_decision(const SvmModel& model, const RVector& k_row) {
  if (k_row.size() != model.alphas.size())
    throw ValidationError("svm_decision: kernel row length mismatch");
  double value = model.bias;
  for (int l = 0; l < model.alphas.size(); ++l)
    value += model.alphas[l] * model.labels[static_cast<std::size_t>(l)] *
             k_row[l];
  return value;
}

int svm_predict(const SvmModel& model, const RVector& k_row) {
  return svm_decision(model, k_row) >= 0.0 ? 1 : -1;
}

namespace {

double squared_distance(const RMatrix& points, int p, const RMatrix& centroids,
                        int c) {
  return (points.row(p) - centroids.row(c)).squaredNorm();
}

}  // namespace

KmeansResult kmeans(const RMatrix& points, int k, std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw ValidationError("kmeans: need k >= 1");
  if (n < k) throw ValidationError("kmeans: fewer points than clusters");

  Rng rng(seed);
  RMatrix centroids(k, points.cols());

  // kmeans++ seeding.
  centroids.row(0) = points.row(static_cast<int>(rng.below(n)));
  std::vector<double> nearest(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
      nearest[static_cast<std::size_t>(p)] =
          std::min(nearest[static_cast<std::size_t>(p)],
                   squared_distance(points, p, centroids, c - 1));
      total += nearest[static_cast<std::size_t>(p)];
    }
    int chosen = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      for (int p = 0; p < n; ++p) {
        run += nearest[static_cast<std::size_t>(p)];
        if (run >= target) {
          chosen = p;
          break;
        }
      }
    } else {
      chosen = static_cast<int>(rng.below(n));
    }
    centroids.row(c) = points.row(chosen);
  }

  KmeansResult result;
  result.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (int p = 0; p < n; ++p) {
      int best = 0;
      double best_d = squared_distance(points, p, centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points, p, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.assignment[static_cast<std::size_t>(p)] != best) {
        result.assignment[static_cast<std::size_t>(p)] = best;
        changed = true;
      }
      inertia += best_d;
    }
    result.inertia_trace.push_back(inertia);
    result.inertia = inertia;
    if (!changed) break;

    RMatrix sums = RMatrix::Zero(k, points.cols());
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int p = 0; p < n; ++p) {
      sums.row(result.assignment[static_cast<std::size_t>(p)]) += points.row(p);
      ++sizes[static_cast<std::size_t>(
          result.assignment[static_cast<std::size_t>(p)])];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / sizes[static_cast<std::size_t>(c)];
      } else {
        // Reseed an empty cluster at the point farthest from its centroid.
        int farthest = 0;
        double far_d = -1.0;
        for (int p = 0; p < n; ++p) {
          const double d = squared_distance(
              points, p, centroids,
              result.assignment[static_cast<std::size_t>(p)]);
          if (d > far_d) {
            far_d = d;
            farthest = p;
          }
        }
        centroids.row(c) = points.row(farthest);
      }
    }
  }
  result.centroids = centroids;
  return result;
}

Dataset2D make_moons(int count, double noise_sigma, std::uint64_t seed) {
  if (count < 2 || count % 2 != 0)
    throw ValidationError("make_moons: count must be even and >= 2");
  const int half = count / 2;
  Rng rng(seed);

  Dataset2D data;
  data.points.resize(count, 2);
  data.labels.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < half; ++i) {
    const double t = half == 1 ? 0.0 : kPi * i / (half - 1);
    data.points(i, 0) = std::cos(t);
    data.points(i, 1) = std::sin(t);
    data.labels[static_cast<std::size_t>(i)] = -1;
    data.points(half + i, 0) = 1.0 - std::cos(t);
    data.points(half + i, 1) = 0.5 - std::sin(t);
    data.labels[static_cast<std::size_t>(half + i)] = 1;
  }
  if (noise_sigma > 0.0)
    for (int i = 0; i < count; ++i) {
      data.points(i, 0) += noise_sigma * rng.gaussian();
      data.points(i, 1) += noise_sigma * rng.gaussian();
    }
  return data;
}

Dataset1D default_line_dataset(int d) {
  if (d < 3) throw ValidationError("default_line_dataset: need d >= 3");
  Dataset1D data;
  for (int p = 0; p < d; ++p) {
    data.xs.push_back(static_cast<double>(p) / (d - 1));
    // A +1 band over the middle positions: interleaved enough that no
    // single threshold separates the classes.
    const int lo = (4 * d) / 15;
    const int hi = (10 * d) / 15;
    data.labels.push_back(p >= lo && p <= hi ? 1 : -1);
    data.outcome_index.push_back(p);
  }
  return data;
}

CrossValidation cross_validate(const RMatrix& kernel,
                               const std::vector<int>& outcome_of_point,
                               const std::vector<int>& labels, int splits,
                               double train_fraction, double lambda,
                               std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (static_cast<int>(outcome_of_point.size()) != n)
    throw ValidationError("cross_validate: outcome map size != labels");
  for (int o : outcome_of_point)
    if (o < 0 || o >= kernel.rows())
      throw ValidationError("cross_validate: outcome index out of kernel");
  if (splits < 1) throw ValidationError("cross_validate: need splits >= 1");
  if (!(train_fraction > 0.0) || train_fraction >= 1.0)
    throw ValidationError("cross_validate: train fraction must be in (0, 1)");

  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i)
    (labels[static_cast<std::size_t>(i)] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw ValidationError("cross_validate: both classes required");

  CrossValidation cv;
  for (int split = 0; split < splits; ++split) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(split)));
    auto shuffled = [&](std::vector<int> idx) {
      for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
      return idx;
    };
    const std::vector<int> pos_order = shuffled(pos);
    const std::vector<int> neg_order = shuffled(neg);

    auto take = [&](const std::vector<int>& order) {
      int train_count = static_cast<int>(
          std::llround(train_fraction * static_cast<double>(order.size())));
      train_count = std::clamp(train_count, 1,
                               static_cast<int>(order.size()) - 1);
      return train_count;
    };
    std::vector<int> train, test;
    const int pos_train = take(pos_order);
    const int neg_train = take(neg_order);
    for (std::size_t i = 0; i < pos_order.size(); ++i)
      (static_cast<int>(i) < pos_train ? train : test).push_back(pos_order[i]);
    for (std::size_t i = 0; i < neg_order.size(); ++i)
      (static_cast<int>(i) < neg_train ? train : test).push_back(neg_order[i]);

    const int t = static_cast<int>(train.size());
    RMatrix k_train(t, t);
    std::vector<int> y_train(static_cast<std::size_t>(t));
    for (int a = 0; a < t; ++a) {
      y_train[static_cast<std::size_t>(a)] =
          labels[static_cast<std::size_t>(train[static_cast<std::size_t>(a)])];
      for (int b = 0; b < t; ++b)
        k_train(a, b) = kernel(
            outcome_of_point[static_cast<std::size_t>(
                train[static_cast<std::size_t>(a)])],
            outcome_of_point[static_cast<std::size_t>(
                train[static_cast<std::size_t>(b)])]);
    }
    const SvmModel model = svm_train(k_train, y_train, lambda);

    int correct = 0;
    for (int point : test) {
      RVector k_row(t);
      for (int a = 0; a < t; ++a)
        k_row[a] = kernel(
            outcome_of_point[static_cast<std::size_t>(point)],
            outcome_of_point[static_cast<std::size_t>(
                train[static_cast<std::size_t>(a)])]);
      if (svm_predict(model, k_row) == labels[static_cast<std::size_t>(point)])
        ++correct;
    }
    cv.per_split.push_back(test.empty() ? 1.0
                                        : static_cast<double>(correct) /
                                              static_cast<double>(test.size()));
  }
  cv.mean_accuracy =
      std::accumulate(cv.per_split.begin(), cv.per_split.end(), 0.0) /
      static_cast<double>(cv.per_split.size());
  return cv;
}

CrossValidation classify_2d_pipeline(const Dataset2D& dataset,
                                     const RMatrix& kernel, int k, int splits,
                                     double lambda, std::uint64_t seed) {
  if (kernel.rows() != k)
    throw ValidationError("classify_2d_pipeline: kernel size != cluster count");
  const KmeansResult clusters =
      kmeans(dataset.points, k, split_seed(seed, 0xC1));

  // Order centroids by x (then y) so cluster index maps deterministically
  // onto the outcome index.
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (clusters.centroids(a, 0) != clusters.centroids(b, 0))
      return clusters.centroids(a, 0) < clusters.centroids(b, 0);
    if (clusters.centroids(a, 1) != clusters.centroids(b, 1))
      return clusters.centroids(a, 1) < clusters.centroids(b, 1);
    return a < b;
  });
  std::vector<int> rank(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) rank[static_cast<std::size_t>(order[i])] = i;

  std::vector<int> outcome_of_point;
  outcome_of_point.reserve(clusters.assignment.size());
  for (int c : clusters.assignment)
    outcome_of_point.push_back(rank[static_cast<std::size_t>(c)]);

  return cross_validate(kernel, outcome_of_point, dataset.labels, splits, 0.8,
                        lambda, split_seed(seed, 0xC2));
}

}  // namespace absim
