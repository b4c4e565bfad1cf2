#include "featpress/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "featpress/errors.hpp"

namespace featpress {

namespace detail {

void jacobi_eigen(std::vector<double>& a, std::size_t n,
                  std::vector<double>& eigenvalues, std::vector<double>& v) {
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  const double stop = fro > 0.0 ? 1e-15 * fro : 0.0;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    off = std::sqrt(2.0 * off);
    if (off <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i * n + p];
          const double aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p * n + i];
          const double aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v[i * n + p];
          const double viq = v[i * n + q];
          v[i * n + p] = c * vip - s * viq;
          v[i * n + q] = s * vip + c * viq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i * n + i];
}

}  // namespace detail

PcaModel fit_pca(const FeatureTable& train, double variance_target,
                 bool standardize) {
  if (train.n_rows() < 2) throw data_error("PCA needs at least 2 training rows");
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw data_error("variance target must lie in (0, 1]");
  }
  const std::size_t n = train.n_rows();
  const std::size_t f = train.n_features();

  PcaModel model;
  model.feature_names = train.feature_names;
  model.variance_target = variance_target;
  model.n_features = f;
  model.mean.assign(f, 0.0);
  model.scale.assign(f, 1.0);

  for (std::size_t c = 0; c < f; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += train.at(r, c);
    model.mean[c] = m / static_cast<double>(n);
  }
  if (standardize) {
    for (std::size_t c = 0; c < f; ++c) {
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = train.at(r, c) - model.mean[c];
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      model.scale[c] = sd > 0.0 ? sd : 1.0;
    }
  }

  // Covariance of the z-scored training rows, sample-normalized (n - 1).
  std::vector<double> cov(f * f, 0.0);
  std::vector<double> z(f);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < f; ++c) {
      z[c] = (train.at(r, c) - model.mean[c]) / model.scale[c];
    }
    for (std::size_t i = 0; i < f; ++i) {
      for (std::size_t j = i; j < f; ++j) cov[i * f + j] += z[i] * z[j];
    }
  }
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = i; j < f; ++j) {
      const double v = cov[i * f + j] / static_cast<double>(n - 1);
      cov[i * f + j] = v;
      cov[j * f + i] = v;
    }
  }

  double trace = 0.0;
  for (std::size_t i = 0; i < f; ++i) trace += cov[i * f + i];
  if (!(trace > 0.0)) throw data_error("every feature is constant; covariance is zero");

  std::vector<double> eigenvalues, vectors;
  detail::jacobi_eigen(cov, f, eigenvalues, vectors);

  // Column i of `vectors` is the eigenvector for eigenvalues[i]. Clamp the
  // tiny negatives Jacobi leaves on positive-semidefinite input.
  for (double& ev : eigenvalues) ev = std::max(ev, 0.0);

  std::vector<std::vector<double>> rows(f, std::vector<double>(f));
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < f; ++j) rows[i][j] = vectors[j * f + i];
  }
  for (std::size_t i = 0; i < f; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < f; ++j) {
      if (std::abs(rows[i][j]) > std::abs(rows[i][arg])) arg = j;
    }
    if (rows[i][arg] < 0.0) {
      for (double& x : rows[i]) x = -x;
    }
  }

  const double nz_tol = 1e-12;
  auto first_nonzero = [&](std::size_t i) {
    for (std::size_t j = 0; j < f; ++j) {
      if (std::abs(rows[i][j]) > nz_tol) return j;
    }
    return f;
  };
  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t lhs, std::size_t rhs) {
                     if (eigenvalues[lhs] != eigenvalues[rhs]) {
                       return eigenvalues[lhs] > eigenvalues[rhs];
                     }
                     return first_nonzero(lhs) < first_nonzero(rhs);
                   });

  model.total_variance = 0.0;
  for (double ev : eigenvalues) model.total_variance += ev;

  std::size_t k = 0;
  if (variance_target == 1.0) {
    const double positive = model.total_variance * 1e-12;
    for (std::size_t i : order) {
      if (eigenvalues[i] > positive) ++k;
    }
  } else {
    double cum = 0.0;
    for (std::size_t i = 0; i < f; ++i) {
      cum += eigenvalues[order[i]];
      if (cum / model.total_variance >= variance_target) {
        k = i + 1;
        break;
      }
    }
    if (k == 0) k = f;  // accumulated rounding never quite reached the target
  }
  k = std::max<std::size_t>(k, 1);

  model.k = k;
  model.eigenvalues.resize(k);
  model.components.resize(k * f);
  for (std::size_t i = 0; i < k; ++i) {
    model.eigenvalues[i] = eigenvalues[order[i]];
    std::copy(rows[order[i]].begin(), rows[order[i]].end(),
              model.components.begin() + i * f);
  }
  return model;
}

FeatureTable project(const FeatureTable& table, const PcaModel& model) {
  if (table.feature_names != model.feature_names) {
    throw data_error("feature schema mismatch between table and PCA model");
  }
  const std::size_t n = table.n_rows();
  const std::size_t f = model.n_features;
  const std::size_t k = model.k;

  FeatureTable out;
  for (std::size_t i = 0; i < k; ++i) {
    out.feature_names.push_back("pc" + std::to_string(i + 1));
  }
  out.labels = table.labels;
  out.class_names = table.class_names;
  out.timestamps = table.timestamps;
  out.group_keys = table.group_keys;
  out.row_count = n;
  out.values.assign(n * k, 0.0);

  std::vector<double> z(f);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < f; ++c) {
      z[c] = (table.at(r, c) - model.mean[c]) / model.scale[c];
    }
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < f; ++c) acc += model.component(i, c) * z[c];
      out.values[r * k + i] = acc;
    }
  }
  return out;
}

}  // namespace featpress
