#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fgent/matrix.hpp"

namespace fgent {

// Linear-chain CRF over unnormalized emission scores. A path score is
//   start[y0] + sum_t emissions(t, yt) + sum_t transitions(y_{t-1}, yt) + end[yn-1].
struct CrfParams {
  Matrix transitions;  // k x k, [from][to]
  Matrix start;        // 1 x k
  Matrix end;          // 1 x k

  explicit CrfParams(std::size_t k = 0) : transitions(k, k), start(1, k), end(1, k) {}
  std::size_t label_count() const { return start.cols(); }
};

namespace detail {

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

}  // namespace detail

// Accumulation order matches the Viterbi recurrence term by term, so a
// decoded path reproduces its reported score bit for bit.
inline double crf_path_score(const Matrix& emissions, const CrfParams& p,
                             std::span<const int> labels) {
  assert(labels.size() == emissions.rows());
  const std::size_t n = emissions.rows();
  double score = p.start(0, labels[0]) + emissions(0, labels[0]);
  for (std::size_t t = 1; t < n; ++t) {
    score += p.transitions(labels[t - 1], labels[t]);
    score += emissions(t, labels[t]);
  }
  return score + p.end(0, labels[n - 1]);
}

// Forward algorithm in log space; returns log of the sum over all label
// sequences of exp(path score). When alpha_out is given it receives the
// n x k forward lattice.
inline double crf_log_partition(const Matrix& emissions, const CrfParams& p,
                                Matrix* alpha_out = nullptr) {
  const std::size_t n = emissions.rows(), k = emissions.cols();
  assert(n >= 1 && k == p.label_count());
  Matrix alpha(n, k);
  for (std::size_t y = 0; y < k; ++y) alpha(0, y) = p.start(0, y) + emissions(0, y);
  std::vector<double> buf(k);
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t x = 0; x < k; ++x) buf[x] = alpha(t - 1, x) + p.transitions(x, y);
      alpha(t, y) = emissions(t, y) + detail::log_sum_exp(buf);
    }
  for (std::size_t y = 0; y < k; ++y) buf[y] = alpha(n - 1, y) + p.end(0, y);
  double log_z = detail::log_sum_exp(buf);
  if (alpha_out) *alpha_out = std::move(alpha);
  return log_z;
}

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0.0;
};

// Max-scoring label sequence; ties break toward the lowest label index.
inline ViterbiResult viterbi_decode(const Matrix& emissions, const CrfParams& p) {
  const std::size_t n = emissions.rows(), k = emissions.cols();
  assert(n >= 1 && k == p.label_count());
  Matrix best(n, k);
  std::vector<std::vector<int>> back(n, std::vector<int>(k, 0));
  for (std::size_t y = 0; y < k; ++y) best(0, y) = p.start(0, y) + emissions(0, y);
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t y = 0; y < k; ++y) {
      double b = best(t - 1, 0) + p.transitions(0, y);
      int arg = 0;
      for (std::size_t x = 1; x < k; ++x) {
        double cand = best(t - 1, x) + p.transitions(x, y);
        if (cand > b) {
          b = cand;
          arg = static_cast<int>(x);
        }
      }
      best(t, y) = b + emissions(t, y);
      back[t][y] = arg;
    }
  double total = best(n - 1, 0) + p.end(0, 0);
  int last = 0;
  for (std::size_t y = 1; y < k; ++y) {
    double cand = best(n - 1, y) + p.end(0, y);
    if (cand > total) {
      total = cand;
      last = static_cast<int>(y);
    }
  }
  ViterbiResult result;
  result.score = total;
  result.labels.assign(n, 0);
  result.labels[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) result.labels[t - 1] = back[t][result.labels[t]];
  return result;
}

// Backward lattice: beta(t, y) = log sum over completions from (t, y),
// excluding emissions(t, y).
inline Matrix crf_backward_lattice(const Matrix& emissions, const CrfParams& p) {
  const std::size_t n = emissions.rows(), k = emissions.cols();
  Matrix beta(n, k);
  for (std::size_t y = 0; y < k; ++y) beta(n - 1, y) = p.end(0, y);
  std::vector<double> buf(k);
  for (std::size_t t = n - 1; t > 0; --t)
    for (std::size_t x = 0; x < k; ++x) {
      for (std::size_t y = 0; y < k; ++y)
        buf[y] = p.transitions(x, y) + emissions(t, y) + beta(t, y);
      beta(t - 1, x) = detail::log_sum_exp(buf);
    }
  return beta;
}

// Posterior marginals P(y_t = y | x) via forward-backward.
inline Matrix crf_marginals(const Matrix& emissions, const CrfParams& p) {
  Matrix alpha;
  double log_z = crf_log_partition(emissions, p, &alpha);
  Matrix beta = crf_backward_lattice(emissions, p);
  const std::size_t n = emissions.rows(), k = emissions.cols();
  Matrix marg(n, k);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t y = 0; y < k; ++y) marg(t, y) = std::exp(alpha(t, y) + beta(t, y) - log_z);
  return marg;
}

struct CrfGradients {
  Matrix d_emissions;
  Matrix d_transitions;
  Matrix d_start;
  Matrix d_end;
};

// Negative log-likelihood of the gold sequence and its gradients:
// expected feature counts minus gold counts.
inline double crf_nll_and_grad(const Matrix& emissions, const CrfParams& p,
                               std::span<const int> gold, CrfGradients& g) {
  const std::size_t n = emissions.rows(), k = emissions.cols();
  Matrix alpha;
  double log_z = crf_log_partition(emissions, p, &alpha);
  Matrix beta = crf_backward_lattice(emissions, p);
  double gold_score = crf_path_score(emissions, p, gold);

  g.d_emissions = Matrix(n, k);
  g.d_transitions = Matrix(k, k);
  g.d_start = Matrix(1, k);
  g.d_end = Matrix(1, k);

  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t y = 0; y < k; ++y)
      g.d_emissions(t, y) = std::exp(alpha(t, y) + beta(t, y) - log_z);
  for (std::size_t t = 0; t + 1 < n; ++t)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        g.d_transitions(a, b) += std::exp(alpha(t, a) + p.transitions(a, b) +
                                          emissions(t + 1, b) + beta(t + 1, b) - log_z);
  for (std::size_t y = 0; y < k; ++y) {
    g.d_start(0, y) = std::exp(alpha(0, y) + beta(0, y) - log_z);
    g.d_end(0, y) = std::exp(alpha(n - 1, y) + beta(n - 1, y) - log_z);
  }

  g.d_emissions(0, gold[0]) -= 1.0;
  for (std::size_t t = 1; t < n; ++t) {
    g.d_emissions(t, gold[t]) -= 1.0;
    g.d_transitions(gold[t - 1], gold[t]) -= 1.0;
  }
  g.d_start(0, gold[0]) -= 1.0;
  g.d_end(0, gold[n - 1]) -= 1.0;

  return log_z - gold_score;
}

}  // namespace fgent
