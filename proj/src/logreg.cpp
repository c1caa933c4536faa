#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mimir/classify.hpp"
#include "mimir/error.hpp"

namespace mimir {

std::string_view to_string(Penalty p) {
  switch (p) {
    case Penalty::None: return "none";
    case Penalty::L2: return "l2";
    case Penalty::L1: return "l1";
    case Penalty::ElasticNet: return "elasticnet";
  }
  return "?";
}

Penalty parse_penalty(std::string_view s) {
  if (s == "none") return Penalty::None;
  if (s == "l2") return Penalty::L2;
  if (s == "l1") return Penalty::L1;
  if (s == "elasticnet") return Penalty::ElasticNet;
  throw Error(ErrorCode::InvalidConfig, "unknown penalty: " + std::string(s));
}

std::vector<double> LinearModel::scores(const SparseVector& x) const {
  std::vector<double> z(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    double s = bias(k);
    for (auto [j, v] : x) {
      if (j < dim) s += at(k, j) * v;
    }
    z[k] = s;
  }
  return z;
}

namespace {

void softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

std::vector<double> LinearModel::probabilities(const SparseVector& x) const {
  auto z = scores(x);
  softmax_inplace(z);
  return z;
}

Regularizer Regularizer::from(Penalty p, double C, std::size_t n, double l1_ratio) {
  if (!(C > 0.0)) throw Error(ErrorCode::InvalidConfig, "C must be positive");
  Regularizer r;
  r.penalty = p;
  r.lambda = p == Penalty::None ? 0.0 : 1.0 / (C * static_cast<double>(std::max<std::size_t>(n, 1)));
  r.l1_ratio = l1_ratio;
  return r;
}

double Regularizer::l1() const {
  if (penalty == Penalty::L1) return lambda;
  if (penalty == Penalty::ElasticNet) return lambda * l1_ratio;
  return 0.0;
}

double Regularizer::l2() const {
  if (penalty == Penalty::L2) return lambda;
  if (penalty == Penalty::ElasticNet) return lambda * (1.0 - l1_ratio);
  return 0.0;
}

namespace {

// Mean cross-entropy and the per-row class probabilities it came from.
double cross_entropy(const LinearModel& m, const Dataset& d, std::vector<double>& probs) {
  const std::size_t n = d.rows.size(), K = m.n_classes;
  probs.assign(n * K, 0.0);
  double loss = 0.0;
  std::vector<double> z(K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      double s = m.bias(k);
      for (auto [j, v] : d.rows[i]) s += m.at(k, j) * v;
      z[k] = s;
    }
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    double log_norm = mx + std::log(sum);
    loss += log_norm - z[d.labels[i]];
    for (std::size_t k = 0; k < K; ++k) probs[i * K + k] = std::exp(z[k] - log_norm);
  }
  return n ? loss / static_cast<double>(n) : 0.0;
}

double penalty_value(const LinearModel& m, const Regularizer& r) {
  double a = r.l1(), b = r.l2();
  if (a == 0.0 && b == 0.0) return 0.0;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < m.n_classes; ++k) {
    for (std::size_t j = 0; j < m.dim; ++j) {
      double w = m.at(k, j);
      s1 += std::abs(w);
      s2 += w * w;
    }
  }
  return a * s1 + b * 0.5 * s2;
}

// Gradient of the mean cross-entropy given cached probabilities.
std::vector<double> smooth_gradient(const LinearModel& m, const Dataset& d, const std::vector<double>& probs) {
  const std::size_t n = d.rows.size(), K = m.n_classes, stride = m.dim + 1;
  std::vector<double> g(m.w.size(), 0.0);
  if (n == 0) return g;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      double r = probs[i * K + k] - (d.labels[i] == k ? 1.0 : 0.0);
      if (r == 0.0) continue;
      r *= inv_n;
      double* row = &g[k * stride];
      for (auto [j, v] : d.rows[i]) row[j] += r * v;
      row[m.dim] += r;
    }
  }
  return g;
}

void check_dataset(const Dataset& d) {
  if (d.rows.size() != d.labels.size()) throw Error(ErrorCode::LengthMismatch, "rows and labels differ in length");
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.labels[i] >= d.n_classes) throw Error(ErrorCode::ContractViolation, "label out of range");
    for (auto [j, v] : d.rows[i]) {
      if (j >= d.dim) throw Error(ErrorCode::ContractViolation, "feature index out of range");
    }
  }
}

}  // namespace

double objective(const LinearModel& m, const Dataset& d, const Regularizer& r) {
  std::vector<double> probs;
  return cross_entropy(m, d, probs) + penalty_value(m, r);
}

std::vector<double> objective_gradient(const LinearModel& m, const Dataset& d, const Regularizer& r) {
  std::vector<double> probs;
  cross_entropy(m, d, probs);
  auto g = smooth_gradient(m, d, probs);
  const double a = r.l1(), b = r.l2();
  for (std::size_t k = 0; k < m.n_classes; ++k) {
    for (std::size_t j = 0; j < m.dim; ++j) {
      double w = m.at(k, j);
      g[k * (m.dim + 1) + j] += b * w + a * (w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0));
    }
  }
  return g;
}

FitResult fit_softmax(const Dataset& d, const Regularizer& r, std::size_t max_iterations, double tolerance,
                      double initial_step) {
  check_dataset(d);
  FitResult out;
  out.model = LinearModel(d.n_classes, d.dim);
  LinearModel& m = out.model;
  const std::size_t stride = m.dim + 1;
  const double a = r.l1(), b = r.l2();

  std::vector<double> probs, cand_probs;
  double f = cross_entropy(m, d, probs) + penalty_value(m, r);
  out.objective_history.push_back(f);
  double step = initial_step;
  LinearModel cand = m;

  for (std::size_t it = 0; it < max_iterations; ++it) {
    auto g = smooth_gradient(m, d, probs);
    bool accepted = false;
    double f_cand = f;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const double shrink = step * a, scale = 1.0 / (1.0 + step * b);
      for (std::size_t k = 0; k < m.n_classes; ++k) {
        for (std::size_t j = 0; j < stride; ++j) {
          std::size_t idx = k * stride + j;
          double v = m.w[idx] - step * g[idx];
          if (j < m.dim) {
            v = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
            v *= scale;
          }
          cand.w[idx] = v;
        }
      }
      f_cand = cross_entropy(cand, d, cand_probs) + penalty_value(cand, r);
      if (f_cand <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) {
      // No decrease at any representable step: we are at a minimum.
      out.converged = true;
      out.gradient_norm = 0.0;
      return out;
    }
    double sq = 0.0;
    for (std::size_t idx = 0; idx < m.w.size(); ++idx) {
      double diff = (m.w[idx] - cand.w[idx]) / step;
      sq += diff * diff;
    }
    std::swap(m.w, cand.w);
    std::swap(probs, cand_probs);
    f = f_cand;
    out.objective_history.push_back(f);
    out.gradient_norm = std::sqrt(sq);
    if (out.gradient_norm < tolerance) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

double f_beta(double precision, double recall, double beta) {
  double b2 = beta * beta;
  double denom = b2 * precision + recall;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

Metrics compute_metrics(const std::vector<std::string>& predicted, const std::vector<std::string>& truth, double beta) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and truth differ in length");
  }
  Metrics m;
  if (truth.empty()) return m;
  std::set<std::string> labels(truth.begin(), truth.end());
  labels.insert(predicted.begin(), predicted.end());
  std::map<std::string, std::size_t> tp, pred_count, true_count;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++pred_count[predicted[i]];
    ++true_count[truth[i]];
    if (predicted[i] == truth[i]) {
      ++tp[truth[i]];
      ++correct;
    }
  }
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto& l : labels) {
    double t = static_cast<double>(tp[l]);
    p_sum += pred_count[l] ? t / static_cast<double>(pred_count[l]) : 0.0;
    r_sum += true_count[l] ? t / static_cast<double>(true_count[l]) : 0.0;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  m.precision = p_sum / static_cast<double>(labels.size());
  m.recall = r_sum / static_cast<double>(labels.size());
  m.f_beta = f_beta(m.precision, m.recall, beta);
  return m;
}

double reliability(const std::vector<double>& p) {
  double p1 = 0.0, p2 = 0.0;
  for (double v : p) {
    if (v > p1) {
      p2 = p1;
      p1 = v;
    } else if (v > p2) {
      p2 = v;
    }
  }
  return 1.0 - (p1 - p2);
}

}  // namespace mimir
