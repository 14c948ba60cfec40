#include "evnet/learn.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace evnet {

Classifier::Classifier(std::vector<std::string> classes,
                       std::vector<std::unordered_map<std::string, double>> weights,
                       std::vector<double> bias, double l2, size_t trained_on)
    : classes_(std::move(classes)),
      weights_(std::move(weights)),
      bias_(std::move(bias)),
      l2_(l2),
      trained_on_(trained_on) {
  if (weights_.size() != classes_.size() || bias_.size() != classes_.size()) {
    throw std::invalid_argument("classifier shape mismatch");
  }
}

std::optional<size_t> Classifier::class_index(std::string_view label) const {
  for (size_t c = 0; c < classes_.size(); ++c) {
    if (classes_[c] == label) return c;
  }
  return std::nullopt;
}

double Classifier::weight(size_t c, const std::string& feature) const {
  auto it = weights_[c].find(feature);
  return it == weights_[c].end() ? 0.0 : it->second;
}

nlohmann::json Classifier::to_json() const {
  nlohmann::json weights = nlohmann::json::array();
  for (size_t c = 0; c < classes_.size(); ++c) {
    // Sorted for stable output.
    std::map<std::string, double> sorted(weights_[c].begin(), weights_[c].end());
    weights.push_back(sorted);
  }
  return {{"classes", classes_},   {"weights", weights},
          {"bias", bias_},         {"l2", l2_},
          {"trained_on", trained_on_}, {"threshold", threshold_}};
}

Classifier Classifier::from_json(const nlohmann::json& j) {
  std::vector<std::unordered_map<std::string, double>> weights;
  for (const auto& w : j.at("weights")) {
    weights.push_back(w.get<std::unordered_map<std::string, double>>());
  }
  Classifier clf(j.at("classes").get<std::vector<std::string>>(),
                 std::move(weights), j.at("bias").get<std::vector<double>>(),
                 j.value("l2", 0.0), j.value("trained_on", size_t{0}));
  clf.set_threshold(j.value("threshold", 0.5));
  return clf;
}

namespace {

void softmax_inplace(std::vector<double>& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Limited-memory BFGS with a backtracking Armijo line search.
std::vector<double> minimize_lbfgs(const MaxentObjective& objective,
                                   const TrainOptions& options) {
  const size_t n = objective.num_parameters();
  constexpr size_t kHistory = 10;
  std::vector<double> x(n, 0.0), grad(n), next(n), next_grad(n), dir(n);
  double fx = objective.evaluate(x, grad);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double gnorm = std::sqrt(dot(grad, grad));
    if (gnorm < options.tolerance) break;

    // Two-loop recursion.
    dir = grad;
    std::vector<double> alpha(s_hist.size());
    for (size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], dir);
      for (size_t k = 0; k < n; ++k) dir[k] -= alpha[i] * y_hist[i][k];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) /
                           dot(y_hist.back(), y_hist.back());
      for (double& d : dir) d *= gamma;
    } else {
      for (double& d : dir) d /= std::max(1.0, gnorm);
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], dir);
      for (size_t k = 0; k < n; ++k) dir[k] += s_hist[i][k] * (alpha[i] - beta);
    }
    for (double& d : dir) d = -d;

    double slope = dot(grad, dir);
    if (slope >= 0) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (size_t k = 0; k < n; ++k) dir[k] = -grad[k] / std::max(1.0, gnorm);
      slope = dot(grad, dir);
    }

    double step = 1.0;
    double fnext = 0;
    bool accepted = false;
    for (int tries = 0; tries < 50; ++tries) {
      for (size_t k = 0; k < n; ++k) next[k] = x[k] + step * dir[k];
      fnext = objective.evaluate(next, next_grad);
      if (fnext <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(n), y(n);
    for (size_t k = 0; k < n; ++k) {
      s[k] = next[k] - x[k];
      y[k] = next_grad[k] - grad[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double improvement = fx - fnext;
    x.swap(next);
    grad.swap(next_grad);
    fx = fnext;
    if (improvement < options.tolerance * std::max(1.0, std::abs(fx))) break;
  }
  return x;
}

}  // namespace

MaxentObjective::MaxentObjective(std::span<const Instance> instances, double l2)
    : l2_(l2) {
  std::set<std::string> classes, features;
  for (const auto& inst : instances) {
    classes.insert(inst.label);
    for (const auto& [f, v] : inst.features) features.insert(f);
  }
  classes_.assign(classes.begin(), classes.end());
  features_.assign(features.begin(), features.end());
  rows_.reserve(instances.size());
  for (const auto& inst : instances) {
    Row row;
    row.label = static_cast<size_t>(
        std::lower_bound(classes_.begin(), classes_.end(), inst.label) -
        classes_.begin());
    for (const auto& [f, v] : inst.features) {
      const auto idx = static_cast<size_t>(
          std::lower_bound(features_.begin(), features_.end(), f) -
          features_.begin());
      row.features.emplace_back(idx, v);
    }
    rows_.push_back(std::move(row));
  }
}

double MaxentObjective::evaluate(std::span<const double> params,
                                 std::span<double> grad) const {
  const size_t C = classes_.size();
  const size_t F = features_.size();
  const double* w = params.data();
  const double* bias = params.data() + C * F;
  std::fill(grad.begin(), grad.end(), 0.0);
  double* gw = grad.data();
  double* gbias = grad.data() + C * F;

  const double inv_n = rows_.empty() ? 0.0 : 1.0 / static_cast<double>(rows_.size());
  double loss = 0;
  std::vector<double> scores(C);
  for (const Row& row : rows_) {
    for (size_t c = 0; c < C; ++c) {
      double s = bias[c];
      for (const auto& [f, v] : row.features) s += w[c * F + f] * v;
      scores[c] = s;
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    double sum = 0;
    for (double s : scores) sum += std::exp(s - top);
    const double log_z = top + std::log(sum);
    loss += log_z - scores[row.label];
    for (size_t c = 0; c < C; ++c) {
      const double p = std::exp(scores[c] - log_z);
      const double r = (p - (c == row.label ? 1.0 : 0.0)) * inv_n;
      gbias[c] += r;
      for (const auto& [f, v] : row.features) gw[c * F + f] += r * v;
    }
  }
  loss *= inv_n;
  double penalty = 0;
  for (size_t k = 0; k < C * F; ++k) {
    penalty += w[k] * w[k];
    gw[k] += l2_ * w[k];
  }
  return loss + 0.5 * l2_ * penalty;
}

Classifier train_maxent(std::span<const Instance> instances,
                        const TrainOptions& options) {
  std::set<std::string> labels;
  for (const auto& inst : instances) labels.insert(inst.label);
  if (labels.size() < 2) throw std::invalid_argument("degenerate training set");
  if (options.l2 < 0) throw std::invalid_argument("l2 must be >= 0");

  const MaxentObjective objective(instances, options.l2);
  const std::vector<double> x = minimize_lbfgs(objective, options);

  const size_t C = objective.num_classes();
  const size_t F = objective.num_features();
  std::vector<std::unordered_map<std::string, double>> weights(C);
  std::vector<double> bias(C);
  for (size_t c = 0; c < C; ++c) {
    for (size_t f = 0; f < F; ++f) {
      weights[c].emplace(objective.features()[f], x[c * F + f]);
    }
    bias[c] = x[C * F + c];
  }
  return Classifier(objective.classes(), std::move(weights), std::move(bias),
                    options.l2, instances.size());
}

std::vector<double> predict(const Classifier& clf, const FeatureBag& features) {
  const size_t C = clf.classes().size();
  std::vector<double> scores(C);
  for (size_t c = 0; c < C; ++c) {
    double s = clf.bias(c);
    const auto& w = clf.weights(c);
    for (const auto& [f, v] : features) {
      auto it = w.find(f);
      if (it != w.end()) s += it->second * v;
    }
    scores[c] = s;
  }
  softmax_inplace(scores);
  return scores;
}

bool decide(const Classifier& clf, const FeatureBag& features,
            const std::string& positive_class, double threshold) {
  if (!(threshold >= 0.5 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must be in [0.5, 1]");
  }
  const auto pos = clf.class_index(positive_class);
  if (!pos) throw std::invalid_argument("unknown class: " + positive_class);
  return predict(clf, features)[*pos] >= threshold;
}

double f_score(double precision, double recall) {
  if (precision + recall <= 0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

PRF prf_from_counts(size_t tp, size_t fp, size_t fn) {
  PRF prf;
  prf.true_positives = tp;
  prf.false_positives = fp;
  prf.false_negatives = fn;
  prf.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  prf.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  prf.f_score = f_score(prf.precision, prf.recall);
  return prf;
}

CvScores cross_validate_scores(std::span<const Instance> instances,
                               const std::string& positive_class,
                               const CvOptions& options) {
  const int k = options.folds;
  if (k < 2) throw std::invalid_argument("need at least 2 folds");
  if (instances.size() < static_cast<size_t>(k)) {
    throw std::invalid_argument("fewer instances than folds");
  }
  const size_t n = instances.size();

  // Stratified assignment: shuffle each label group, then deal round-robin.
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < n; ++i) groups[instances[i].label].push_back(i);
  std::mt19937_64 rng(options.seed);
  CvScores out;
  out.fold.assign(n, 0);
  size_t deal = 0;
  for (auto& [label, idx] : groups) {
    for (size_t i = idx.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng() % i);
      std::swap(idx[i - 1], idx[j]);
    }
    for (size_t i : idx) out.fold[i] = static_cast<int>(deal++ % k);
  }

  out.positive_probability.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.is_positive.resize(n);
  for (size_t i = 0; i < n; ++i) out.is_positive[i] = instances[i].label == positive_class;

  for (int f = 0; f < k; ++f) {
    std::vector<Instance> train;
    std::vector<size_t> held;
    for (size_t i = 0; i < n; ++i) {
      if (out.fold[i] == f) {
        held.push_back(i);
      } else {
        train.push_back(instances[i]);
      }
    }
    const bool train_has_positive = std::any_of(
        train.begin(), train.end(),
        [&](const Instance& x) { return x.label == positive_class; });
    std::set<std::string> train_labels;
    for (const auto& x : train) train_labels.insert(x.label);
    if (!train_has_positive || train_labels.size() < 2) {
      out.warnings.push_back("fold " + std::to_string(f) +
                             ": training portion lacks class '" + positive_class +
                             "' or a second class; fold skipped");
      continue;
    }
    if (std::none_of(held.begin(), held.end(),
                     [&](size_t i) { return out.is_positive[i]; })) {
      out.warnings.push_back("fold " + std::to_string(f) +
                             ": no held-out instance of class '" +
                             positive_class + "'");
    }
    const Classifier clf = train_maxent(train, options.train);
    const size_t pos = *clf.class_index(positive_class);
    for (size_t i : held) {
      out.positive_probability[i] = predict(clf, instances[i].features)[pos];
    }
  }
  return out;
}

PRF evaluate_at(const CvScores& scores, double threshold) {
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < scores.positive_probability.size(); ++i) {
    const double p = scores.positive_probability[i];
    if (std::isnan(p)) continue;
    const bool predicted = p >= threshold;
    if (predicted && scores.is_positive[i]) ++tp;
    if (predicted && !scores.is_positive[i]) ++fp;
    if (!predicted && scores.is_positive[i]) ++fn;
  }
  return prf_from_counts(tp, fp, fn);
}

PRF cross_validate(std::span<const Instance> instances,
                   const std::string& positive_class, const CvOptions& options,
                   double threshold) {
  return evaluate_at(cross_validate_scores(instances, positive_class, options),
                     threshold);
}

}  // namespace evnet
