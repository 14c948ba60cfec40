// Maximum-entropy (multinomial logistic regression) classifier over sparse
// bags of string features, with stratified cross-validation and P/R/F.

#ifndef EVNET_LEARN_H_
#define EVNET_LEARN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace evnet {

// Sparse multiset of features: name -> count.
using FeatureBag = std::map<std::string, double>;

struct Instance {
  FeatureBag features;
  std::string label;
};

struct TrainOptions {
  // Penalty on the squared weight norm, added to the mean negative
  // log-likelihood. Biases are not penalized.
  double l2 = 1e-3;
  int max_iterations = 200;
  double tolerance = 1e-7;
};

class Classifier {
 public:
  Classifier() = default;
  Classifier(std::vector<std::string> classes,
             std::vector<std::unordered_map<std::string, double>> weights,
             std::vector<double> bias, double l2, size_t trained_on);

  const std::vector<std::string>& classes() const { return classes_; }
  std::optional<size_t> class_index(std::string_view label) const;
  double bias(size_t c) const { return bias_[c]; }
  // Zero for features never seen in training.
  double weight(size_t c, const std::string& feature) const;
  const std::unordered_map<std::string, double>& weights(size_t c) const {
    return weights_[c];
  }
  double l2() const { return l2_; }
  size_t trained_on() const { return trained_on_; }

  // Decision threshold persisted with the model; not used by predict().
  double threshold() const { return threshold_; }
  void set_threshold(double t) { threshold_ = t; }

  nlohmann::json to_json() const;
  static Classifier from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> classes_;
  std::vector<std::unordered_map<std::string, double>> weights_;
  std::vector<double> bias_;
  double l2_ = 0;
  size_t trained_on_ = 0;
  double threshold_ = 0.5;
};

// Objective of train_maxent over a fixed feature indexing, exposed so the
// gradient can be checked numerically. Parameters are laid out as
// [class][feature] followed by one bias per class.
class MaxentObjective {
 public:
  MaxentObjective(std::span<const Instance> instances, double l2);

  size_t num_classes() const { return classes_.size(); }
  size_t num_features() const { return features_.size(); }
  size_t num_parameters() const { return (features_.size() + 1) * classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::string>& features() const { return features_; }

  // Returns the objective; writes its gradient into `grad`.
  double evaluate(std::span<const double> params, std::span<double> grad) const;

 private:
  struct Row {
    std::vector<std::pair<size_t, double>> features;
    size_t label;
  };
  std::vector<std::string> classes_;
  std::vector<std::string> features_;
  std::vector<Row> rows_;
  double l2_;
};

// Minimizes the L2-regularized mean negative log-likelihood with L-BFGS.
// The result depends only on the instances and their order.
// Throws std::invalid_argument("degenerate training set") with < 2 classes.
Classifier train_maxent(std::span<const Instance> instances,
                        const TrainOptions& options = {});

// Softmax over classes, in clf.classes() order. Unseen features are ignored.
std::vector<double> predict(const Classifier& clf, const FeatureBag& features);

// True iff P(positive_class) >= threshold. Threshold must lie in [0.5, 1].
// A posterior of exactly 1 is never produced by softmax; 0.995 is the
// working stand-in for "the classifier says 1".
bool decide(const Classifier& clf, const FeatureBag& features,
            const std::string& positive_class, double threshold);

inline constexpr double kStrictThreshold = 0.995;

struct PRF {
  double precision = 0;
  double recall = 0;
  double f_score = 0;
  size_t true_positives = 0;
  size_t false_positives = 0;
  size_t false_negatives = 0;
};

// Harmonic mean; 0 when both are 0.
double f_score(double precision, double recall);

PRF prf_from_counts(size_t tp, size_t fp, size_t fn);

struct CvOptions {
  int folds = 5;
  uint64_t seed = 1;
  TrainOptions train;
};

// Held-out posterior of the positive class for every instance, from
// stratified k-fold cross-validation.
struct CvScores {
  std::vector<double> positive_probability;  // NaN where a fold was skipped
  std::vector<bool> is_positive;
  std::vector<int> fold;
  std::vector<std::string> warnings;
};

CvScores cross_validate_scores(std::span<const Instance> instances,
                               const std::string& positive_class,
                               const CvOptions& options = {});

// Micro-averaged P/R/F over held-out predictions at a decision threshold.
PRF evaluate_at(const CvScores& scores, double threshold);

PRF cross_validate(std::span<const Instance> instances,
                   const std::string& positive_class,
                   const CvOptions& options = {}, double threshold = 0.5);

}  // namespace evnet

#endif  // EVNET_LEARN_H_
