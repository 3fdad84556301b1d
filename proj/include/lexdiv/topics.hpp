#pragma once

// Document vectors, density clustering with TF-IDF keywords, a 2-D PCA map
// and a two-class LDA side classifier with bootstrap evaluation.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexdiv/corpus.hpp"
#include "lexdiv/embed.hpp"
#include "lexdiv/linalg.hpp"

namespace lexdiv::topics {

// idf = ln(N / df) + 1 over tweets (documents).
class IdfTable {
 public:
  static IdfTable build(const std::vector<std::vector<std::string>>& documents);
  double weight(std::string_view term) const;  // unknown terms get ln(N) + 1
  std::size_t documents() const { return documents_; }

 private:
  std::unordered_map<std::string, double> idf_;
  std::size_t documents_ = 0;
};

struct DocVector {
  std::string tweet_id;
  std::vector<double> vector;
  Side side = Side::Unknown;
  bool degenerate = false;  // no in-vocabulary token, or the mean cancelled out
};

// IDF-weighted mean of in-vocabulary token vectors, length-normalized.
DocVector doc_vector(const std::vector<std::string>& tokens, const embed::Embedding& embedding,
                     const IdfTable& idf);

inline constexpr int kNoise = -1;

struct Clustering {
  std::vector<int> labels;  // per input point; kNoise for noise
  double eps = 0.0;
  std::size_t min_pts = 0;
  int clusters = 0;
};

// DBSCAN with Euclidean distance. Clusters are numbered in order of their
// first core point; a border point joins the first cluster that reaches it.
Clustering dbscan(const std::vector<std::vector<double>>& points, double eps, std::size_t min_pts);

// Elbow of the sorted k-nearest-neighbour distance curve.
double suggest_eps(const std::vector<std::vector<double>>& points, std::size_t k = 4);

struct Keyword {
  std::string term;
  double score = 0.0;
};

// One document per cluster (its concatenated tokens). tf = count / cluster
// total; idf = ln(clusters / clusters containing term) + 1. Ties by term.
std::vector<std::vector<Keyword>> cluster_keywords(const std::vector<std::vector<std::string>>& cluster_docs,
                                                   std::size_t k);

struct Projection {
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> explained_variance{};
  linalg::Matrix components;  // 2 x dim
  std::vector<double> mean;
};

// Mean-centered PCA onto the top two components. Each component's largest
// magnitude loading is made positive.
Projection project_2d(const std::vector<std::vector<double>>& vectors);

struct LdaClassifier {
  std::vector<double> mean_left;
  std::vector<double> mean_right;
  linalg::Matrix covariance;  // pooled, regularized
  double prior_left = 0.5;
  double prior_right = 0.5;
  std::vector<double> weights;  // Σ⁻¹(μR − μL)
  double threshold = 0.0;

  double score(std::span<const double> x) const;  // > 0 means Right
  Side predict(std::span<const double> x) const { return score(x) > 0 ? Side::Right : Side::Left; }
};

// ridge_scale sets λ = ridge_scale · trace(Σ) / dim.
LdaClassifier fit_lda(const std::vector<std::vector<double>>& vectors, const std::vector<Side>& labels,
                      double ridge_scale = 1e-4);

struct Evaluation {
  double accuracy = 0.0;   // mean over splits
  double p_chance = 0.0;   // mean expected agreement
  double kappa = 0.0;      // (accuracy - p_chance) / (1 - p_chance)
  double accuracy_lo = 0.0;
  double accuracy_hi = 0.0;
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
  std::size_t n = 0;
  std::size_t splits = 0;
};

struct EvaluateOptions {
  std::size_t bootstrap = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  double ridge_scale = 1e-4;
};

// Repeated stratified train/test splits.
Evaluation evaluate(const std::vector<std::vector<double>>& vectors, const std::vector<Side>& labels,
                    const EvaluateOptions& options = {});

void write_evaluation(std::ostream& os, const Evaluation& e);

}  // namespace lexdiv::topics
