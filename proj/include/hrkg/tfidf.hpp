#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hrkg/corpus.hpp"
#include "hrkg/gnn.hpp"

namespace hrkg {

/// Sorted (column, value) pairs.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

struct TfidfConfig {
  std::size_t ngram_min = 1;
  std::size_t ngram_max = 5;
  bool remove_stopwords = true;
  /// Vocabulary size; when unset, floor(mean + 3 * stddev) of the number of
  /// distinct terms per training document.
  std::optional<std::size_t> max_features;
};

/// Lowercased tokens of two or more word characters.
std::vector<std::string> tokenize(std::string_view text);

/// Word n-grams joined by single spaces, stopwords removed first.
std::vector<std::string> ngrams(std::string_view text, const TfidfConfig& cfg);

/// Raw term frequency times smoothed idf ln((1 + n) / (1 + df)) + 1,
/// rows L2-normalised. Vocabulary keeps the most frequent terms (total
/// count, ties by term) up to the cap.
class TfidfVectorizer {
 public:
  explicit TfidfVectorizer(TfidfConfig cfg = {}) : cfg_(std::move(cfg)) {}

  /// Throws ValidationError on an empty training set.
  void fit(const std::vector<std::string>& docs);
  SparseVector transform(std::string_view doc) const;

  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }

 private:
  TfidfConfig cfg_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
};

struct LogRegConfig {
  /// Inverse regularisation strength; the L1 weight is 1 / (C * n).
  double c = 1.0;
  std::size_t max_iter = 1000;
  double tol = 1e-6;
};

/// One-vs-rest binary logistic regressions with an L1 penalty on the weights
/// (intercept unpenalised), each fitted by accelerated proximal gradient.
class OvrLogisticRegression {
 public:
  explicit OvrLogisticRegression(LogRegConfig cfg = {}) : cfg_(cfg) {}

  /// labels in [0, classes). Throws ValidationError when fewer than two
  /// classes occur.
  void fit(const std::vector<SparseVector>& x, std::size_t dim, const std::vector<int>& labels,
           std::size_t classes);
  std::vector<double> decision(const SparseVector& x) const;
  int predict(const SparseVector& x) const;

  const std::vector<std::vector<double>>& weights() const { return w_; }
  const std::vector<double>& intercepts() const { return b_; }

 private:
  LogRegConfig cfg_;
  std::vector<std::vector<double>> w_;
  std::vector<double> b_;
  std::vector<bool> present_;
};

struct TfidfBaselineConfig {
  TfidfConfig tfidf;
  LogRegConfig logreg;
};

/// Fits on `train_ids` and scores `test_ids`. Every listed document must
/// exist and carry a label; throws ValidationError otherwise or when a
/// split is empty.
ClsMetrics tfidf_logreg_baseline(const Corpus& corpus, const std::vector<std::string>& train_ids,
                                 const std::vector<std::string>& test_ids,
                                 const TfidfBaselineConfig& cfg = {});

}  // namespace hrkg
