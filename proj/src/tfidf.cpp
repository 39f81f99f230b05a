#include "hrkg/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"

namespace hrkg {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (text::is_word_char(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> ngrams(std::string_view text, const TfidfConfig& cfg) {
  if (cfg.ngram_min == 0 || cfg.ngram_min > cfg.ngram_max) {
    throw ConfigError("n-gram range must satisfy 1 <= min <= max");
  }
  std::vector<std::string> tokens;
  const auto& stop = text::english_stopwords();
  for (auto& t : tokenize(text)) {
    if (!cfg.remove_stopwords || !stop.contains(t)) tokens.push_back(std::move(t));
  }
  std::vector<std::string> out;
  for (std::size_t n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        g += ' ';
        g += tokens[i + k];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

void TfidfVectorizer::fit(const std::vector<std::string>& docs) {
  if (docs.empty()) throw ValidationError("TF-IDF needs at least one training document");
  std::map<std::string, std::size_t> total;
  std::map<std::string, std::size_t> df;
  std::vector<double> distinct;
  distinct.reserve(docs.size());
  for (const auto& d : docs) {
    std::unordered_set<std::string> seen;
    for (auto& g : ngrams(d, cfg_)) {
      ++total[g];
      if (seen.insert(g).second) ++df[g];
    }
    distinct.push_back(static_cast<double>(seen.size()));
  }

  std::size_t cap = 0;
  if (cfg_.max_features) {
    cap = *cfg_.max_features;
  } else {
    const double n = static_cast<double>(distinct.size());
    const double mean = std::accumulate(distinct.begin(), distinct.end(), 0.0) / n;
    double var = 0.0;
    for (double v : distinct) var += (v - mean) * (v - mean);
    cap = static_cast<std::size_t>(std::floor(mean + 3.0 * std::sqrt(var / n)));
  }

  std::vector<std::pair<std::string, std::size_t>> ranked(total.begin(), total.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::sort(ranked.begin(), ranked.end());

  terms_.clear();
  index_.clear();
  idf_.clear();
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : ranked) {
    index_.emplace(term, static_cast<std::uint32_t>(terms_.size()));
    terms_.push_back(term);
    idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df[term]))) + 1.0);
  }
}

SparseVector TfidfVectorizer::transform(std::string_view doc) const {
  std::map<std::uint32_t, double> tf;
  for (const auto& g : ngrams(doc, cfg_)) {
    const auto it = index_.find(g);
    if (it != index_.end()) tf[it->second] += 1.0;
  }
  SparseVector v;
  double norm = 0.0;
  for (const auto& [col, count] : tf) {
    const double w = count * idf_[col];
    v.emplace_back(col, w);
    norm += w * w;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [col, w] : v) w /= norm;
  }
  return v;
}

namespace {

double sparse_dot(const SparseVector& x, const std::vector<double>& w) {
  double s = 0.0;
  for (const auto& [col, v] : x) s += v * w[col];
  return s;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

void OvrLogisticRegression::fit(const std::vector<SparseVector>& x, std::size_t dim,
                                const std::vector<int>& labels, std::size_t classes) {
  if (x.size() != labels.size() || x.empty()) {
    throw ValidationError("logistic regression needs one label per non-empty sample set");
  }
  present_.assign(classes, false);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ValidationError("label " + std::to_string(y) + " out of range");
    }
    present_[y] = true;
  }
  if (std::count(present_.begin(), present_.end(), true) < 2) {
    throw ValidationError("logistic regression needs at least two classes in the training split");
  }

  const double n = static_cast<double>(x.size());
  double max_sq = 0.0;
  for (const auto& row : x) {
    double s = 0.0;
    for (const auto& [col, v] : row) s += v * v;
    max_sq = std::max(max_sq, s);
  }
  const double step = 1.0 / (0.25 * (max_sq + 1.0));
  const double lambda = 1.0 / (cfg_.c * n);

  w_.assign(classes, std::vector<double>(dim, 0.0));
  b_.assign(classes, 0.0);
  std::vector<double> grad(dim);
  for (std::size_t c = 0; c < classes; ++c) {
    if (!present_[c]) continue;
    std::vector<double> w(dim, 0.0);
    std::vector<double> yw = w;
    double b = 0.0;
    double yb = 0.0;
    double t = 1.0;
    for (std::size_t it = 0; it < cfg_.max_iter; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double gb = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const double z = sparse_dot(x[i], yw) + yb;
        // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
        const double g = -y / (1.0 + std::exp(y * z)) / n;
        for (const auto& [col, v] : x[i]) grad[col] += g * v;
        gb += g;
      }
      double change = 0.0;
      std::vector<double> w_next(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        w_next[j] = soft_threshold(yw[j] - step * grad[j], step * lambda);
        change = std::max(change, std::abs(w_next[j] - w[j]));
      }
      const double b_next = yb - step * gb;
      change = std::max(change, std::abs(b_next - b));
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double mom = (t - 1.0) / t_next;
      for (std::size_t j = 0; j < dim; ++j) yw[j] = w_next[j] + mom * (w_next[j] - w[j]);
      yb = b_next + mom * (b_next - b);
      w = std::move(w_next);
      b = b_next;
      t = t_next;
      if (change < cfg_.tol) break;
    }
    w_[c] = std::move(w);
    b_[c] = b;
  }
}

std::vector<double> OvrLogisticRegression::decision(const SparseVector& x) const {
  std::vector<double> out(w_.size(), -INFINITY);
  for (std::size_t c = 0; c < w_.size(); ++c) {
    if (present_[c]) out[c] = sparse_dot(x, w_[c]) + b_[c];
  }
  return out;
}

int OvrLogisticRegression::predict(const SparseVector& x) const {
  const auto d = decision(x);
  return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

namespace {

const Document& labelled(const Corpus& corpus, const std::string& id) {
  const Document* d = corpus.find(id);
  if (!d) throw ValidationError("unknown document id '" + id + "'");
  if (!d->label) throw ValidationError("document '" + id + "' has no job-area label");
  return *d;
}

}  // namespace

ClsMetrics tfidf_logreg_baseline(const Corpus& corpus, const std::vector<std::string>& train_ids,
                                 const std::vector<std::string>& test_ids,
                                 const TfidfBaselineConfig& cfg) {
  if (train_ids.empty() || test_ids.empty()) {
    throw ValidationError("TF-IDF baseline needs non-empty train and test splits");
  }
  std::vector<std::string> train_text;
  std::vector<int> train_y;
  for (const auto& id : train_ids) {
    const Document& d = labelled(corpus, id);
    train_text.push_back(d.text);
    train_y.push_back(static_cast<int>(index_of(*d.label)));
  }
  TfidfVectorizer vec(cfg.tfidf);
  vec.fit(train_text);
  std::vector<SparseVector> x;
  x.reserve(train_text.size());
  for (const auto& t : train_text) x.push_back(vec.transform(t));

  OvrLogisticRegression clf(cfg.logreg);
  clf.fit(x, vec.vocabulary_size(), train_y, kJobAreaCount);

  std::vector<int> preds;
  std::vector<int> truth;
  for (const auto& id : test_ids) {
    const Document& d = labelled(corpus, id);
    preds.push_back(clf.predict(vec.transform(d.text)));
    truth.push_back(static_cast<int>(index_of(*d.label)));
  }
  std::vector<std::size_t> mask(preds.size());
  std::iota(mask.begin(), mask.end(), std::size_t{0});
  return evaluate_classifier(preds, truth, mask);
}

}  // namespace hrkg
