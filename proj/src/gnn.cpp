#include "hrkg/gnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hrkg/error.hpp"
#include "hrkg/kernels.hpp"
#include "hrkg/rng.hpp"
#include "hrkg/text.hpp"
#include "json.hpp"

namespace hrkg {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(GnnArch arch) { return arch == GnnArch::GCN ? "GCN" : "GAT"; }

GnnArch parse_gnn_arch(std::string_view s) {
  const auto l = text::to_lower(s);
  if (l == "gcn") return GnnArch::GCN;
  if (l == "gat") return GnnArch::GAT;
  throw ConfigError("unknown GNN architecture '" + std::string(s) + "' (valid: gcn, gat)");
}

std::string_view to_string(Optimizer opt) { return opt == Optimizer::GD ? "gd" : "adam"; }

Optimizer parse_optimizer(std::string_view s) {
  const auto l = text::to_lower(s);
  if (l == "gd" || l == "sgd") return Optimizer::GD;
  if (l == "adam") return Optimizer::Adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "' (valid: gd, adam)");
}

// ---------------------------------------------------------------------------
// Model layout

GnnModel::GnnModel(GnnShape shape) : shape_(shape) {
  if (shape_.input_dim == 0 || shape_.hidden_dim == 0 || shape_.n_layers == 0 ||
      shape_.output_dim == 0 || shape_.n_heads == 0) {
    throw ValidationError("GNN dimensions, layer count and head count must be positive");
  }
  std::size_t at = 0;
  for (std::size_t l = 0; l < shape_.n_layers; ++l) {
    const std::size_t in = in_dim(l);
    const std::size_t out = out_dim(l);
    for (std::size_t h = 0; h < heads(); ++h) {
      offsets_.weight.push_back(at);
      at += in * out;
      if (shape_.arch == GnnArch::GAT) {
        offsets_.att_self.push_back(at);
        at += out;
        offsets_.att_neigh.push_back(at);
        at += out;
      }
    }
    offsets_.bias.push_back(at);
    at += out;
  }
  params_.assign(at, 0.0);
}

std::size_t GnnModel::in_dim(std::size_t layer) const {
  return layer == 0 ? shape_.input_dim : shape_.hidden_dim;
}

std::size_t GnnModel::out_dim(std::size_t layer) const {
  return layer + 1 == shape_.n_layers ? shape_.output_dim : shape_.hidden_dim;
}

std::span<double> GnnModel::weight(std::size_t layer, std::size_t head) {
  return {params_.data() + offsets_.weight.at(layer * heads() + head), in_dim(layer) * out_dim(layer)};
}
std::span<const double> GnnModel::weight(std::size_t layer, std::size_t head) const {
  return {params_.data() + offsets_.weight.at(layer * heads() + head), in_dim(layer) * out_dim(layer)};
}
std::span<double> GnnModel::att_self(std::size_t layer, std::size_t head) {
  return {params_.data() + offsets_.att_self.at(layer * heads() + head), out_dim(layer)};
}
std::span<const double> GnnModel::att_self(std::size_t layer, std::size_t head) const {
  return {params_.data() + offsets_.att_self.at(layer * heads() + head), out_dim(layer)};
}
std::span<double> GnnModel::att_neigh(std::size_t layer, std::size_t head) {
  return {params_.data() + offsets_.att_neigh.at(layer * heads() + head), out_dim(layer)};
}
std::span<const double> GnnModel::att_neigh(std::size_t layer, std::size_t head) const {
  return {params_.data() + offsets_.att_neigh.at(layer * heads() + head), out_dim(layer)};
}
std::span<double> GnnModel::bias(std::size_t layer) {
  return {params_.data() + offsets_.bias.at(layer), out_dim(layer)};
}
std::span<const double> GnnModel::bias(std::size_t layer) const {
  return {params_.data() + offsets_.bias.at(layer), out_dim(layer)};
}

GnnModel init_model(const GnnShape& shape, std::uint64_t seed) {
  GnnModel m(shape);
  Rng rng(seed);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double ws = std::sqrt(6.0 / static_cast<double>(m.in_dim(l)));
    const double as = std::sqrt(6.0 / static_cast<double>(2 * m.out_dim(l) + 1));
    for (std::size_t h = 0; h < m.heads(); ++h) {
      for (double& w : m.weight(l, h)) w = rng.uniform(-ws, ws);
      if (m.arch() == GnnArch::GAT) {
        for (double& a : m.att_self(l, h)) a = rng.uniform(-as, as);
        for (double& a : m.att_neigh(l, h)) a = rng.uniform(-as, as);
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Graph operators

DenseMatrix normalize_adjacency(const AdjacencyMatrix& a) {
  const std::size_t n = a.size();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t d = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && a(i, j)) ++d;
    }
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || a(i, j)) out(i, j) = inv_sqrt[i] * inv_sqrt[j];
    }
  }
  return out;
}

NeighborLists NeighborLists::from(const AdjacencyMatrix& a) {
  NeighborLists nb;
  const std::size_t n = a.size();
  nb.offsets.reserve(n + 1);
  nb.offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || a(i, j)) nb.index.push_back(j);
    }
    nb.offsets.push_back(nb.index.size());
  }
  return nb;
}

GnnInput GnnInput::from(const AdjacencyMatrix& a, DenseMatrix features) {
  if (features.rows() != a.size()) {
    throw ValidationError("feature rows (" + std::to_string(features.rows()) +
                          ") differ from graph size (" + std::to_string(a.size()) + ")");
  }
  return GnnInput{std::move(features), normalize_adjacency(a), NeighborLists::from(a)};
}

// ---------------------------------------------------------------------------
// Forward passes

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void check_input(const DenseMatrix& x, std::size_t n, const GnnModel& model) {
  require(x.rows() == n, "feature rows (" + std::to_string(x.rows()) + ") differ from graph size (" +
                             std::to_string(n) + ")");
  require(x.cols() == model.shape().input_dim,
          "feature dim " + std::to_string(x.cols()) + " differs from model input dim " +
              std::to_string(model.shape().input_dim));
}

// h (n x in) times w (in x out).
DenseMatrix project(const DenseMatrix& h, std::span<const double> w, std::size_t out) {
  DenseMatrix p(h.rows(), out);
  kernels::gemm_nn(h.rows(), h.cols(), out, h.data(), w, p.data());
  return p;
}

void add_bias(DenseMatrix& z, std::span<const double> b) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
}

DenseMatrix relu(const DenseMatrix& z) {
  DenseMatrix h = z;
  for (double& v : h.data()) v = v > 0.0 ? v : 0.0;
  return h;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double leaky(double e) { return e > 0.0 ? e : kLeakySlope * e; }

void begin_trace(ForwardTrace* trace, const DenseMatrix& x) {
  if (!trace) return;
  *trace = ForwardTrace{};
  trace->inputs.push_back(x);
}

}  // namespace

DenseMatrix gcn_forward(const DenseMatrix& a_hat, const DenseMatrix& x, const GnnModel& model,
                        ForwardTrace* trace) {
  require(a_hat.rows() == a_hat.cols(), "propagation matrix must be square");
  check_input(x, a_hat.rows(), model);
  begin_trace(trace, x);
  DenseMatrix h = x;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const DenseMatrix p = project(h, model.weight(l), model.out_dim(l));
    DenseMatrix z = matmul(a_hat, p);
    add_bias(z, model.bias(l));
    const bool last = l + 1 == model.layer_count();
    h = last ? z : relu(z);
    if (trace) {
      trace->pre.push_back(std::move(z));
      trace->inputs.push_back(h);
    }
  }
  return h;
}

DenseMatrix gat_forward(const NeighborLists& nb, const DenseMatrix& x, const GnnModel& model,
                        ForwardTrace* trace) {
  check_input(x, nb.nodes(), model);
  begin_trace(trace, x);
  const std::size_t n = nb.nodes();
  const double head_scale = 1.0 / static_cast<double>(model.heads());
  DenseMatrix h = x;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const std::size_t out = model.out_dim(l);
    DenseMatrix z(n, out);
    std::vector<DenseMatrix> projected;
    std::vector<std::vector<double>> scores;
    std::vector<std::vector<double>> attention;
    for (std::size_t hd = 0; hd < model.heads(); ++hd) {
      DenseMatrix p = project(h, model.weight(l, hd), out);
      std::vector<double> s(n);
      std::vector<double> t(n);
      for (std::size_t u = 0; u < n; ++u) {
        s[u] = dot(p.row(u), model.att_self(l, hd));
        t[u] = dot(p.row(u), model.att_neigh(l, hd));
      }
      std::vector<double> e(nb.index.size());
      std::vector<double> alpha(nb.index.size());
      for (std::size_t u = 0; u < n; ++u) {
        const std::size_t lo = nb.offsets[u];
        const std::size_t hi = nb.offsets[u + 1];
        double mx = -INFINITY;
        for (std::size_t k = lo; k < hi; ++k) {
          e[k] = s[u] + t[nb.index[k]];
          mx = std::max(mx, leaky(e[k]));
        }
        double total = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
          alpha[k] = std::exp(leaky(e[k]) - mx);
          total += alpha[k];
        }
        auto zu = z.row(u);
        for (std::size_t k = lo; k < hi; ++k) {
          alpha[k] /= total;
          kernels::axpy(alpha[k] * head_scale, p.row(nb.index[k]), zu);
        }
      }
      if (trace) {
        projected.push_back(std::move(p));
        scores.push_back(std::move(e));
        attention.push_back(std::move(alpha));
      }
    }
    add_bias(z, model.bias(l));
    const bool last = l + 1 == model.layer_count();
    h = last ? z : relu(z);
    if (trace) {
      trace->pre.push_back(std::move(z));
      trace->inputs.push_back(h);
      trace->projected.push_back(std::move(projected));
      trace->scores.push_back(std::move(scores));
      trace->attention.push_back(std::move(attention));
    }
  }
  return h;
}

DenseMatrix gat_forward(const AdjacencyMatrix& a, const DenseMatrix& x, const GnnModel& model,
                        ForwardTrace* trace) {
  return gat_forward(NeighborLists::from(a), x, model, trace);
}

DenseMatrix forward(const GnnInput& in, const GnnModel& model, ForwardTrace* trace) {
  return model.arch() == GnnArch::GCN ? gcn_forward(in.a_hat, in.features, model, trace)
                                      : gat_forward(in.neighbors, in.features, model, trace);
}

// ---------------------------------------------------------------------------
// Loss and backward pass

namespace {

void check_mask(const NodeLabels& labels, std::span<const std::size_t> mask, std::size_t n,
                std::size_t classes) {
  require(!mask.empty(), "loss mask is empty");
  require(labels.size() == n, "label vector length differs from node count");
  for (std::size_t i : mask) {
    require(i < n, "mask index " + std::to_string(i) + " out of range");
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < classes,
            "masked node " + std::to_string(i) + " has no valid label");
  }
}

// Cross-entropy part; fills d loss / d logits when dlogits is non-null.
double cross_entropy(const DenseMatrix& logits, const NodeLabels& labels,
                     std::span<const std::size_t> mask, DenseMatrix* dlogits) {
  const double inv = 1.0 / static_cast<double>(mask.size());
  double total = 0.0;
  for (std::size_t i : mask) {
    const auto r = logits.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double v : r) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    const auto y = static_cast<std::size_t>(labels[i]);
    total += lse - r[y];
    if (dlogits) {
      auto d = dlogits->row(i);
      for (std::size_t j = 0; j < r.size(); ++j) d[j] = std::exp(r[j] - lse) * inv;
      d[y] -= inv;
    }
  }
  return total * inv;
}

double decay_term(const GnnModel& model, double wd) {
  if (wd == 0.0) return 0.0;
  double s = 0.0;
  for (double v : model.parameters()) s += v * v;
  return 0.5 * wd * s;
}

void relu_mask(DenseMatrix& d, const DenseMatrix& pre) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(pre.data()[i] > 0.0)) d.data()[i] = 0.0;
  }
}

// dst += src * w^T with w (in x out) stored row-major; dst is n x in.
void accumulate_input_grad(DenseMatrix& dst, const DenseMatrix& src, std::span<const double> w,
                           std::size_t in, std::size_t out) {
  std::vector<double> wt(in * out);
  for (std::size_t i = 0; i < in; ++i) {
    for (std::size_t j = 0; j < out; ++j) wt[j * in + i] = w[i * out + j];
  }
  kernels::gemm_nn(src.rows(), out, in, src.data(), wt, dst.data());
}

void column_sums(const DenseMatrix& d, std::span<double> into) {
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto r = d.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) into[j] += r[j];
  }
}

void backward_gcn(const GnnInput& in, const GnnModel& model, const ForwardTrace& tr, DenseMatrix dz,
                  GnnModel& grad) {
  for (std::size_t l = model.layer_count(); l-- > 0;) {
    const std::size_t fin = model.in_dim(l);
    const std::size_t fout = model.out_dim(l);
    const DenseMatrix& h = tr.inputs[l];
    column_sums(dz, grad.bias(l));
    const DenseMatrix dp = matmul_tn(in.a_hat, dz);
    kernels::gemm_tn(fin, h.rows(), fout, h.data(), dp.data(), grad.weight(l));
    if (l == 0) break;
    DenseMatrix dh(h.rows(), fin);
    accumulate_input_grad(dh, dp, model.weight(l), fin, fout);
    relu_mask(dh, tr.pre[l - 1]);
    dz = std::move(dh);
  }
}

void backward_gat(const GnnInput& in, const GnnModel& model, const ForwardTrace& tr, DenseMatrix dz,
                  GnnModel& grad) {
  const NeighborLists& nb = in.neighbors;
  const std::size_t n = nb.nodes();
  const double head_scale = 1.0 / static_cast<double>(model.heads());
  for (std::size_t l = model.layer_count(); l-- > 0;) {
    const std::size_t fin = model.in_dim(l);
    const std::size_t fout = model.out_dim(l);
    const DenseMatrix& h = tr.inputs[l];
    column_sums(dz, grad.bias(l));
    DenseMatrix dh(n, fin);
    for (std::size_t hd = 0; hd < model.heads(); ++hd) {
      const DenseMatrix& p = tr.projected[l][hd];
      const std::vector<double>& e = tr.scores[l][hd];
      const std::vector<double>& alpha = tr.attention[l][hd];
      const auto a_self = model.att_self(l, hd);
      const auto a_neigh = model.att_neigh(l, hd);
      DenseMatrix dp(n, fout);
      std::vector<double> ds(n, 0.0);
      std::vector<double> dt(n, 0.0);
      std::vector<double> dalpha;
      std::vector<double> g(fout);
      for (std::size_t u = 0; u < n; ++u) {
        const std::size_t lo = nb.offsets[u];
        const std::size_t hi = nb.offsets[u + 1];
        const auto dzu = dz.row(u);
        for (std::size_t j = 0; j < fout; ++j) g[j] = dzu[j] * head_scale;
        dalpha.assign(hi - lo, 0.0);
        double weighted = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
          const std::size_t v = nb.index[k];
          dalpha[k - lo] = dot(g, p.row(v));
          weighted += alpha[k] * dalpha[k - lo];
          kernels::axpy(alpha[k], g, dp.row(v));
        }
        for (std::size_t k = lo; k < hi; ++k) {
          const double de = alpha[k] * (dalpha[k - lo] - weighted);
          const double dpre = de * (e[k] > 0.0 ? 1.0 : kLeakySlope);
          ds[u] += dpre;
          dt[nb.index[k]] += dpre;
        }
      }
      auto ga_self = grad.att_self(l, hd);
      auto ga_neigh = grad.att_neigh(l, hd);
      for (std::size_t u = 0; u < n; ++u) {
        kernels::axpy(ds[u], p.row(u), ga_self);
        kernels::axpy(dt[u], p.row(u), ga_neigh);
      }
      for (std::size_t u = 0; u < n; ++u) {
        kernels::axpy(ds[u], a_self, dp.row(u));
        kernels::axpy(dt[u], a_neigh, dp.row(u));
      }
      kernels::gemm_tn(fin, n, fout, h.data(), dp.data(), grad.weight(l, hd));
      if (l > 0) accumulate_input_grad(dh, dp, model.weight(l, hd), fin, fout);
    }
    if (l == 0) break;
    relu_mask(dh, tr.pre[l - 1]);
    dz = std::move(dh);
  }
}

}  // namespace

double loss(const GnnInput& in, const GnnModel& model, const NodeLabels& labels,
            std::span<const std::size_t> mask, double weight_decay) {
  check_mask(labels, mask, in.nodes(), model.shape().output_dim);
  const DenseMatrix logits = forward(in, model);
  return cross_entropy(logits, labels, mask, nullptr) + decay_term(model, weight_decay);
}

double loss_and_gradient(const GnnInput& in, const GnnModel& model, const NodeLabels& labels,
                         std::span<const std::size_t> mask, double weight_decay, GnnModel& grad,
                         DenseMatrix* logits) {
  check_mask(labels, mask, in.nodes(), model.shape().output_dim);
  ForwardTrace tr;
  const DenseMatrix out = forward(in, model, &tr);
  DenseMatrix dlogits(out.rows(), out.cols());
  const double value = cross_entropy(out, labels, mask, &dlogits) + decay_term(model, weight_decay);

  if (!(grad.shape() == model.shape())) {
    grad = GnnModel(model.shape());
  } else {
    std::fill(grad.parameters().begin(), grad.parameters().end(), 0.0);
  }
  if (model.arch() == GnnArch::GCN) {
    backward_gcn(in, model, tr, std::move(dlogits), grad);
  } else {
    backward_gat(in, model, tr, std::move(dlogits), grad);
  }
  if (weight_decay != 0.0) {
    kernels::axpy(weight_decay, model.parameters(), grad.parameters());
  }
  if (logits) *logits = out;
  return value;
}

// ---------------------------------------------------------------------------
// Gradient check

double min_kink_distance(const ForwardTrace& trace, const GnnModel& model) {
  double m = INFINITY;
  for (std::size_t l = 0; l + 1 < trace.pre.size(); ++l) {
    for (double v : trace.pre[l].data()) m = std::min(m, std::abs(v));
  }
  if (model.arch() == GnnArch::GAT) {
    for (const auto& layer : trace.scores) {
      for (const auto& head : layer) {
        for (double v : head) m = std::min(m, std::abs(v));
      }
    }
  }
  return m;
}

GradcheckResult gradcheck(const GnnInput& in, GnnModel model, const NodeLabels& labels,
                          std::span<const std::size_t> mask, double weight_decay, double eps,
                          std::uint64_t nudge_seed) {
  GradcheckResult res;
  Rng rng(nudge_seed);
  for (std::size_t attempt = 0; attempt < 50; ++attempt) {
    ForwardTrace tr;
    forward(in, model, &tr);
    if (min_kink_distance(tr, model) > kKinkMargin) break;
    for (double& v : model.parameters()) v += rng.uniform(-0.05, 0.05);
    ++res.nudges;
  }

  GnnModel grad(model.shape());
  loss_and_gradient(in, model, labels, mask, weight_decay, grad);
  auto& theta = model.parameters();
  res.parameters = theta.size();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double up = loss(in, model, labels, mask, weight_decay);
    theta[i] = saved - eps;
    const double down = loss(in, model, labels, mask, weight_decay);
    theta[i] = saved;
    const double gn = (up - down) / (2.0 * eps);
    const double ga = grad.parameters()[i];
    const double rel = std::abs(ga - gn) / std::max(1e-8, std::abs(ga) + std::abs(gn));
    res.max_rel_error = std::max(res.max_rel_error, rel);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Metrics and splits

ClsMetrics evaluate_classifier(std::span<const int> preds, std::span<const int> labels,
                               std::span<const std::size_t> mask) {
  require(!mask.empty(), "evaluation mask is empty");
  require(preds.size() == labels.size(), "prediction and label vectors differ in length");
  std::map<int, std::size_t> tp;
  std::map<int, std::size_t> predicted;
  std::map<int, std::size_t> actual;
  std::size_t correct = 0;
  for (std::size_t i : mask) {
    require(i < labels.size(), "mask index " + std::to_string(i) + " out of range");
    require(labels[i] >= 0, "masked node " + std::to_string(i) + " is unlabelled");
    ++actual[labels[i]];
    ++predicted[preds[i]];
    if (preds[i] == labels[i]) {
      ++correct;
      ++tp[labels[i]];
    }
  }
  ClsMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(mask.size());
  for (const auto& [cls, count] : actual) {
    const double hits = static_cast<double>(tp[cls]);
    const auto p = predicted.find(cls);
    m.precision += p == predicted.end() ? 0.0 : hits / static_cast<double>(p->second);
    m.recall += hits / static_cast<double>(count);
  }
  m.precision /= static_cast<double>(actual.size());
  m.recall /= static_cast<double>(actual.size());
  return m;
}

std::vector<int> argmax_rows(const DenseMatrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto r = logits.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

Split stratified_split(const NodeLabels& labels, std::uint64_t seed, double train_frac,
                       double val_frac) {
  if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0) {
    throw ValidationError("split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) by_class[labels[i]].push_back(i);
  }
  if (by_class.size() < 2) {
    throw ValidationError("stratified split needs at least two labelled classes, found " +
                          std::to_string(by_class.size()));
  }
  Rng rng(seed);
  Split s;
  for (auto& [cls, members] : by_class) {
    rng.shuffle(members);
    const double n = static_cast<double>(members.size());
    const auto n_train = std::min(members.size(), static_cast<std::size_t>(std::llround(train_frac * n)));
    const auto n_val =
        std::min(members.size() - n_train, static_cast<std::size_t>(std::llround(val_frac * n)));
    s.train.insert(s.train.end(), members.begin(), members.begin() + n_train);
    s.val.insert(s.val.end(), members.begin() + n_train, members.begin() + n_train + n_val);
    s.test.insert(s.test.end(), members.begin() + n_train + n_val, members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// ---------------------------------------------------------------------------
// Training

std::vector<double> TrainResult::loss_curve() const {
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& r : history) out.push_back(r.loss);
  return out;
}

namespace {

double mask_accuracy(const std::vector<int>& preds, const NodeLabels& labels,
                     std::span<const std::size_t> mask) {
  if (mask.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i : mask) hit += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(mask.size());
}

void validate_split(const Split& s, const NodeLabels& labels) {
  require(!s.train.empty(), "train mask is empty");
  std::set<std::size_t> seen;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (std::size_t i : *part) {
      require(i < labels.size(), "mask index " + std::to_string(i) + " out of range");
      require(labels[i] >= 0, "masked node " + std::to_string(i) + " is unlabelled");
      require(seen.insert(i).second, "node " + std::to_string(i) + " appears in more than one mask");
    }
  }
}

}  // namespace

TrainResult train(const GnnInput& in, const NodeLabels& labels, const GnnShape& shape,
                  const TrainConfig& cfg) {
  validate_split(cfg.split, labels);
  TrainResult res{init_model(shape, cfg.seed), {}, {}, {}, {}};
  GnnModel& model = res.model;
  auto& theta = model.parameters();
  GnnModel grad(shape);
  std::vector<double> m1(theta.size(), 0.0);
  std::vector<double> m2(theta.size(), 0.0);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  double last_finite = NAN;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    DenseMatrix logits;
    const double value =
        loss_and_gradient(in, model, labels, cfg.split.train, cfg.weight_decay, grad, &logits);
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << " (previous loss " << last_finite
          << ", learning rate " << cfg.learning_rate << ", optimizer " << to_string(cfg.optimizer)
          << ")";
      throw NumericalError(msg.str());
    }
    last_finite = value;
    const auto preds = argmax_rows(logits);
    res.history.push_back({epoch, value, mask_accuracy(preds, labels, cfg.split.train),
                           mask_accuracy(preds, labels, cfg.split.val)});

    const auto& g = grad.parameters();
    if (cfg.optimizer == Optimizer::GD) {
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * g[i];
    } else {
      const double t = static_cast<double>(epoch + 1);
      const double c1 = 1.0 - std::pow(kBeta1, t);
      const double c2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g[i];
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g[i] * g[i];
        theta[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kAdamEps);
      }
    }
  }

  const auto preds = argmax_rows(forward(in, model));
  res.train = evaluate_classifier(preds, labels, cfg.split.train);
  if (!cfg.split.val.empty()) res.val = evaluate_classifier(preds, labels, cfg.split.val);
  if (!cfg.split.test.empty()) res.test = evaluate_classifier(preds, labels, cfg.split.test);
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

std::filesystem::path checkpoint_stem(const std::filesystem::path& p) {
  const auto ext = p.extension();
  if (ext == ".json" || ext == ".bin") return p.parent_path() / p.stem();
  return p;
}

std::filesystem::path suffixed(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_checkpoint(const GnnModel& model, std::uint64_t seed, const std::filesystem::path& stem_in) {
  const auto stem = checkpoint_stem(stem_in);
  const auto& s = model.shape();
  ordered_json h;
  h["format"] = "hrkg-gnn";
  h["arch"] = to_string(s.arch);
  h["input_dim"] = s.input_dim;
  h["hidden_dim"] = s.hidden_dim;
  h["n_layers"] = s.n_layers;
  h["n_heads"] = s.n_heads;
  h["output_dim"] = s.output_dim;
  h["seed"] = seed;
  h["parameters"] = model.parameters().size();
  h["dtype"] = "float64-le";
  h["blob"] = suffixed(stem, ".bin").filename().string();

  std::ofstream hj(suffixed(stem, ".json"), std::ios::binary);
  if (!hj) throw Error(suffixed(stem, ".json").string() + ": cannot open for writing");
  hj << h.dump(1) << '\n';
  std::ofstream bin(suffixed(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error(suffixed(stem, ".bin").string() + ": cannot open for writing");
  for (double x : model.parameters()) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto stem = checkpoint_stem(path);
  const auto hpath = suffixed(stem, ".json");
  std::ifstream hj(hpath);
  if (!hj) throw ParseError(hpath.string() + ": cannot open file");
  ordered_json h;
  try {
    h = ordered_json::parse(hj);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(hpath.string() + ": " + e.what());
  }
  GnnShape s;
  try {
    if (h.at("format") != "hrkg-gnn") throw ParseError(hpath.string() + ": not a GNN checkpoint");
    s.arch = parse_gnn_arch(h.at("arch").get<std::string>());
    s.input_dim = h.at("input_dim").get<std::size_t>();
    s.hidden_dim = h.at("hidden_dim").get<std::size_t>();
    s.n_layers = h.at("n_layers").get<std::size_t>();
    s.n_heads = h.at("n_heads").get<std::size_t>();
    s.output_dim = h.at("output_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(hpath.string() + ": " + e.what());
  }
  Checkpoint cp{GnnModel(s), h.value("seed", std::uint64_t{0})};
  auto& theta = cp.model.parameters();
  if (h.value("parameters", std::size_t{0}) != theta.size()) {
    throw ParseError(hpath.string() + ": parameter count does not match the declared shape");
  }
  const auto bpath = suffixed(stem, ".bin");
  std::ifstream bin(bpath, std::ios::binary);
  if (!bin) throw ParseError(bpath.string() + ": cannot open file");
  for (double& x : theta) {
    std::uint64_t bits = 0;
    if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw ParseError(bpath.string() + ": truncated weights");
    }
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    x = std::bit_cast<double>(bits);
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Graph adapters and reports

NodeLabels document_labels(const KnowledgeGraph& g) {
  NodeLabels out(g.node_count(), -1);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Node& n = g.node(i);
    if (n.kind.is_document() && n.area) out[i] = static_cast<int>(index_of(*n.area));
  }
  return out;
}

DenseMatrix feature_matrix(const KnowledgeGraph& g) {
  const auto& f = g.features();
  if (!f) throw ValidationError("graph has no node features; build it with an embedding provider");
  return DenseMatrix(f->rows(), f->dim(), f->data());
}

namespace {

std::string fixed3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

std::string render_classification_table(std::span<const ClsRow> rows) {
  std::string out = "| Model | Accuracy | Precision | Recall |\n|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += "| " + r.model + " | " + fixed3(r.metrics.accuracy) + " | " + fixed3(r.metrics.precision) +
           " | " + fixed3(r.metrics.recall) + " |\n";
  }
  return out;
}

std::string classification_csv(std::span<const ClsRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "model,accuracy,precision,recall\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.metrics.accuracy << ',' << r.metrics.precision << ','
       << r.metrics.recall << '\n';
  }
  return os.str();
}

}  // namespace hrkg
