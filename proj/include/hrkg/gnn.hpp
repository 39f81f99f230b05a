#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrkg/dense.hpp"
#include "hrkg/graph.hpp"

namespace hrkg {

enum class GnnArch : std::uint8_t { GCN, GAT };

std::string_view to_string(GnnArch arch);
/// Case-insensitive "gcn" / "gat"; throws ConfigError otherwise.
GnnArch parse_gnn_arch(std::string_view s);

struct GnnShape {
  GnnArch arch = GnnArch::GCN;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 64;
  std::size_t n_layers = 4;
  /// Attention heads per GAT layer, mean-aggregated. Ignored by GCN.
  std::size_t n_heads = 1;
  std::size_t output_dim = kJobAreaCount;

  bool operator==(const GnnShape&) const = default;
};

/// Layer parameters stored in one flat vector so optimizers and gradient
/// checks can treat the model as a single parameter array.
///
/// Per layer and head: weight (in x out, row-major); GAT only: attention
/// vectors for the receiving node and the neighbour (out each). Then one bias
/// (out) per layer.
class GnnModel {
 public:
  /// Zero-initialised. Throws ValidationError on a zero dimension.
  explicit GnnModel(GnnShape shape);

  const GnnShape& shape() const { return shape_; }
  GnnArch arch() const { return shape_.arch; }
  std::size_t layer_count() const { return shape_.n_layers; }
  std::size_t heads() const { return shape_.arch == GnnArch::GAT ? shape_.n_heads : 1; }
  std::size_t in_dim(std::size_t layer) const;
  std::size_t out_dim(std::size_t layer) const;

  std::span<double> weight(std::size_t layer, std::size_t head = 0);
  std::span<const double> weight(std::size_t layer, std::size_t head = 0) const;
  std::span<double> att_self(std::size_t layer, std::size_t head = 0);
  std::span<const double> att_self(std::size_t layer, std::size_t head = 0) const;
  std::span<double> att_neigh(std::size_t layer, std::size_t head = 0);
  std::span<const double> att_neigh(std::size_t layer, std::size_t head = 0) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  bool operator==(const GnnModel&) const = default;

 private:
  struct Offsets {
    std::vector<std::size_t> weight;     // [layer * heads + head]
    std::vector<std::size_t> att_self;   // GAT only
    std::vector<std::size_t> att_neigh;  // GAT only
    std::vector<std::size_t> bias;       // [layer]
    bool operator==(const Offsets&) const = default;
  };

  GnnShape shape_;
  Offsets offsets_;
  std::vector<double> params_;
};

/// Weights uniform in +-sqrt(6 / fan_in), attention vectors uniform in
/// +-sqrt(6 / (2 * out + 1)), biases zero. Draw order is fixed.
GnnModel init_model(const GnnShape& shape, std::uint64_t seed);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
DenseMatrix normalize_adjacency(const AdjacencyMatrix& a);

/// Attention neighbourhoods in CSR form; each node lists itself and its
/// neighbours in ascending index order.
struct NeighborLists {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> index;

  static NeighborLists from(const AdjacencyMatrix& a);
  std::size_t nodes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Everything a forward pass needs; built once per graph.
struct GnnInput {
  DenseMatrix features;
  DenseMatrix a_hat;
  NeighborLists neighbors;

  /// Throws ValidationError when the row count differs from the graph size.
  static GnnInput from(const AdjacencyMatrix& a, DenseMatrix features);
  std::size_t nodes() const { return features.rows(); }
};

/// Intermediate values of a forward pass. inputs[l] is H^l (inputs.back() is
/// the logits), pre[l] the pre-activation of layer l. For GAT,
/// projected[l][h] = H^l W, and scores/attention[l][h] are aligned with
/// NeighborLists::index (scores before LeakyReLU).
struct ForwardTrace {
  std::vector<DenseMatrix> inputs;
  std::vector<DenseMatrix> pre;
  std::vector<std::vector<DenseMatrix>> projected;
  std::vector<std::vector<std::vector<double>>> scores;
  std::vector<std::vector<std::vector<double>>> attention;
};

inline constexpr double kLeakySlope = 0.2;

/// Logits (N x output_dim). Hidden layers apply ReLU; the last is linear.
DenseMatrix gcn_forward(const DenseMatrix& a_hat, const DenseMatrix& x, const GnnModel& model,
                        ForwardTrace* trace = nullptr);
DenseMatrix gat_forward(const NeighborLists& nb, const DenseMatrix& x, const GnnModel& model,
                        ForwardTrace* trace = nullptr);
DenseMatrix gat_forward(const AdjacencyMatrix& a, const DenseMatrix& x, const GnnModel& model,
                        ForwardTrace* trace = nullptr);
/// Dispatches on model.arch().
DenseMatrix forward(const GnnInput& in, const GnnModel& model, ForwardTrace* trace = nullptr);

/// Label per node, -1 for unlabelled nodes.
using NodeLabels = std::vector<int>;

/// Mean softmax cross-entropy over `mask` plus 0.5 * weight_decay * |theta|^2.
double loss(const GnnInput& in, const GnnModel& model, const NodeLabels& labels,
            std::span<const std::size_t> mask, double weight_decay);

/// Same loss; writes d loss / d theta into grad (resized to match model).
double loss_and_gradient(const GnnInput& in, const GnnModel& model, const NodeLabels& labels,
                         std::span<const std::size_t> mask, double weight_decay, GnnModel& grad,
                         DenseMatrix* logits = nullptr);

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
  /// Times parameters were perturbed to move activations off a kink.
  std::size_t nudges = 0;
};

inline constexpr double kKinkMargin = 1e-3;

/// Central differences against loss_and_gradient for every parameter.
/// Relative error is |ga - gn| / max(1e-8, |ga| + |gn|). If any (Leaky)ReLU
/// input lies within kKinkMargin of zero the parameters are nudged with
/// small seeded noise first, up to 50 attempts.
GradcheckResult gradcheck(const GnnInput& in, GnnModel model, const NodeLabels& labels,
                          std::span<const std::size_t> mask, double weight_decay = 0.0,
                          double eps = 1e-5, std::uint64_t nudge_seed = 1);

/// Distance of the closest (Leaky)ReLU input to zero in a traced pass.
double min_kink_distance(const ForwardTrace& trace, const GnnModel& model);

struct ClsMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;

  bool operator==(const ClsMetrics&) const = default;
};

/// Accuracy plus macro precision/recall over the classes occurring in the
/// true labels under the mask. A class never predicted has precision 0.
/// Throws ValidationError on an empty mask or an unlabelled masked node.
ClsMetrics evaluate_classifier(std::span<const int> preds, std::span<const int> labels,
                               std::span<const std::size_t> mask);

/// Row-wise argmax, lowest index on ties.
std::vector<int> argmax_rows(const DenseMatrix& logits);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Per class: shuffle members, first round(train_frac * n) train, next
/// round(val_frac * n) validation, the rest test. Index lists are sorted.
/// Throws ValidationError with fewer than two classes.
Split stratified_split(const NodeLabels& labels, std::uint64_t seed, double train_frac = 0.6,
                       double val_frac = 0.2);

enum class Optimizer : std::uint8_t { GD, Adam };

std::string_view to_string(Optimizer opt);
Optimizer parse_optimizer(std::string_view s);

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  Optimizer optimizer = Optimizer::GD;
  std::uint64_t seed = 42;
  Split split;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  GnnModel model;
  std::vector<EpochRecord> history;
  ClsMetrics train;
  std::optional<ClsMetrics> val;
  std::optional<ClsMetrics> test;

  std::vector<double> loss_curve() const;
};

/// Full-batch training from init_model(shape, cfg.seed). Throws
/// ValidationError on overlapping masks, an empty train mask or an
/// unlabelled masked node, NumericalError on a non-finite loss.
TrainResult train(const GnnInput& in, const NodeLabels& labels, const GnnShape& shape,
                  const TrainConfig& cfg);

/// Writes <stem>.json (shape, seed, layout) and <stem>.bin (little-endian
/// doubles).
void save_checkpoint(const GnnModel& model, std::uint64_t seed, const std::filesystem::path& stem);

struct Checkpoint {
  GnnModel model;
  std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Document labels over a graph: job area index for labelled document nodes,
/// -1 elsewhere.
NodeLabels document_labels(const KnowledgeGraph& g);

/// Feature matrix of a graph as a dense N x dim matrix. Throws
/// ValidationError when the graph has no features.
DenseMatrix feature_matrix(const KnowledgeGraph& g);

struct ClsRow {
  std::string model;
  ClsMetrics metrics;
};

/// "| Model | Accuracy | Precision | Recall |" with three decimals.
std::string render_classification_table(std::span<const ClsRow> rows);
/// "model,accuracy,precision,recall" header plus one line per row.
std::string classification_csv(std::span<const ClsRow> rows);

}  // namespace hrkg
