#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hrkg/error.hpp"
#include "hrkg/gnn.hpp"
#include "hrkg/rng.hpp"
#include "support.hpp"

using namespace hrkg;

namespace {

AdjacencyMatrix random_adjacency(Rng& rng, std::size_t n, double p) {
  AdjacencyMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform01() < p) a.set(i, j);
    }
  }
  return a;
}

DenseMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  DenseMatrix m(r, c);
  for (auto& x : m.data()) x = rng.uniform(-1, 1);
  return m;
}

GnnShape small_shape(GnnArch arch, std::size_t in, std::size_t heads = 1) {
  GnnShape s;
  s.arch = arch;
  s.input_dim = in;
  s.hidden_dim = 5;
  s.n_layers = 3;
  s.n_heads = heads;
  s.output_dim = 4;
  return s;
}

NodeLabels labels_for(std::size_t n, std::size_t classes, Rng& rng) {
  NodeLabels y(n);
  for (auto& v : y) v = static_cast<int>(rng.uniform_index(classes));
  return y;
}

std::vector<std::size_t> iota_mask(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return m;
}

}  // namespace

TEST_CASE("normalised adjacency closed forms") {
  const auto one = normalize_adjacency(AdjacencyMatrix(1));
  CHECK(one == DenseMatrix(1, 1, {1.0}));
  AdjacencyMatrix pair(2);
  pair.set(0, 1);
  const auto half = normalize_adjacency(pair);
  for (double x : half.data()) CHECK(x == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalised adjacency is symmetric with spectral radius at most one") {
  Rng rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = normalize_adjacency(random_adjacency(rng, 30, 0.15));
    Eigen::MatrixXd m(30, 30);
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t j = 0; j < 30; ++j) {
        CHECK(a(i, j) == a(j, i));
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
      }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("zero weights give zero logits") {
  Rng rng(1);
  const auto a = random_adjacency(rng, 7, 0.4);
  const auto in = GnnInput::from(a, random_matrix(rng, 7, 3));
  for (auto arch : {GnnArch::GCN, GnnArch::GAT}) {
    const GnnModel m(small_shape(arch, 3, 2));
    const auto logits = forward(in, m);
    CHECK(logits.rows() == 7);
    CHECK(logits.cols() == 4);
    for (double x : logits.data()) CHECK(x == 0.0);
  }
}

TEST_CASE("two-node path by hand") {
  AdjacencyMatrix a(2);
  a.set(0, 1);
  GnnShape s;
  s.arch = GnnArch::GCN;
  s.input_dim = 1;
  s.hidden_dim = 1;
  s.n_layers = 2;
  s.output_dim = 1;
  GnnModel m(s);
  m.weight(0)[0] = 2.0;
  m.bias(0)[0] = -1.0;
  m.weight(1)[0] = -0.5;
  m.bias(1)[0] = 0.25;
  const auto in = GnnInput::from(a, DenseMatrix(2, 1, {1.0, 3.0}));
  // Layer 1: 0.5 * (1 + 3) * 2 - 1 = 3 on both nodes, ReLU keeps it.
  // Layer 2: 0.5 * (3 + 3) * -0.5 + 0.25 = -1.25.
  const auto logits = forward(in, m);
  CHECK(logits(0, 0) == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(logits(1, 0) == doctest::Approx(-1.25).epsilon(1e-15));
  m.bias(0)[0] = -5.0;
  // Pre-activation -1 is clipped, so only the output bias remains.
  CHECK(forward(in, m)(0, 0) == 0.25);
}

TEST_CASE("gcn on the identity operator is an mlp") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 9;
    GnnShape s = small_shape(GnnArch::GCN, 6);
    s.n_layers = 4;
    const auto model = init_model(s, 100 + trial);
    GnnModel biased = model;
    for (std::size_t l = 0; l < s.n_layers; ++l) {
      for (auto& b : biased.bias(l)) b = rng.uniform(-0.2, 0.2);
    }
    const auto x = random_matrix(rng, n, 6);
    ForwardTrace tr;
    gcn_forward(DenseMatrix::identity(n), x, biased, &tr);
    DenseMatrix h = x;
    for (std::size_t l = 0; l < s.n_layers; ++l) {
      const auto w = biased.weight(l);
      const auto b = biased.bias(l);
      const std::size_t in = biased.in_dim(l);
      const std::size_t out = biased.out_dim(l);
      DenseMatrix next(n, out);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < out; ++j) {
          double acc = b[j];
          for (std::size_t p = 0; p < in; ++p) acc += h(i, p) * w[p * out + j];
          next(i, j) = l + 1 < s.n_layers ? std::max(acc, 0.0) : acc;
        }
      }
      h = next;
      CHECK(max_abs_diff(tr.inputs[l + 1], h) <= 1e-12);
    }
  }
}

TEST_CASE("attention rows are distributions") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(10);
    const auto a = random_adjacency(rng, n, 0.3);
    const auto in = GnnInput::from(a, random_matrix(rng, n, 5));
    const auto model = init_model(small_shape(GnnArch::GAT, 5, 3), trial);
    ForwardTrace tr;
    forward(in, model, &tr);
    const auto& nb = in.neighbors;
    REQUIRE(tr.attention.size() == model.layer_count());
    for (const auto& layer : tr.attention) {
      REQUIRE(layer.size() == 3);
      for (const auto& head : layer) {
        REQUIRE(head.size() == nb.index.size());
        for (std::size_t v = 0; v < n; ++v) {
          double sum = 0.0;
          for (std::size_t k = nb.offsets[v]; k < nb.offsets[v + 1]; ++k) {
            CHECK(head[k] >= 0.0);
            sum += head[k];
          }
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("isolated node attends only to itself") {
  AdjacencyMatrix a(3);
  a.set(0, 1);
  Rng rng(4);
  const auto in = GnnInput::from(a, random_matrix(rng, 3, 2));
  ForwardTrace tr;
  forward(in, init_model(small_shape(GnnArch::GAT, 2), 1), &tr);
  const auto& nb = in.neighbors;
  REQUIRE(nb.offsets[3] - nb.offsets[2] == 1);
  CHECK(nb.index[nb.offsets[2]] == 2);
  for (const auto& layer : tr.attention) CHECK(layer[0][nb.offsets[2]] == 1.0);
}

TEST_CASE("uniform features give uniform attention") {
  Rng rng(5);
  const auto a = random_adjacency(rng, 8, 0.4);
  const auto in = GnnInput::from(a, DenseMatrix(8, 3, 0.7));
  ForwardTrace tr;
  forward(in, init_model(small_shape(GnnArch::GAT, 3), 2), &tr);
  const auto& nb = in.neighbors;
  for (const auto& layer : tr.attention) {
    for (std::size_t v = 0; v < 8; ++v) {
      const double deg = static_cast<double>(nb.offsets[v + 1] - nb.offsets[v]);
      for (std::size_t k = nb.offsets[v]; k < nb.offsets[v + 1]; ++k) {
        CHECK(layer[0][k] == doctest::Approx(1.0 / deg).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gcn gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto a = random_adjacency(rng, 8, 0.35);
    const auto in = GnnInput::from(a, random_matrix(rng, 8, 4));
    const auto y = labels_for(8, 4, rng);
    const auto r = gradcheck(in, init_model(small_shape(GnnArch::GCN, 4), seed), y, iota_mask(8), 5e-4);
    CHECK_MESSAGE(r.max_rel_error < 1e-5, "seed ", seed, " nudges ", r.nudges);
    CHECK(r.parameters > 0);
  }
}

TEST_CASE("gat gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto a = random_adjacency(rng, 6, 0.45);
    const auto in = GnnInput::from(a, random_matrix(rng, 6, 4));
    const auto y = labels_for(6, 4, rng);
    const auto r = gradcheck(in, init_model(small_shape(GnnArch::GAT, 4), seed), y, iota_mask(6), 5e-4);
    CHECK_MESSAGE(r.max_rel_error < 1e-4, "seed ", seed, " nudges ", r.nudges);
  }
}

TEST_CASE("multi-head gat gradients match finite differences") {
  Rng rng(99);
  const auto a = random_adjacency(rng, 6, 0.5);
  const auto in = GnnInput::from(a, random_matrix(rng, 6, 3));
  const auto y = labels_for(6, 4, rng);
  const auto r = gradcheck(in, init_model(small_shape(GnnArch::GAT, 3, 2), 7), y, iota_mask(6), 0.0);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("zero features give zero first-layer weight gradients") {
  Rng rng(6);
  const auto a = random_adjacency(rng, 7, 0.4);
  const auto in = GnnInput::from(a, DenseMatrix(7, 3, 0.0));
  const auto y = labels_for(7, 4, rng);
  for (auto arch : {GnnArch::GCN, GnnArch::GAT}) {
    const auto model = init_model(small_shape(arch, 3), 3);
    GnnModel grad(model.shape());
    loss_and_gradient(in, model, y, iota_mask(7), 0.0, grad);
    for (double g : grad.weight(0)) CHECK(g == 0.0);
  }
}

TEST_CASE("relabelling nodes permutes logits") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(16);
    const auto a = random_adjacency(rng, n, 0.3);
    const auto x = random_matrix(rng, n, 4);
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    rng.shuffle(p);
    AdjacencyMatrix ap(n);
    DenseMatrix xp(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (a(i, j)) ap.set(p[i], p[j]);
      }
      for (std::size_t k = 0; k < 4; ++k) xp(p[i], k) = x(i, k);
    }
    for (auto arch : {GnnArch::GCN, GnnArch::GAT}) {
      const auto model = init_model(small_shape(arch, 4, 2), trial);
      const auto l1 = forward(GnnInput::from(a, x), model);
      const auto l2 = forward(GnnInput::from(ap, xp), model);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < l1.cols(); ++k) CHECK(std::abs(l1(i, k) - l2(p[i], k)) < 1e-12);
      }
    }
  }
}

TEST_CASE("evaluate classifier examples") {
  const std::vector<int> y = {0, 1, 2, 1};
  const auto all = iota_mask(4);
  CHECK(evaluate_classifier(y, y, all) == ClsMetrics{1.0, 1.0, 1.0});

  const std::vector<int> balanced = {0, 0, 1, 1};
  const std::vector<int> constant = {0, 0, 0, 0};
  const auto c = evaluate_classifier(constant, balanced, all);
  CHECK(c.accuracy == 0.5);
  CHECK(c.recall == 0.5);
  CHECK(c.precision == 0.25);

  // Confusion: class 0 -> 2 of 3 right, class 1 -> 1 of 2, class 2 -> 1 of 1;
  // predicted counts 2, 2, 2.
  const std::vector<int> truth = {0, 0, 0, 1, 1, 2};
  const std::vector<int> pred = {0, 0, 1, 1, 2, 2};
  const auto m = evaluate_classifier(pred, truth, iota_mask(6));
  CHECK(m.accuracy == doctest::Approx(4.0 / 6.0));
  CHECK(m.precision == doctest::Approx((1.0 + 0.5 + 0.5) / 3.0));
  CHECK(m.recall == doctest::Approx((2.0 / 3.0 + 0.5 + 1.0) / 3.0));

  CHECK_THROWS_AS(evaluate_classifier(pred, truth, std::vector<std::size_t>{}), ValidationError);
  const std::vector<int> unlabeled = {0, -1};
  CHECK_THROWS_AS(evaluate_classifier(std::vector<int>{0, 0}, unlabeled, iota_mask(2)), ValidationError);
  CHECK(argmax_rows(DenseMatrix(2, 3, {1, 3, 3, -1, -2, -3})) == std::vector<int>{1, 0});
}

TEST_CASE("stratified split properties") {
  Rng rng(8);
  NodeLabels y(120, -1);
  for (std::size_t i = 0; i < 100; ++i) y[i + 20] = static_cast<int>(i % 5);
  rng.shuffle(y);
  const auto s = stratified_split(y, 42);
  std::vector<std::size_t> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    CHECK(std::is_sorted(part->begin(), part->end()));
    all.insert(all.end(), part->begin(), part->end());
  }
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK(all.size() == 100);
  for (auto i : all) CHECK(y[i] >= 0);
  std::map<int, int> per_class;
  for (auto i : s.train) ++per_class[y[i]];
  for (const auto& [c, n] : per_class) CHECK(n == 12);
  CHECK(s.val.size() == 20);
  CHECK(stratified_split(y, 42).train == s.train);
  CHECK(stratified_split(y, 43).train != s.train);
  CHECK_THROWS_AS(stratified_split(NodeLabels{0, 0, -1}, 1), ValidationError);
}

TEST_CASE("training smoke, determinism and validation") {
  Rng rng(9);
  const auto a = random_adjacency(rng, 30, 0.15);
  const auto in = GnnInput::from(a, random_matrix(rng, 30, 6));
  const auto y = labels_for(30, 3, rng);
  GnnShape s = small_shape(GnnArch::GCN, 6);
  s.output_dim = 3;
  TrainConfig cfg;
  cfg.split = stratified_split(y, 1);
  cfg.epochs = 0;
  const auto zero = train(in, y, s, cfg);
  CHECK(zero.history.empty());
  CHECK(zero.model == init_model(s, cfg.seed));
  const auto preds = argmax_rows(forward(in, zero.model));
  CHECK(zero.train == evaluate_classifier(preds, y, cfg.split.train));
  REQUIRE(zero.test.has_value());

  cfg.epochs = 25;
  for (auto opt : {Optimizer::GD, Optimizer::Adam}) {
    for (auto arch : {GnnArch::GCN, GnnArch::GAT}) {
      cfg.optimizer = opt;
      s.arch = arch;
      const auto r1 = train(in, y, s, cfg);
      const auto r2 = train(in, y, s, cfg);
      CHECK(r1.loss_curve() == r2.loss_curve());
      CHECK(r1.model == r2.model);
      CHECK(r1.history.size() == 25);
    }
  }

  TrainConfig bad = cfg;
  bad.split.val.push_back(bad.split.train.front());
  CHECK_THROWS_AS(train(in, y, s, bad), ValidationError);
  bad = cfg;
  bad.split.train.clear();
  CHECK_THROWS_AS(train(in, y, s, bad), ValidationError);
  bad = cfg;
  bad.learning_rate = 1e300;
  bad.optimizer = Optimizer::GD;
  CHECK_THROWS_AS(train(in, y, s, bad), NumericalError);
}

TEST_CASE("training separates a twenty-class graph") {
  // Each class owns a hub entity; documents carry a noisy class signature.
  Rng rng(10);
  const std::size_t per = 5;
  const std::size_t docs = 20 * per;
  const std::size_t n = docs + 20;
  AdjacencyMatrix a(n);
  NodeLabels y(n, -1);
  DenseMatrix x(n, 24);
  for (std::size_t d = 0; d < docs; ++d) {
    const std::size_t c = d / per;
    y[d] = static_cast<int>(c);
    a.set(d, docs + c);
    for (std::size_t k = 0; k < 24; ++k) x(d, k) = rng.uniform(-0.1, 0.1);
  }
  for (std::size_t c = 0; c < 20; ++c) {
    for (std::size_t k = 0; k < 24; ++k) x(docs + c, k) = rng.uniform(-1, 1);
  }
  const auto in = GnnInput::from(a, x);
  GnnShape s;
  s.input_dim = 24;
  s.hidden_dim = 32;
  s.n_layers = 2;
  TrainConfig cfg;
  cfg.optimizer = Optimizer::Adam;
  cfg.learning_rate = 0.01;
  cfg.split = stratified_split(y, 3);
  for (auto arch : {GnnArch::GCN, GnnArch::GAT}) {
    s.arch = arch;
    const auto r = train(in, y, s, cfg);
    CHECK(r.train.accuracy >= 0.95);
  }
}

TEST_CASE("checkpoint round trip") {
  testsupport::TempDir dir;
  const auto m = init_model(small_shape(GnnArch::GAT, 4, 2), 5);
  save_checkpoint(m, 5, dir / "model");
  for (const char* p : {"model", "model.json", "model.bin"}) {
    const auto back = load_checkpoint(dir / p);
    CHECK(back.model == m);
    CHECK(back.seed == 5);
  }
  testsupport::spit(dir / "model.bin", "short");
  CHECK_THROWS_AS(load_checkpoint(dir / "model"), Error);
}

TEST_CASE("model shape validation") {
  GnnShape s = small_shape(GnnArch::GCN, 0);
  CHECK_THROWS_AS(GnnModel{s}, ValidationError);
  const auto m = init_model(small_shape(GnnArch::GCN, 3), 1);
  AdjacencyMatrix a(4);
  CHECK_THROWS_AS(GnnInput::from(a, DenseMatrix(3, 3)), ValidationError);
  CHECK_THROWS_AS(forward(GnnInput::from(a, DenseMatrix(4, 5)), m), ValidationError);
  CHECK(parse_gnn_arch("GAT") == GnnArch::GAT);
  CHECK_THROWS_AS(parse_gnn_arch("sage"), ConfigError);
  CHECK(parse_optimizer("adam") == Optimizer::Adam);
}

TEST_CASE("classification table layout") {
  const std::vector<ClsRow> rows = {{"GCN", {0.5, 0.25, 0.125}}};
  CHECK(render_classification_table(rows) ==
        "| Model | Accuracy | Precision | Recall |\n|---|---|---|---|\n| GCN | 0.500 | 0.250 | 0.125 |\n");
  CHECK(classification_csv(rows) == "model,accuracy,precision,recall\nGCN,0.5,0.25,0.125\n");
}
