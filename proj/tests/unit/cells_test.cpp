#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "relgnn/cells.hpp"
#include "relgnn/model.hpp"
#include "relgnn/ops.hpp"
#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"

using namespace relgnn;

namespace {

void fill(ParameterStore& s, const std::string& name, double value) {
  for (auto& x : s.get(name).values()) x = static_cast<real>(value);
}

void set_identity(ParameterStore& s, const std::string& name, double scale = 1.0) {
  Tensor& t = s.get(name);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) t.values()[r * t.cols() + c] = r == c ? static_cast<real>(scale) : 0;
}

ParameterStore params_for(const CellConfig& cell, std::size_t input_dim, std::size_t types) {
  ParameterStore s;
  Rng rng(1);
  init_cell_params(cell, input_dim, types, s, "layer0/", rng);
  return s;
}

Tensor run(const CellConfig& cell, const TypedGraph& g, const Tensor& h, const ParameterStore& s) {
  return apply_cell(h, g, norm_counts(g), LayerParams(s, "layer0/"), cell);
}

TypedGraph graph(std::size_t n, std::vector<std::string> types, std::vector<std::vector<Edge>> edges) {
  TypedGraph g;
  g.num_nodes = n;
  g.edge_types = std::move(types);
  g.edges = std::move(edges);
  g.features = Matrix(n, 1);
  return g;
}

std::vector<real> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

TEST_CASE("every cell matches the dense oracle") {
  for (const auto& cc : fixtures::cell_cases()) {
    CAPTURE(cc.label);
    Rng rng = Rng(31).split(cc.label);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
      Rng trng = rng.split(static_cast<std::uint64_t>(trial));
      const std::size_t n = 1 + trng.uniform_index(6);
      const std::size_t d_in = cc.cell.required_input_dim() ? cc.cell.required_input_dim() : 3;
      const TypedGraph g = fixtures::random_cell_graph(cc.cell, trng, n, 2, d_in);
      const ParameterStore s = fixtures::randomised_cell_params(cc.cell, d_in, g.edges.size(), trng.split("p"));
      const Tensor h = features_tensor(g.features);
      worst = std::max(worst, oracle::max_abs_diff(oracle::cell(cc.cell, g, oracle::rows_of(g.features), s, "layer0/"),
                                                   run(cc.cell, g, h, s)));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("ggnn examples") {
  CellConfig c;
  c.kind = CellKind::GGNN;
  c.hidden_dim = 2;
  c.recurrent = RecurrentKind::RNN;
  ParameterStore s = params_for(c, 2, 1);
  for (auto& [name, t] : s)
    for (auto& x : t.values()) x = 0;
  const TypedGraph lonely = graph(2, {"1"}, {{}});
  CHECK(vals(run(c, lonely, Tensor::matrix({{1, 2}, {3, 4}}), s)) == std::vector<real>{0, 0, 0, 0});

  // Message sum with W = I on a line graph 0 -> 1 -> 2 against the one-hot
  // target-indicator product.
  c.recurrent = RecurrentKind::GRU;
  ParameterStore id = params_for(c, 2, 1);
  set_identity(id, "layer0/type0/W");
  const TypedGraph line = graph(3, {"1"}, {{{0, 1}, {1, 2}}});
  const Tensor h = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  const Tensor m = ggnn_messages(h, line, LayerParams(id, "layer0/"), c);
  const Tensor indicator = Tensor::matrix({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  CHECK(vals(m) == vals(ops::matmul(indicator, h)));

  CHECK_THROWS_AS(run(c, line, Tensor::matrix({{1}, {2}, {3}}), id), DimensionError);
}

TEST_CASE("rgcn examples") {
  CellConfig c;
  c.kind = CellKind::RGCN;
  c.hidden_dim = 1;
  c.activation = Activation::Identity;
  ParameterStore s = params_for(c, 1, 2);
  set_identity(s, "layer0/type1/W");
  set_identity(s, "layer0/type0/W", 2);
  const TypedGraph g = augment_self_loops(graph(2, {"1"}, {{{1, 0}}}));
  CHECK(vals(run(c, g, Tensor::matrix({{1}, {3}}), s)) == std::vector<real>{7, 3});

  CellConfig wide = c;
  wide.hidden_dim = 3;
  ParameterStore only_self = params_for(wide, 3, 1);
  set_identity(only_self, "layer0/type0/W");
  const TypedGraph selfish = augment_self_loops(graph(2, {}, {}));
  const Tensor h = Tensor::matrix({{0.5, -1, 2}, {3, 0, 1}});
  CHECK(vals(run(wide, selfish, h, only_self)) == vals(h));

  CHECK_THROWS_AS(run(c, graph(2, {"1"}, {{{1, 0}}}), Tensor::matrix({{1}, {3}}), s), GraphError);
}

TEST_CASE("rgat examples") {
  CellConfig c;
  c.kind = CellKind::RGAT;
  c.hidden_dim = 4;
  c.num_heads = 2;
  const TypedGraph g = augment_self_loops(graph(3, {"1"}, {{{1, 0}, {2, 0}}}));
  Rng rng(4);
  ParameterStore s = fixtures::randomised_cell_params(c, 2, 2, rng);
  // Nodes 1 and 2 share a state, so both type-1 edges into 0 are identical.
  const Tensor h = Tensor::matrix({{0.4, -0.2}, {1.0, 2.0}, {1.0, 2.0}});
  for (std::size_t k = 0; k < 2; ++k) {
    const Tensor a = rgat_attention(h, g, LayerParams(s, "layer0/"), k);
    // Edge order: type "1" (1->0, 2->0), then SELF (0, 1, 2).
    CHECK(std::abs(a.at(0) - a.at(1)) < 1e-15);
    CHECK(a.at(3) == 1.0);
    CHECK(a.at(4) == 1.0);
    CHECK(std::abs(a.at(0) + a.at(1) + a.at(2) - 1) < 1e-12);
  }

  c.num_heads = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("rgin with identity MLPs sums in-neighbours") {
  CellConfig c;
  c.kind = CellKind::RGIN;
  c.hidden_dim = 2;
  c.activation = Activation::Identity;
  ParameterStore s = params_for(c, 2, 2);
  for (std::size_t t = 0; t < 2; ++t) {
    set_identity(s, "layer0/type" + std::to_string(t) + "/mlp/hidden_weight");
    set_identity(s, "layer0/type" + std::to_string(t) + "/mlp/out_weight");
  }
  const TypedGraph g = augment_self_loops(graph(3, {"1"}, {{{1, 0}, {2, 0}, {0, 2}}}));
  const Tensor h = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  CHECK(vals(run(c, g, h, s)) == std::vector<real>{9, 12, 3, 4, 6, 8});
}

TEST_CASE("gnn_mlp reductions") {
  Rng rng(6);
  CellConfig mlp;
  mlp.kind = CellKind::GNN_MLP0;
  mlp.hidden_dim = 3;
  mlp.activation = Activation::Tanh;
  const TypedGraph g = fixtures::random_cell_graph(mlp, rng, 5, 2, 3);
  ParameterStore s = fixtures::randomised_cell_params(mlp, 3, 3, rng);
  CellConfig gcn = mlp;
  gcn.kind = CellKind::RGCN;
  ParameterStore r = params_for(gcn, 3, 3);
  for (std::size_t t = 0; t < 3; ++t) {
    const std::string tp = "layer0/type" + std::to_string(t) + "/";
    Tensor& w = s.get(tp + "mlp/weight");
    for (std::size_t i = 9; i < 18; ++i) w.values()[i] = 0;  // block acting on h_v
    fill(s, tp + "mlp/bias", 0);
    std::copy(w.values().begin(), w.values().begin() + 9, r.get(tp + "W").values().begin());
  }
  const Tensor h = features_tensor(g.features);
  CHECK(oracle::max_abs_diff(oracle::rows_of(run(gcn, g, h, r)), run(mlp, g, h, s)) == 0.0);

  for (CellKind k : {CellKind::GNN_MLP0, CellKind::GNN_MLP1}) {
    CellConfig z = mlp;
    z.kind = k;
    ParameterStore zero = params_for(z, 3, 3);
    for (auto& [name, t] : zero)
      for (auto& x : t.values()) x = 0;
    CHECK(vals(run(z, g, h, zero)) == std::vector<real>(15, 0));
  }
}

TEST_CASE("rgdcn reductions") {
  Rng rng(7);
  CellConfig c;
  c.kind = CellKind::RGDCN;
  c.hidden_dim = 3;
  c.num_chunks = 3;
  c.activation = Activation::Identity;
  const TypedGraph g = fixtures::random_cell_graph(c, rng, 5, 2, 3);
  const Tensor h = features_tensor(g.features);
  ParameterStore s = params_for(c, 3, 3);
  for (auto& [name, t] : s)
    for (auto& x : t.values()) x = name.find("bias") != std::string::npos ? 1 : 0;
  const Tensor out = run(c, g, h, s);
  const auto adj = oracle::dense_adjacency(g);
  for (std::size_t v = 0; v < 5; ++v) {
    for (std::size_t j = 0; j < 3; ++j) {
      double sum = 0;
      for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t u = 0; u < 5; ++u) sum += adj[t][v][u] * g.features(u, j);
      CHECK(std::abs(out.at(v, j) - sum) < 1e-12);
    }
  }

  c.num_chunks = 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("film neutral and zero modulation") {
  Rng rng(8);
  CellConfig film;
  film.kind = CellKind::GNN_FILM;
  film.hidden_dim = 3;
  film.activation = Activation::Tanh;
  film.film_aggregation = FilmAggregation::After;
  const TypedGraph g = fixtures::random_cell_graph(film, rng, 6, 2, 3);
  const Tensor h = features_tensor(g.features);
  ParameterStore s = fixtures::randomised_cell_params(film, 3, 3, rng);
  for (std::size_t t = 0; t < 3; ++t) {
    const std::string tp = "layer0/type" + std::to_string(t) + "/";
    fill(s, tp + "film_g/weight", 0);
    auto b = s.get(tp + "film_g/bias").values();
    std::fill(b.begin(), b.begin() + 3, 0);
    std::fill(b.begin() + 3, b.end(), 1);
  }
  CellConfig gcn = film;
  gcn.kind = CellKind::RGCN;
  gcn.normalization = Normalization::None;
  CHECK(oracle::max_abs_diff(oracle::rows_of(run(gcn, g, h, s)), run(film, g, h, s)) < 1e-12);

  // gamma = 0: only beta_{l,v} = h_v W_beta + b_beta per incoming edge remains.
  ParameterStore z;
  Rng init(2);
  init_cell_params(film, 3, 3, z, "layer0/", init);
  for (auto& [name, t] : z)
    for (auto& x : t.values()) x = static_cast<real>(init.normal());
  for (std::size_t t = 0; t < 3; ++t) {
    const std::string tp = "layer0/type" + std::to_string(t) + "/";
    Tensor& w = z.get(tp + "film_g/weight");
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t col = 3; col < 6; ++col) w.values()[r * 6 + col] = 0;
    auto b = z.get(tp + "film_g/bias").values();
    std::fill(b.begin() + 3, b.end(), 0);
  }
  const Tensor a = run(film, g, h, z);
  // Changing W (the only path for source states) leaves the output unchanged.
  for (std::size_t t = 0; t < 3; ++t) fill(z, "layer0/type" + std::to_string(t) + "/W", 5.0);
  CHECK(vals(run(film, g, h, z)) == vals(a));
}

TEST_CASE("cells are permutation equivariant") {
  for (const auto& cc : fixtures::cell_cases()) {
    CAPTURE(cc.label);
    Rng rng = Rng(77).split(cc.label);
    const std::size_t d_in = cc.cell.required_input_dim() ? cc.cell.required_input_dim() : 3;
    const TypedGraph g = fixtures::random_cell_graph(cc.cell, rng, 6, 2, d_in);
    const ParameterStore s = fixtures::randomised_cell_params(cc.cell, d_in, g.edges.size(), rng.split("p"));
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    const TypedGraph pg = permute_nodes(g, perm);
    const Tensor a = run(cc.cell, g, features_tensor(g.features), s);
    const Tensor b = run(cc.cell, pg, features_tensor(pg.features), s);
    double worst = 0;
    for (std::size_t v = 0; v < 6; ++v)
      for (std::size_t j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a.at(v, j) - b.at(perm[v], j)));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("zero-node graphs give empty outputs") {
  for (CellKind k : all_cell_kinds()) {
    CellConfig c;
    c.kind = k;
    c.hidden_dim = 4;
    c.num_heads = 2;
    TypedGraph g = graph(0, {"1"}, {{}});
    g.features = Matrix(0, 4);
    if (c.needs_self_loop()) g = augment_self_loops(g);
    const ParameterStore s = params_for(c, 4, g.edges.size());
    const Tensor out = run(c, g, Tensor::zeros({0, 4}), s);
    CHECK(out.rows() == 0);
  }
}

TEST_CASE("parameter names are unique") {
  for (const auto& cc : fixtures::cell_cases()) {
    StackConfig stack;
    stack.cell = cc.cell;
    stack.num_layers = 3;
    stack.layer_norm = true;
    stack.dense_layers = 2;
    const Model m(stack, {"a", "b"}, 5, Rng(3));
    const auto names = m.parameters().names();
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  }
  ParameterStore s;
  s.add("x", Tensor::zeros({1}));
  CHECK_THROWS(s.add("x", Tensor::zeros({1})));
}

TEST_CASE("stack structure") {
  Rng rng(10);
  const TypedGraph raw = random_typed_graph(rng, 5, 2, 4);

  SUBCASE("one layer with knobs off is a single cell application") {
    StackConfig stack;
    stack.cell.kind = CellKind::RGIN;
    stack.cell.hidden_dim = 4;
    stack.num_layers = 1;
    stack.input_projection = false;
    const Model m(stack, raw.edge_types, 4, Rng(1));
    const TypedGraph g = m.prepare(raw);
    const Tensor direct = apply_cell(features_tensor(g.features), g, norm_counts(g),
                                     LayerParams(m.parameters(), "layer0/"), stack.cell);
    CHECK(vals(m.forward(raw)) == vals(direct));
  }

  SUBCASE("residual knob") {
    StackConfig stack;
    stack.cell.kind = CellKind::GNN_FILM;
    stack.cell.hidden_dim = 4;
    stack.num_layers = 8;
    const Model off(stack, raw.edge_types, 4, Rng(1));
    const TypedGraph g = off.prepare(raw);
    StackTrace t_off;
    off.forward(features_tensor(g.features), g, false, nullptr, &t_off);
    CHECK(t_off.residual_after_layer.empty());
    CHECK(t_off.dense_after_layer.empty());

    stack.res_connection = 2;
    const Model on(stack, raw.edge_types, 4, Rng(1));
    StackTrace t_on;
    const Tensor out = on.forward(features_tensor(g.features), g, false, nullptr, &t_on);
    CHECK(t_on.residual_after_layer == std::vector<std::size_t>{1, 3, 5, 7});

    // Replay layer by layer, adding the block input only after layers 1, 3, 5, 7.
    const NormCounts counts = norm_counts(g);
    const auto& p = on.parameters();
    const Tensor ib = p.get("input/bias");
    Tensor h = ops::linear(features_tensor(g.features), p.get("input/weight"), &ib);
    Tensor block = h;
    for (std::size_t i = 0; i < 8; ++i) {
      if (i % 2 == 0) block = h;
      h = apply_cell(h, g, counts, LayerParams(p, "layer" + std::to_string(i) + "/"), stack.cell);
      if (i % 2 == 1) h = ops::add(h, block);
    }
    CHECK(vals(out) == vals(h));
  }

  SUBCASE("dense and layer norm") {
    StackConfig stack;
    stack.cell.kind = CellKind::RGCN;
    stack.cell.hidden_dim = 4;
    stack.num_layers = 4;
    stack.dense_layers = 2;
    stack.layer_norm = true;
    const Model m(stack, raw.edge_types, 4, Rng(1));
    StackTrace trace;
    const TypedGraph g = m.prepare(raw);
    m.forward(features_tensor(g.features), g, false, nullptr, &trace);
    CHECK(trace.dense_after_layer == std::vector<std::size_t>{1});
    CHECK(m.parameters().contains("layer3/ln/gain"));
  }

  SUBCASE("residual across a dimension change is rejected") {
    StackConfig stack;
    stack.cell.kind = CellKind::RGCN;
    stack.cell.hidden_dim = 6;
    stack.num_layers = 2;
    stack.res_connection = 1;
    stack.input_projection = false;
    CHECK_THROWS_AS(Model(stack, raw.edge_types, 4, Rng(1)), std::invalid_argument);
  }
}
