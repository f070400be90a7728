#include "relgnn/diagnostics.hpp"

#include "relgnn/model.hpp"
#include "relgnn/ops.hpp"

namespace relgnn {

TypedGraph random_typed_graph(Rng& rng, std::size_t num_nodes, std::size_t num_types, std::size_t feature_dim,
                              double edge_prob) {
  TypedGraph g;
  g.num_nodes = num_nodes;
  for (std::size_t t = 0; t < num_types; ++t) g.edge_types.push_back(std::to_string(t));
  g.edges.resize(num_types);
  for (std::size_t t = 0; t < num_types; ++t) {
    for (std::size_t u = 0; u < num_nodes; ++u) {
      for (std::size_t v = 0; v < num_nodes; ++v) {
        if (rng.bernoulli(edge_prob)) g.edges[t].emplace_back(u, v);
      }
    }
  }
  g.features = Matrix(num_nodes, feature_dim);
  for (double& x : g.features.data) x = rng.normal();
  return g;
}

std::vector<GradientVariant> gradient_variants(CellKind kind) {
  CellConfig base;
  base.kind = kind;
  base.hidden_dim = 4;
  base.activation = Activation::Tanh;
  base.num_heads = 2;
  base.num_chunks = 2;
  std::vector<GradientVariant> out;
  const std::string name = cell_kind_name(kind);
  switch (kind) {
    case CellKind::GGNN:
      for (RecurrentKind r : {RecurrentKind::RNN, RecurrentKind::GRU, RecurrentKind::LSTM}) {
        CellConfig c = base;
        c.recurrent = r;
        out.push_back({name + "/" + recurrent_kind_name(r), c});
      }
      break;
    case CellKind::RGDCN:
      for (ChunkTying t : {ChunkTying::PerChunk, ChunkTying::Shared, ChunkTying::ChunkLocal}) {
        CellConfig c = base;
        c.chunk_tying = t;
        out.push_back({name + "/" + chunk_tying_name(t), c});
      }
      break;
    case CellKind::GNN_FILM: {
      CellConfig after = base;
      after.film_aggregation = FilmAggregation::After;
      out.push_back({name + "/after", after});
      CellConfig before = base;
      before.film_aggregation = FilmAggregation::Before;
      before.film_post = {PostOp::Linear, PostOp::LayerNorm};
      out.push_back({name + "/before", before});
      break;
    }
    default:
      out.push_back({name, base});
  }
  return out;
}

GradCheckReport cell_gradient_check(const GradientVariant& variant, std::uint64_t seed, double epsilon) {
  constexpr std::size_t kNodes = 5, kTypes = 3, kFeatures = 3;
  Rng rng = Rng(seed).split("gradient_suite").split(variant.label);
  Rng graph_rng = rng.split("graph");
  const TypedGraph raw = random_typed_graph(graph_rng, kNodes, kTypes, kFeatures);

  StackConfig stack;
  stack.cell = variant.cell;
  stack.num_layers = 2;
  Model model(stack, raw.edge_types, kFeatures, rng.split("init"));
  const TypedGraph g = model.prepare(raw);
  const Tensor features = features_tensor(g.features);

  Rng proj_rng = rng.split("projection");
  std::vector<real> proj(kNodes * stack.cell.hidden_dim);
  for (real& p : proj) p = static_cast<real>(proj_rng.normal());
  const Tensor projection = Tensor::from({kNodes, stack.cell.hidden_dim}, proj);

  auto loss = [&] { return ops::sum(ops::mul(model.forward(features, g, false), projection)); };
  return gradient_check(loss, model.parameters(), epsilon);
}

}  // namespace relgnn
