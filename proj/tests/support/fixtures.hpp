#pragma once

#include <string>
#include <vector>

#include "relgnn/cells.hpp"
#include "relgnn/diagnostics.hpp"
#include "relgnn/graph.hpp"
#include "relgnn/parameters.hpp"
#include "relgnn/rng.hpp"

namespace fixtures {

struct CellCase {
  std::string label;
  relgnn::CellConfig cell;
};

/// Every cell kind with each option that changes the computation.
inline std::vector<CellCase> cell_cases() {
  using namespace relgnn;
  std::vector<CellCase> out;
  CellConfig base;
  base.hidden_dim = 4;
  base.activation = Activation::Tanh;
  base.num_heads = 2;
  base.num_chunks = 2;
  for (CellKind k : all_cell_kinds()) {
    for (const auto& v : gradient_variants(k)) out.push_back({v.label, v.cell});
  }
  for (Normalization n : {Normalization::None, Normalization::TotalInDegree}) {
    for (CellKind k : {CellKind::RGCN, CellKind::GNN_MLP0, CellKind::GNN_MLP1}) {
      CellConfig c = base;
      c.kind = k;
      c.normalization = n;
      out.push_back({cell_kind_name(k) + "/" + normalization_name(n), c});
    }
  }
  CellConfig relu_film = base;
  relu_film.kind = CellKind::GNN_FILM;
  relu_film.activation = Activation::Relu;
  relu_film.film_post = {PostOp::Tanh};
  out.push_back({"GNN_FILM/before/relu+tanh", relu_film});
  CellConfig one_head = base;
  one_head.kind = CellKind::RGAT;
  one_head.num_heads = 1;
  one_head.activation = Activation::Elu;
  out.push_back({"RGAT/1head/elu", one_head});
  CellConfig scalar_chunks = base;
  scalar_chunks.kind = CellKind::RGDCN;
  scalar_chunks.num_chunks = 4;
  scalar_chunks.activation = Activation::LeakyRelu;
  out.push_back({"RGDCN/C=d", scalar_chunks});
  CellConfig gelu_gin = base;
  gelu_gin.kind = CellKind::RGIN;
  gelu_gin.activation = Activation::Gelu;
  out.push_back({"RGIN/gelu", gelu_gin});
  return out;
}

/// Registers the cell's parameters under "layer0/" and overwrites every
/// value (biases included) with N(0, scale^2) draws so that no term is
/// trivially zero.
inline relgnn::ParameterStore randomised_cell_params(const relgnn::CellConfig& cell, std::size_t input_dim,
                                                     std::size_t num_types, relgnn::Rng rng, double scale = 0.5) {
  relgnn::ParameterStore store;
  relgnn::Rng init = rng.split("init");
  relgnn::init_cell_params(cell, input_dim, num_types, store, "layer0/", init);
  relgnn::Rng values = rng.split("values");
  for (auto& [name, t] : store)
    for (auto& x : t.values()) x = static_cast<relgnn::real>(scale * values.normal());
  return store;
}

/// Random graph on `n` nodes with `types` edge types, prepared for `cell`.
inline relgnn::TypedGraph random_cell_graph(const relgnn::CellConfig& cell, relgnn::Rng& rng, std::size_t n,
                                            std::size_t types, std::size_t feature_dim) {
  relgnn::TypedGraph g = relgnn::random_typed_graph(rng, n, types, feature_dim, 0.35);
  return cell.needs_self_loop() ? relgnn::augment_self_loops(g) : g;
}

}  // namespace fixtures
