#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "relgnn/graph.hpp"
#include "relgnn/ops.hpp"
#include "relgnn/parameters.hpp"
#include "relgnn/recurrent.hpp"
#include "relgnn/tensor.hpp"

namespace relgnn {

enum class CellKind { GGNN, RGCN, RGAT, RGIN, GNN_MLP0, GNN_MLP1, RGDCN, GNN_FILM };

CellKind cell_kind_from_name(std::string_view name);
std::string cell_kind_name(CellKind kind);
const std::vector<CellKind>& all_cell_kinds();

/// Where the non-linearity sits relative to message aggregation in GNN-FiLM.
/// `After`: sigma(sum(gamma * W h_u + beta)); `Before`: l(sum(sigma(...))).
enum class FilmAggregation { After, Before };

/// How RGDCN hypernetwork parameters are tied across chunks.
enum class ChunkTying {
  PerChunk,    // one hypernetwork per chunk, reading the full target state
  Shared,      // one hypernetwork reused for every chunk
  ChunkLocal,  // one hypernetwork per chunk, reading only that chunk of the target
};

/// Message normalisation for R-GCN and GNN-MLP.
enum class Normalization {
  PerType,        // divide by the number of same-type edges into the target
  None,
  TotalInDegree,  // divide by the target's in-degree over all types
};

/// One stage of the post-aggregation function `l` used by GNN-FiLM `Before`.
enum class PostOp { Tanh, Linear, LayerNorm };

FilmAggregation film_aggregation_from_name(std::string_view name);
std::string film_aggregation_name(FilmAggregation mode);
ChunkTying chunk_tying_from_name(std::string_view name);
std::string chunk_tying_name(ChunkTying tying);
Normalization normalization_from_name(std::string_view name);
std::string normalization_name(Normalization n);
/// "identity" -> {}, otherwise '+'-separated stages, e.g. "linear+layer_norm".
std::vector<PostOp> post_ops_from_name(std::string_view spec);
std::string post_ops_name(const std::vector<PostOp>& ops);

struct CellConfig {
  CellKind kind = CellKind::GNN_FILM;
  std::size_t hidden_dim = 32;
  Activation activation = Activation::Relu;
  std::size_t num_heads = 4;                        // RGAT
  RecurrentKind recurrent = RecurrentKind::GRU;     // GGNN
  std::size_t num_chunks = 1;                       // RGDCN
  ChunkTying chunk_tying = ChunkTying::PerChunk;    // RGDCN
  FilmAggregation film_aggregation = FilmAggregation::Before;
  std::vector<PostOp> film_post = {PostOp::LayerNorm};
  Normalization normalization = Normalization::PerType;

  /// Throws std::invalid_argument for option values the kind cannot use.
  void validate() const;
  /// GGNN feeds the node's own state to its recurrent unit and therefore
  /// runs without the self-loop edge type; all other cells need it.
  bool needs_self_loop() const { return kind != CellKind::GGNN; }
  /// Input width the cell accepts, or 0 when any width works.
  std::size_t required_input_dim() const;
};

/// Parameters of one propagation step, resolved by canonical name under a
/// prefix such as "layer3/".
class LayerParams {
 public:
  LayerParams(const ParameterStore& store, std::string prefix) : store_(&store), prefix_(std::move(prefix)) {}
  const Tensor& get(std::string_view name) const { return store_->get(prefix_ + std::string(name)); }
  const std::string& prefix() const { return prefix_; }
  const ParameterStore& store() const { return *store_; }

 private:
  const ParameterStore* store_;
  std::string prefix_;
};

/// Name of type `t` inside a layer: "type<t>/".
std::string type_prefix(std::size_t t);

/// Registers all parameters of one cell under `prefix` for a graph with
/// `num_edge_types` types (including SELF when the cell needs it).
void init_cell_params(const CellConfig& config, std::size_t input_dim, std::size_t num_edge_types,
                      ParameterStore& store, const std::string& prefix, Rng& rng);

// Layer operations. `g` must already carry (or lack) the SELF type as the
// cell requires; `counts` are the per-type in-degrees of `g`.
Tensor ggnn_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                  const LayerParams& params, const CellConfig& config);
Tensor rgcn_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                  const LayerParams& params, const CellConfig& config);
Tensor rgat_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                  const LayerParams& params, const CellConfig& config);
Tensor rgin_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                  const LayerParams& params, const CellConfig& config);
Tensor gnn_mlp_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                     const LayerParams& params, const CellConfig& config);
Tensor rgdcn_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                   const LayerParams& params, const CellConfig& config);
Tensor gnn_film_layer(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                      const LayerParams& params, const CellConfig& config);

/// Dispatches on config.kind.
Tensor apply_cell(const Tensor& h, const TypedGraph& g, const NormCounts& counts,
                  const LayerParams& params, const CellConfig& config);

/// The GGNN message sum m_v = sum over edges (u, t, v) of h_u W_t, before the
/// recurrent update.
Tensor ggnn_messages(const Tensor& h, const TypedGraph& g, const LayerParams& params,
                     const CellConfig& config);

/// R-GAT attention weights of one head, one per edge with edges ordered by
/// type then by position in the type's edge list.
Tensor rgat_attention(const Tensor& h, const TypedGraph& g, const LayerParams& params,
                      std::size_t head);

}  // namespace relgnn
