#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relgnn/cells.hpp"
#include "relgnn/gradcheck.hpp"
#include "relgnn/graph.hpp"
#include "relgnn/rng.hpp"

namespace relgnn {

/// Random graph with edge types "0".."T-1"; each ordered pair (u, v),
/// including u == v, carries an edge of each type with probability
/// `edge_prob`. Features are standard normal.
TypedGraph random_typed_graph(Rng& rng, std::size_t num_nodes, std::size_t num_types, std::size_t feature_dim,
                              double edge_prob = 0.3);

struct GradientVariant {
  std::string label;
  CellConfig cell;
};

/// The configurations the gradient suite covers for `kind`: both aggregation
/// modes for GNN_FILM, every recurrent unit for GGNN, every tying mode for
/// RGDCN, and a single configuration otherwise. Hidden width 4, tanh.
std::vector<GradientVariant> gradient_variants(CellKind kind);

/// Finite-difference check of a 2-layer stack of `variant` (with input
/// projection) on a random 5-node, 3-type graph; the loss is a fixed random
/// projection of the output.
GradCheckReport cell_gradient_check(const GradientVariant& variant, std::uint64_t seed, double epsilon = 1e-4);

}  // namespace relgnn
