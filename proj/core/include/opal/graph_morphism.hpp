#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opal/graph.hpp"

namespace opal {

// Morphism of graphs: contravariant injective flag map, covariant surjective
// vertex map, plus a fixed-point-free involution pairing the contracted tails
// of the source into virtual edges.
struct GraphMorphism {
  Graph source, target;
  std::map<int, int> flag_map;            // target flag -> source flag
  std::map<int, int> vertex_map;          // source vertex -> target vertex
  std::map<int, int> virtual_involution;  // contracted tail -> contracted tail

  static GraphMorphism identity(const Graph& g);

  // Source flags not hit by the flag map.
  std::vector<int> contracted_flags() const;
  bool is_contracted(int source_flag) const;
  // Inverse of the flag map on its image: source flag -> target flag.
  std::map<int, int> flag_map_inverse() const;
};

ValidityReport validate_morphism(const GraphMorphism& m);

// g after f; throws invalid_input if targets/sources do not match.  The
// composite virtual involution pairs the virtual edges of f with the
// pullbacks of all edges (actual or virtual) of the middle graph contracted
// by g that land on tails of the source.
GraphMorphism compose(const GraphMorphism& g, const GraphMorphism& f);

enum class MorphismClass {
  isomorphism,
  virtual_contraction,
  contraction,
  full_contraction,
  grafting,
  total_grafting,
  merger,
  full_merger,
  general,
};

std::string to_string(MorphismClass c);

MorphismClass classify(const GraphMorphism& m);

// Canonical four-factor decomposition.  Composition order is
// merger ∘ contraction ∘ grafting ∘ virtual_contraction = m: the virtual
// contraction removes same-vertex virtual pairs, the grafting realizes the
// remaining virtual pairs and the pairs grafted by m, the contraction
// collapses all contracted edges, and the merger finishes the vertex map.
struct MorphismDecomposition {
  GraphMorphism virtual_contraction;
  GraphMorphism grafting;
  GraphMorphism contraction;
  GraphMorphism merger;

  GraphMorphism composite() const;
};

MorphismDecomposition decompose(const GraphMorphism& m);

// The total grafting ∘_tau from the disjoint union of vertex corollas.
GraphMorphism total_grafting(const Graph& tau);

// con_tau: full contraction followed by the full merger, onto a corolla
// whose flags are the tails of tau.
GraphMorphism full_contraction_to_corolla(const Graph& tau);

// Replaces virtual pairs by actual edges; the returned morphism is the
// grafting tau -> realized graph, and `residual` satisfies
// m = residual ∘ realization with an empty virtual involution.
struct Realization {
  GraphMorphism realization;  // grafting tau -> rho
  GraphMorphism residual;     // rho -> target, no virtual pairs
};
Realization realize_virtual_edges(const GraphMorphism& m);

// Atomization square (per-target-vertex pieces).
struct AtomizationDiagram {
  GraphMorphism k;                      // ∐ tau_v -> tau (grafting)
  GraphMorphism parts_union;            // ∐ tau_v -> ∐ sigma_v
  GraphMorphism total;                  // ∐ sigma_v -> sigma
  GraphMorphism h;                      // tau -> sigma (the input)
  std::map<int, GraphMorphism> parts;   // target vertex -> h_v : tau_v -> sigma_v
  std::map<int, Graph> tau_blocks;      // target vertex -> tau_v
};

AtomizationDiagram atomize(const GraphMorphism& h);

// Heredity: glue per-vertex morphisms h_v : tau_v -> sigma_v (sigma_v the
// corolla of v in sigma, flag ids matching) into a morphism tau -> sigma.
// Source ids of distinct parts must be disjoint.
GraphMorphism assemble(const Graph& sigma, const std::map<int, GraphMorphism>& parts);

}  // namespace opal
