#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opal/graph.hpp"

namespace opal {

// Extra per-flag / per-vertex data folded into canonical forms.  A pinned
// flag (distinct attribute) can only map to a flag with the same attribute,
// which is how morphism classes fixed on a target are canonicalized.
struct GraphAttributes {
  std::map<int, std::string> flag_attr;
  std::map<int, std::string> vertex_attr;
  // Cyclic successor per vertex (flag -> next flag); folded into certificates
  // up to rotation.
  std::map<int, std::map<int, int>> cyclic;
};

struct GraphIso {
  std::map<int, int> flag_map;    // a flag -> b flag
  std::map<int, int> vertex_map;  // a vertex -> b vertex
};

struct CanonicalForm {
  Graph graph;                     // relabeled onto 0..n-1
  std::map<int, int> flag_relabel;    // old flag -> canonical flag
  std::map<int, int> vertex_relabel;  // old vertex -> canonical vertex
  std::string key;                 // equal keys iff isomorphic
};

// Canonical relabeling by backtracking over vertex orders with degree/orbit
// pruning; intended for desk-scale graphs (vertex cap guards the search).
CanonicalForm canonical_form(const Graph& g, const GraphAttributes* attrs = nullptr,
                             int vertex_cap = 12);

std::optional<GraphIso> find_isomorphism(const Graph& a, const Graph& b,
                                         const GraphAttributes* attrs_a = nullptr,
                                         const GraphAttributes* attrs_b = nullptr);

// All automorphisms of g preserving the attributes.
std::vector<GraphIso> automorphisms(const Graph& g, const GraphAttributes* attrs = nullptr);

}  // namespace opal
