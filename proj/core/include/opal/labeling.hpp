#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opal/graph.hpp"
#include "opal/graph_canon.hpp"
#include "opal/graph_morphism.hpp"

namespace opal {

enum class FlagOrientation { in, out };

// Optional per-flag / per-vertex label data.  Which parts are present is part
// of the variant; validation enforces the variant-specific invariants.
struct Labeling {
  std::map<int, FlagOrientation> orientation;  // per flag
  std::map<int, int> genus;                    // per vertex
  std::map<int, int> color;                    // per flag
  std::map<int, std::map<int, int>> cyclic;    // per vertex: successor map

  bool has_orientation() const { return !orientation.empty(); }
  bool has_genus() const { return !genus.empty(); }
  bool has_color() const { return !color.empty(); }
  bool has_cyclic() const { return !cyclic.empty(); }
  bool operator==(const Labeling&) const = default;
};

struct LabeledGraph {
  Graph graph;
  Labeling labeling;
};

// Checks that the labeling is total on the right carriers and satisfies the
// per-variant invariants (edge halves oriented oppositely, equal colors on
// edge halves, cyclic orders are full cycles).
ValidityReport validate_labeled(const LabeledGraph& g);

struct DirectednessResult {
  bool directed = false;
  // Longest-path heights; strictly decreasing along each oriented edge.
  std::map<int, int> height;
  // Counterexample: the vertices of an oriented wheel, in order.
  std::vector<int> wheel;
};

// Decides directedness of an oriented graph (no oriented wheels) and returns
// a height witness or a wheel counterexample.
DirectednessResult is_directed(const LabeledGraph& g);

// Genus of a connected component (component index per component_of), or of
// the unique component when the graph is connected.
int genus_of(const LabeledGraph& g, std::optional<int> component = std::nullopt);

bool is_stable_corolla(int genus, int flag_count);

// The unique level partition (V1, V2) with all edges from V1 to V2 and tails
// at V1 inputs / V2 outputs, if it exists.  Vertices with no flags make the
// partition non-unique and yield nullopt.
std::optional<std::pair<std::set<int>, std::set<int>>> two_level_partition(
    const LabeledGraph& g);

// Folds the labeling into canonicalization attributes (orientation and color
// become flag attributes, genus a vertex attribute, cyclic passes through).
GraphAttributes labeling_attributes(const LabeledGraph& g);

// Transports labels along an isomorphism onto relabeled ids.
Labeling transport_labeling(const Labeling& l, const GraphIso& iso);

}  // namespace opal
