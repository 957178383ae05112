#pragma once

#include <map>
#include <string>
#include <vector>

namespace opal {

// A finite graph in the flag formalism: flags with a boundary map to vertices
// and an involution whose fixed points are tails and whose 2-orbits are edges.
struct Graph {
  std::vector<int> flags;     // sorted unique ids
  std::vector<int> vertices;  // sorted unique ids
  std::map<int, int> boundary;    // flag -> vertex
  std::map<int, int> involution;  // flag -> flag

  static Graph empty();
  static Graph corolla(int vertex_id, const std::vector<int>& flag_ids);

  bool has_flag(int f) const;
  bool has_vertex(int v) const;
  std::vector<int> tails() const;
  std::vector<std::pair<int, int>> edges() const;  // orbits as (min, max)
  std::vector<int> flags_at(int v) const;
  bool is_corolla() const;
  bool operator==(const Graph&) const = default;
};

struct ValidityReport {
  bool ok = true;
  std::vector<std::string> violations;
  void fail(const std::string& why) {
    ok = false;
    violations.push_back(why);
  }
};

// Checks the graph axioms; never throws.
ValidityReport validate_graph(const Graph& g);

struct GraphInvariants {
  int components = 0;
  int edges = 0;
  int tails = 0;
  int first_betti = 0;
  bool operator==(const GraphInvariants&) const = default;
};

GraphInvariants graph_invariants(const Graph& g);

// Connected component index per vertex, in 0..k-1, keyed by vertex id.
std::map<int, int> component_of(const Graph& g);

// Disjoint union with the ordered-set convention: both operands are relabeled
// onto 0..n-1 blocks, left block first.
struct DisjointUnion {
  Graph graph;
  std::map<int, int> left_flag, right_flag;      // old id -> new id
  std::map<int, int> left_vertex, right_vertex;  // old id -> new id
};

DisjointUnion disjoint_union(const Graph& a, const Graph& b);

}  // namespace opal
