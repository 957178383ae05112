#include "opal/graph.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "opal/errors.hpp"

namespace opal {

Graph Graph::empty() {
  return Graph{};
}

Graph Graph::corolla(int vertex_id, const std::vector<int>& flag_ids) {
  Graph g;
  g.vertices = {vertex_id};
  g.flags = flag_ids;
  std::sort(g.flags.begin(), g.flags.end());
  for (int f : g.flags) {
    g.boundary[f] = vertex_id;
    g.involution[f] = f;
  }
  return g;
}

bool Graph::has_flag(int f) const {
  return std::binary_search(flags.begin(), flags.end(), f);
}

bool Graph::has_vertex(int v) const {
  return std::binary_search(vertices.begin(), vertices.end(), v);
}

std::vector<int> Graph::tails() const {
  std::vector<int> out;
  for (int f : flags) {
    auto it = involution.find(f);
    if (it != involution.end() && it->second == f) out.push_back(f);
  }
  return out;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int f : flags) {
    auto it = involution.find(f);
    if (it != involution.end() && it->second > f) out.emplace_back(f, it->second);
  }
  return out;
}

std::vector<int> Graph::flags_at(int v) const {
  std::vector<int> out;
  for (int f : flags) {
    auto it = boundary.find(f);
    if (it != boundary.end() && it->second == v) out.push_back(f);
  }
  return out;
}

bool Graph::is_corolla() const {
  if (vertices.size() != 1) return false;
  for (int f : flags) {
    auto it = involution.find(f);
    if (it == involution.end() || it->second != f) return false;
  }
  return true;
}

ValidityReport validate_graph(const Graph& g) {
  ValidityReport report;
  std::set<int> flag_set(g.flags.begin(), g.flags.end());
  std::set<int> vertex_set(g.vertices.begin(), g.vertices.end());
  if (flag_set.size() != g.flags.size()) report.fail("duplicate flag ids");
  if (vertex_set.size() != g.vertices.size()) report.fail("duplicate vertex ids");
  if (g.vertices.empty() && !g.flags.empty())
    report.fail("flags present but no vertices");
  for (int f : g.flags) {
    auto b = g.boundary.find(f);
    if (b == g.boundary.end())
      report.fail("flag " + std::to_string(f) + " has no boundary vertex");
    else if (!vertex_set.count(b->second))
      report.fail("flag " + std::to_string(f) + " bounds unknown vertex " +
                  std::to_string(b->second));
    auto j = g.involution.find(f);
    if (j == g.involution.end()) {
      report.fail("flag " + std::to_string(f) + " missing from involution");
    } else {
      if (!flag_set.count(j->second))
        report.fail("involution sends " + std::to_string(f) + " outside the flag set");
      else {
        auto jj = g.involution.find(j->second);
        if (jj == g.involution.end() || jj->second != f)
          report.fail("involution not an involution at flag " + std::to_string(f));
      }
    }
  }
  for (const auto& [f, v] : g.boundary)
    if (!flag_set.count(f)) report.fail("boundary keyed by unknown flag " + std::to_string(f));
  for (const auto& [f, t] : g.involution)
    if (!flag_set.count(f)) report.fail("involution keyed by unknown flag " + std::to_string(f));
  return report;
}

std::map<int, int> component_of(const Graph& g) {
  std::map<int, int> parent;
  for (int v : g.vertices) parent[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& [a, b] : g.edges()) {
    int ra = find(g.boundary.at(a)), rb = find(g.boundary.at(b));
    if (ra != rb) parent[ra] = rb;
  }
  std::map<int, int> index;
  std::map<int, int> out;
  for (int v : g.vertices) {
    int r = find(v);
    auto [it, fresh] = index.emplace(r, static_cast<int>(index.size()));
    (void)fresh;
    out[v] = it->second;
  }
  return out;
}

GraphInvariants graph_invariants(const Graph& g) {
  GraphInvariants inv;
  std::map<int, int> comp = component_of(g);
  std::set<int> comps;
  for (const auto& [v, c] : comp) comps.insert(c);
  inv.components = static_cast<int>(comps.size());
  inv.edges = static_cast<int>(g.edges().size());
  inv.tails = static_cast<int>(g.tails().size());
  inv.first_betti = inv.edges - static_cast<int>(g.vertices.size()) + inv.components;
  return inv;
}

DisjointUnion disjoint_union(const Graph& a, const Graph& b) {
  DisjointUnion du;
  int f = 0, v = 0;
  for (int of : a.flags) du.left_flag[of] = f++;
  for (int of : b.flags) du.right_flag[of] = f++;
  for (int ov : a.vertices) du.left_vertex[ov] = v++;
  for (int ov : b.vertices) du.right_vertex[ov] = v++;
  Graph& g = du.graph;
  for (int i = 0; i < f; ++i) g.flags.push_back(i);
  for (int i = 0; i < v; ++i) g.vertices.push_back(i);
  for (int of : a.flags) {
    g.boundary[du.left_flag[of]] = du.left_vertex[a.boundary.at(of)];
    g.involution[du.left_flag[of]] = du.left_flag[a.involution.at(of)];
  }
  for (int of : b.flags) {
    g.boundary[du.right_flag[of]] = du.right_vertex[b.boundary.at(of)];
    g.involution[du.right_flag[of]] = du.right_flag[b.involution.at(of)];
  }
  return du;
}

}  // namespace opal
