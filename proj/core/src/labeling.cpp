#include "opal/labeling.hpp"

#include <algorithm>
#include <functional>

#include "opal/errors.hpp"

namespace opal {

ValidityReport validate_labeled(const LabeledGraph& g) {
  ValidityReport report = validate_graph(g.graph);
  if (!report.ok) return report;
  const Labeling& l = g.labeling;
  if (l.has_orientation()) {
    for (int f : g.graph.flags)
      if (!l.orientation.count(f))
        report.fail("orientation missing on flag " + std::to_string(f));
    for (const auto& [a, b] : g.graph.edges())
      if (l.orientation.count(a) && l.orientation.count(b) &&
          l.orientation.at(a) == l.orientation.at(b))
        report.fail("edge halves (" + std::to_string(a) + "," + std::to_string(b) +
                    ") share an orientation label");
  }
  if (l.has_genus()) {
    for (int v : g.graph.vertices) {
      auto it = l.genus.find(v);
      if (it == l.genus.end())
        report.fail("genus missing on vertex " + std::to_string(v));
      else if (it->second < 0)
        report.fail("negative genus on vertex " + std::to_string(v));
    }
  }
  if (l.has_color()) {
    for (int f : g.graph.flags)
      if (!l.color.count(f)) report.fail("color missing on flag " + std::to_string(f));
    for (const auto& [a, b] : g.graph.edges())
      if (l.color.count(a) && l.color.count(b) && l.color.at(a) != l.color.at(b))
        report.fail("edge halves (" + std::to_string(a) + "," + std::to_string(b) +
                    ") have different colors");
  }
  if (l.has_cyclic()) {
    for (int v : g.graph.vertices) {
      auto it = l.cyclic.find(v);
      if (it == l.cyclic.end()) {
        report.fail("cyclic order missing on vertex " + std::to_string(v));
        continue;
      }
      std::vector<int> flags = g.graph.flags_at(v);
      if (flags.empty()) continue;
      if (it->second.size() != flags.size()) {
        report.fail("cyclic order on vertex " + std::to_string(v) +
                    " does not cover its flags");
        continue;
      }
      // Must be one full cycle.
      int cur = flags.front();
      std::set<int> seen;
      for (size_t i = 0; i < flags.size(); ++i) {
        if (!it->second.count(cur)) {
          report.fail("cyclic successor missing for flag " + std::to_string(cur));
          break;
        }
        seen.insert(cur);
        cur = it->second.at(cur);
      }
      if (seen.size() != flags.size() || cur != flags.front())
        report.fail("cyclic order on vertex " + std::to_string(v) + " is not a full cycle");
    }
  }
  return report;
}

DirectednessResult is_directed(const LabeledGraph& g) {
  DirectednessResult result;
  // Oriented edges as vertex arcs: from the vertex of the out-half to the
  // vertex of the in-half.
  std::map<int, std::vector<int>> nexts;
  for (int v : g.graph.vertices) nexts[v] = {};
  for (const auto& [a, b] : g.graph.edges()) {
    int out_half = g.labeling.orientation.at(a) == FlagOrientation::out ? a : b;
    int in_half = g.graph.involution.at(out_half);
    nexts[g.graph.boundary.at(out_half)].push_back(g.graph.boundary.at(in_half));
  }
  // Cycle detection with path recovery.
  std::map<int, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<int> stack;
  std::function<bool(int)> dfs = [&](int v) {
    state[v] = 1;
    stack.push_back(v);
    for (int w : nexts[v]) {
      if (state[w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        result.wheel.assign(it, stack.end());
        return true;
      }
      if (state[w] == 0 && dfs(w)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (int v : g.graph.vertices)
    if (state[v] == 0 && dfs(v)) {
      result.directed = false;
      return result;
    }
  result.directed = true;
  // Longest path from each vertex; strictly decreasing along each arc.
  std::map<int, int> height;
  std::function<int(int)> longest = [&](int v) -> int {
    auto it = height.find(v);
    if (it != height.end()) return it->second;
    int h = 0;
    for (int w : nexts[v]) h = std::max(h, longest(w) + 1);
    height[v] = h;
    return h;
  };
  for (int v : g.graph.vertices) longest(v);
  result.height = height;
  return result;
}

int genus_of(const LabeledGraph& g, std::optional<int> component) {
  std::map<int, int> comp = component_of(g.graph);
  std::set<int> comps;
  for (const auto& [v, c] : comp) comps.insert(c);
  int which = 0;
  if (component) {
    which = *component;
  } else if (comps.size() > 1) {
    throw invalid_input("genus: disconnected graph without a component selector");
  }
  int genus_sum = 0, vertices = 0, edges = 0;
  for (int v : g.graph.vertices) {
    if (comp.at(v) != which) continue;
    genus_sum += g.labeling.genus.at(v);
    ++vertices;
  }
  for (const auto& [a, b] : g.graph.edges())
    if (comp.at(g.graph.boundary.at(a)) == which) ++edges;
  int betti = edges - vertices + 1;
  return genus_sum + betti;
}

bool is_stable_corolla(int genus, int flag_count) {
  return 2 * genus - 2 + flag_count > 0;
}

std::optional<std::pair<std::set<int>, std::set<int>>> two_level_partition(
    const LabeledGraph& g) {
  std::set<int> level1, level2;
  for (int v : g.graph.vertices) {
    bool forced1 = false, forced2 = false;
    bool any_flag = false;
    for (int f : g.graph.flags_at(v)) {
      any_flag = true;
      int p = g.graph.involution.at(f);
      bool is_tail = p == f;
      bool is_out = g.labeling.orientation.at(f) == FlagOrientation::out;
      if (is_tail) {
        // Tails at level 1 are inputs; at level 2, outputs.
        (is_out ? forced2 : forced1) = true;
      } else {
        // Edges start at level 1 (out half) and end at level 2 (in half).
        (is_out ? forced1 : forced2) = true;
      }
    }
    if (!any_flag) return std::nullopt;  // both levels satisfy (a),(b): not unique
    if (forced1 && forced2) return std::nullopt;
    (forced1 ? level1 : level2).insert(v);
  }
  for (const auto& [a, b] : g.graph.edges()) {
    int out_half = g.labeling.orientation.at(a) == FlagOrientation::out ? a : b;
    int in_half = g.graph.involution.at(out_half);
    if (!level1.count(g.graph.boundary.at(out_half)) ||
        !level2.count(g.graph.boundary.at(in_half)))
      return std::nullopt;
  }
  return std::make_pair(level1, level2);
}

GraphAttributes labeling_attributes(const LabeledGraph& g) {
  GraphAttributes attrs;
  for (int f : g.graph.flags) {
    std::string a;
    if (g.labeling.has_orientation())
      a += g.labeling.orientation.at(f) == FlagOrientation::in ? "i" : "o";
    if (g.labeling.has_color()) a += ":" + std::to_string(g.labeling.color.at(f));
    if (!a.empty()) attrs.flag_attr[f] = a;
  }
  if (g.labeling.has_genus())
    for (int v : g.graph.vertices)
      attrs.vertex_attr[v] = "g" + std::to_string(g.labeling.genus.at(v));
  if (g.labeling.has_cyclic()) attrs.cyclic = g.labeling.cyclic;
  return attrs;
}

Labeling transport_labeling(const Labeling& l, const GraphIso& iso) {
  Labeling out;
  for (const auto& [f, o] : l.orientation) out.orientation[iso.flag_map.at(f)] = o;
  for (const auto& [v, g] : l.genus) out.genus[iso.vertex_map.at(v)] = g;
  for (const auto& [f, c] : l.color) out.color[iso.flag_map.at(f)] = c;
  for (const auto& [v, succ] : l.cyclic) {
    std::map<int, int> s;
    for (const auto& [f, nf] : succ) s[iso.flag_map.at(f)] = iso.flag_map.at(nf);
    out.cyclic[iso.vertex_map.at(v)] = s;
  }
  return out;
}

}  // namespace opal
