#include "opal/graph_canon.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "opal/errors.hpp"

namespace opal {

namespace {

std::string flag_attr_of(const GraphAttributes* attrs, int f) {
  if (!attrs) return {};
  auto it = attrs->flag_attr.find(f);
  return it == attrs->flag_attr.end() ? std::string() : it->second;
}

std::string vertex_attr_of(const GraphAttributes* attrs, int v) {
  if (!attrs) return {};
  auto it = attrs->vertex_attr.find(v);
  return it == attrs->vertex_attr.end() ? std::string() : it->second;
}

bool has_cyclic(const GraphAttributes* attrs, int v) {
  return attrs && attrs->cyclic.count(v) > 0;
}

// Iso-invariant vertex colors refined by neighborhood data.
std::map<int, std::string> refine_colors(const Graph& g, const GraphAttributes* attrs) {
  std::map<int, std::string> color;
  for (int v : g.vertices) {
    std::vector<std::string> fattrs;
    int tails = 0, loops = 0;
    for (int f : g.flags_at(v)) {
      fattrs.push_back(flag_attr_of(attrs, f));
      int p = g.involution.at(f);
      if (p == f) ++tails;
      else if (g.boundary.at(p) == v) ++loops;
    }
    std::sort(fattrs.begin(), fattrs.end());
    std::ostringstream os;
    os << vertex_attr_of(attrs, v) << '|' << fattrs.size() << '|' << tails << '|' << loops
       << '|' << (has_cyclic(attrs, v) ? 'c' : '-');
    for (const auto& a : fattrs) os << ';' << a;
    color[v] = os.str();
  }
  for (size_t round = 0; round < g.vertices.size(); ++round) {
    std::map<int, std::string> next;
    bool changed = false;
    for (int v : g.vertices) {
      std::vector<std::string> nbr;
      for (int f : g.flags_at(v)) {
        int p = g.involution.at(f);
        if (p == f) continue;
        nbr.push_back(flag_attr_of(attrs, f) + '>' + flag_attr_of(attrs, p) + '@' +
                      color.at(g.boundary.at(p)));
      }
      std::sort(nbr.begin(), nbr.end());
      std::ostringstream os;
      os << color.at(v);
      for (const auto& s : nbr) os << '#' << s;
      next[v] = os.str();
    }
    std::set<std::string> before, after;
    for (const auto& [v, c] : color) before.insert(c);
    for (const auto& [v, c] : next) after.insert(c);
    changed = after.size() != before.size();
    color = std::move(next);
    if (!changed) break;
  }
  return color;
}

struct Candidate {
  std::map<int, int> vertex_index;  // old vertex -> 0..V-1
  std::map<int, int> flag_index;    // old flag -> 0..F-1
  std::string key;
};

// Serialize the relabeled structure; equal strings mean equal structures.
std::string serialize(const Graph& g, const GraphAttributes* attrs,
                      const std::map<int, int>& vidx, const std::map<int, int>& fidx) {
  std::ostringstream os;
  os << g.vertices.size() << '/' << g.flags.size() << '|';
  std::vector<int> vorder(g.vertices.size());
  for (const auto& [v, i] : vidx) vorder[i] = v;
  std::vector<int> forder(g.flags.size());
  for (const auto& [f, i] : fidx) forder[i] = f;
  for (int i = 0; i < static_cast<int>(vorder.size()); ++i)
    os << 'v' << vertex_attr_of(attrs, vorder[i]) << ';';
  for (int i = 0; i < static_cast<int>(forder.size()); ++i) {
    int f = forder[i];
    os << 'f' << vidx.at(g.boundary.at(f)) << ',' << fidx.at(g.involution.at(f)) << ','
       << flag_attr_of(attrs, f) << ';';
  }
  if (attrs) {
    for (int i = 0; i < static_cast<int>(vorder.size()); ++i) {
      auto it = attrs->cyclic.find(vorder[i]);
      if (it == attrs->cyclic.end()) continue;
      os << 'y' << i << ':';
      std::vector<std::pair<int, int>> pairs;
      for (const auto& [f, next] : it->second)
        pairs.emplace_back(fidx.at(f), fidx.at(next));
      std::sort(pairs.begin(), pairs.end());
      for (const auto& [a, b] : pairs) os << a << '>' << b << ',';
      os << ';';
    }
  }
  return os.str();
}

// Deterministic flag arrangement for a fixed vertex order.  Cyclic vertices
// contribute one candidate arrangement per rotation of their successor cycle.
void arrange_flags(const Graph& g, const GraphAttributes* attrs,
                   const std::vector<int>& vorder, const std::map<int, int>& vidx,
                   size_t at, std::map<int, int>& fidx,
                   const std::function<void()>& emit) {
  if (at == vorder.size()) {
    emit();
    return;
  }
  int v = vorder[at];
  std::vector<int> flags = g.flags_at(v);
  if (has_cyclic(attrs, v) && !flags.empty()) {
    const auto& succ = attrs->cyclic.at(v);
    for (int start : flags) {
      std::vector<int> order;
      int cur = start;
      for (size_t i = 0; i < flags.size(); ++i) {
        order.push_back(cur);
        auto it = succ.find(cur);
        if (it == succ.end()) break;
        cur = it->second;
      }
      if (order.size() != flags.size()) continue;
      int base = static_cast<int>(fidx.size());
      for (size_t i = 0; i < order.size(); ++i) fidx[order[i]] = base + static_cast<int>(i);
      arrange_flags(g, attrs, vorder, vidx, at + 1, fidx, emit);
      for (int f : order) fidx.erase(f);
    }
    return;
  }
  // Sort by iso-invariant data; fully tied flags are interchangeable.
  auto sort_key = [&](int f) {
    int p = g.involution.at(f);
    int kind = p == f ? 0 : (g.boundary.at(p) == v ? 2 : 1);
    int pv = p == f ? -1 : vidx.at(g.boundary.at(p));
    auto it = fidx.find(p);
    int pslot = it == fidx.end() ? -1 : it->second;
    return std::tuple(kind, flag_attr_of(attrs, f), pv, flag_attr_of(attrs, p), pslot, f);
  };
  std::sort(flags.begin(), flags.end(),
            [&](int a, int b) { return sort_key(a) < sort_key(b); });
  // Place loop halves adjacently (partner immediately after).
  std::vector<int> order;
  std::set<int> placed;
  for (int f : flags) {
    if (placed.count(f)) continue;
    order.push_back(f);
    placed.insert(f);
    int p = g.involution.at(f);
    if (p != f && g.boundary.at(p) == v && !placed.count(p)) {
      order.push_back(p);
      placed.insert(p);
    }
  }
  int base = static_cast<int>(fidx.size());
  for (size_t i = 0; i < order.size(); ++i) fidx[order[i]] = base + static_cast<int>(i);
  arrange_flags(g, attrs, vorder, vidx, at + 1, fidx, emit);
  for (int f : order) fidx.erase(f);
}

void search_orders(const Graph& g, const GraphAttributes* attrs,
                   const std::map<int, std::string>& colors, std::vector<int>& vorder,
                   std::set<int>& used, const std::function<void()>& at_leaf) {
  if (vorder.size() == g.vertices.size()) {
    at_leaf();
    return;
  }
  // Target cell: unused vertices of the minimal color.
  std::string best;
  bool have = false;
  for (int v : g.vertices) {
    if (used.count(v)) continue;
    if (!have || colors.at(v) < best) {
      best = colors.at(v);
      have = true;
    }
  }
  for (int v : g.vertices) {
    if (used.count(v) || colors.at(v) != best) continue;
    vorder.push_back(v);
    used.insert(v);
    search_orders(g, attrs, colors, vorder, used, at_leaf);
    used.erase(v);
    vorder.pop_back();
  }
}

}  // namespace

CanonicalForm canonical_form(const Graph& g, const GraphAttributes* attrs, int vertex_cap) {
  if (static_cast<int>(g.vertices.size()) > vertex_cap)
    throw cap_exceeded("canonical_form: vertex count exceeds cap");
  std::map<int, std::string> colors = refine_colors(g, attrs);
  Candidate best;
  bool have = false;
  std::vector<int> vorder;
  std::set<int> used;
  search_orders(g, attrs, colors, vorder, used, [&] {
    std::map<int, int> vidx;
    for (size_t i = 0; i < vorder.size(); ++i) vidx[vorder[i]] = static_cast<int>(i);
    std::map<int, int> fidx;
    arrange_flags(g, attrs, vorder, vidx, 0, fidx, [&] {
      std::string key = serialize(g, attrs, vidx, fidx);
      if (!have || key < best.key) {
        best = Candidate{vidx, fidx, key};
        have = true;
      }
    });
  });
  if (!have) {
    // Empty graph.
    best = Candidate{{}, {}, serialize(g, attrs, {}, {})};
  }
  CanonicalForm out;
  out.key = best.key;
  out.vertex_relabel = best.vertex_index;
  out.flag_relabel = best.flag_index;
  Graph cg;
  for (size_t i = 0; i < g.vertices.size(); ++i) cg.vertices.push_back(static_cast<int>(i));
  for (size_t i = 0; i < g.flags.size(); ++i) cg.flags.push_back(static_cast<int>(i));
  for (int f : g.flags) {
    cg.boundary[best.flag_index.at(f)] = best.vertex_index.at(g.boundary.at(f));
    cg.involution[best.flag_index.at(f)] = best.flag_index.at(g.involution.at(f));
  }
  out.graph = cg;
  return out;
}

namespace {

// Exhaustive attribute-preserving isomorphism search (complete, unlike the
// deterministic-arrangement canonical search); used for automorphism groups.
void match_vertices(const Graph& a, const Graph& b, const GraphAttributes* attrs_a,
                    const GraphAttributes* attrs_b,
                    const std::map<int, std::string>& colors_a,
                    const std::map<int, std::string>& colors_b, size_t at,
                    const std::vector<int>& averts, std::map<int, int>& vmap,
                    std::set<int>& used, std::vector<std::map<int, int>>& out_vmaps) {
  if (at == averts.size()) {
    out_vmaps.push_back(vmap);
    return;
  }
  int va = averts[at];
  for (int vb : b.vertices) {
    if (used.count(vb) || colors_a.at(va) != colors_b.at(vb)) continue;
    vmap[va] = vb;
    used.insert(vb);
    match_vertices(a, b, attrs_a, attrs_b, colors_a, colors_b, at + 1, averts, vmap, used,
                   out_vmaps);
    used.erase(vb);
    vmap.erase(va);
  }
}

void match_flags(const Graph& a, const Graph& b, const GraphAttributes* attrs_a,
                 const GraphAttributes* attrs_b, const std::map<int, int>& vmap, size_t at,
                 const std::vector<int>& aflags, std::map<int, int>& fmap, std::set<int>& used,
                 std::vector<GraphIso>& out, bool first_only) {
  if (first_only && !out.empty()) return;
  if (at == aflags.size()) {
    // Verify cyclic successor structure.
    if (attrs_a) {
      for (const auto& [v, succ] : attrs_a->cyclic) {
        if (!attrs_b) return;
        auto it = attrs_b->cyclic.find(vmap.at(v));
        if (it == attrs_b->cyclic.end()) return;
        for (const auto& [f, nf] : succ) {
          auto jt = it->second.find(fmap.at(f));
          if (jt == it->second.end() || jt->second != fmap.at(nf)) return;
        }
      }
    } else if (attrs_b && !attrs_b->cyclic.empty()) {
      return;
    }
    out.push_back(GraphIso{fmap, vmap});
    return;
  }
  int fa = aflags[at];
  for (int fb : b.flags) {
    if (used.count(fb)) continue;
    if (vmap.at(a.boundary.at(fa)) != b.boundary.at(fb)) continue;
    if (flag_attr_of(attrs_a, fa) != flag_attr_of(attrs_b, fb)) continue;
    int pa = a.involution.at(fa), pb = b.involution.at(fb);
    if ((pa == fa) != (pb == fb)) continue;
    if (pa != fa) {
      auto it = fmap.find(pa);
      if (it != fmap.end() && it->second != pb) continue;
      if (it == fmap.end() && used.count(pb)) continue;
    }
    fmap[fa] = fb;
    used.insert(fb);
    match_flags(a, b, attrs_a, attrs_b, vmap, at + 1, aflags, fmap, used, out, first_only);
    used.erase(fb);
    fmap.erase(fa);
  }
}

std::vector<GraphIso> all_isomorphisms(const Graph& a, const Graph& b,
                                       const GraphAttributes* attrs_a,
                                       const GraphAttributes* attrs_b, bool first_only) {
  std::vector<GraphIso> out;
  if (a.vertices.size() != b.vertices.size() || a.flags.size() != b.flags.size()) return out;
  std::map<int, std::string> ca = refine_colors(a, attrs_a), cb = refine_colors(b, attrs_b);
  std::vector<std::map<int, int>> vmaps;
  std::map<int, int> vmap;
  std::set<int> used;
  match_vertices(a, b, attrs_a, attrs_b, ca, cb, 0, a.vertices, vmap, used, vmaps);
  for (const auto& vm : vmaps) {
    std::map<int, int> fmap;
    std::set<int> fused;
    match_flags(a, b, attrs_a, attrs_b, vm, 0, a.flags, fmap, fused, out, first_only);
    if (first_only && !out.empty()) break;
  }
  return out;
}

}  // namespace

std::optional<GraphIso> find_isomorphism(const Graph& a, const Graph& b,
                                         const GraphAttributes* attrs_a,
                                         const GraphAttributes* attrs_b) {
  auto isos = all_isomorphisms(a, b, attrs_a, attrs_b, true);
  if (isos.empty()) return std::nullopt;
  return isos.front();
}

std::vector<GraphIso> automorphisms(const Graph& g, const GraphAttributes* attrs) {
  return all_isomorphisms(g, g, attrs, attrs, false);
}

}  // namespace opal
