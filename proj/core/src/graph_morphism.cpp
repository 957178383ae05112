#include "opal/graph_morphism.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "opal/errors.hpp"

namespace opal {

GraphMorphism GraphMorphism::identity(const Graph& g) {
  GraphMorphism m;
  m.source = g;
  m.target = g;
  for (int f : g.flags) m.flag_map[f] = f;
  for (int v : g.vertices) m.vertex_map[v] = v;
  return m;
}

std::vector<int> GraphMorphism::contracted_flags() const {
  std::set<int> image;
  for (const auto& [tf, sf] : flag_map) image.insert(sf);
  std::vector<int> out;
  for (int f : source.flags)
    if (!image.count(f)) out.push_back(f);
  return out;
}

bool GraphMorphism::is_contracted(int source_flag) const {
  for (const auto& [tf, sf] : flag_map)
    if (sf == source_flag) return false;
  return true;
}

std::map<int, int> GraphMorphism::flag_map_inverse() const {
  std::map<int, int> inv;
  for (const auto& [tf, sf] : flag_map) inv[sf] = tf;
  return inv;
}

ValidityReport validate_morphism(const GraphMorphism& m) {
  ValidityReport report;
  ValidityReport src = validate_graph(m.source), tgt = validate_graph(m.target);
  if (!src.ok) report.fail("source graph invalid");
  if (!tgt.ok) report.fail("target graph invalid");
  if (!report.ok) return report;

  // (i) h^F total on target flags and injective; h_V total and surjective.
  std::set<int> image;
  for (int tf : m.target.flags) {
    auto it = m.flag_map.find(tf);
    if (it == m.flag_map.end()) {
      report.fail("flag map undefined on target flag " + std::to_string(tf));
      continue;
    }
    if (!m.source.has_flag(it->second))
      report.fail("flag map hits unknown source flag " + std::to_string(it->second));
    if (!image.insert(it->second).second)
      report.fail("flag map not injective at source flag " + std::to_string(it->second));
  }
  std::set<int> vimage;
  for (int sv : m.source.vertices) {
    auto it = m.vertex_map.find(sv);
    if (it == m.vertex_map.end()) {
      report.fail("vertex map undefined on source vertex " + std::to_string(sv));
      continue;
    }
    if (!m.target.has_vertex(it->second))
      report.fail("vertex map hits unknown target vertex " + std::to_string(it->second));
    vimage.insert(it->second);
  }
  for (int tv : m.target.vertices)
    if (!vimage.count(tv))
      report.fail("vertex map not surjective: vertex " + std::to_string(tv) + " not hit");
  if (!report.ok) return report;

  // (ii) image and complement are involution-invariant; virtual involution is
  // a fixed-point-free pairing of exactly the contracted tails.
  for (int tf : m.target.flags) {
    int sf = m.flag_map.at(tf);
    int partner = m.source.involution.at(sf);
    if (!image.count(partner) && partner != sf)
      report.fail("image not involution-invariant at source flag " + std::to_string(sf));
  }
  std::set<int> contracted_tails;
  for (int f : m.source.flags) {
    if (image.count(f)) continue;
    if (m.source.involution.at(f) == f) contracted_tails.insert(f);
  }
  std::set<int> jh_domain;
  for (const auto& [a, b] : m.virtual_involution) {
    jh_domain.insert(a);
    auto it = m.virtual_involution.find(b);
    if (it == m.virtual_involution.end() || it->second != a)
      report.fail("virtual involution not an involution at flag " + std::to_string(a));
    if (a == b) report.fail("virtual involution fixes tail " + std::to_string(a));
    if (!contracted_tails.count(a))
      report.fail("virtual involution defined on non-contracted flag " + std::to_string(a));
  }
  for (int t : contracted_tails)
    if (!jh_domain.count(t))
      report.fail("contracted tail " + std::to_string(t) + " is not virtually paired");

  // (iii) boundary compatibility; contracted edge ends share images.
  for (int tf : m.target.flags) {
    int sf = m.flag_map.at(tf);
    if (m.vertex_map.at(m.source.boundary.at(sf)) != m.target.boundary.at(tf))
      report.fail("boundary incompatible at target flag " + std::to_string(tf));
  }
  for (int f : m.source.flags) {
    if (image.count(f)) continue;
    int partner = m.source.involution.at(f);
    if (partner != f && partner > f) {
      if (m.vertex_map.at(m.source.boundary.at(f)) !=
          m.vertex_map.at(m.source.boundary.at(partner)))
        report.fail("contracted edge (" + std::to_string(f) + "," + std::to_string(partner) +
                    ") ends map to different vertices");
    }
  }
  for (const auto& [a, b] : m.virtual_involution) {
    if (a < b &&
        m.vertex_map.at(m.source.boundary.at(a)) != m.vertex_map.at(m.source.boundary.at(b)))
      report.fail("virtual edge (" + std::to_string(a) + "," + std::to_string(b) +
                  ") ends map to different vertices");
  }

  // (iv) edges of the source inside the image pull back to edges of the target.
  std::map<int, int> inv = m.flag_map_inverse();
  for (int tf : m.target.flags) {
    int sf = m.flag_map.at(tf);
    int partner = m.source.involution.at(sf);
    if (partner == sf) continue;  // tail or grafted pair handled from target side
    if (!image.count(partner)) continue;  // contracted edge
    int tg = inv.at(partner);
    if (m.target.involution.at(tf) != tg)
      report.fail("source edge (" + std::to_string(sf) + "," + std::to_string(partner) +
                  ") does not map to a target edge");
  }
  return report;
}

GraphMorphism compose(const GraphMorphism& g, const GraphMorphism& f) {
  if (!(f.target == g.source)) throw invalid_input("compose: target(f) != source(g)");
  GraphMorphism h;
  h.source = f.source;
  h.target = g.target;
  for (const auto& [tf, mf] : g.flag_map) h.flag_map[tf] = f.flag_map.at(mf);
  for (const auto& [sv, mv] : f.vertex_map) h.vertex_map[sv] = g.vertex_map.at(mv);

  // Virtual pairs of f survive; edges of the middle graph (actual or virtual)
  // contracted by g pull back along f, and when both pulled-back flags are
  // tails of the source they form a virtual pair of the composite.
  h.virtual_involution = f.virtual_involution;
  auto add_pair = [&](int a, int b) {
    auto ita = h.virtual_involution.find(a);
    auto itb = h.virtual_involution.find(b);
    if (ita != h.virtual_involution.end() || itb != h.virtual_involution.end()) {
      if (ita != h.virtual_involution.end() && ita->second == b) return;
      throw invalid_input("compose: conflicting virtual pairings");
    }
    h.virtual_involution[a] = b;
    h.virtual_involution[b] = a;
  };
  std::set<int> g_image;
  for (const auto& [tf, mf] : g.flag_map) g_image.insert(mf);
  auto src_is_tail = [&](int sf) { return f.source.involution.at(sf) == sf; };
  for (int mf : g.source.flags) {
    if (g_image.count(mf)) continue;
    int partner = g.source.involution.at(mf);
    if (partner != mf && partner > mf) {
      int a = f.flag_map.at(mf), b = f.flag_map.at(partner);
      if (src_is_tail(a) && src_is_tail(b)) add_pair(a, b);
    }
  }
  for (const auto& [a, b] : g.virtual_involution) {
    if (a < b) {
      int fa = f.flag_map.at(a), fb = f.flag_map.at(b);
      if (!src_is_tail(fa) || !src_is_tail(fb))
        throw internal_error("virtual pair pulled back to non-tails");
      add_pair(fa, fb);
    }
  }
  return h;
}

namespace {

bool is_grafting(const GraphMorphism& m) {
  return m.flag_map.size() == m.source.flags.size() &&
         m.vertex_map.size() == m.source.vertices.size() &&
         m.source.vertices.size() == m.target.vertices.size() &&
         m.source.flags.size() == m.target.flags.size();
}

bool preserves_involution(const GraphMorphism& m) {
  for (int tf : m.target.flags) {
    int sf = m.flag_map.at(tf);
    int partner = m.source.involution.at(sf);
    int tpartner = m.target.involution.at(tf);
    auto it = m.flag_map.find(tpartner);
    if (it == m.flag_map.end()) return false;
    if (it->second != partner) return false;
  }
  return true;
}

bool is_merger(const GraphMorphism& m) {
  return m.source.flags.size() == m.target.flags.size() &&
         m.flag_map.size() == m.target.flags.size() && preserves_involution(m);
}

bool fibers_connected_by_contracted_edges(const GraphMorphism& m) {
  // union-find over source vertices along contracted actual edges
  std::map<int, int> parent;
  for (int v : m.source.vertices) parent[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::set<int> image;
  for (const auto& [tf, sf] : m.flag_map) image.insert(sf);
  for (const auto& [a, b] : m.source.edges()) {
    if (image.count(a)) continue;
    int ra = find(m.source.boundary.at(a)), rb = find(m.source.boundary.at(b));
    if (ra != rb) parent[ra] = rb;
  }
  std::map<int, std::set<int>> fiber_roots;
  for (int v : m.source.vertices) fiber_roots[m.vertex_map.at(v)].insert(find(v));
  for (const auto& [tv, roots] : fiber_roots)
    if (roots.size() > 1) return false;
  return true;
}

}  // namespace

std::string to_string(MorphismClass c) {
  switch (c) {
    case MorphismClass::isomorphism: return "isomorphism";
    case MorphismClass::virtual_contraction: return "virtual_contraction";
    case MorphismClass::contraction: return "contraction";
    case MorphismClass::full_contraction: return "full_contraction";
    case MorphismClass::grafting: return "grafting";
    case MorphismClass::total_grafting: return "total_grafting";
    case MorphismClass::merger: return "merger";
    case MorphismClass::full_merger: return "full_merger";
    case MorphismClass::general: return "general";
  }
  return "general";
}

MorphismClass classify(const GraphMorphism& m) {
  bool flags_bijective = m.flag_map.size() == m.source.flags.size();
  bool vertices_bijective = m.source.vertices.size() == m.target.vertices.size();
  bool involution_ok = flags_bijective && preserves_involution(m);

  if (flags_bijective && vertices_bijective && involution_ok)
    return MorphismClass::isomorphism;

  // Virtual contraction: only tails contracted, involution matched on the
  // image, bijective on vertices.
  bool only_tails_contracted = true;
  for (int f : m.contracted_flags())
    if (m.source.involution.at(f) != f) only_tails_contracted = false;
  if (only_tails_contracted && vertices_bijective && preserves_involution(m) &&
      !m.virtual_involution.empty())
    return MorphismClass::virtual_contraction;

  // Contraction: bijective on tails (no tail contracted, no grafting), and
  // fibers connected by contracted edges.
  bool tails_bijective = [&] {
    std::set<int> src_tails, used;
    for (int t : m.source.tails()) src_tails.insert(t);
    for (int tf : m.target.flags) {
      if (m.target.involution.at(tf) != tf) continue;
      int sf = m.flag_map.at(tf);
      if (!src_tails.count(sf)) return false;
      used.insert(sf);
    }
    return used == src_tails;
  }();
  if (tails_bijective && m.virtual_involution.empty() && preserves_involution(m) &&
      fibers_connected_by_contracted_edges(m)) {
    // Full contraction: every edge contracted and fibers = components.
    bool all_edges_contracted = m.target.edges().empty();
    if (all_edges_contracted) {
      std::map<int, int> comp = component_of(m.source);
      std::map<int, std::set<int>> fiber_comps;
      for (int v : m.source.vertices) fiber_comps[m.vertex_map.at(v)].insert(comp.at(v));
      bool full = m.target.vertices.size() == fiber_comps.size();
      for (const auto& [tv, cs] : fiber_comps)
        if (cs.size() != 1) full = false;
      std::set<int> distinct;
      for (const auto& [tv, cs] : fiber_comps) distinct.insert(*cs.begin());
      if (full && distinct.size() == fiber_comps.size()) return MorphismClass::full_contraction;
    }
    return MorphismClass::contraction;
  }

  if (flags_bijective && vertices_bijective && m.virtual_involution.empty()) {
    // Grafting: bijections on flags and vertices.
    if (m.source.edges().empty()) return MorphismClass::total_grafting;
    return MorphismClass::grafting;
  }

  if (flags_bijective && involution_ok) {
    if (m.target.vertices.size() == 1 && m.source.vertices.size() > 1)
      return MorphismClass::full_merger;
    return MorphismClass::merger;
  }
  return MorphismClass::general;
}

GraphMorphism total_grafting(const Graph& tau) {
  Graph src = tau;
  for (int f : src.flags) src.involution[f] = f;
  GraphMorphism m;
  m.source = src;
  m.target = tau;
  for (int f : tau.flags) m.flag_map[f] = f;
  for (int v : tau.vertices) m.vertex_map[v] = v;
  return m;
}

GraphMorphism full_contraction_to_corolla(const Graph& tau) {
  if (tau.vertices.empty()) return GraphMorphism::identity(Graph::empty());
  int corolla_vertex = 0;
  Graph target = Graph::corolla(corolla_vertex, tau.tails());
  GraphMorphism m;
  m.source = tau;
  m.target = target;
  for (int t : target.flags) m.flag_map[t] = t;
  for (int v : tau.vertices) m.vertex_map[v] = corolla_vertex;
  return m;
}

Realization realize_virtual_edges(const GraphMorphism& m) {
  Graph rho = m.source;
  for (const auto& [a, b] : m.virtual_involution) rho.involution[a] = b;
  GraphMorphism realization;
  realization.source = m.source;
  realization.target = rho;
  for (int f : m.source.flags) realization.flag_map[f] = f;
  for (int v : m.source.vertices) realization.vertex_map[v] = v;
  GraphMorphism residual;
  residual.source = rho;
  residual.target = m.target;
  residual.flag_map = m.flag_map;
  residual.vertex_map = m.vertex_map;
  return Realization{realization, residual};
}

GraphMorphism MorphismDecomposition::composite() const {
  return compose(merger, compose(contraction, compose(grafting, virtual_contraction)));
}

MorphismDecomposition decompose(const GraphMorphism& m) {
  MorphismDecomposition d;

  // Stage 1: contract same-vertex virtual pairs (virtual loops).
  std::set<int> loop_tails;
  for (const auto& [a, b] : m.virtual_involution)
    if (m.source.boundary.at(a) == m.source.boundary.at(b)) loop_tails.insert(a);
  Graph x1 = m.source;
  x1.flags.erase(std::remove_if(x1.flags.begin(), x1.flags.end(),
                                [&](int f) { return loop_tails.count(f) > 0; }),
                 x1.flags.end());
  for (int f : loop_tails) {
    x1.boundary.erase(f);
    x1.involution.erase(f);
  }
  d.virtual_contraction.source = m.source;
  d.virtual_contraction.target = x1;
  for (int f : x1.flags) d.virtual_contraction.flag_map[f] = f;
  for (int v : m.source.vertices) d.virtual_contraction.vertex_map[v] = v;
  for (int a : loop_tails) {
    int b = m.virtual_involution.at(a);
    d.virtual_contraction.virtual_involution[a] = b;
  }

  // Stage 2: grafting that realizes the remaining virtual pairs as actual
  // edges and grafts the pairs grafted by m.
  Graph x2 = x1;
  for (const auto& [a, b] : m.virtual_involution)
    if (!loop_tails.count(a)) x2.involution[a] = b;
  std::map<int, int> inv = m.flag_map_inverse();
  for (int tf : m.target.flags) {
    int sf = m.flag_map.at(tf);
    int tpartner = m.target.involution.at(tf);
    if (tpartner == tf) continue;
    int spartner_needed = m.flag_map.at(tpartner);
    if (m.source.involution.at(sf) == sf) x2.involution[sf] = spartner_needed;
  }
  d.grafting.source = x1;
  d.grafting.target = x2;
  for (int f : x2.flags) d.grafting.flag_map[f] = f;
  for (int v : x2.vertices) d.grafting.vertex_map[v] = v;

  // Stage 3: contraction along all contracted edges of x2; fibers are the
  // connected components of the contracted subgraph.
  std::set<int> image;
  for (const auto& [tf, sf] : m.flag_map) image.insert(sf);
  std::map<int, int> parent;
  for (int v : x2.vertices) parent[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& [a, b] : x2.edges()) {
    if (image.count(a)) continue;
    int ra = find(x2.boundary.at(a)), rb = find(x2.boundary.at(b));
    if (ra != rb) parent[ra] = rb;
  }
  Graph x3;
  std::map<int, int> root_to_vertex;
  for (int v : x2.vertices) {
    int r = find(v);
    if (!root_to_vertex.count(r)) {
      int nv = static_cast<int>(root_to_vertex.size());
      root_to_vertex[r] = nv;
      x3.vertices.push_back(nv);
    }
  }
  std::sort(x3.vertices.begin(), x3.vertices.end());
  for (int f : x2.flags) {
    if (!image.count(f)) continue;
    x3.flags.push_back(f);
    x3.boundary[f] = root_to_vertex.at(find(x2.boundary.at(f)));
    x3.involution[f] = x2.involution.at(f);
  }
  std::sort(x3.flags.begin(), x3.flags.end());
  d.contraction.source = x2;
  d.contraction.target = x3;
  for (int f : x3.flags) d.contraction.flag_map[f] = f;
  for (int v : x2.vertices) d.contraction.vertex_map[v] = root_to_vertex.at(find(v));

  // Stage 4: merger finishing the vertex map, then relabel onto the target.
  d.merger.source = x3;
  d.merger.target = m.target;
  for (int tf : m.target.flags) d.merger.flag_map[tf] = m.flag_map.at(tf);
  std::map<int, int> fiber_target;
  for (int v : x2.vertices) fiber_target[root_to_vertex.at(find(v))] = m.vertex_map.at(v);
  d.merger.vertex_map = fiber_target;
  return d;
}

AtomizationDiagram atomize(const GraphMorphism& h) {
  AtomizationDiagram diagram;
  diagram.h = h;
  diagram.total = total_grafting(h.target);

  for (int v : h.target.vertices) {
    Graph tau_v;
    for (int w : h.source.vertices)
      if (h.vertex_map.at(w) == v) tau_v.vertices.push_back(w);
    std::set<int> block(tau_v.vertices.begin(), tau_v.vertices.end());
    for (int f : h.source.flags) {
      if (!block.count(h.source.boundary.at(f))) continue;
      tau_v.flags.push_back(f);
      tau_v.boundary[f] = h.source.boundary.at(f);
    }
    std::set<int> block_flags(tau_v.flags.begin(), tau_v.flags.end());
    for (int f : tau_v.flags) {
      int p = h.source.involution.at(f);
      tau_v.involution[f] = block_flags.count(p) ? p : f;
    }
    Graph sigma_v = Graph::corolla(v, h.target.flags_at(v));
    GraphMorphism part;
    part.source = tau_v;
    part.target = sigma_v;
    for (int tf : sigma_v.flags) part.flag_map[tf] = h.flag_map.at(tf);
    for (int w : tau_v.vertices) part.vertex_map[w] = v;
    for (const auto& [a, b] : h.virtual_involution)
      if (block_flags.count(a)) part.virtual_involution[a] = b;
    diagram.parts[v] = part;
    diagram.tau_blocks[v] = tau_v;
  }

  // ∐ tau_v shares ids with tau; cross-block edges are cut into tails.
  Graph coprod = h.source;
  for (int f : coprod.flags) {
    int p = coprod.involution.at(f);
    if (p == f) continue;
    if (h.vertex_map.at(coprod.boundary.at(f)) != h.vertex_map.at(coprod.boundary.at(p)))
      coprod.involution[f] = f;
  }
  // Within-block restriction: nothing else changes.
  for (const auto& [v, tau_v] : diagram.tau_blocks)
    for (int f : tau_v.flags) coprod.involution[f] = tau_v.involution.at(f);

  diagram.k.source = coprod;
  diagram.k.target = h.source;
  for (int f : h.source.flags) diagram.k.flag_map[f] = f;
  for (int v : h.source.vertices) diagram.k.vertex_map[v] = v;

  diagram.parts_union.source = coprod;
  diagram.parts_union.target = diagram.total.source;
  for (int tf : diagram.total.source.flags) diagram.parts_union.flag_map[tf] = h.flag_map.at(tf);
  for (int w : h.source.vertices) diagram.parts_union.vertex_map[w] = h.vertex_map.at(w);
  for (const auto& [a, b] : h.virtual_involution) diagram.parts_union.virtual_involution[a] = b;
  return diagram;
}

GraphMorphism assemble(const Graph& sigma, const std::map<int, GraphMorphism>& parts) {
  for (int v : sigma.vertices)
    if (!parts.count(v))
      throw invalid_input("assemble: missing part for vertex " + std::to_string(v));
  Graph tau;
  GraphMorphism h;
  std::set<int> used_flags, used_vertices;
  for (const auto& [v, part] : parts) {
    Graph expected = Graph::corolla(v, sigma.flags_at(v));
    if (!(part.target == expected))
      throw invalid_input("assemble: part target is not the corolla of vertex " +
                          std::to_string(v));
    for (int f : part.source.flags) {
      if (!used_flags.insert(f).second)
        throw invalid_input("assemble: part sources share flag id " + std::to_string(f));
      tau.flags.push_back(f);
      tau.boundary[f] = part.source.boundary.at(f);
      tau.involution[f] = part.source.involution.at(f);
    }
    for (int w : part.source.vertices) {
      if (!used_vertices.insert(w).second)
        throw invalid_input("assemble: part sources share vertex id " + std::to_string(w));
      tau.vertices.push_back(w);
      h.vertex_map[w] = v;
    }
    for (const auto& [tf, sf] : part.flag_map) h.flag_map[tf] = sf;
    for (const auto& [a, b] : part.virtual_involution) h.virtual_involution[a] = b;
  }
  std::sort(tau.flags.begin(), tau.flags.end());
  std::sort(tau.vertices.begin(), tau.vertices.end());
  // Glue: each sigma-edge joins the pulled-back flags into an edge of tau.
  for (const auto& [e1, e2] : sigma.edges()) {
    int f1 = h.flag_map.at(e1), f2 = h.flag_map.at(e2);
    tau.involution[f1] = f2;
    tau.involution[f2] = f1;
  }
  h.source = tau;
  h.target = sigma;
  return h;
}

}  // namespace opal
