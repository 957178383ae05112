#include "opal/gamma.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "opal/errors.hpp"

namespace opal {

std::string to_string(PresetKind k) {
  switch (k) {
    case PresetKind::ordinary: return "ordinary";
    case PresetKind::non_symmetric: return "non_symmetric";
    case PresetKind::cyclic: return "cyclic";
    case PresetKind::modular: return "modular";
    case PresetKind::stable_modular: return "stable_modular";
    case PresetKind::prop: return "prop";
    case PresetKind::properad: return "properad";
    case PresetKind::dioperad: return "dioperad";
    case PresetKind::half_prop: return "half_prop";
    case PresetKind::linear: return "linear";
  }
  return "?";
}

bool GammaPreset::oriented() const {
  switch (kind) {
    case PresetKind::cyclic:
    case PresetKind::modular:
    case PresetKind::stable_modular:
      return false;
    default:
      return true;
  }
}

bool GammaPreset::genus_labeled() const {
  return kind == PresetKind::modular || kind == PresetKind::stable_modular;
}

bool GammaPreset::cyclic_labeled() const {
  return kind == PresetKind::non_symmetric;
}

bool GammaPreset::allows_virtual_loops() const {
  switch (kind) {
    case PresetKind::modular:
    case PresetKind::stable_modular:
    case PresetKind::prop:
    case PresetKind::properad:
      return true;
    default:
      return false;
  }
}

GammaPreset GammaPreset::by_name(const std::string& name) {
  for (PresetKind k :
       {PresetKind::ordinary, PresetKind::non_symmetric, PresetKind::cyclic,
        PresetKind::modular, PresetKind::stable_modular, PresetKind::prop,
        PresetKind::properad, PresetKind::dioperad, PresetKind::half_prop,
        PresetKind::linear})
    if (to_string(k) == name) return GammaPreset{k};
  throw invalid_input("unknown graph-category preset: " + name);
}

std::vector<std::string> GammaPreset::names() {
  return {"ordinary", "non_symmetric", "cyclic",   "modular",   "stable_modular",
          "prop",     "properad",      "dioperad", "half_prop", "linear"};
}

namespace {

int count_oriented(const LabeledGraph& g, int v, FlagOrientation o) {
  int n = 0;
  for (int f : g.graph.flags_at(v))
    if (g.labeling.orientation.at(f) == o) ++n;
  return n;
}

bool components_are_trees(const Graph& g) {
  GraphInvariants inv = graph_invariants(g);
  return inv.first_betti == 0;
}

}  // namespace

ValidityReport GammaPreset::check_object(const LabeledGraph& g) const {
  ValidityReport report = validate_labeled(g);
  if (!report.ok) return report;
  const Graph& gr = g.graph;

  if (oriented()) {
    if (!gr.flags.empty() && !g.labeling.has_orientation()) {
      report.fail("preset requires an orientation labeling");
      return report;
    }
  }
  if (genus_labeled() && !gr.vertices.empty() && !g.labeling.has_genus()) {
    report.fail("preset requires a genus labeling");
    return report;
  }
  if (cyclic_labeled() && !gr.vertices.empty() && !g.labeling.has_cyclic()) {
    report.fail("preset requires a cyclic labeling");
    return report;
  }

  switch (kind) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric:
      if (!components_are_trees(gr)) report.fail("components must be trees");
      for (int v : gr.vertices) {
        if (count_oriented(g, v, FlagOrientation::out) != 1)
          report.fail("vertex " + std::to_string(v) + " must have exactly one output");
        if (count_oriented(g, v, FlagOrientation::in) < 2)
          report.fail("vertex " + std::to_string(v) + " must have at least two inputs");
      }
      break;
    case PresetKind::cyclic:
      if (!components_are_trees(gr)) report.fail("components must be trees");
      break;
    case PresetKind::modular:
      break;
    case PresetKind::stable_modular:
      for (int v : gr.vertices)
        if (!is_stable_corolla(g.labeling.genus.at(v),
                               static_cast<int>(gr.flags_at(v).size())))
          report.fail("vertex " + std::to_string(v) + " is unstable");
      break;
    case PresetKind::prop:
    case PresetKind::properad: {
      if (!gr.edges().empty() || !gr.flags.empty()) {
        DirectednessResult d = is_directed(g);
        if (!d.directed) report.fail("graph has an oriented wheel");
      }
      break;
    }
    case PresetKind::dioperad: {
      if (!components_are_trees(gr)) report.fail("components must be simply connected");
      break;
    }
    case PresetKind::half_prop: {
      if (!components_are_trees(gr)) report.fail("components must be trees");
      for (const auto& [a, b] : gr.edges()) {
        int out_half = g.labeling.orientation.at(a) == FlagOrientation::out ? a : b;
        int in_half = gr.involution.at(out_half);
        bool unique_output =
            count_oriented(g, gr.boundary.at(out_half), FlagOrientation::out) == 1;
        bool unique_input =
            count_oriented(g, gr.boundary.at(in_half), FlagOrientation::in) == 1;
        if (!unique_output && !unique_input)
          report.fail("edge (" + std::to_string(a) + "," + std::to_string(b) +
                      ") is neither unique output of its source nor unique input of its "
                      "target");
      }
      break;
    }
    case PresetKind::linear:
      if (!components_are_trees(gr)) report.fail("components must be paths");
      for (int v : gr.vertices) {
        if (count_oriented(g, v, FlagOrientation::out) != 1 ||
            count_oriented(g, v, FlagOrientation::in) != 1)
          report.fail("vertex " + std::to_string(v) +
                      " must have exactly one input and one output");
      }
      break;
  }
  return report;
}

namespace {

// Iteratively contracts flag pairs inside a vertex fiber, merging cyclic
// successor maps by the rule (0,1,...,m) + (0,1',...,n') -> (1,...,m,1',...,n').
std::optional<std::map<int, int>> merge_cyclic(const Graph& g, const Labeling& src,
                                               const std::set<int>& fiber,
                                               std::vector<std::pair<int, int>> pairs) {
  std::map<int, int> root;
  for (int v : fiber) root[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (root[v] != v) {
      root[v] = root[root[v]];
      v = root[v];
    }
    return v;
  };
  // Successor map per super-vertex root.
  std::map<int, std::map<int, int>> cycle;
  for (int v : fiber) cycle[v] = src.cyclic.at(v);

  auto pred_of = [](const std::map<int, int>& succ, int x) {
    for (const auto& [a, b] : succ)
      if (b == x) return a;
    return x;
  };
  auto remove_flag = [&](std::map<int, int>& succ, int x) {
    int p = pred_of(succ, x);
    int s = succ.at(x);
    succ.erase(x);
    if (p != x && succ.count(p)) succ[p] = s;
  };

  for (const auto& [a, b] : pairs) {
    int u = find(g.boundary.at(a)), v = find(g.boundary.at(b));
    if (u == v) {
      remove_flag(cycle[u], a);
      remove_flag(cycle[u], b);
      continue;
    }
    std::map<int, int>& cu = cycle[u];
    std::map<int, int>& cv = cycle[v];
    int sa = cu.at(a), pa = pred_of(cu, a);
    int sb = cv.at(b), pb = pred_of(cv, b);
    std::map<int, int> merged;
    for (const auto& [x, y] : cu)
      if (x != a) merged[x] = y;
    for (const auto& [x, y] : cv)
      if (x != b) merged[x] = y;
    if (pa == a && pb == b) {
      // both singletons: empty cycle
    } else if (pa == a) {
      merged[pb] = sb;
    } else if (pb == b) {
      merged[pa] = sa;
    } else {
      merged[pa] = sb;
      merged[pb] = sa;
    }
    root[u] = v;
    cycle.erase(u);
    cycle[find(v)] = merged;
  }
  if (cycle.size() != 1) {
    // Merge order left disjoint super-vertices: fiber not edge-connected.
    return std::nullopt;
  }
  return cycle.begin()->second;
}

std::vector<std::pair<int, int>> contracted_pairs_in_fiber(const GraphMorphism& m,
                                                           const std::set<int>& fiber) {
  std::vector<std::pair<int, int>> pairs;
  std::set<int> image;
  for (const auto& [tf, sf] : m.flag_map) image.insert(sf);
  for (const auto& [a, b] : m.source.edges()) {
    if (image.count(a)) continue;
    if (fiber.count(m.source.boundary.at(a)) && fiber.count(m.source.boundary.at(b)))
      pairs.emplace_back(a, b);
  }
  for (const auto& [a, b] : m.virtual_involution)
    if (a < b && fiber.count(m.source.boundary.at(a)))
      pairs.emplace_back(a, b);
  return pairs;
}

int fiber_contracted_betti(const GraphMorphism& m, const std::set<int>& fiber) {
  auto pairs = contracted_pairs_in_fiber(m, fiber);
  std::map<int, int> root;
  for (int v : fiber) root[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (root[v] != v) {
      root[v] = root[root[v]];
      v = root[v];
    }
    return v;
  };
  for (const auto& [a, b] : pairs) {
    int ra = find(m.source.boundary.at(a)), rb = find(m.source.boundary.at(b));
    if (ra != rb) root[ra] = rb;
  }
  std::set<int> comps;
  for (int v : fiber) comps.insert(find(v));
  return static_cast<int>(pairs.size()) - static_cast<int>(fiber.size()) +
         static_cast<int>(comps.size());
}

}  // namespace

ValidityReport check_label_compatibility(const GammaPreset& preset, const GraphMorphism& m,
                                         const Labeling& src, const Labeling& tgt) {
  ValidityReport report;
  if (preset.oriented() && (!m.source.flags.empty() || !m.target.flags.empty())) {
    for (int tf : m.target.flags) {
      int sf = m.flag_map.at(tf);
      if (src.orientation.at(sf) != tgt.orientation.at(tf))
        report.fail("orientation not preserved at target flag " + std::to_string(tf));
    }
    for (const auto& [a, b] : m.virtual_involution)
      if (a < b && src.orientation.at(a) == src.orientation.at(b))
        report.fail("virtual pair (" + std::to_string(a) + "," + std::to_string(b) +
                    ") is not oriented like an edge");
  }
  if (src.has_color() || tgt.has_color()) {
    for (int tf : m.target.flags) {
      int sf = m.flag_map.at(tf);
      if (src.color.at(sf) != tgt.color.at(tf))
        report.fail("color not preserved at target flag " + std::to_string(tf));
    }
    for (const auto& [a, b] : m.virtual_involution)
      if (a < b && src.color.at(a) != src.color.at(b))
        report.fail("virtual pair (" + std::to_string(a) + "," + std::to_string(b) +
                    ") joins different colors");
  }
  if (preset.genus_labeled()) {
    for (int w : m.target.vertices) {
      std::set<int> fiber;
      for (int v : m.source.vertices)
        if (m.vertex_map.at(v) == w) fiber.insert(v);
      int sum = 0;
      for (int v : fiber) sum += src.genus.at(v);
      int expected = sum + fiber_contracted_betti(m, fiber);
      if (tgt.genus.at(w) != expected)
        report.fail("genus at target vertex " + std::to_string(w) + " is " +
                    std::to_string(tgt.genus.at(w)) + ", expected " +
                    std::to_string(expected));
    }
  }
  if (preset.cyclic_labeled()) {
    for (int w : m.target.vertices) {
      std::set<int> fiber;
      for (int v : m.source.vertices)
        if (m.vertex_map.at(v) == w) fiber.insert(v);
      auto merged = merge_cyclic(m.source, src, fiber, contracted_pairs_in_fiber(m, fiber));
      if (!merged) {
        report.fail("cyclic merge undefined on fiber of vertex " + std::to_string(w));
        continue;
      }
      for (int tf : m.target.flags_at(w)) {
        int tg = tgt.cyclic.at(w).at(tf);
        auto it = merged->find(m.flag_map.at(tf));
        if (it == merged->end() || it->second != m.flag_map.at(tg)) {
          report.fail("cyclic order not respected at target vertex " + std::to_string(w));
          break;
        }
      }
    }
  }
  return report;
}

Labeling induced_labeling(const GammaPreset& preset, const GraphMorphism& m,
                          const Labeling& src) {
  Labeling out;
  if (preset.oriented())
    for (int tf : m.target.flags) out.orientation[tf] = src.orientation.at(m.flag_map.at(tf));
  if (src.has_color())
    for (int tf : m.target.flags) out.color[tf] = src.color.at(m.flag_map.at(tf));
  if (preset.genus_labeled()) {
    for (int w : m.target.vertices) {
      std::set<int> fiber;
      for (int v : m.source.vertices)
        if (m.vertex_map.at(v) == w) fiber.insert(v);
      int sum = 0;
      for (int v : fiber) sum += src.genus.at(v);
      out.genus[w] = sum + fiber_contracted_betti(m, fiber);
    }
  }
  if (preset.cyclic_labeled()) {
    for (int w : m.target.vertices) {
      std::set<int> fiber;
      for (int v : m.source.vertices)
        if (m.vertex_map.at(v) == w) fiber.insert(v);
      auto merged = merge_cyclic(m.source, src, fiber, contracted_pairs_in_fiber(m, fiber));
      if (!merged) throw invalid_input("cyclic labeling cannot be induced on this fiber");
      std::map<int, int> inv = m.flag_map_inverse();
      std::map<int, int> succ;
      for (const auto& [a, b] : *merged) succ[inv.at(a)] = inv.at(b);
      out.cyclic[w] = succ;
    }
  }
  return out;
}

ValidityReport GammaPreset::check_morphism(const GraphMorphism& m, const Labeling& src,
                                           const Labeling& tgt) const {
  ValidityReport report = validate_morphism(m);
  if (!report.ok) return report;
  ValidityReport so = check_object(LabeledGraph{m.source, src});
  if (!so.ok) report.fail("source is not an object of the preset");
  ValidityReport to = check_object(LabeledGraph{m.target, tgt});
  if (!to.ok) report.fail("target is not an object of the preset");
  ValidityReport lc = check_label_compatibility(*this, m, src, tgt);
  for (const auto& v : lc.violations) report.fail(v);
  if (!report.ok) return report;

  // Full realization: virtual pairs and grafted pairs become actual edges;
  // the result must itself be an object of the preset, otherwise the
  // morphism is not a composite of allowed elementary morphisms.
  Graph realized = m.source;
  for (const auto& [a, b] : m.virtual_involution) realized.involution[a] = b;
  for (int tf : m.target.flags) {
    int tp = m.target.involution.at(tf);
    if (tp == tf) continue;
    int sf = m.flag_map.at(tf), sp = m.flag_map.at(tp);
    if (m.source.involution.at(sf) == sf) {
      realized.involution[sf] = sp;
      realized.involution[sp] = sf;
    }
  }
  ValidityReport ro = check_object(LabeledGraph{realized, src});
  if (!ro.ok) {
    for (const auto& v : ro.violations)
      report.fail("realized source invalid: " + v);
    return report;
  }

  if (!allows_mergers()) {
    for (int w : m.target.vertices) {
      std::set<int> fiber;
      for (int v : m.source.vertices)
        if (m.vertex_map.at(v) == w) fiber.insert(v);
      auto pairs = contracted_pairs_in_fiber(m, fiber);
      std::map<int, int> root;
      for (int v : fiber) root[v] = v;
      std::function<int(int)> find = [&](int v) {
        while (root[v] != v) {
          root[v] = root[root[v]];
          v = root[v];
        }
        return v;
      };
      for (const auto& [a, b] : pairs) {
        int ra = find(m.source.boundary.at(a)), rb = find(m.source.boundary.at(b));
        if (ra != rb) root[ra] = rb;
      }
      std::set<int> comps;
      for (int v : fiber) comps.insert(find(v));
      if (comps.size() > 1)
        report.fail("fiber of vertex " + std::to_string(w) +
                    " needs a merger, which this preset does not allow");
    }
  }
  return report;
}

namespace {

// All labelings of con(tau)'s target corolla that make con_tau a valid
// morphism; for uniqueness they must all equal the induced one.
std::vector<Labeling> candidate_corolla_labelings(const GammaPreset& preset,
                                                  const GraphMorphism& con,
                                                  const Labeling& induced) {
  std::vector<Labeling> out;
  out.push_back(induced);
  if (preset.genus_labeled()) {
    for (int delta : {-1, 1}) {
      Labeling alt = induced;
      for (auto& [v, g] : alt.genus) {
        if (g + delta >= 0) {
          alt.genus[v] = g + delta;
          out.push_back(alt);
        }
        break;
      }
    }
  }
  if (preset.cyclic_labeled() && con.target.flags.size() >= 2 &&
      con.target.flags.size() <= 5) {
    // All cyclic orders on the target corolla.
    std::vector<int> flags = con.target.flags;
    std::sort(flags.begin(), flags.end());
    std::vector<int> rest(flags.begin() + 1, flags.end());
    std::sort(rest.begin(), rest.end());
    do {
      Labeling alt = induced;
      std::map<int, int> succ;
      int prev = flags[0];
      for (int f : rest) {
        succ[prev] = f;
        prev = f;
      }
      succ[prev] = flags[0];
      alt.cyclic[con.target.vertices[0]] = succ;
      out.push_back(alt);
    } while (std::next_permutation(rest.begin(), rest.end()));
  }
  return out;
}

}  // namespace

GammaAxiomReport check_gamma_axioms(const GammaPreset& preset,
                                    const std::vector<LabeledGraph>& sample) {
  GammaAxiomReport report;
  auto fail = [&](const std::string& why) {
    report.ok = false;
    report.failures.push_back(why);
  };

  for (size_t idx = 0; idx < sample.size(); ++idx) {
    const LabeledGraph& lg = sample[idx];
    std::string tag = "sample " + std::to_string(idx);
    if (!preset.check_object(lg).ok) {
      fail(tag + ": not an object of the preset");
      continue;
    }
    if (lg.graph.vertices.empty()) continue;

    // (iii) con_tau lift exists and is unique.
    GraphMorphism con = full_contraction_to_corolla(lg.graph);
    bool con_in_preset = preset.allows_mergers() || graph_invariants(lg.graph).components == 1;
    if (con_in_preset) {
      Labeling tgt = induced_labeling(preset, con, lg.labeling);
      ValidityReport v = preset.check_morphism(con, lg.labeling, tgt);
      if (!v.ok)
        fail(tag + ": con_tau lift invalid: " + (v.violations.empty() ? "" : v.violations[0]));
      int valid_candidates = 0;
      for (const Labeling& cand : candidate_corolla_labelings(preset, con, tgt)) {
        if (preset.check_morphism(con, lg.labeling, cand).ok) {
          ++valid_candidates;
          if (!(cand == tgt)) fail(tag + ": con_tau lift target labeling not unique");
        }
      }
      if (valid_candidates == 0) fail(tag + ": no valid con_tau lift labeling");
    } else {
      report.notes.push_back(tag + ": con_tau needs a merger; skipped for this preset");
    }

    // (iv) total grafting lift.
    GraphMorphism tg = total_grafting(lg.graph);
    Labeling src_labels = lg.labeling;  // same flags and vertices, labels restrict
    ValidityReport tv = preset.check_morphism(tg, src_labels, lg.labeling);
    if (!tv.ok)
      fail(tag + ": total grafting lift invalid: " +
           (tv.violations.empty() ? "" : tv.violations[0]));

    // (v) + (vi): atomization of con_tau (when available) and of the total
    // grafting, then heredity re-assembly.
    std::vector<GraphMorphism> probes;
    probes.push_back(tg);
    if (con_in_preset) probes.push_back(con);
    for (const GraphMorphism& h : probes) {
      AtomizationDiagram diagram = atomize(h);
      GraphMorphism recomposed = compose(diagram.h, diagram.k);
      GraphMorphism other = compose(diagram.total, diagram.parts_union);
      if (!(recomposed.flag_map == other.flag_map &&
            recomposed.vertex_map == other.vertex_map &&
            recomposed.virtual_involution == other.virtual_involution))
        fail(tag + ": atomization square does not commute");
      for (const auto& [v, part] : diagram.parts) {
        Labeling part_tgt = induced_labeling(preset, part, lg.labeling);
        ValidityReport pv = check_label_compatibility(preset, part, lg.labeling, part_tgt);
        if (!pv.ok) fail(tag + ": atomization part at vertex " + std::to_string(v) +
                         " label-incompatible");
      }
      GraphMorphism assembled = assemble(h.target, diagram.parts);
      if (!(assembled.flag_map == h.flag_map && assembled.vertex_map == h.vertex_map &&
            assembled.virtual_involution == h.virtual_involution &&
            assembled.source == h.source))
        fail(tag + ": heredity assembly does not reproduce the morphism");
    }
  }
  return report;
}

}  // namespace opal
