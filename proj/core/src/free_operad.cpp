#include "opal/free_operad.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "opal/errors.hpp"

namespace opal {

std::string Caps::key() const {
  std::ostringstream os;
  os << arity << '/' << weight << '/' << genus << '/' << edges;
  return os.str();
}

namespace {

bool class_within_caps(const CorollaClassId& id, const Caps& caps) {
  switch (id.preset) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric:
    case PresetKind::cyclic:
      return id.sig.at(0) <= caps.arity;
    case PresetKind::modular:
    case PresetKind::stable_modular:
      return id.sig.at(1) <= caps.arity && id.sig.at(0) <= caps.genus;
    case PresetKind::prop:
    case PresetKind::properad:
    case PresetKind::dioperad:
    case PresetKind::half_prop:
      return id.sig.at(0) + id.sig.at(1) <= caps.arity;
    case PresetKind::linear:
      return true;
  }
  return false;
}

GraphAttributes decorated_attributes(const LabeledGraph& lg, const std::vector<int>& pins) {
  GraphAttributes attrs = labeling_attributes(lg);
  for (size_t i = 0; i < pins.size(); ++i)
    attrs.flag_attr[pins[i]] += "|P" + std::to_string(i);
  return attrs;
}

struct CanonicalDecorated {
  LabeledGraph tau;
  std::vector<int> pins;
  std::string key;
  GraphIso relabel;  // original -> canonical
};

CanonicalDecorated canonicalize_decorated(const LabeledGraph& lg,
                                          const std::vector<int>& pins) {
  GraphAttributes attrs = decorated_attributes(lg, pins);
  CanonicalForm cf = canonical_form(lg.graph, &attrs);
  GraphIso iso{cf.flag_relabel, cf.vertex_relabel};
  CanonicalDecorated out;
  out.tau.graph = cf.graph;
  out.tau.labeling = transport_labeling(lg.labeling, iso);
  out.pins.resize(pins.size());
  for (size_t i = 0; i < pins.size(); ++i) out.pins[i] = cf.flag_relabel.at(pins[i]);
  out.key = cf.key;
  out.relabel = iso;
  return out;
}

DecoratedClass make_decorated_class(const GammaPreset& preset, const CanonicalDecorated& cd) {
  DecoratedClass cls;
  cls.tau = cd.tau;
  cls.pins = cd.pins;
  cls.weight = static_cast<int>(cd.tau.graph.vertices.size());
  cls.key = cd.key;
  for (int v : cd.tau.graph.vertices) {
    cls.vertex_classes.push_back(classify_vertex(preset, cd.tau, v));
    cls.vertex_flag_orders.push_back(vertex_flag_order(preset, cd.tau, v));
  }
  GraphAttributes attrs = decorated_attributes(cd.tau, cd.pins);
  cls.auts = automorphisms(cd.tau.graph, &attrs);
  return cls;
}

// The morphism underlying a decorated class/decoration.
GraphMorphism decorated_morphism(const LabeledGraph& tau, const std::vector<int>& pins,
                                 const Graph& sigma_corolla) {
  GraphMorphism h;
  h.source = tau.graph;
  h.target = sigma_corolla;
  for (size_t i = 0; i < pins.size(); ++i) h.flag_map[static_cast<int>(i)] = pins[i];
  for (int v : tau.graph.vertices) h.vertex_map[v] = 0;
  return h;
}

int position_in(const std::vector<int>& order, int flag) {
  auto it = std::find(order.begin(), order.end(), flag);
  if (it == order.end()) throw internal_error("flag missing from vertex order");
  return static_cast<int>(it - order.begin());
}

}  // namespace

namespace {

int max_flags_per_vertex(const GammaPreset& preset, const Caps& caps) {
  switch (preset.kind) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric:
      return caps.arity + 1;
    case PresetKind::linear:
      return 2;
    default:
      return caps.arity;
  }
}

int min_flags_per_vertex(const GammaPreset& preset) {
  switch (preset.kind) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric:
      return 3;
    case PresetKind::linear:
      return 2;
    case PresetKind::modular:
    case PresetKind::stable_modular:
      return 0;
    default:
      return 1;
  }
}

// Exact number of outputs per vertex for presets that fix it.
std::optional<int> exact_outputs(const GammaPreset& preset) {
  switch (preset.kind) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric:
    case PresetKind::linear:
      return 1;
    default:
      return std::nullopt;
  }
}

}  // namespace

std::vector<DecoratedClass> enumerate_to_corolla(const GammaPreset& preset,
                                                 const CorollaClassId& sigma,
                                                 const Caps& caps) {
  CanonicalCorolla sc = canonical_corolla(sigma);
  const LabeledGraph& sigma_lg = sc.corolla;
  int k = sc.flag_count();
  bool need_orient = preset.oriented();
  bool need_genus = preset.genus_labeled();
  bool need_cyclic = preset.cyclic_labeled();
  bool allow_loops = preset.allows_virtual_loops();  // loops valid as objects
  bool need_connected = !preset.allows_mergers();
  int max_deg = max_flags_per_vertex(preset, caps);
  int min_deg = min_flags_per_vertex(preset);
  std::optional<int> out_exact = exact_outputs(preset);

  std::map<std::string, DecoratedClass> found;

  // Emits one fully labeled candidate.
  auto consider = [&](const Graph& g, const Labeling& lab) {
    LabeledGraph tau{g, lab};
    int w = static_cast<int>(g.vertices.size());
    for (int vv = 0; vv < w; ++vv) {
      CorollaClassId id;
      try {
        id = classify_vertex(preset, tau, vv);
      } catch (const invalid_input&) {
        return;
      }
      if (!class_within_caps(id, caps)) return;
    }
    std::vector<int> pins(k);
    for (int i = 0; i < k; ++i) pins[i] = i;
    GraphMorphism h = decorated_morphism(tau, pins, sigma_lg.graph);
    if (!preset.check_morphism(h, tau.labeling, sigma_lg.labeling).ok) return;
    CanonicalDecorated cd = canonicalize_decorated(tau, pins);
    if (!found.count(cd.key)) found.emplace(cd.key, make_decorated_class(preset, cd));
  };

  // Enumerate labelings of an instantiated graph.
  auto labelings = [&](const Graph& g) {
    int w = static_cast<int>(g.vertices.size());
    // Orientation: externals fixed by sigma, edges directed with out-budgets.
    std::vector<std::pair<int, int>> edge_list = g.edges();
    std::vector<int> out_count(w, 0), in_count(w, 0);
    Labeling base;
    if (need_orient) {
      for (int i = 0; i < k; ++i) {
        base.orientation[i] = sigma_lg.labeling.orientation.at(i);
        if (base.orientation[i] == FlagOrientation::out)
          ++out_count[g.boundary.at(i)];
        else
          ++in_count[g.boundary.at(i)];
      }
    }
    std::vector<Labeling> oriented;
    if (!need_orient) {
      oriented.push_back(base);
    } else {
      std::function<void(size_t)> orient_rec = [&](size_t ei) {
        if (out_exact) {
          for (int v = 0; v < w; ++v)
            if (out_count[v] > *out_exact) return;
        }
        if (ei == edge_list.size()) {
          if (out_exact)
            for (int v = 0; v < w; ++v)
              if (out_count[v] != *out_exact) return;
          oriented.push_back(base);
          return;
        }
        auto [a, b] = edge_list[ei];
        int va = g.boundary.at(a), vb = g.boundary.at(b);
        // a out / b in
        base.orientation[a] = FlagOrientation::out;
        base.orientation[b] = FlagOrientation::in;
        ++out_count[va];
        ++in_count[vb];
        orient_rec(ei + 1);
        --out_count[va];
        --in_count[vb];
        if (va != vb) {  // loops: single assignment up to swapping halves
          base.orientation[a] = FlagOrientation::in;
          base.orientation[b] = FlagOrientation::out;
          ++in_count[va];
          ++out_count[vb];
          orient_rec(ei + 1);
          --in_count[va];
          --out_count[vb];
        }
        base.orientation.erase(a);
        base.orientation.erase(b);
      };
      orient_rec(0);
    }
    for (Labeling lab : oriented) {
      // Genus distributions.
      std::vector<std::vector<int>> genus_options;
      if (need_genus) {
        GraphInvariants inv = graph_invariants(g);
        int budget = sigma_lg.labeling.genus.at(0) - inv.first_betti;
        if (budget < 0) continue;
        std::vector<int> split(w, 0);
        std::function<void(int, int)> dist = [&](int v, int left) {
          if (v == w - 1) {
            split[v] = left;
            genus_options.push_back(split);
            return;
          }
          for (int x = 0; x <= left; ++x) {
            split[v] = x;
            dist(v + 1, left - x);
          }
        };
        dist(0, budget);
      } else {
        genus_options.push_back({});
      }
      for (const auto& genus_split : genus_options) {
        if (need_genus)
          for (int v = 0; v < w; ++v) lab.genus[v] = genus_split[v];
        if (!need_cyclic) {
          consider(g, lab);
          continue;
        }
        // Cyclic orders per vertex.
        std::function<void(int)> cyc_rec = [&](int v) {
          if (v == w) {
            consider(g, lab);
            return;
          }
          std::vector<int> fl = g.flags_at(v);
          std::vector<int> rest(fl.begin() + 1, fl.end());
          std::sort(rest.begin(), rest.end());
          do {
            std::map<int, int> succ;
            int prev = fl[0];
            for (int f : rest) {
              succ[prev] = f;
              prev = f;
            }
            succ[prev] = fl[0];
            lab.cyclic[v] = succ;
            cyc_rec(v + 1);
          } while (std::next_permutation(rest.begin(), rest.end()));
          lab.cyclic.erase(v);
        };
        cyc_rec(0);
      }
    }
  };

  for (int w = 1; w <= caps.weight; ++w) {
    int edge_budget = std::min(caps.edges, (w * max_deg - 0) / 2);
    std::vector<int> assign(k, 0);
    std::function<void(int)> pins_loop = [&](int pos) {
      if (pos < k) {
        for (int v = 0; v < w; ++v) {
          assign[pos] = v;
          pins_loop(pos + 1);
        }
        return;
      }
      std::vector<int> degree(w, 0);
      for (int i = 0; i < k; ++i) ++degree[assign[i]];
      bool over = false;
      for (int v = 0; v < w; ++v)
        if (degree[v] > max_deg) over = true;
      if (over) return;
      std::vector<std::pair<int, int>> vertex_pairs;
      for (int u = 0; u < w; ++u)
        for (int v = u; v < w; ++v) {
          if (u == v && !allow_loops) continue;
          vertex_pairs.emplace_back(u, v);
        }
      std::vector<std::pair<int, int>> edges;
      std::function<void(size_t)> edges_loop = [&](size_t pi) {
        // Emit the current edge multiset if cheap structural checks pass.
        [&] {
          int e = static_cast<int>(edges.size());
          if (need_connected && e < w - 1) return;
          for (int v = 0; v < w; ++v)
            if (degree[v] < min_deg) return;
          // Connectivity.
          if (need_connected) {
            std::vector<int> root(w);
            for (int v = 0; v < w; ++v) root[v] = v;
            std::function<int(int)> find = [&](int v) {
              while (root[v] != v) v = root[v] = root[root[v]];
              return v;
            };
            for (const auto& [u, v] : edges) {
              int ru = find(u), rv = find(v);
              if (ru != rv) root[ru] = rv;
            }
            int comps = 0;
            for (int v = 0; v < w; ++v)
              if (find(v) == v) ++comps;
            if (comps != 1) return;
          }
          Graph g;
          for (int v = 0; v < w; ++v) g.vertices.push_back(v);
          for (int i = 0; i < k; ++i) {
            g.flags.push_back(i);
            g.boundary[i] = assign[i];
            g.involution[i] = i;
          }
          for (int j = 0; j < e; ++j) {
            int a = k + 2 * j, b = k + 2 * j + 1;
            g.flags.push_back(a);
            g.flags.push_back(b);
            g.boundary[a] = edges[j].first;
            g.boundary[b] = edges[j].second;
            g.involution[a] = b;
            g.involution[b] = a;
          }
          labelings(g);
        }();
        // Extend the multiset.
        if (static_cast<int>(edges.size()) >= edge_budget) return;
        for (size_t p = pi; p < vertex_pairs.size(); ++p) {
          auto [u, v] = vertex_pairs[p];
          int du = degree[u] + 1 + (u == v ? 1 : 0);
          int dv = degree[v] + 1 + (u == v ? 1 : 0);
          if (du > max_deg || dv > max_deg) continue;
          degree[u] += 1 + (u == v ? 1 : 0);
          if (u != v) degree[v] += 1;
          edges.push_back(vertex_pairs[p]);
          edges_loop(p);
          edges.pop_back();
          degree[u] -= 1 + (u == v ? 1 : 0);
          if (u != v) degree[v] -= 1;
        }
      };
      edges_loop(0);
    };
    pins_loop(0);
  }

  std::vector<DecoratedClass> out;
  for (auto& [key, cls] : found) out.push_back(std::move(cls));
  std::sort(out.begin(), out.end(), [](const DecoratedClass& a, const DecoratedClass& b) {
    return std::tie(a.weight, a.key) < std::tie(b.weight, b.key);
  });
  return out;
}

FreeOperad::FreeOperad(GammaPreset preset, Collection generators, Caps caps)
    : preset_(preset), generators_(std::move(generators)), caps_(caps) {
  classes_ = classes_within(preset_, caps_.arity, caps_.genus);
  for (const CorollaClassId& sigma : classes_) build_component(sigma);
}

const FreeComponent& FreeOperad::component(const CorollaClassId& sigma) const {
  auto it = components_.find(sigma.key());
  if (it == components_.end())
    throw cap_exceeded("free operad component outside caps: " + sigma.key());
  return it->second;
}

const ActionTable& FreeOperad::action_table(const CorollaClassId& cls) const {
  auto it = action_tables_.find(cls.key());
  if (it != action_tables_.end()) return *it->second;
  CanonicalCorolla cc = canonical_corolla(cls);
  const CollectionComponent* comp = generators_.find(cls);
  int dim = comp ? comp->space.dim() : 0;
  std::vector<Matrix> mats = comp ? comp->action : std::vector<Matrix>();
  if (!comp) mats.assign(cc.aut_generators.size(), Matrix::identity(0));
  auto table = std::make_unique<ActionTable>(cc.aut_generators, mats, dim, cc.flag_count());
  const ActionTable& ref = *table;
  action_tables_[cls.key()] = std::move(table);
  return ref;
}

namespace {

std::vector<int> generator_weights(const Collection& x, const CorollaClassId& id) {
  const CollectionComponent* c = x.find(id);
  if (!c) return {};
  if (!c->weights.empty()) return c->weights;
  return std::vector<int>(c->space.dim(), 1);
}

// Tensor basis indexing: tuple (i_0, ..., i_{w-1}) row-major over vertex order.
int tuple_to_index(const std::vector<int>& tuple, const std::vector<int>& dims) {
  int idx = 0;
  for (size_t v = 0; v < dims.size(); ++v) idx = idx * dims[v] + tuple[v];
  return idx;
}

std::vector<int> index_to_tuple(int idx, const std::vector<int>& dims) {
  std::vector<int> tuple(dims.size());
  for (int v = static_cast<int>(dims.size()) - 1; v >= 0; --v) {
    tuple[v] = idx % dims[v];
    idx /= dims[v];
  }
  return tuple;
}

}  // namespace

void FreeOperad::build_component(const CorollaClassId& sigma) {
  FreeComponent fc;
  fc.sigma = sigma;
  std::vector<DecoratedClass> classes = enumerate_to_corolla(preset_, sigma, caps_);
  int offset = 0;
  for (DecoratedClass& cls : classes) {
    FreeSummand s;
    s.weight = cls.weight;
    std::vector<int> dims;
    bool zero = false;
    for (const CorollaClassId& vc : cls.vertex_classes) {
      int d = generators_.dim(vc);
      dims.push_back(d);
      if (d == 0) zero = true;
    }
    s.cls = std::move(cls);
    s.factor_dims = dims;
    int tensor_dim = 1;
    for (int d : dims) tensor_dim *= d;
    if (zero) tensor_dim = 0;
    s.tensor_dim = tensor_dim;
    s.offset = offset;
    if (tensor_dim > 0) {
      // Weight filter: total weight of a decoration must fit the cap.
      std::vector<std::vector<int>> factor_weights;
      for (const CorollaClassId& vc : s.cls.vertex_classes)
        factor_weights.push_back(generator_weights(generators_, vc));
      std::vector<int> raw_weights(tensor_dim);
      std::vector<bool> keep(tensor_dim, true);
      for (int idx = 0; idx < tensor_dim; ++idx) {
        std::vector<int> tuple = index_to_tuple(idx, dims);
        int wsum = 0;
        for (size_t v = 0; v < tuple.size(); ++v) wsum += factor_weights[v][tuple[v]];
        raw_weights[idx] = wsum;
        if (wsum > caps_.weight) keep[idx] = false;
      }
      std::vector<int> kept_indices;
      for (int idx = 0; idx < tensor_dim; ++idx)
        if (keep[idx]) kept_indices.push_back(idx);
      if (s.cls.auts.size() == 1 && static_cast<int>(kept_indices.size()) == tensor_dim) {
        // Identity coinvariants, kept implicit.
        s.trivial_coinvariants = true;
        for (int idx = 0; idx < tensor_dim; ++idx) {
          fc.weights.push_back(raw_weights[idx]);
          fc.total.labels.push_back("s" + std::to_string(fc.summand_index.size()) + "#" +
                                    std::to_string(idx));
        }
        fc.summand_index[s.cls.key] = static_cast<int>(fc.summands.size());
        offset += tensor_dim;
        fc.summands.push_back(std::move(s));
        continue;
      }
      // Automorphism matrices on the kept sub-basis.
      std::vector<Matrix> elements;
      for (const GraphIso& psi : s.cls.auts) {
        // Per-vertex canonical-corolla permutation and its matrix.
        std::vector<Matrix> factor_mats(s.cls.weight, Matrix(0, 0));
        std::vector<int> target_slot(s.cls.weight);
        for (int v = 0; v < s.cls.weight; ++v) {
          int wv = psi.vertex_map.at(v);
          target_slot[v] = wv;
          const std::vector<int>& order_v = s.cls.vertex_flag_orders[v];
          const std::vector<int>& order_w = s.cls.vertex_flag_orders[wv];
          std::vector<int> perm(order_v.size());
          for (size_t i = 0; i < order_v.size(); ++i)
            perm[i] = position_in(order_w, psi.flag_map.at(order_v[i]));
          factor_mats[v] = action_table(s.cls.vertex_classes[v]).matrix_of(perm);
        }
        Matrix m(static_cast<int>(kept_indices.size()), static_cast<int>(kept_indices.size()));
        std::map<int, int> kept_pos;
        for (size_t i = 0; i < kept_indices.size(); ++i)
          kept_pos[kept_indices[i]] = static_cast<int>(i);
        for (size_t col = 0; col < kept_indices.size(); ++col) {
          std::vector<int> tuple = index_to_tuple(kept_indices[col], dims);
          // Image = tensor over slots w of factor_mats[psi^{-1}(w)] e_{tuple[psi^{-1}(w)]}.
          std::vector<Vec> slot_vecs(s.cls.weight);
          for (int v = 0; v < s.cls.weight; ++v) {
            Vec e(dims[v]);
            e[tuple[v]] = 1;
            slot_vecs[target_slot[v]] = factor_mats[v].apply(e);
          }
          // Expand the outer product over nonzero entries.
          std::vector<int> out_tuple(s.cls.weight, 0);
          std::function<void(int, Rat)> fill = [&](int w, Rat coeff) {
            if (w == s.cls.weight) {
              int idx = tuple_to_index(out_tuple, dims);
              auto it = kept_pos.find(idx);
              if (it == kept_pos.end())
                throw internal_error("automorphism broke the weight filter");
              m.at(it->second, static_cast<int>(col)) += coeff;
              return;
            }
            for (int i = 0; i < dims[w]; ++i) {
              if (slot_vecs[w][i] == 0) continue;
              out_tuple[w] = i;
              fill(w + 1, coeff * slot_vecs[w][i]);
            }
          };
          fill(0, 1);
        }
        elements.push_back(std::move(m));
      }
      VectorSpace raw_space = VectorSpace::anonymous(static_cast<int>(kept_indices.size()), "t");
      // Average over the full (already enumerated) automorphism group.
      Matrix p(raw_space.dim(), raw_space.dim());
      for (const Matrix& g : elements) p = p + g;
      p = p.scaled(Rat(1) / Rat(static_cast<long>(elements.size())));
      Matrix cols = p.transpose();
      std::vector<int> pivots = rref(cols);
      int r = cols.rows();
      Matrix incl_small(raw_space.dim(), r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < raw_space.dim(); ++j) incl_small.at(j, i) = cols.at(i, j);
      Matrix proj_small(r, raw_space.dim());
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < raw_space.dim(); ++j) proj_small.at(i, j) = p.at(pivots[i], j);
      // Inflate to the full tensor index space for stable coordinates.
      Matrix incl(tensor_dim, r), proj(r, tensor_dim);
      for (size_t i = 0; i < kept_indices.size(); ++i) {
        for (int j = 0; j < r; ++j) {
          incl.at(kept_indices[i], j) = incl_small.at(static_cast<int>(i), j);
          proj.at(j, kept_indices[i]) = proj_small.at(j, static_cast<int>(i));
        }
      }
      VectorSpace big = VectorSpace::anonymous(tensor_dim, "r");
      VectorSpace co = VectorSpace::anonymous(r, "c");
      s.coin = Coinvariants{co, LinearMap{big, co, proj}, LinearMap{co, big, incl}, Matrix(0, 0)};
      // Weight of a coinvariant basis vector = weight of its pivot coordinate.
      for (int i = 0; i < r; ++i) {
        int pivot_raw = kept_indices[pivots[i]];
        fc.weights.push_back(raw_weights[pivot_raw]);
        fc.total.labels.push_back("w" + std::to_string(s.weight) + "#" +
                                  std::to_string(fc.summand_index.size()) + "#" +
                                  std::to_string(i));
      }
    } else {
      s.coin = Coinvariants{VectorSpace{}, LinearMap{VectorSpace{}, VectorSpace{}, Matrix(0, 0)},
                            LinearMap{VectorSpace{}, VectorSpace{}, Matrix(0, 0)}, Matrix(0, 0)};
    }
    fc.summand_index[s.cls.key] = static_cast<int>(fc.summands.size());
    offset += s.coin.space.dim();
    fc.summands.push_back(std::move(s));
  }
  // Unique labels.
  for (size_t i = 0; i < fc.total.labels.size(); ++i)
    fc.total.labels[i] = "b" + std::to_string(i);
  components_[sigma.key()] = std::move(fc);
}

const std::vector<Matrix>& FreeOperad::sigma_action(const CorollaClassId& sigma) const {
  const FreeComponent& fc = component(sigma);
  if (fc.action_built) return fc.action;
  CanonicalCorolla sc = canonical_corolla(sigma);
  for (const std::vector<int>& gen : sc.aut_generators) {
    Matrix m(fc.dim(), fc.dim());
    for (int j = 0; j < fc.dim(); ++j) {
      Vec e(fc.dim());
      e[j] = 1;
      for (const Expansion& ex : expand(sigma, e)) {
        ConcreteDecoration d = ex.decoration;
        std::vector<int> permuted(d.pins.size());
        for (size_t i = 0; i < d.pins.size(); ++i) permuted[gen[i]] = d.pins[i];
        d.pins = std::move(permuted);
        Vec img = inject(sigma, d);
        for (int rr = 0; rr < fc.dim(); ++rr) m.at(rr, j) += ex.coefficient * img[rr];
      }
    }
    fc.action.push_back(std::move(m));
  }
  fc.action_built = true;
  return fc.action;
}

Vec FreeOperad::inject(const CorollaClassId& sigma, const ConcreteDecoration& d) const {
  const FreeComponent& fc = component(sigma);
  if (static_cast<int>(d.tau.graph.vertices.size()) > caps_.weight)
    throw cap_exceeded("decorated graph weight exceeds cap");
  CanonicalDecorated cd = canonicalize_decorated(d.tau, d.pins);
  auto it = fc.summand_index.find(cd.key);
  if (it == fc.summand_index.end())
    throw invalid_input("decorated morphism is not a class of this component: " + cd.key);
  const FreeSummand& s = fc.summands[it->second];
  Vec out(fc.dim());
  if (s.tensor_dim == 0) return out;
  // Transport the decoration along the canonical relabeling.
  std::vector<Vec> slot_vecs(s.cls.weight);
  for (int v_old : d.tau.graph.vertices) {
    int w = cd.relabel.vertex_map.at(v_old);
    CorollaClassId cls_v = classify_vertex(preset_, d.tau, v_old);
    if (!(cls_v == s.cls.vertex_classes[w]))
      throw internal_error("vertex class mismatch after canonicalization");
    std::vector<int> order_old = vertex_flag_order(preset_, d.tau, v_old);
    const std::vector<int>& order_new = s.cls.vertex_flag_orders[w];
    std::vector<int> perm(order_old.size());
    for (size_t i = 0; i < order_old.size(); ++i)
      perm[i] = position_in(order_new, cd.relabel.flag_map.at(order_old[i]));
    const Matrix& rho = action_table(cls_v).matrix_of(perm);
    Vec e(s.factor_dims[w]);
    int idx = d.vertex_basis.at(v_old);
    if (idx < 0 || idx >= s.factor_dims[w])
      throw invalid_input("vertex decoration index out of range");
    e[idx] = 1;
    slot_vecs[w] = rho.apply(e);
  }
  // Outer product into raw coordinates, then project to coinvariants.
  std::vector<int> out_tuple(s.cls.weight, 0);
  Vec raw(s.tensor_dim);
  std::function<void(int, Rat)> fill = [&](int w, Rat coeff) {
    if (w == s.cls.weight) {
      raw[tuple_to_index(out_tuple, s.factor_dims)] += coeff;
      return;
    }
    for (int i = 0; i < s.factor_dims[w]; ++i) {
      if (slot_vecs[w][i] == 0) continue;
      out_tuple[w] = i;
      fill(w + 1, coeff * slot_vecs[w][i]);
    }
  };
  fill(0, 1);
  Vec co = s.coin.projection.mat.apply(raw);
  for (int i = 0; i < static_cast<int>(co.size()); ++i) out[s.offset + i] = co[i];
  return out;
}

Matrix FreeOperad::eta(const CorollaClassId& sigma) const {
  const CollectionComponent* comp = generators_.find(sigma);
  int d = comp ? comp->space.dim() : 0;
  const FreeComponent& fc = component(sigma);
  Matrix m(fc.dim(), d);
  CanonicalCorolla cc = canonical_corolla(sigma);
  for (int j = 0; j < d; ++j) {
    ConcreteDecoration dec;
    dec.tau = cc.corolla;
    dec.pins = cc.corolla.graph.flags;
    dec.vertex_basis[0] = j;
    Vec img = inject(sigma, dec);
    for (int r = 0; r < fc.dim(); ++r) m.at(r, j) = img[r];
  }
  return m;
}

std::vector<FreeOperad::Expansion> FreeOperad::expand(const CorollaClassId& sigma,
                                                      const Vec& v) const {
  const FreeComponent& fc = component(sigma);
  if (static_cast<int>(v.size()) != fc.dim())
    throw invalid_input("expand: vector dimension mismatch");
  std::vector<Expansion> out;
  for (const FreeSummand& s : fc.summands) {
    for (int j = 0; j < s.coin.space.dim(); ++j) {
      const Rat& c = v[s.offset + j];
      if (c == 0) continue;
      for (int rawi = 0; rawi < s.tensor_dim; ++rawi) {
        const Rat& e = s.coin.inclusion.mat.at(rawi, j);
        if (e == 0) continue;
        std::vector<int> tuple = index_to_tuple(rawi, s.factor_dims);
        Expansion ex;
        ex.decoration.tau = s.cls.tau;
        ex.decoration.pins = s.cls.pins;
        for (int w = 0; w < s.cls.weight; ++w) ex.decoration.vertex_basis[w] = tuple[w];
        ex.coefficient = c * e;
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

namespace {

struct GluedPiece {
  LabeledGraph tau;                 // fresh ids
  std::vector<int> pins;            // fresh ids, by inner sigma position
  std::map<int, int> vertex_basis;  // fresh vertex id -> basis index
};

GluedPiece offset_piece(const ConcreteDecoration& d, int flag_offset, int vertex_offset) {
  GluedPiece out;
  GraphIso shift;
  for (int f : d.tau.graph.flags) shift.flag_map[f] = f + flag_offset;
  for (int v : d.tau.graph.vertices) shift.vertex_map[v] = v + vertex_offset;
  Graph g;
  for (int f : d.tau.graph.flags) g.flags.push_back(f + flag_offset);
  for (int v : d.tau.graph.vertices) g.vertices.push_back(v + vertex_offset);
  for (int f : d.tau.graph.flags) {
    g.boundary[f + flag_offset] = d.tau.graph.boundary.at(f) + vertex_offset;
    g.involution[f + flag_offset] = d.tau.graph.involution.at(f) + flag_offset;
  }
  out.tau.graph = g;
  out.tau.labeling = transport_labeling(d.tau.labeling, shift);
  for (int p : d.pins) out.pins.push_back(p + flag_offset);
  for (const auto& [v, b] : d.vertex_basis) out.vertex_basis[v + vertex_offset] = b;
  return out;
}

}  // namespace

Vec FreeOperad::compose_elements(const CorollaClassId& sigma, const LabeledGraph& outer,
                                 const std::vector<int>& outer_pins,
                                 const std::map<int, Vec>& per_vertex_elements) const {
  const FreeComponent& fc = component(sigma);
  Vec result(fc.dim());
  // Expand every vertex element, then glue each combination.
  std::vector<int> vertices = outer.graph.vertices;
  std::vector<std::vector<Expansion>> expansions;
  for (int v : vertices) {
    CorollaClassId cls = classify_vertex(preset_, outer, v);
    auto it = per_vertex_elements.find(v);
    if (it == per_vertex_elements.end())
      throw invalid_input("compose_elements: missing element for vertex " + std::to_string(v));
    expansions.push_back(expand(cls, it->second));
    if (expansions.back().empty()) return result;
  }
  std::vector<size_t> choice(vertices.size(), 0);
  std::function<void(size_t, Rat)> rec = [&](size_t at, Rat coeff) {
    if (at == vertices.size()) {
      // Glue: offset pieces, build parts, assemble along the outer graph.
      int flag_offset = 0, vertex_offset = 0;
      std::map<int, GraphMorphism> parts;
      LabeledGraph glued;
      std::map<int, int> glued_basis;
      for (size_t vi = 0; vi < vertices.size(); ++vi) {
        const ConcreteDecoration& inner = expansions[vi][choice[vi]].decoration;
        GluedPiece piece = offset_piece(inner, flag_offset, vertex_offset);
        flag_offset += static_cast<int>(inner.tau.graph.flags.size());
        vertex_offset += static_cast<int>(inner.tau.graph.vertices.size());
        int v = vertices[vi];
        std::vector<int> order = vertex_flag_order(preset_, outer, v);
        GraphMorphism part;
        part.source = piece.tau.graph;
        part.target = Graph::corolla(v, outer.graph.flags_at(v));
        for (size_t i = 0; i < order.size(); ++i) part.flag_map[order[i]] = piece.pins[i];
        for (int w : piece.tau.graph.vertices) part.vertex_map[w] = v;
        parts[v] = part;
        for (int f : piece.tau.graph.flags) {
          glued.graph.flags.push_back(f);
          glued.graph.boundary[f] = piece.tau.graph.boundary.at(f);
          glued.graph.involution[f] = piece.tau.graph.involution.at(f);
        }
        for (int w : piece.tau.graph.vertices) glued.graph.vertices.push_back(w);
        for (const auto& [f, o] : piece.tau.labeling.orientation)
          glued.labeling.orientation[f] = o;
        for (const auto& [w, gg] : piece.tau.labeling.genus) glued.labeling.genus[w] = gg;
        for (const auto& [f, c] : piece.tau.labeling.color) glued.labeling.color[f] = c;
        for (const auto& [w, s] : piece.tau.labeling.cyclic) glued.labeling.cyclic[w] = s;
        for (const auto& [w, b] : piece.vertex_basis) glued_basis[w] = b;
      }
      GraphMorphism inner_morphism = assemble(outer.graph, parts);
      // Adopt the glued involution (assemble realized the outer edges).
      glued.graph = inner_morphism.source;
      ConcreteDecoration total;
      total.tau = glued;
      total.pins.resize(outer_pins.size());
      for (size_t i = 0; i < outer_pins.size(); ++i)
        total.pins[i] = inner_morphism.flag_map.at(outer_pins[i]);
      total.vertex_basis = glued_basis;
      Vec img = inject(sigma, total);
      for (int r = 0; r < fc.dim(); ++r) result[r] += coeff * img[r];
      return;
    }
    for (size_t c = 0; c < expansions[at].size(); ++c) {
      choice[at] = c;
      rec(at + 1, coeff * expansions[at][c].coefficient);
    }
  };
  rec(0, 1);
  return result;
}

Collection FreeOperad::as_collection() const {
  Collection out;
  out.preset = preset_;
  for (const CorollaClassId& sigma : classes_) {
    const FreeComponent& fc = components_.at(sigma.key());
    CollectionComponent comp;
    comp.space = fc.total;
    comp.action = fc.action;
    comp.weights = fc.weights;
    out.set(sigma, std::move(comp));
  }
  return out;
}

std::map<std::string, Matrix> free_on_morphism(const FreeOperad& fx, const FreeOperad& fy,
                                               const CollectionMorphism& phi) {
  std::map<std::string, Matrix> out;
  for (const CorollaClassId& sigma : fx.classes()) {
    const FreeComponent& cx = fx.component(sigma);
    const FreeComponent& cy = fy.component(sigma);
    Matrix m(cy.dim(), cx.dim());
    for (const FreeSummand& sx : cx.summands) {
      auto it = cy.summand_index.find(sx.cls.key);
      if (it == cy.summand_index.end())
        throw internal_error("free_on_morphism: class lists misaligned");
      const FreeSummand& sy = cy.summands[it->second];
      if (sx.tensor_dim == 0 || sy.tensor_dim == 0) continue;
      // Blockwise: proj_y ∘ (⊗_v phi) ∘ incl_x.
      Matrix big = Matrix::identity(1);
      for (size_t v = 0; v < sx.cls.vertex_classes.size(); ++v) {
        const Matrix* pm = phi.find(sx.cls.vertex_classes[v].key());
        Matrix factor = pm ? *pm
                           : Matrix(sy.factor_dims[v], sx.factor_dims[v]);
        big = kronecker(big, factor);
      }
      Matrix block = sy.coin.projection.mat * (big * sx.coin.inclusion.mat);
      for (int i = 0; i < block.rows(); ++i)
        for (int j = 0; j < block.cols(); ++j) m.at(sy.offset + i, sx.offset + j) = block.at(i, j);
    }
    out[sigma.key()] = std::move(m);
  }
  return out;
}

std::map<std::string, Matrix> triple_mu(const FreeOperad& fx, const FreeOperad& ffx) {
  std::map<std::string, Matrix> out;
  for (const CorollaClassId& sigma : fx.classes()) {
    const FreeComponent& outer = ffx.component(sigma);
    const FreeComponent& inner = fx.component(sigma);
    Matrix m(inner.dim(), outer.dim());
    for (int col = 0; col < outer.dim(); ++col) {
      Vec e(outer.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& ex : ffx.expand(sigma, e)) {
        std::map<int, Vec> elements;
        for (const auto& [v, idx] : ex.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(fx.preset(), ex.decoration.tau, v);
          Vec unit(fx.component(cls).dim());
          unit[idx] = 1;
          elements[v] = std::move(unit);
        }
        Vec img = fx.compose_elements(sigma, ex.decoration.tau, ex.decoration.pins, elements);
        for (int r = 0; r < inner.dim(); ++r) m.at(r, col) += ex.coefficient * img[r];
      }
    }
    out[sigma.key()] = std::move(m);
  }
  return out;
}

const Matrix& OperadAlgebra::alpha_of(const CorollaClassId& id) const {
  auto it = alpha.find(id.key());
  if (it == alpha.end()) throw cap_exceeded("operad structure map outside caps: " + id.key());
  return it->second;
}

OperadAlgebra free_operad_algebra(std::shared_ptr<FreeOperad> fx) {
  OperadAlgebra a;
  a.preset = fx->preset();
  a.carrier = fx->as_collection();
  a.free_on_carrier = std::make_shared<FreeOperad>(fx->preset(), a.carrier, fx->caps());
  a.alpha = triple_mu(*fx, *a.free_on_carrier);
  return a;
}

AxiomReport check_operad_unit_laws(const OperadAlgebra& a) {
  AxiomReport report;
  const FreeOperad& fx = *a.free_on_carrier;
  for (const CorollaClassId& sigma : fx.classes()) {
    const Matrix& alpha = a.alpha_of(sigma);
    Matrix eta = fx.eta(sigma);
    int d = a.carrier.dim(sigma);
    if (!(alpha * eta == Matrix::identity(d))) {
      report.ok = false;
      report.failures.push_back("unit law fails at " + sigma.key());
    }
  }
  return report;
}

AxiomReport check_operad_axioms(const OperadAlgebra& a) {
  AxiomReport report = check_operad_unit_laws(a);
  const FreeOperad& fx = *a.free_on_carrier;
  // alpha ∘ F(alpha) = alpha ∘ mu on F(F(carrier)).
  FreeOperad ffx(fx.preset(), fx.as_collection(), fx.caps());
  CollectionMorphism alpha_m;
  alpha_m.maps = a.alpha;
  std::map<std::string, Matrix> f_alpha = free_on_morphism(ffx, fx, alpha_m);
  std::map<std::string, Matrix> mu = triple_mu(fx, ffx);
  for (const CorollaClassId& sigma : fx.classes()) {
    const Matrix& alpha = a.alpha_of(sigma);
    Matrix lhs = alpha * f_alpha.at(sigma.key());
    Matrix rhs = alpha * mu.at(sigma.key());
    if (!(lhs == rhs)) {
      report.ok = false;
      report.failures.push_back("associativity fails at " + sigma.key());
    }
  }
  return report;
}

LinearMap operad_value_on_morphism(const OperadAlgebra& a, const GraphMorphism& m,
                                   const Labeling& src, const Labeling& tgt) {
  const FreeOperad& fx = *a.free_on_carrier;
  const GammaPreset& preset = fx.preset();
  Realization real = realize_virtual_edges(m);
  LabeledGraph rho{real.residual.source, src};
  LabeledGraph target_lg{m.target, tgt};
  AtomizationDiagram diagram = atomize(real.residual);

  // Domain: tensor over source vertices in sorted order.
  std::vector<int> src_vertices = rho.graph.vertices;
  std::vector<CorollaClassId> src_classes;
  std::vector<int> src_dims;
  for (int v : src_vertices) {
    src_classes.push_back(classify_vertex(preset, rho, v));
    src_dims.push_back(a.carrier.dim(src_classes.back()));
  }
  std::vector<int> tgt_vertices = m.target.vertices;
  std::vector<CorollaClassId> tgt_classes;
  std::vector<int> tgt_dims;
  for (int w : tgt_vertices) {
    tgt_classes.push_back(classify_vertex(preset, target_lg, w));
    tgt_dims.push_back(a.carrier.dim(tgt_classes.back()));
  }
  int dom_dim = 1, cod_dim = 1;
  for (int d : src_dims) dom_dim *= d;
  for (int d : tgt_dims) cod_dim *= d;

  Matrix out(cod_dim, dom_dim);
  for (int col = 0; col < dom_dim; ++col) {
    std::vector<int> tuple = index_to_tuple(col, src_dims);
    // Per target vertex: inject the part decoration and apply alpha.
    std::vector<Vec> part_values(tgt_vertices.size());
    bool zero = false;
    for (size_t wi = 0; wi < tgt_vertices.size() && !zero; ++wi) {
      int w = tgt_vertices[wi];
      const GraphMorphism& part = diagram.parts.at(w);
      std::vector<int> order = vertex_flag_order(preset, target_lg, w);
      ConcreteDecoration dec;
      dec.tau = LabeledGraph{part.source, src};
      dec.pins.resize(order.size());
      for (size_t i = 0; i < order.size(); ++i) dec.pins[i] = part.flag_map.at(order[i]);
      for (size_t vi = 0; vi < src_vertices.size(); ++vi)
        if (part.source.has_vertex(src_vertices[vi]))
          dec.vertex_basis[src_vertices[vi]] = tuple[vi];
      Vec in_free = fx.inject(tgt_classes[wi], dec);
      part_values[wi] = a.alpha_of(tgt_classes[wi]).apply(in_free);
    }
    // Outer product across target vertices.
    std::vector<int> out_tuple(tgt_vertices.size(), 0);
    std::function<void(size_t, Rat)> fill = [&](size_t wi, Rat coeff) {
      if (wi == tgt_vertices.size()) {
        out.at(tuple_to_index(out_tuple, tgt_dims), col) += coeff;
        return;
      }
      for (int i = 0; i < tgt_dims[wi]; ++i) {
        if (part_values[wi][i] == 0) continue;
        out_tuple[wi] = i;
        fill(wi + 1, coeff * part_values[wi][i]);
      }
    };
    if (!zero) fill(0, 1);
  }
  VectorSpace dom = VectorSpace::anonymous(dom_dim, "d");
  VectorSpace cod = VectorSpace::anonymous(cod_dim, "c");
  return LinearMap{dom, cod, out};
}

std::map<std::string, Subspace> ideal_generated(const FreeOperad& fx,
                                                const std::map<std::string, Subspace>& r) {
  // Start from the relations closed under the component automorphism action.
  std::map<std::string, Subspace> ideal;
  for (const CorollaClassId& sigma : fx.classes()) {
    const FreeComponent& fc = fx.component(sigma);
    auto it = r.find(sigma.key());
    Subspace s = it == r.end() ? Subspace::zero(fc.total) : it->second;
    ideal[sigma.key()] = s;
  }
  bool changed = true;
  int rounds = 0;
  while (changed) {
    if (++rounds > 64) throw internal_error("ideal saturation did not stabilize");
    changed = false;
    // Automorphism closure.
    for (const CorollaClassId& sigma : fx.classes()) {
      const FreeComponent& fc = fx.component(sigma);
      Subspace& s = ideal[sigma.key()];
      std::vector<Vec> extra;
      for (const Matrix& g : fc.action)
        for (int i = 0; i < s.basis.rows(); ++i) {
          Vec img = g.apply(s.basis.row(i));
          if (!s.contains(img)) extra.push_back(img);
        }
      if (!extra.empty()) {
        for (int i = 0; i < s.basis.rows(); ++i) extra.push_back(s.basis.row(i));
        s = Subspace::span(extra, fc.total);
        changed = true;
      }
    }
    // Substitution closure: insert an ideal element at one vertex of every
    // enumerated class, generators elsewhere.
    for (const CorollaClassId& sigma : fx.classes()) {
      const FreeComponent& fc = fx.component(sigma);
      Subspace& s_sigma = ideal[sigma.key()];
      std::vector<Vec> extra;
      for (const FreeSummand& summand : fc.summands) {
        for (int v = 0; v < summand.cls.weight; ++v) {
          const CorollaClassId& cls_v = summand.cls.vertex_classes[v];
          const Subspace& s_v = ideal[cls_v.key()];
          if (s_v.rank() == 0) continue;
          // Other vertices run over generator basis elements.
          std::vector<int> other_dims;
          std::vector<int> other_vertices;
          for (int u = 0; u < summand.cls.weight; ++u) {
            if (u == v) continue;
            other_vertices.push_back(u);
            other_dims.push_back(fx.generators().dim(summand.cls.vertex_classes[u]));
          }
          bool zero = std::any_of(other_dims.begin(), other_dims.end(),
                                  [](int d) { return d == 0; });
          if (zero) continue;
          int combos = 1;
          for (int d : other_dims) combos *= d;
          for (int zi = 0; zi < s_v.basis.rows(); ++zi) {
            Vec z = s_v.basis.row(zi);
            for (int combo = 0; combo < combos; ++combo) {
              std::vector<int> tuple = index_to_tuple(combo, other_dims);
              std::map<int, Vec> elements;
              elements[v] = z;
              for (size_t ui = 0; ui < other_vertices.size(); ++ui) {
                const CorollaClassId& cu = summand.cls.vertex_classes[other_vertices[ui]];
                Matrix eta = fx.eta(cu);
                Vec e(fx.generators().dim(cu));
                e[tuple[ui]] = 1;
                elements[other_vertices[ui]] = eta.apply(e);
              }
              Vec img;
              try {
                img = fx.compose_elements(sigma, summand.cls.tau, summand.cls.pins, elements);
              } catch (const cap_exceeded&) {
                continue;  // substitution leaves the truncation
              }
              if (!s_sigma.contains(img)) {
                std::vector<Vec> rows;
                for (int i = 0; i < s_sigma.basis.rows(); ++i)
                  rows.push_back(s_sigma.basis.row(i));
                rows.push_back(img);
                s_sigma = Subspace::span(rows, fc.total);
                changed = true;
              }
            }
          }
        }
      }
    }
  }
  return ideal;
}

QuotientOperad quotient_operad(const OperadPresentation& pres, bool with_algebra) {
  QuotientOperad q;
  q.presentation = pres;
  q.free = std::make_shared<FreeOperad>(pres.preset, pres.generators, pres.caps);
  q.ideal = ideal_generated(*q.free, pres.relations);

  Collection carrier;
  carrier.preset = pres.preset;
  for (const CorollaClassId& sigma : q.free->classes()) {
    const FreeComponent& fc = q.free->component(sigma);
    const Subspace& ideal = q.ideal.at(sigma.key());
    // Quotient coordinates: non-pivot columns of the ideal basis.
    std::vector<bool> is_pivot(fc.dim(), false);
    for (int i = 0; i < ideal.basis.rows(); ++i)
      for (int j = 0; j < fc.dim(); ++j)
        if (ideal.basis.at(i, j) != 0) {
          is_pivot[j] = true;
          break;
        }
    std::vector<int> free_cols;
    for (int j = 0; j < fc.dim(); ++j)
      if (!is_pivot[j]) free_cols.push_back(j);
    int qd = static_cast<int>(free_cols.size());
    Matrix proj(qd, fc.dim());
    for (int j = 0; j < fc.dim(); ++j) {
      Vec e(fc.dim());
      e[j] = 1;
      Vec red = ideal.reduce(e);
      for (int i = 0; i < qd; ++i) proj.at(i, j) = red[free_cols[i]];
    }
    Matrix section(fc.dim(), qd);
    for (int i = 0; i < qd; ++i) section.at(free_cols[i], i) = 1;
    q.projection[sigma.key()] = proj;
    q.section[sigma.key()] = section;

    CollectionComponent comp;
    comp.space = VectorSpace::anonymous(qd, "q");
    for (const Matrix& g : fc.action) comp.action.push_back(proj * (g * section));
    for (int i = 0; i < qd; ++i) comp.weights.push_back(fc.weights[free_cols[i]]);
    carrier.set(sigma, std::move(comp));
  }

  OperadAlgebra alg;
  alg.preset = pres.preset;
  alg.carrier = carrier;
  if (!with_algebra) {
    q.algebra = std::move(alg);
    return q;
  }
  alg.free_on_carrier = std::make_shared<FreeOperad>(pres.preset, carrier, pres.caps);
  for (const CorollaClassId& sigma : q.free->classes()) {
    const FreeComponent& fq = alg.free_on_carrier->component(sigma);
    int qd = carrier.dim(sigma);
    Matrix alpha(qd, fq.dim());
    for (int col = 0; col < fq.dim(); ++col) {
      Vec e(fq.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& ex : alg.free_on_carrier->expand(sigma, e)) {
        // Lift each quotient decoration to the free operad and compose there.
        std::map<int, Vec> elements;
        for (const auto& [v, idx] : ex.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(pres.preset, ex.decoration.tau, v);
          const Matrix& sec = q.section.at(cls.key());
          Vec unit(carrier.dim(cls));
          unit[idx] = 1;
          elements[v] = sec.apply(unit);
        }
        Vec img = q.free->compose_elements(sigma, ex.decoration.tau, ex.decoration.pins,
                                           elements);
        Vec reduced = q.projection.at(sigma.key()).apply(img);
        for (int r = 0; r < qd; ++r) alpha.at(r, col) += ex.coefficient * reduced[r];
      }
    }
    alg.alpha[sigma.key()] = std::move(alpha);
  }
  q.algebra = std::move(alg);
  return q;
}

OperadAlgebra white_product_operads(const OperadAlgebra& a, const OperadAlgebra& b) {
  if (a.preset.kind != b.preset.kind)
    throw invalid_input("white product of operads: preset mismatch");
  OperadAlgebra out;
  out.preset = a.preset;
  out.carrier = white_product(a.carrier, b.carrier);
  out.free_on_carrier =
      std::make_shared<FreeOperad>(a.preset, out.carrier, a.free_on_carrier->caps());
  const FreeOperad& fab = *out.free_on_carrier;
  for (const CorollaClassId& sigma : fab.classes()) {
    const FreeComponent& fc = fab.component(sigma);
    int da = a.carrier.dim(sigma), db = b.carrier.dim(sigma);
    Matrix alpha(da * db, fc.dim());
    for (int col = 0; col < fc.dim(); ++col) {
      Vec e(fc.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& ex : fab.expand(sigma, e)) {
        // Split the decorations into the two factors and evaluate each side.
        ConcreteDecoration da_dec = ex.decoration, db_dec = ex.decoration;
        for (const auto& [v, idx] : ex.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(a.preset, ex.decoration.tau, v);
          int dbv = b.carrier.dim(cls);
          da_dec.vertex_basis[v] = idx / dbv;
          db_dec.vertex_basis[v] = idx % dbv;
        }
        Vec va = a.alpha_of(sigma).apply(a.free_on_carrier->inject(sigma, da_dec));
        Vec vb = b.alpha_of(sigma).apply(b.free_on_carrier->inject(sigma, db_dec));
        for (int i = 0; i < da; ++i) {
          if (va[i] == 0) continue;
          for (int j = 0; j < db; ++j) {
            if (vb[j] == 0) continue;
            alpha.at(i * db + j, col) += ex.coefficient * va[i] * vb[j];
          }
        }
      }
    }
    out.alpha[sigma.key()] = std::move(alpha);
  }
  return out;
}

std::map<std::string, Matrix> extend_to_operad_morphism(const FreeOperad& fx,
                                                        const OperadAlgebra& b,
                                                        const CollectionMorphism& phi) {
  std::map<std::string, Matrix> out;
  for (const CorollaClassId& sigma : fx.classes()) {
    const FreeComponent& fc = fx.component(sigma);
    int db = b.carrier.dim(sigma);
    Matrix m(db, fc.dim());
    for (int col = 0; col < fc.dim(); ++col) {
      Vec e(fc.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& ex : fx.expand(sigma, e)) {
        // Map decorations through phi, then evaluate in B via its free operad.
        std::map<int, Vec> mapped;
        bool zero = false;
        for (const auto& [v, idx] : ex.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(fx.preset(), ex.decoration.tau, v);
          const Matrix* pm = phi.find(cls.key());
          if (!pm) {
            zero = true;
            break;
          }
          Vec unit(pm->cols());
          unit[idx] = 1;
          mapped[v] = pm->apply(unit);
        }
        if (zero) continue;
        // Multilinear expansion over the mapped carrier elements.
        std::vector<int> vs;
        for (const auto& [v, vecv] : mapped) vs.push_back(v);
        std::function<void(size_t, Rat, std::map<int, int>&)> rec =
            [&](size_t at, Rat coeff, std::map<int, int>& basis) {
              if (at == vs.size()) {
                ConcreteDecoration dec;
                dec.tau = ex.decoration.tau;
                dec.pins = ex.decoration.pins;
                dec.vertex_basis = basis;
                Vec img =
                    b.alpha_of(sigma).apply(b.free_on_carrier->inject(sigma, dec));
                for (int r = 0; r < db; ++r) m.at(r, col) += ex.coefficient * coeff * img[r];
                return;
              }
              const Vec& vecv = mapped.at(vs[at]);
              for (size_t i = 0; i < vecv.size(); ++i) {
                if (vecv[i] == 0) continue;
                basis[vs[at]] = static_cast<int>(i);
                rec(at + 1, coeff * vecv[i], basis);
              }
            };
        std::map<int, int> basis;
        rec(0, 1, basis);
      }
    }
    out[sigma.key()] = std::move(m);
  }
  return out;
}

std::map<std::string, Matrix> j_morphism(const FreeOperad& f_eb, const FreeOperad& fe,
                                         const FreeOperad& fb) {
  std::map<std::string, Matrix> out;
  for (const CorollaClassId& sigma : f_eb.classes()) {
    const FreeComponent& fc = f_eb.component(sigma);
    int de = fe.component(sigma).dim(), db = fb.component(sigma).dim();
    Matrix m(de * db, fc.dim());
    for (int col = 0; col < fc.dim(); ++col) {
      Vec e(fc.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& ex : f_eb.expand(sigma, e)) {
        ConcreteDecoration de_dec = ex.decoration, db_dec = ex.decoration;
        bool zero = false;
        for (const auto& [v, idx] : ex.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(f_eb.preset(), ex.decoration.tau, v);
          int dbv = fb.generators().dim(cls);
          if (dbv == 0 || fe.generators().dim(cls) == 0) {
            zero = true;
            break;
          }
          de_dec.vertex_basis[v] = idx / dbv;
          db_dec.vertex_basis[v] = idx % dbv;
        }
        if (zero) continue;
        Vec ve = fe.inject(sigma, de_dec);
        Vec vb = fb.inject(sigma, db_dec);
        for (int i = 0; i < de; ++i) {
          if (ve[i] == 0) continue;
          for (int j = 0; j < db; ++j) {
            if (vb[j] == 0) continue;
            m.at(i * db + j, col) += ex.coefficient * ve[i] * vb[j];
          }
        }
      }
    }
    out[sigma.key()] = std::move(m);
  }
  return out;
}

namespace {

int side_dim(const OperadSide& side, const CorollaClassId& cls) {
  if (side.section) {
    auto it = side.section->find(cls.key());
    return it == side.section->end() ? 0 : it->second.cols();
  }
  return side.free->generators().dim(cls);
}

// The side's element of F(gen) for one basis index (lifted carrier basis
// vector, or eta of a generator).
Vec side_element(const OperadSide& side, const CorollaClassId& cls, int index) {
  if (side.section) {
    const Matrix& sec = side.section->at(cls.key());
    Vec unit(sec.cols());
    unit[index] = 1;
    return sec.apply(unit);
  }
  Matrix eta = side.free->eta(cls);
  Vec unit(eta.cols());
  unit[index] = 1;
  return eta.apply(unit);
}

}  // namespace

Vec diagonal_value(const OperadSide& left, const OperadSide& right,
                   const CorollaClassId& sigma, const LabeledGraph& tau,
                   const std::vector<int>& pins, const std::map<int, Vec>& pair_vectors) {
  std::vector<int> vertices = tau.graph.vertices;
  std::vector<CorollaClassId> classes;
  std::vector<int> dl(vertices.size()), dr(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i) {
    classes.push_back(classify_vertex(left.free->preset(), tau, vertices[i]));
    dl[i] = side_dim(left, classes[i]);
    dr[i] = side_dim(right, classes[i]);
  }
  int out_l = left.projection ? left.projection->at(sigma.key()).rows()
                              : left.free->component(sigma).dim();
  int out_r = right.projection ? right.projection->at(sigma.key()).rows()
                               : right.free->component(sigma).dim();
  Vec result(size_t(out_l) * out_r);

  // Expand each pair vector into pure (l, r) terms and evaluate both sides.
  std::vector<std::pair<int, int>> split(vertices.size());
  std::function<void(size_t, Rat)> rec = [&](size_t at, Rat coeff) {
    if (at == vertices.size()) {
      std::map<int, Vec> le, re;
      for (size_t i = 0; i < vertices.size(); ++i) {
        le[vertices[i]] = side_element(left, classes[i], split[i].first);
        re[vertices[i]] = side_element(right, classes[i], split[i].second);
      }
      Vec vl = left.free->compose_elements(sigma, tau, pins, le);
      Vec vr = right.free->compose_elements(sigma, tau, pins, re);
      if (left.projection) vl = left.projection->at(sigma.key()).apply(vl);
      if (right.projection) vr = right.projection->at(sigma.key()).apply(vr);
      for (int i = 0; i < out_l; ++i) {
        if (vl[i] == 0) continue;
        for (int j = 0; j < out_r; ++j)
          if (vr[j] != 0) result[size_t(i) * out_r + j] += coeff * vl[i] * vr[j];
      }
      return;
    }
    const Vec& pv = pair_vectors.at(vertices[at]);
    for (int l = 0; l < dl[at]; ++l)
      for (int r = 0; r < dr[at]; ++r) {
        const Rat& c = pv[size_t(l) * dr[at] + r];
        if (c == 0) continue;
        split[at] = {l, r};
        rec(at + 1, coeff * c);
      }
  };
  rec(0, 1);
  return result;
}

std::map<std::string, Matrix> extend_via_presentation(const FreeOperad& fx,
                                                      const QuotientOperad& target,
                                                      const CollectionMorphism& phi) {
  std::map<std::string, Matrix> out;
  for (const CorollaClassId& sigma : fx.classes()) {
    const FreeComponent& fc = fx.component(sigma);
    const Matrix& proj = target.projection.at(sigma.key());
    Matrix m(proj.rows(), fc.dim());
    for (int col = 0; col < fc.dim(); ++col) {
      Vec e(fc.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& ex : fx.expand(sigma, e)) {
        std::map<int, Vec> lifted;
        bool zero = false;
        for (const auto& [v, idx] : ex.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(fx.preset(), ex.decoration.tau, v);
          const Matrix* pm = phi.find(cls.key());
          if (!pm) {
            zero = true;
            break;
          }
          Vec unit(pm->cols());
          unit[idx] = 1;
          Vec carrier_vec = pm->apply(unit);
          lifted[v] = target.section.at(cls.key()).apply(carrier_vec);
        }
        if (zero) continue;
        Vec composed = target.free->compose_elements(sigma, ex.decoration.tau,
                                                     ex.decoration.pins, lifted);
        Vec reduced = proj.apply(composed);
        for (int r = 0; r < m.rows(); ++r) m.at(r, col) += ex.coefficient * reduced[r];
      }
    }
    out[sigma.key()] = std::move(m);
  }
  return out;
}

TwoLevelComponent two_level_product(const GammaPreset& preset, const Collection& a1,
                                    const Collection& a2, const CorollaClassId& sigma,
                                    const Caps& caps) {
  if (!preset.oriented())
    throw invalid_input("two-level product requires a directed preset");
  TwoLevelComponent out;
  for (const DecoratedClass& cls : enumerate_to_corolla(preset, sigma, caps)) {
    auto partition = two_level_partition(cls.tau);
    if (!partition) continue;
    const auto& [level1, level2] = *partition;
    std::vector<int> dims;
    for (int v = 0; v < cls.weight; ++v) {
      const Collection& which = level1.count(v) ? a1 : a2;
      dims.push_back(which.dim(cls.vertex_classes[v]));
    }
    int tensor_dim = 1;
    for (int d : dims) tensor_dim *= d;
    if (tensor_dim == 0) {
      continue;
    }
    // Coinvariants under the class automorphisms (they preserve levels).
    std::vector<Matrix> elements;
    for (const GraphIso& psi : cls.auts) {
      Matrix m(tensor_dim, tensor_dim);
      std::vector<Matrix> factor_mats(cls.weight, Matrix(0, 0));
      std::vector<int> target_slot(cls.weight);
      for (int v = 0; v < cls.weight; ++v) {
        int wv = psi.vertex_map.at(v);
        target_slot[v] = wv;
        const std::vector<int>& order_v = cls.vertex_flag_orders[v];
        const std::vector<int>& order_w = cls.vertex_flag_orders[wv];
        std::vector<int> perm(order_v.size());
        for (size_t i = 0; i < order_v.size(); ++i)
          perm[i] = position_in(order_w, psi.flag_map.at(order_v[i]));
        const Collection& which = level1.count(v) ? a1 : a2;
        CanonicalCorolla cc = canonical_corolla(cls.vertex_classes[v]);
        const CollectionComponent* comp = which.find(cls.vertex_classes[v]);
        ActionTable table(cc.aut_generators, comp->action, comp->space.dim(), cc.flag_count());
        factor_mats[v] = table.matrix_of(perm);
      }
      for (int col = 0; col < tensor_dim; ++col) {
        std::vector<int> tuple = index_to_tuple(col, dims);
        std::vector<Vec> slot_vecs(cls.weight);
        for (int v = 0; v < cls.weight; ++v) {
          Vec e(dims[v]);
          e[tuple[v]] = 1;
          slot_vecs[target_slot[v]] = factor_mats[v].apply(e);
        }
        std::vector<int> out_tuple(cls.weight, 0);
        std::function<void(int, Rat)> fill = [&](int w, Rat coeff) {
          if (w == cls.weight) {
            m.at(tuple_to_index(out_tuple, dims), col) += coeff;
            return;
          }
          for (int i = 0; i < dims[w]; ++i) {
            if (slot_vecs[w][i] == 0) continue;
            out_tuple[w] = i;
            fill(w + 1, coeff * slot_vecs[w][i]);
          }
        };
        fill(0, 1);
      }
      elements.push_back(std::move(m));
    }
    Matrix p(tensor_dim, tensor_dim);
    for (const Matrix& g : elements) p = p + g;
    p = p.scaled(Rat(1) / Rat(static_cast<long>(elements.size())));
    out.classes.push_back(cls);
    out.dims.push_back(rank(p));
    out.total_dim += out.dims.back();
  }
  return out;
}

}  // namespace opal
