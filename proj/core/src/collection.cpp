#include "opal/collection.hpp"

#include <algorithm>
#include <sstream>

#include "opal/errors.hpp"

namespace opal {

std::string CorollaClassId::key() const {
  std::ostringstream os;
  os << to_string(preset);
  for (int s : sig) os << ':' << s;
  return os.str();
}

namespace {

std::vector<std::vector<int>> symmetric_group_gens(int offset, int n, int degree) {
  std::vector<std::vector<int>> gens;
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<int> p(degree);
    for (int j = 0; j < degree; ++j) p[j] = j;
    std::swap(p[offset + i], p[offset + i + 1]);
    gens.push_back(p);
  }
  return gens;
}

}  // namespace

CanonicalCorolla canonical_corolla(const CorollaClassId& id) {
  CanonicalCorolla out;
  auto make = [&](int nflags) {
    out.corolla.graph = Graph::corolla(0, [&] {
      std::vector<int> fs(nflags);
      for (int i = 0; i < nflags; ++i) fs[i] = i;
      return fs;
    }());
  };
  switch (id.preset) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric: {
      int n = id.sig.at(0);
      make(n + 1);
      out.corolla.labeling.orientation[0] = FlagOrientation::out;
      for (int i = 1; i <= n; ++i)
        out.corolla.labeling.orientation[i] = FlagOrientation::in;
      if (id.preset == PresetKind::non_symmetric) {
        std::map<int, int> succ;
        for (int i = 0; i <= n; ++i) succ[i] = (i + 1) % (n + 1);
        out.corolla.labeling.cyclic[0] = succ;
      } else {
        out.aut_generators = symmetric_group_gens(1, n, n + 1);
      }
      break;
    }
    case PresetKind::cyclic: {
      int n = id.sig.at(0);
      make(n);
      out.aut_generators = symmetric_group_gens(0, n, n);
      break;
    }
    case PresetKind::modular:
    case PresetKind::stable_modular: {
      int g = id.sig.at(0), n = id.sig.at(1);
      make(n);
      out.corolla.labeling.genus[0] = g;
      out.aut_generators = symmetric_group_gens(0, n, n);
      break;
    }
    case PresetKind::prop:
    case PresetKind::properad:
    case PresetKind::dioperad:
    case PresetKind::half_prop: {
      int m = id.sig.at(0), n = id.sig.at(1);
      make(m + n);
      for (int i = 0; i < m; ++i) out.corolla.labeling.orientation[i] = FlagOrientation::out;
      for (int i = 0; i < n; ++i)
        out.corolla.labeling.orientation[m + i] = FlagOrientation::in;
      auto a = symmetric_group_gens(0, m, m + n);
      auto b = symmetric_group_gens(m, n, m + n);
      out.aut_generators = a;
      out.aut_generators.insert(out.aut_generators.end(), b.begin(), b.end());
      break;
    }
    case PresetKind::linear: {
      make(2);
      out.corolla.labeling.orientation[0] = FlagOrientation::out;
      out.corolla.labeling.orientation[1] = FlagOrientation::in;
      break;
    }
  }
  return out;
}

CorollaClassId classify_vertex(const GammaPreset& preset, const LabeledGraph& g, int v) {
  std::vector<int> flags = g.graph.flags_at(v);
  auto count = [&](FlagOrientation o) {
    int n = 0;
    for (int f : flags)
      if (g.labeling.orientation.at(f) == o) ++n;
    return n;
  };
  switch (preset.kind) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric: {
      if (count(FlagOrientation::out) != 1)
        throw invalid_input("vertex is not an operadic corolla (needs one output)");
      return CorollaClassId{preset.kind, {count(FlagOrientation::in)}};
    }
    case PresetKind::cyclic:
      return CorollaClassId{preset.kind, {static_cast<int>(flags.size())}};
    case PresetKind::modular:
    case PresetKind::stable_modular:
      return CorollaClassId{preset.kind,
                            {g.labeling.genus.at(v), static_cast<int>(flags.size())}};
    case PresetKind::prop:
    case PresetKind::properad:
    case PresetKind::dioperad:
    case PresetKind::half_prop:
      return CorollaClassId{preset.kind, {count(FlagOrientation::out), count(FlagOrientation::in)}};
    case PresetKind::linear: {
      if (count(FlagOrientation::out) != 1 || count(FlagOrientation::in) != 1)
        throw invalid_input("vertex is not a linear corolla");
      return CorollaClassId{preset.kind, {}};
    }
  }
  throw internal_error("unhandled preset in classify_vertex");
}

std::vector<int> vertex_flag_order(const GammaPreset& preset, const LabeledGraph& g, int v) {
  std::vector<int> flags = g.graph.flags_at(v);
  std::sort(flags.begin(), flags.end());
  if (!preset.oriented()) return flags;
  std::vector<int> outs, ins;
  for (int f : flags)
    (g.labeling.orientation.at(f) == FlagOrientation::out ? outs : ins).push_back(f);
  if (preset.cyclic_labeled()) {
    // Output first, then inputs in the cyclic successor order.
    if (outs.size() != 1) throw invalid_input("cyclic vertex needs a single output");
    std::vector<int> order{outs[0]};
    const auto& succ = g.labeling.cyclic.at(v);
    int cur = succ.at(outs[0]);
    while (cur != outs[0]) {
      order.push_back(cur);
      cur = succ.at(cur);
    }
    return order;
  }
  std::vector<int> order = outs;
  order.insert(order.end(), ins.begin(), ins.end());
  return order;
}

std::vector<CorollaClassId> classes_within(const GammaPreset& preset, int arity, int genus) {
  std::vector<CorollaClassId> out;
  switch (preset.kind) {
    case PresetKind::ordinary:
    case PresetKind::non_symmetric:
      for (int n = 2; n <= arity; ++n) out.push_back({preset.kind, {n}});
      break;
    case PresetKind::cyclic:
      for (int n = 1; n <= arity; ++n) out.push_back({preset.kind, {n}});
      break;
    case PresetKind::modular:
    case PresetKind::stable_modular:
      for (int g = 0; g <= genus; ++g)
        for (int n = 0; n <= arity; ++n) {
          if (g == 0 && n == 0) continue;
          if (preset.kind == PresetKind::stable_modular && !is_stable_corolla(g, n)) continue;
          out.push_back({preset.kind, {g, n}});
        }
      break;
    case PresetKind::prop:
    case PresetKind::properad:
    case PresetKind::dioperad:
    case PresetKind::half_prop:
      for (int m = 0; m <= arity; ++m)
        for (int n = 0; m + n <= arity; ++n) {
          if (m + n == 0) continue;
          out.push_back({preset.kind, {m, n}});
        }
      break;
    case PresetKind::linear:
      out.push_back({preset.kind, {}});
      break;
  }
  return out;
}

const CollectionComponent* Collection::find(const CorollaClassId& id) const {
  auto it = components.find(id.key());
  return it == components.end() ? nullptr : &it->second;
}

CollectionComponent* Collection::find(const CorollaClassId& id) {
  auto it = components.find(id.key());
  return it == components.end() ? nullptr : &it->second;
}

void Collection::set(const CorollaClassId& id, CollectionComponent comp) {
  components[id.key()] = std::move(comp);
  ids[id.key()] = id;
}

int Collection::dim(const CorollaClassId& id) const {
  const CollectionComponent* c = find(id);
  return c ? c->space.dim() : 0;
}

GroupAction Collection::action_of(const CorollaClassId& id) const {
  const CollectionComponent* c = find(id);
  if (!c) return GroupAction::trivial(VectorSpace{});
  return GroupAction{c->space, c->action, {}};
}

std::vector<CorollaClassId> Collection::support() const {
  std::vector<CorollaClassId> out;
  for (const auto& [key, id] : ids)
    if (components.at(key).space.dim() > 0) out.push_back(id);
  return out;
}

namespace {

std::vector<int> compose_perm(const std::vector<int>& g, const std::vector<int>& h) {
  std::vector<int> out(g.size());
  for (size_t i = 0; i < g.size(); ++i) out[i] = g[h[i]];
  return out;
}

}  // namespace

ActionTable::ActionTable(const std::vector<std::vector<int>>& generator_perms,
                         const std::vector<Matrix>& generator_matrices, int dim, int degree) {
  std::vector<int> id(degree);
  for (int i = 0; i < degree; ++i) id[i] = i;
  table_[id] = Matrix::identity(dim);
  std::vector<std::vector<int>> frontier{id};
  while (!frontier.empty()) {
    std::vector<std::vector<int>> next;
    for (const auto& perm : frontier) {
      const Matrix& m = table_.at(perm);
      for (size_t g = 0; g < generator_perms.size(); ++g) {
        std::vector<int> np = compose_perm(generator_perms[g], perm);
        if (table_.count(np)) continue;
        table_[np] = generator_matrices[g] * m;
        next.push_back(np);
        if (table_.size() > 50000) throw cap_exceeded("action table closure too large");
      }
    }
    frontier = std::move(next);
  }
}

const Matrix& ActionTable::matrix_of(const std::vector<int>& perm) const {
  auto it = table_.find(perm);
  if (it == table_.end())
    throw internal_error("permutation outside the class automorphism group");
  return it->second;
}

const Matrix* CollectionMorphism::find(const std::string& key) const {
  auto it = maps.find(key);
  return it == maps.end() ? nullptr : &it->second;
}

Collection white_product(const Collection& a, const Collection& b) {
  if (a.preset.kind != b.preset.kind)
    throw invalid_input("white product: preset mismatch");
  Collection out;
  out.preset = a.preset;
  for (const auto& [key, ca] : a.components) {
    const auto* cb = b.components.count(key) ? &b.components.at(key) : nullptr;
    if (!cb) continue;
    CollectionComponent comp;
    comp.space = tensor(ca.space, cb->space);
    for (size_t g = 0; g < ca.action.size(); ++g)
      comp.action.push_back(kronecker(ca.action[g], cb->action[g]));
    if (!ca.weights.empty() || !cb->weights.empty()) {
      std::vector<int> wa = ca.weights, wb = cb->weights;
      if (wa.empty()) wa.assign(ca.space.dim(), 1);
      if (wb.empty()) wb.assign(cb->space.dim(), 1);
      for (int i = 0; i < ca.space.dim(); ++i)
        for (int j = 0; j < cb->space.dim(); ++j) comp.weights.push_back(wa[i] + wb[j]);
    }
    out.set(a.ids.at(key), std::move(comp));
  }
  return out;
}

CollectionCohom cohom_collections(const Collection& a, const Collection& b) {
  if (a.preset.kind != b.preset.kind)
    throw invalid_input("cohom of collections: preset mismatch");
  CollectionCohom out;
  out.e1.preset = a.preset;
  for (const auto& [key, ca] : a.components) {
    if (!b.components.count(key)) continue;
    const auto& cb = b.components.at(key);
    CollectionComponent comp;
    comp.space = tensor(ca.space, cb.space.dual());
    for (size_t g = 0; g < ca.action.size(); ++g) {
      // Dual action: rho*(g) = rho(g^{-1})^T = (rho(g)^{-1})^T.
      const Matrix& m = cb.action[g];
      Matrix inv(m.rows(), m.cols());
      for (int c = 0; c < m.cols(); ++c) {
        Vec e(m.rows());
        e[c] = 1;
        Vec x = *solve(m, e);
        for (int r = 0; r < m.rows(); ++r) inv.at(r, c) = x[r];
      }
      comp.action.push_back(kronecker(ca.action[g], inv.transpose()));
    }
    out.e1.set(a.ids.at(key), std::move(comp));

    // Coevaluation: x |-> sum_j (x ⊗ b_j*) ⊗ b_j.
    int da = ca.space.dim(), db = cb.space.dim();
    Matrix c(da * db * db, da);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < db; ++j) c.at((i * db + j) * db + j, i) = 1;
    out.coevaluation.maps[key] = c;
  }
  return out;
}

Collection unit_collection(const GammaPreset& preset,
                           const std::vector<CorollaClassId>& classes) {
  Collection out;
  out.preset = preset;
  for (const CorollaClassId& id : classes) {
    CanonicalCorolla cc = canonical_corolla(id);
    CollectionComponent comp;
    comp.space = VectorSpace{{"u"}};
    comp.action.assign(cc.aut_generators.size(), Matrix::identity(1));
    comp.weights = {0};
    out.set(id, std::move(comp));
  }
  return out;
}

Matrix curry_map(const Matrix& u, int dim_f, int dim_b) {
  // u: (dim_f * dim_b) x dim_a  ->  curried: dim_f x (dim_a * dim_b)
  if (u.rows() != dim_f * dim_b) throw invalid_input("curry_map: shape mismatch");
  int dim_a = u.cols();
  Matrix out(dim_f, dim_a * dim_b);
  for (int f = 0; f < dim_f; ++f)
    for (int b = 0; b < dim_b; ++b)
      for (int a = 0; a < dim_a; ++a) out.at(f, a * dim_b + b) = u.at(f * dim_b + b, a);
  return out;
}

Matrix uncurry_map(const Matrix& curried, int dim_f, int dim_b) {
  if (curried.rows() != dim_f || curried.cols() % dim_b != 0)
    throw invalid_input("uncurry_map: shape mismatch");
  int dim_a = curried.cols() / dim_b;
  Matrix out(dim_f * dim_b, dim_a);
  for (int f = 0; f < dim_f; ++f)
    for (int b = 0; b < dim_b; ++b)
      for (int a = 0; a < dim_a; ++a) out.at(f * dim_b + b, a) = curried.at(f, a * dim_b + b);
  return out;
}

std::map<std::string, std::vector<Matrix>> equivariant_component_maps(const Collection& a,
                                                                      const Collection& b) {
  std::map<std::string, std::vector<Matrix>> out;
  for (const auto& [key, ca] : a.components) {
    if (!b.components.count(key)) continue;
    const auto& cb = b.components.at(key);
    out[key] = equivariant_maps(GroupAction{ca.space, ca.action, {}},
                                GroupAction{cb.space, cb.action, {}});
  }
  return out;
}

}  // namespace opal
