#include "opal/p_algebra.hpp"

#include <algorithm>
#include <functional>

#include "opal/errors.hpp"

namespace opal {

FlavoredFamily FlavoredFamily::oriented_dual(const VectorSpace& v) {
  FlavoredFamily out;
  out.spaces["out"] = v;
  out.spaces["in"] = v.dual();
  Matrix eval = Matrix::identity(v.dim());  // <e_i, e_j*> = delta_ij
  out.pairings[{"out", "in"}] = eval;
  return out;
}

std::string flavor_of(const GammaPreset& preset, const LabeledGraph& g, int flag) {
  std::string f;
  if (g.labeling.has_color()) f += "c" + std::to_string(g.labeling.color.at(flag));
  if (preset.oriented())
    f += g.labeling.orientation.at(flag) == FlagOrientation::out ? "out" : "in";
  if (f.empty()) f = "v";
  return f;
}

namespace {

std::vector<int> index_to_tuple(int idx, const std::vector<int>& dims) {
  std::vector<int> tuple(dims.size());
  for (int v = static_cast<int>(dims.size()) - 1; v >= 0; --v) {
    tuple[v] = idx % dims[v];
    idx /= dims[v];
  }
  return tuple;
}

int tuple_to_index(const std::vector<int>& tuple, const std::vector<int>& dims) {
  int idx = 0;
  for (size_t v = 0; v < dims.size(); ++v) idx = idx * dims[v] + tuple[v];
  return idx;
}

}  // namespace

OperadAlgebra op_end(const FlavoredFamily& family, const GammaPreset& preset,
                     const Caps& caps) {
  OperadAlgebra out;
  out.preset = preset;
  out.carrier.preset = preset;
  for (const CorollaClassId& id : classes_within(preset, caps.arity, caps.genus)) {
    CanonicalCorolla cc = canonical_corolla(id);
    CollectionComponent comp;
    std::vector<int> dims;
    std::vector<std::string> flavors;
    bool supported = true;
    for (int f : cc.corolla.graph.flags) {
      std::string fl = flavor_of(preset, cc.corolla, f);
      auto it = family.spaces.find(fl);
      if (it == family.spaces.end()) {
        supported = false;
        break;
      }
      flavors.push_back(fl);
      dims.push_back(it->second.dim());
    }
    if (!supported) continue;
    int total = 1;
    for (int d : dims) total *= d;
    comp.space = VectorSpace::anonymous(total, "t");
    // Automorphisms permute tensor factors (flavors are preserved).
    for (const std::vector<int>& perm : cc.aut_generators) {
      Matrix m(total, total);
      for (int col = 0; col < total; ++col) {
        std::vector<int> tuple = index_to_tuple(col, dims);
        std::vector<int> image(tuple.size());
        for (size_t i = 0; i < tuple.size(); ++i) image[perm[i]] = tuple[i];
        m.at(tuple_to_index(image, dims), col) = 1;
      }
      comp.action.push_back(std::move(m));
    }
    out.carrier.set(id, std::move(comp));
  }
  out.free_on_carrier = std::make_shared<FreeOperad>(preset, out.carrier, caps);

  // Structure map: kill contracted pairs with the one-edge forms, route the
  // surviving flags to the target positions.
  const FreeOperad& fx = *out.free_on_carrier;
  for (const CorollaClassId& sigma : fx.classes()) {
    if (!out.carrier.find(sigma)) continue;
    const FreeComponent& fc = fx.component(sigma);
    CanonicalCorolla sc = canonical_corolla(sigma);
    int out_dim = out.carrier.dim(sigma);
    Matrix alpha(out_dim, fc.dim());
    for (const FreeSummand& s : fc.summands) {
      if (s.tensor_dim == 0) continue;
      const LabeledGraph& tau = s.cls.tau;
      // Flat flag order: vertex order, then the per-vertex class order.
      std::vector<int> flat_flags;
      std::vector<int> flat_dims;
      for (int v = 0; v < s.cls.weight; ++v)
        for (int f : s.cls.vertex_flag_orders[v]) {
          flat_flags.push_back(f);
          flat_dims.push_back(
              family.spaces.at(flavor_of(preset, tau, f)).dim());
        }
      std::map<int, int> flag_pos;
      for (size_t i = 0; i < flat_flags.size(); ++i) flag_pos[flat_flags[i]] = static_cast<int>(i);
      // Output slot order: the sigma corolla's canonical flag order via pins.
      std::vector<int> out_dims;
      for (int i = 0; i < sc.flag_count(); ++i)
        out_dims.push_back(family.spaces.at(flavor_of(preset, sc.corolla, i)).dim());
      // Build the raw-level matrix, then restrict along the inclusion.
      Matrix raw(out_dim, s.tensor_dim);
      for (int col = 0; col < s.tensor_dim; ++col) {
        std::vector<int> assignment(flat_flags.size());
        {
          std::vector<int> vdims;
          for (int v = 0; v < s.cls.weight; ++v) {
            int d = 1;
            for (int f : s.cls.vertex_flag_orders[v])
              d *= family.spaces.at(flavor_of(preset, tau, f)).dim();
            vdims.push_back(d);
          }
          std::vector<int> vidx = index_to_tuple(col, vdims);
          size_t pos = 0;
          for (int v = 0; v < s.cls.weight; ++v) {
            std::vector<int> local_dims;
            for (int f : s.cls.vertex_flag_orders[v])
              local_dims.push_back(family.spaces.at(flavor_of(preset, tau, f)).dim());
            std::vector<int> local = index_to_tuple(vidx[v], local_dims);
            for (int x : local) assignment[pos++] = x;
          }
        }
        Rat value = 1;
        bool ok = true;
        for (const auto& [a, b] : tau.graph.edges()) {
          std::string fa = flavor_of(preset, tau, a), fb = flavor_of(preset, tau, b);
          int ia = assignment[flag_pos.at(a)], ib = assignment[flag_pos.at(b)];
          auto it = family.pairings.find({fa, fb});
          Rat term;
          if (it != family.pairings.end()) {
            term = it->second.at(ia, ib);
          } else {
            term = family.pairings.at({fb, fa}).at(ib, ia);
          }
          if (term == 0) {
            ok = false;
            break;
          }
          value *= term;
        }
        if (!ok) continue;
        std::vector<int> out_tuple(sc.flag_count());
        for (int i = 0; i < sc.flag_count(); ++i)
          out_tuple[i] = assignment[flag_pos.at(s.cls.pins[i])];
        raw.at(tuple_to_index(out_tuple, out_dims), col) += value;
      }
      Matrix block = raw * s.coin.inclusion.mat;
      for (int i = 0; i < block.rows(); ++i)
        for (int j = 0; j < block.cols(); ++j) alpha.at(i, s.offset + j) = block.at(i, j);
    }
    out.alpha[sigma.key()] = std::move(alpha);
  }
  return out;
}

StructureSpace p_algebra_structure_space(const PresentedOperad& p, const OperadAlgebra& open) {
  StructureSpace out;
  for (const auto& [key, comp] : p.presentation.generators.components) {
    const CorollaClassId& id = p.presentation.generators.ids.at(key);
    const CollectionComponent* target = open.carrier.find(id);
    if (!target || comp.space.dim() == 0) continue;
    out.equivariant_basis[key] =
        equivariant_maps(GroupAction{comp.space, comp.action, {}},
                         GroupAction{target->space, target->action, {}});
  }
  return out;
}

bool p_structure_admissible(const PresentedOperad& p, const OperadAlgebra& open,
                            const CollectionMorphism& phi) {
  std::map<std::string, Matrix> ext = extend_to_operad_morphism(*p.quotient.free, open, phi);
  for (const auto& [key, ideal] : p.quotient.ideal) {
    for (int r = 0; r < ideal.basis.rows(); ++r) {
      Vec img = ext.at(key).apply(ideal.basis.row(r));
      if (!std::all_of(img.begin(), img.end(), [](const Rat& x) { return x == 0; }))
        return false;
    }
  }
  return true;
}

POperad POperad::make(const PresentedOperad& p, const CollectionMorphism& delta1) {
  if (p.presentation.preset.kind != PresetKind::ordinary)
    throw invalid_input("P-algebra layer requires the ordinary preset");
  POperad out;
  out.p_ = p;
  const FreeOperad& fx = *p.quotient.free;

  // Extend delta1: P1 -> P1 ○ P1 to Delta: P -> P ○ P through the diagonal.
  OperadSide side{&fx, &p.quotient.section, &p.quotient.projection};
  std::map<std::string, Matrix> ext;
  for (const CorollaClassId& sigma : fx.classes()) {
    const std::string key = sigma.key();
    int dp = p.quotient.projection.at(key).rows();
    const FreeComponent& fc = fx.component(sigma);
    Matrix m(dp * dp, fc.dim());
    for (int col = 0; col < fc.dim(); ++col) {
      Vec e(fc.dim());
      e[col] = 1;
      for (const FreeOperad::Expansion& epn : fx.expand(sigma, e)) {
        std::map<int, Vec> pair_vectors;
        bool zero = false;
        for (const auto& [v, idx] : epn.decoration.vertex_basis) {
          CorollaClassId cls = classify_vertex(p.presentation.preset, epn.decoration.tau, v);
          const Matrix* d1 = delta1.find(cls.key());
          if (!d1) {
            zero = true;
            break;
          }
          Vec unit(d1->cols());
          unit[idx] = 1;
          pair_vectors[v] = d1->apply(unit);
        }
        if (zero) continue;
        Vec img = diagonal_value(side, side, sigma, epn.decoration.tau, epn.decoration.pins,
                                 pair_vectors);
        for (int r = 0; r < m.rows(); ++r) m.at(r, col) += epn.coefficient * img[r];
      }
    }
    ext[key] = std::move(m);
  }
  // Well-definedness: the relation ideal dies; then descend to P(n).
  out.delta_well_defined_ = true;
  for (const CorollaClassId& sigma : fx.classes()) {
    const std::string key = sigma.key();
    const Subspace& ideal = p.quotient.ideal.at(key);
    for (int r = 0; r < ideal.basis.rows(); ++r) {
      Vec img = ext.at(key).apply(ideal.basis.row(r));
      if (!std::all_of(img.begin(), img.end(), [](const Rat& x) { return x == 0; })) {
        out.delta_well_defined_ = false;
        break;
      }
    }
    if (!out.delta_well_defined_) break;
  }
  out.delta_symmetric_ = true;
  for (const CorollaClassId& sigma : fx.classes()) {
    const std::string key = sigma.key();
    int n = sigma.sig.at(0);
    Matrix d = ext.at(key) * p.quotient.section.at(key);
    out.delta_[n] = d;
    int dp = p.quotient.projection.at(key).rows();
    // Symmetry: swapping the two tensor factors fixes Delta.
    Matrix swapped(dp * dp, dp);
    for (int col = 0; col < dp; ++col)
      for (int i = 0; i < dp; ++i)
        for (int j = 0; j < dp; ++j) swapped.at(j * dp + i, col) = d.at(i * dp + j, col);
    if (!(swapped == d)) out.delta_symmetric_ = false;
  }
  return out;
}

int POperad::max_arity() const {
  int m = 1;
  for (const CorollaClassId& sigma : p_.quotient.free->classes())
    m = std::max(m, sigma.sig.at(0));
  return m;
}

int POperad::component_dim(int n) const {
  if (n == 1) return 1;  // P(1) = u
  CorollaClassId id{PresetKind::ordinary, {n}};
  auto it = p_.quotient.projection.find(id.key());
  if (it == p_.quotient.projection.end()) return 0;
  return it->second.rows();
}

const Matrix& POperad::delta(int n) const {
  auto it = delta_.find(n);
  if (it == delta_.end()) throw cap_exceeded("comultiplication outside caps");
  return it->second;
}

Matrix POperad::action_matrix(int n, const std::vector<int>& perm) const {
  if (n == 1) return Matrix::identity(1);
  CorollaClassId id{PresetKind::ordinary, {n}};
  auto it = tables_.find(n);
  if (it == tables_.end()) {
    CanonicalCorolla cc = canonical_corolla(id);
    // Quotient carrier action: conjugate the free component action.
    std::vector<Matrix> mats;
    const Matrix& proj = p_.quotient.projection.at(id.key());
    const Matrix& sec = p_.quotient.section.at(id.key());
    const FreeComponent& fc = p_.quotient.free->component(id);
    for (const Matrix& g : fc.action) mats.push_back(proj * (g * sec));
    it = tables_
             .emplace(n, std::make_unique<ActionTable>(cc.aut_generators, mats, proj.rows(),
                                                       cc.flag_count()))
             .first;
  }
  // Embed the S_n permutation of inputs as a corolla permutation fixing 0.
  std::vector<int> full(n + 1);
  full[0] = 0;
  for (int i = 0; i < n; ++i) full[i + 1] = perm[i] + 1;
  return it->second->matrix_of(full);
}

Matrix POperad::compose_2level(const std::vector<int>& arities) const {
  int n = static_cast<int>(arities.size());
  int total = 0;
  for (int d : arities) total += d;
  CorollaClassId target{PresetKind::ordinary, {total}};
  // Build the two-level tree: root 0 with inputs 1..n; child i at slot i for
  // arities >= 2 with flags chosen so sorted orders match slot order.
  LabeledGraph tau;
  Graph& g = tau.graph;
  g.vertices.push_back(0);
  g.flags.push_back(0);
  g.boundary[0] = 0;
  g.involution[0] = 0;
  tau.labeling.orientation[0] = FlagOrientation::out;
  std::vector<int> pins{0};
  std::vector<int> factor_arities;  // P factors: root then children >= 2
  for (int i = 1; i <= n; ++i) {
    g.flags.push_back(i);
    g.boundary[i] = 0;
    g.involution[i] = i;
    tau.labeling.orientation[i] = FlagOrientation::in;
  }
  int next_vertex = 1;
  for (int i = 1; i <= n; ++i) {
    int d = arities[i - 1];
    if (d == 1) {
      pins.push_back(i);
      continue;
    }
    int base = 100 * i;
    int v = next_vertex++;
    g.vertices.push_back(v);
    g.flags.push_back(base);
    g.boundary[base] = v;
    tau.labeling.orientation[base] = FlagOrientation::out;
    g.involution[base] = i;
    g.involution[i] = base;
    for (int k = 1; k <= d; ++k) {
      g.flags.push_back(base + k);
      g.boundary[base + k] = v;
      g.involution[base + k] = base + k;
      tau.labeling.orientation[base + k] = FlagOrientation::in;
      pins.push_back(base + k);
    }
  }
  std::sort(g.flags.begin(), g.flags.end());
  std::sort(g.vertices.begin(), g.vertices.end());

  // Domain: P(n) ⊗ (⊗_{d_i >= 2} P(d_i)).
  std::vector<int> dims{component_dim(n)};
  std::vector<int> vertex_of_factor{0};
  {
    int v = 1;
    for (int i = 1; i <= n; ++i)
      if (arities[i - 1] >= 2) {
        dims.push_back(component_dim(arities[i - 1]));
        vertex_of_factor.push_back(v++);
      }
  }
  int dom = 1;
  for (int d : dims) dom *= d;
  const Matrix& proj = p_.quotient.projection.at(target.key());
  Matrix out(proj.rows(), dom);
  const FreeOperad& fx = *p_.quotient.free;
  for (int col = 0; col < dom; ++col) {
    std::vector<int> tuple = index_to_tuple(col, dims);
    std::map<int, Vec> elements;
    bool ok = true;
    // Root factor.
    {
      CorollaClassId cls{PresetKind::ordinary, {n}};
      const Matrix& sec = p_.quotient.section.at(cls.key());
      Vec unit(sec.cols());
      unit[tuple[0]] = 1;
      elements[0] = sec.apply(unit);
    }
    for (size_t fct = 1; fct < dims.size(); ++fct) {
      int v = vertex_of_factor[fct];
      int d = 0;
      {
        // Recover the arity of this child from the graph.
        int count = 0;
        for (int f : g.flags_at(v))
          if (tau.labeling.orientation.at(f) == FlagOrientation::in) ++count;
        d = count;
      }
      CorollaClassId cls{PresetKind::ordinary, {d}};
      const Matrix& sec = p_.quotient.section.at(cls.key());
      Vec unit(sec.cols());
      unit[tuple[fct]] = 1;
      elements[v] = sec.apply(unit);
    }
    if (!ok) continue;
    Vec composed = fx.compose_elements(target, tau, pins, elements);
    Vec reduced = proj.apply(composed);
    for (int r = 0; r < out.rows(); ++r) out.at(r, col) = reduced[r];
  }
  return out;
}

int FreePAlgebra::dim(int n) const {
  if (n < 1 || n > cap) return 0;
  if (n == 1) return v1.dim();
  return degrees[n].coin.space.dim();
}

FreePAlgebra free_p_algebra(const POperad& p, const VectorSpace& v1, int cap) {
  FreePAlgebra out;
  out.p = &p;
  out.v1 = v1;
  out.cap = cap;
  out.degrees.resize(cap + 1);
  int dv = v1.dim();
  for (int n = 2; n <= cap; ++n) {
    int dp = p.component_dim(n);
    int words = 1;
    for (int i = 0; i < n; ++i) words *= dv;
    int raw = dp * words;
    out.degrees[n].raw_dim = raw;
    if (raw == 0) {
      out.degrees[n].coin =
          Coinvariants{VectorSpace{}, LinearMap{VectorSpace{}, VectorSpace{}, Matrix(0, 0)},
                       LinearMap{VectorSpace{}, VectorSpace{}, Matrix(0, 0)}, Matrix(0, 0)};
      continue;
    }
    // Diagonal S_n action on P(n) ⊗ V^⊗n.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    Matrix sym(raw, raw);
    int order = 0;
    std::vector<int> word_dims(n, dv);
    do {
      Matrix pm = p.action_matrix(n, perm);
      Matrix m(raw, raw);
      for (int col = 0; col < raw; ++col) {
        int pidx = col / words, widx = col % words;
        std::vector<int> w = index_to_tuple(widx, word_dims);
        std::vector<int> image(n);
        for (int i = 0; i < n; ++i) image[perm[i]] = w[i];
        int wout = tuple_to_index(image, word_dims);
        for (int r = 0; r < pm.rows(); ++r)
          if (pm.at(r, pidx) != 0) m.at(r * words + wout, col) += pm.at(r, pidx);
      }
      sym = sym + m;
      ++order;
    } while (std::next_permutation(perm.begin(), perm.end()));
    sym = sym.scaled(Rat(1) / Rat(order));
    VectorSpace raw_space = VectorSpace::anonymous(raw, "r");
    Matrix cols = sym.transpose();
    std::vector<int> pivots = rref(cols);
    int r = cols.rows();
    Matrix incl(raw, r), proj(r, raw);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < raw; ++j) {
        incl.at(j, i) = cols.at(i, j);
        proj.at(i, j) = sym.at(pivots[i], j);
      }
    VectorSpace co = VectorSpace::anonymous(r, "d");
    out.degrees[n].coin = Coinvariants{co, LinearMap{raw_space, co, proj},
                                       LinearMap{co, raw_space, incl}, sym};
  }
  return out;
}

Vec FreePAlgebra::compose(int n, const Vec& p_element,
                          const std::vector<std::pair<int, Vec>>& args) const {
  if (static_cast<int>(args.size()) != n)
    throw invalid_input("compose: argument count must match the operation arity");
  int total = 0;
  std::vector<int> arities;
  for (const auto& [d, x] : args) {
    total += d;
    arities.push_back(d);
  }
  if (total > cap) throw cap_exceeded("P-algebra composition exceeds the degree cap");
  int dv = v1.dim();
  Matrix gamma = p->compose_2level(arities);
  int dp_out = p->component_dim(total);
  std::vector<int> word_dims(total, dv);
  int words_out = 1;
  for (int i = 0; i < total; ++i) words_out *= dv;
  Vec raw_out(size_t(dp_out) * words_out);

  // Expand arguments: degree-1 arguments are plain V-vectors; higher degrees
  // expand through their coinvariant inclusions into (P-part, word) terms.
  struct Term {
    int pidx;  // -1 for degree 1
    std::vector<int> word;
    Rat coeff;
  };
  std::vector<std::vector<Term>> expanded;
  for (const auto& [d, x] : args) {
    std::vector<Term> terms;
    if (d == 1) {
      for (int i = 0; i < dv; ++i)
        if (x[i] != 0) terms.push_back({-1, {i}, x[i]});
    } else {
      const Coinvariants& c = degrees[d].coin;
      int words = 1;
      for (int i = 0; i < d; ++i) words *= dv;
      Vec raw = c.inclusion.mat.apply(x);
      for (int idx = 0; idx < static_cast<int>(raw.size()); ++idx) {
        if (raw[idx] == 0) continue;
        std::vector<int> wd(d, dv);
        terms.push_back({idx / words, index_to_tuple(idx % words, wd), raw[idx]});
      }
    }
    expanded.push_back(std::move(terms));
  }
  // gamma domain: P(n) ⊗ (⊗_{d_i >= 2} P(d_i)).
  std::vector<int> gdims{p->component_dim(n)};
  for (int d : arities)
    if (d >= 2) gdims.push_back(p->component_dim(d));
  std::vector<size_t> choice(args.size(), 0);
  std::function<void(size_t, Rat)> rec = [&](size_t at, Rat coeff) {
    if (at == args.size()) {
      std::vector<int> gtuple;
      std::vector<int> word;
      for (size_t i = 0; i < args.size(); ++i) {
        const Term& t = expanded[i][choice[i]];
        if (t.pidx >= 0) gtuple.push_back(t.pidx);
        word.insert(word.end(), t.word.begin(), t.word.end());
      }
      for (int pi = 0; pi < p->component_dim(n); ++pi) {
        if (p_element[pi] == 0) continue;
        std::vector<int> full{pi};
        full.insert(full.end(), gtuple.begin(), gtuple.end());
        int gcol = tuple_to_index(full, gdims);
        int widx = tuple_to_index(word, word_dims);
        for (int r = 0; r < dp_out; ++r) {
          const Rat& gv = gamma.at(r, gcol);
          if (gv != 0) raw_out[size_t(r) * words_out + widx] += coeff * p_element[pi] * gv;
        }
      }
      return;
    }
    for (size_t c = 0; c < expanded[at].size(); ++c) {
      choice[at] = c;
      rec(at + 1, coeff * expanded[at][c].coeff);
    }
  };
  bool any_empty = std::any_of(expanded.begin(), expanded.end(),
                               [](const auto& t) { return t.empty(); });
  if (!any_empty) rec(0, 1);
  if (total == 1) return raw_out;  // cannot happen: n >= 1, args >= 1 each
  return degrees[total].coin.projection.mat.apply(raw_out);
}

Matrix FreePAlgebra::word_projection(int n, const Vec& p_element) const {
  int dv = v1.dim();
  int words = 1;
  for (int i = 0; i < n; ++i) words *= dv;
  if (n == 1) return Matrix::identity(dv);
  Matrix m(dim(n), words);
  for (int w = 0; w < words; ++w) {
    Vec raw(size_t(degrees[n].raw_dim));
    for (int pi = 0; pi < p->component_dim(n); ++pi)
      if (p_element[pi] != 0) raw[size_t(pi) * words + w] = p_element[pi];
    Vec co = degrees[n].coin.projection.mat.apply(raw);
    for (int r = 0; r < m.rows(); ++r) m.at(r, w) = co[r];
  }
  return m;
}

PJMap p_j_map(const POperad& p, const FreePAlgebra& f_ew, const FreePAlgebra& f_e,
              const FreePAlgebra& f_w) {
  PJMap out;
  int de = f_e.v1.dim(), dw = f_w.v1.dim();
  for (int n = 2; n <= std::min(f_ew.cap, 3); ++n) {
    int dp = p.component_dim(n);
    if (dp == 0) continue;
    int ew_words = 1, e_words = 1, w_words = 1;
    for (int i = 0; i < n; ++i) {
      ew_words *= de * dw;
      e_words *= de;
      w_words *= dw;
    }
    int raw_ew = dp * ew_words;
    int raw_e = dp * e_words, raw_w = dp * w_words;
    // big: P(n) ⊗ (E⊗W)^n -> (P(n) ⊗ E^n) ⊗ (P(n) ⊗ W^n).
    Matrix big(size_t(raw_e) * raw_w > 0 ? raw_e * raw_w : 0, raw_ew);
    const Matrix& dl = p.delta(n);
    std::vector<int> pair_dims(n, de * dw);
    for (int col = 0; col < raw_ew; ++col) {
      int pidx = col / ew_words, widx = col % ew_words;
      std::vector<int> pw = index_to_tuple(widx, pair_dims);
      std::vector<int> ew(n), ww(n);
      for (int i = 0; i < n; ++i) {
        ew[i] = pw[i] / dw;
        ww[i] = pw[i] % dw;
      }
      std::vector<int> edims(n, de), wdims(n, dw);
      int eword = tuple_to_index(ew, edims), wword = tuple_to_index(ww, wdims);
      for (int r = 0; r < dp * dp; ++r) {
        const Rat& c = dl.at(r, pidx);
        if (c == 0) continue;
        int p1 = r / dp, p2 = r % dp;
        big.at((p1 * e_words + eword) * size_t(raw_w) + (p2 * w_words + wword), col) += c;
      }
    }
    // Descend: j~ = (pi_E ⊗ pi_W) ∘ big ∘ incl_EW.
    Matrix pi_e = f_e.degrees[n].coin.projection.mat;
    Matrix pi_w = f_w.degrees[n].coin.projection.mat;
    Matrix pi = kronecker(pi_e, pi_w);
    Matrix restricted = pi * (big * f_ew.degrees[n].coin.inclusion.mat);
    // Descent check: the composite must be constant on coinvariant classes.
    Matrix via_sym = pi * (big * (f_ew.degrees[n].coin.symmetrizer *
                                  f_ew.degrees[n].coin.inclusion.mat));
    if (!(via_sym == restricted)) out.descends = false;
    out.maps[n] = std::move(restricted);
  }
  return out;
}

PAlgebraQuotient p_algebra_quotient(const POperad& p, const PAlgebraPresentation& pres,
                                    int cap) {
  PAlgebraQuotient q;
  q.presentation = pres;
  q.free = free_p_algebra(p, pres.v1, cap);
  // Ideal saturation: close the relations under operations with generators.
  std::map<int, Subspace> ideal;
  for (int n = 1; n <= cap; ++n) {
    VectorSpace amb = VectorSpace::anonymous(q.free.dim(n), "f");
    auto it = pres.relations.find(n);
    ideal[n] = it == pres.relations.end() ? Subspace::zero(amb) : it->second;
  }
  bool changed = true;
  int rounds = 0;
  while (changed) {
    if (++rounds > 32) throw internal_error("P-algebra ideal saturation did not stabilize");
    changed = false;
    for (int k = 2; k <= p.max_arity(); ++k) {
      int dp = p.component_dim(k);
      if (dp == 0) continue;
      for (int slot = 0; slot < k; ++slot) {
        for (int d = 1; d <= cap; ++d) {
          const Subspace& src = ideal[d];
          if (src.rank() == 0) continue;
          int total = d + (k - 1);
          if (total > cap) continue;
          for (int zi = 0; zi < src.basis.rows(); ++zi) {
            // Other arguments run over generator basis vectors.
            std::vector<int> gen_idx(k - 1, 0);
            std::function<void(int)> rec = [&](int at) {
              if (at == k - 1) {
                std::vector<std::pair<int, Vec>> args;
                int gp = 0;
                for (int s = 0; s < k; ++s) {
                  if (s == slot) {
                    args.emplace_back(d, src.basis.row(zi));
                  } else {
                    Vec e(q.free.v1.dim());
                    e[gen_idx[gp++]] = 1;
                    args.emplace_back(1, e);
                  }
                }
                for (int pi = 0; pi < dp; ++pi) {
                  Vec pe(dp);
                  pe[pi] = 1;
                  Vec img = q.free.compose(k, pe, args);
                  Subspace& tgt = ideal[total];
                  if (!tgt.contains(img)) {
                    std::vector<Vec> rows;
                    for (int i = 0; i < tgt.basis.rows(); ++i) rows.push_back(tgt.basis.row(i));
                    rows.push_back(img);
                    tgt = Subspace::span(rows, tgt.ambient);
                    changed = true;
                  }
                }
                return;
              }
              for (int i = 0; i < q.free.v1.dim(); ++i) {
                gen_idx[at] = i;
                rec(at + 1);
              }
            };
            rec(0);
          }
        }
      }
    }
  }
  q.ideal = ideal;
  for (int n = 1; n <= cap; ++n) {
    int dn = q.free.dim(n);
    const Subspace& idl = ideal[n];
    std::vector<bool> is_pivot(dn, false);
    for (int i = 0; i < idl.basis.rows(); ++i)
      for (int j = 0; j < dn; ++j)
        if (idl.basis.at(i, j) != 0) {
          is_pivot[j] = true;
          break;
        }
    std::vector<int> free_cols;
    for (int j = 0; j < dn; ++j)
      if (!is_pivot[j]) free_cols.push_back(j);
    int qd = static_cast<int>(free_cols.size());
    Matrix proj(qd, dn), section(dn, qd);
    for (int j = 0; j < dn; ++j) {
      Vec e(dn);
      e[j] = 1;
      Vec red = idl.reduce(e);
      for (int i = 0; i < qd; ++i) proj.at(i, j) = red[free_cols[i]];
    }
    for (int i = 0; i < qd; ++i) section.at(free_cols[i], i) = 1;
    q.projection[n] = proj;
    q.section[n] = section;
  }
  q.dims.assign(cap + 1, 0);
  for (int n = 1; n <= cap; ++n) q.dims[n] = q.projection.at(n).rows();
  return q;
}

PTensorResult tensor_p_algebras(const POperad& p, const PAlgebraQuotient& v,
                                const PAlgebraQuotient& w, int cap) {
  PTensorResult out;
  VectorSpace vw = tensor(v.free.v1, w.free.v1);
  out.presentation.v1 = vw;
  FreePAlgebra f_vw = free_p_algebra(p, vw, cap);
  int dv = v.free.v1.dim(), dw = w.free.v1.dim();
  // Relations: kernel of F_P(V⊗W)_n -> V_n ⊗ W_n through the diagonal route.
  for (int n = 2; n <= cap; ++n) {
    int dn = f_vw.dim(n);
    if (dn == 0) continue;
    int target_dim = v.dims[n] * w.dims[n];
    Matrix m(target_dim, dn);
    int pair_words = 1;
    for (int i = 0; i < n; ++i) pair_words *= dv * dw;
    const Matrix& dl = p.delta(n);
    int dp = p.component_dim(n);
    int v_words = 1, w_words = 1;
    for (int i = 0; i < n; ++i) {
      v_words *= dv;
      w_words *= dw;
    }
    for (int col = 0; col < dn; ++col) {
      Vec raw = f_vw.degrees[n].coin.inclusion.mat.apply([&] {
        Vec e(dn);
        e[col] = 1;
        return e;
      }());
      for (int idx = 0; idx < static_cast<int>(raw.size()); ++idx) {
        if (raw[idx] == 0) continue;
        int pidx = idx / pair_words, widx = idx % pair_words;
        std::vector<int> pdims(n, dv * dw);
        std::vector<int> pw = index_to_tuple(widx, pdims);
        std::vector<int> vw_split_v(n), vw_split_w(n);
        for (int i = 0; i < n; ++i) {
          vw_split_v[i] = pw[i] / dw;
          vw_split_w[i] = pw[i] % dw;
        }
        std::vector<int> vdims(n, dv), wdims(n, dw);
        int vword = tuple_to_index(vw_split_v, vdims);
        int wword = tuple_to_index(vw_split_w, wdims);
        for (int r = 0; r < dp * dp; ++r) {
          const Rat& c = dl.at(r, pidx);
          if (c == 0) continue;
          int p1 = r / dp, p2 = r % dp;
          // Left: project (p1, vword), quotient by V; right similarly.
          Vec raw_v(size_t(dp) * v_words);
          raw_v[size_t(p1) * v_words + vword] = 1;
          Vec xv = v.projection.at(n).apply(
              v.free.degrees[n].coin.projection.mat.apply(raw_v));
          Vec raw_w(size_t(dp) * w_words);
          raw_w[size_t(p2) * w_words + wword] = 1;
          Vec xw = w.projection.at(n).apply(
              w.free.degrees[n].coin.projection.mat.apply(raw_w));
          for (int i = 0; i < v.dims[n]; ++i) {
            if (xv[i] == 0) continue;
            for (int j = 0; j < w.dims[n]; ++j)
              if (xw[j] != 0) m.at(i * w.dims[n] + j, col) += raw[idx] * c * xv[i] * xw[j];
          }
        }
      }
    }
    Matrix ker = kernel(m);
    std::vector<Vec> rows;
    for (int i = 0; i < ker.rows(); ++i) rows.push_back(ker.row(i));
    out.presentation.relations[n] =
        Subspace::span(rows, VectorSpace::anonymous(dn, "f"));
  }
  out.quotient = p_algebra_quotient(p, out.presentation, cap);
  return out;
}

PCohomResult cohom_p_algebras(const POperad& p, const PAlgebraQuotient& v,
                              const PAlgebraQuotient& w, int cap) {
  PCohomResult out;
  int dv = v.free.v1.dim(), dw = w.free.v1.dim();
  out.e1 = tensor(v.free.v1, w.free.v1.dual());
  int de = out.e1.dim();
  FreePAlgebra f_e = free_p_algebra(p, out.e1, cap);

  // h_n: F_P(V)_n -> F_P(E)_n ⊗ W_n, columnwise through the diagonal: each
  // letter v_i becomes sum_j (v_i ⊗ w_j*) ⊗ w_j, Delta splits the P part.
  for (int n = 2; n <= cap; ++n) {
    int dn = v.free.dim(n);
    int dim_fe = f_e.dim(n);
    int dim_w = w.dims[n];
    Matrix h(dim_fe * dim_w, dn);
    if (dn == 0 || dim_fe * dim_w == 0) {
      out.h[n] = std::move(h);
      continue;
    }
    const Matrix& dl = p.delta(n);
    int dp = p.component_dim(n);
    int v_words = 1, e_words = 1, w_words = 1;
    for (int i = 0; i < n; ++i) {
      v_words *= dv;
      e_words *= de;
      w_words *= dw;
    }
    std::vector<int> vdims(n, dv), wdims(n, dw), edims(n, de);
    for (int col = 0; col < dn; ++col) {
      Vec e(dn);
      e[col] = 1;
      Vec raw = v.free.degrees[n].coin.inclusion.mat.apply(e);
      for (int idx = 0; idx < static_cast<int>(raw.size()); ++idx) {
        if (raw[idx] == 0) continue;
        int pidx = idx / v_words, widx = idx % v_words;
        std::vector<int> word = index_to_tuple(widx, vdims);
        // Letters: v_i -> sum_{j} (v_i ⊗ w_j*) ⊗ w_j: iterate W-words.
        std::vector<int> wj(n, 0);
        std::function<void(int)> letters = [&](int at) {
          if (at == n) {
            std::vector<int> eword(n);
            for (int i = 0; i < n; ++i) eword[i] = word[i] * dw + wj[i];
            int ewidx = tuple_to_index(eword, edims);
            int wwidx = tuple_to_index(wj, wdims);
            for (int r = 0; r < dp * dp; ++r) {
              const Rat& c = dl.at(r, pidx);
              if (c == 0) continue;
              int p1 = r / dp, p2 = r % dp;
              Vec raw_e(size_t(dp) * e_words);
              raw_e[size_t(p1) * e_words + ewidx] = 1;
              Vec xe = f_e.degrees[n].coin.projection.mat.apply(raw_e);
              Vec raw_w(size_t(dp) * w_words);
              raw_w[size_t(p2) * w_words + wwidx] = 1;
              Vec xw =
                  w.projection.at(n).apply(w.free.degrees[n].coin.projection.mat.apply(raw_w));
              for (int i = 0; i < dim_fe; ++i) {
                if (xe[i] == 0) continue;
                for (int j = 0; j < dim_w; ++j)
                  if (xw[j] != 0)
                    h.at(i * dim_w + j, col) += raw[idx] * c * xe[i] * xw[j];
              }
            }
            return;
          }
          for (int j = 0; j < dw; ++j) {
            wj[at] = j;
            letters(at + 1);
          }
        };
        letters(0);
      }
    }
    out.h[n] = std::move(h);
  }

  // R~ and the quotient E.
  PAlgebraPresentation e_pres;
  e_pres.v1 = out.e1;
  for (int n = 2; n <= cap; ++n) {
    int dim_fe = f_e.dim(n);
    int dim_w = w.dims[n];
    std::vector<Vec> rows;
    auto it = v.presentation.relations.find(n);
    if (it != v.presentation.relations.end() && dim_w > 0) {
      for (int r = 0; r < it->second.basis.rows(); ++r) {
        Vec img = out.h.at(n).apply(it->second.basis.row(r));
        for (int b = 0; b < dim_w; ++b) {
          Vec slice(dim_fe);
          for (int e = 0; e < dim_fe; ++e) slice[e] = img[e * dim_w + b];
          rows.push_back(std::move(slice));
        }
      }
    }
    Subspace sub = Subspace::span(rows, VectorSpace::anonymous(dim_fe, "f"));
    out.r_tilde[n] = sub;
    e_pres.relations[n] = sub;
  }
  out.e = p_algebra_quotient(p, e_pres, cap);

  // Coevaluation well-definedness: relations die under (q_E ⊗ id) ∘ h.
  out.coevaluation_well_defined = true;
  for (int n = 2; n <= cap; ++n) {
    auto it = v.presentation.relations.find(n);
    if (it == v.presentation.relations.end()) continue;
    int dim_w = w.dims[n];
    if (dim_w == 0) continue;
    Matrix qe_id = kronecker(out.e.projection.at(n), Matrix::identity(dim_w));
    for (int r = 0; r < it->second.basis.rows(); ++r) {
      Vec img = qe_id.apply(out.h.at(n).apply(it->second.basis.row(r)));
      if (!std::all_of(img.begin(), img.end(), [](const Rat& x) { return x == 0; })) {
        out.coevaluation_well_defined = false;
        break;
      }
    }
    if (!out.coevaluation_well_defined) break;
  }
  return out;
}

namespace {

// Associativity relations for the regular-representation binary generator:
// the kernel of the word-evaluation map at arity 3.
std::map<std::string, Subspace> associative_relations(const FreeOperad& fx) {
  CorollaClassId a3{PresetKind::ordinary, {3}};
  const FreeComponent& f3 = fx.component(a3);
  std::map<std::vector<int>, int> word_index;
  Matrix eval(6, f3.dim());
  for (int col = 0; col < f3.dim(); ++col) {
    Vec e(f3.dim());
    e[col] = 1;
    for (const FreeOperad::Expansion& ex : fx.expand(a3, e)) {
      const Graph& g = ex.decoration.tau.graph;
      if (g.vertices.size() != 2) continue;
      // Evaluate the decorated tree to a word: decoration 0 multiplies the
      // (sorted) inputs in order, decoration 1 in reverse.
      std::function<std::vector<int>(int)> word_at = [&](int v) -> std::vector<int> {
        std::vector<int> ins;
        for (int f : g.flags_at(v))
          if (ex.decoration.tau.labeling.orientation.at(f) == FlagOrientation::in)
            ins.push_back(f);
        std::sort(ins.begin(), ins.end());
        if (ex.decoration.vertex_basis.at(v) == 1) std::reverse(ins.begin(), ins.end());
        std::vector<int> outw;
        for (int f : ins) {
          int pr = g.involution.at(f);
          if (pr == f) {
            outw.push_back(f);
          } else {
            auto sub = word_at(g.boundary.at(pr));
            outw.insert(outw.end(), sub.begin(), sub.end());
          }
        }
        return outw;
      };
      int root = -1;
      for (int v : g.vertices)
        for (int f : g.flags_at(v))
          if (ex.decoration.tau.labeling.orientation.at(f) == FlagOrientation::out &&
              g.involution.at(f) == f)
            root = v;
      std::vector<int> w = word_at(root);
      for (int& f : w)
        for (size_t i = 0; i < ex.decoration.pins.size(); ++i)
          if (ex.decoration.pins[i] == f) {
            f = static_cast<int>(i);
            break;
          }
      auto [it, fresh] = word_index.emplace(w, word_index.size());
      (void)fresh;
      eval.at(it->second, col) += ex.coefficient;
    }
  }
  Matrix ker = kernel(eval);
  std::vector<Vec> rows;
  for (int i = 0; i < ker.rows(); ++i) rows.push_back(ker.row(i));
  std::map<std::string, Subspace> out;
  out[a3.key()] = Subspace::span(rows, f3.total);
  return out;
}

}  // namespace

POperad associative_p_operad(const Caps& caps) {
  GammaPreset preset{PresetKind::ordinary};
  Collection gens;
  gens.preset = preset;
  CollectionComponent comp;
  comp.space = VectorSpace{{"m", "mop"}};
  Matrix swap(2, 2);
  swap.at(0, 1) = 1;
  swap.at(1, 0) = 1;
  comp.action = {swap};
  gens.set({PresetKind::ordinary, {2}}, comp);

  OperadPresentation pres;
  pres.preset = preset;
  pres.generators = gens;
  pres.caps = caps;
  FreeOperad probe(preset, gens, caps);
  pres.relations = associative_relations(probe);
  PresentedOperad p = PresentedOperad::make(pres);

  // Diagonal comultiplication on the regular representation: g -> g ⊗ g.
  CollectionMorphism delta1;
  Matrix d1(4, 2);
  d1.at(0, 0) = 1;  // m -> m ⊗ m
  d1.at(3, 1) = 1;  // mop -> mop ⊗ mop
  delta1.maps[CorollaClassId{PresetKind::ordinary, {2}}.key()] = d1;
  return POperad::make(p, delta1);
}

std::map<int, Matrix> associative_word_identification(const FreePAlgebra& f) {
  const POperad& p = *f.p;
  std::map<int, Matrix> out;
  out[1] = Matrix::identity(f.v1.dim());
  for (int n = 2; n <= f.cap; ++n) {
    // The "multiply in order" element of P(n): the left comb decorated with
    // the order-preserving generator.
    const QuotientOperad& q = p.presented().quotient;
    const FreeOperad& fx = *q.free;
    CorollaClassId cls{PresetKind::ordinary, {n}};
    LabeledGraph tau;
    Graph& g = tau.graph;
    std::vector<int> pins;
    // vertices 1..n-1; flags: inputs x_j = 100+j, outs o_k = 200+k,
    // edge halves h_k = k (so sorted order puts the subtree first).
    for (int k = 1; k <= n - 1; ++k) g.vertices.push_back(k);
    auto add_flag = [&](int id, int vertex, FlagOrientation o) {
      g.flags.push_back(id);
      g.boundary[id] = vertex;
      g.involution[id] = id;
      tau.labeling.orientation[id] = o;
    };
    add_flag(101, 1, FlagOrientation::in);
    add_flag(102, 1, FlagOrientation::in);
    add_flag(201, 1, FlagOrientation::out);
    for (int k = 2; k <= n - 1; ++k) {
      add_flag(k, k, FlagOrientation::in);
      add_flag(101 + k, k, FlagOrientation::in);
      add_flag(200 + k, k, FlagOrientation::out);
      g.involution[k] = 200 + k - 1;
      g.involution[200 + k - 1] = k;
    }
    std::sort(g.flags.begin(), g.flags.end());
    pins.push_back(200 + n - 1);  // the root output
    for (int j = 1; j <= n; ++j) pins.push_back(100 + j);
    ConcreteDecoration dec;
    dec.tau = tau;
    dec.pins = pins;
    for (int k = 1; k <= n - 1; ++k) dec.vertex_basis[k] = 0;  // all "m"
    Vec p_id = q.projection.at(cls.key()).apply(fx.inject(cls, dec));
    out[n] = f.word_projection(n, p_id);
  }
  return out;
}

}  // namespace opal
