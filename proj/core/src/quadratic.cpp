#include "opal/quadratic.hpp"

#include <algorithm>
#include <functional>

#include "opal/errors.hpp"

namespace opal {

AlgebraPresentation AlgebraPresentation::free_algebra(const VectorSpace& gens, int degree) {
  AlgebraPresentation a;
  a.generators = gens;
  a.degree = degree;
  a.relations = Subspace::zero(tensor_power(gens, degree));
  return a;
}

AlgebraPresentation AlgebraPresentation::polynomial_line() {
  return free_algebra(VectorSpace{{"t"}}, 2);
}

AlgebraPresentation AlgebraPresentation::dual_numbers(int degree) {
  AlgebraPresentation a;
  a.generators = VectorSpace{{"e"}};
  a.degree = degree;
  a.relations = Subspace::full(tensor_power(a.generators, degree));
  return a;
}

AlgebraPresentation AlgebraPresentation::polynomial_plane() {
  return quantum_plane(Rat(1));
}

AlgebraPresentation AlgebraPresentation::quantum_plane(const Rat& q) {
  if (q == 0) throw invalid_input("quantum plane requires a nonzero parameter");
  AlgebraPresentation a;
  a.generators = VectorSpace{{"x", "y"}};
  a.degree = 2;
  VectorSpace sq = tensor_power(a.generators, 2);
  Vec rel(4);
  rel[1] = 1;   // x⊗y
  rel[2] = -q;  // y⊗x
  a.relations = Subspace::span({rel}, sq);
  return a;
}

AlgebraPresentation AlgebraPresentation::exterior_plane() {
  AlgebraPresentation a;
  a.generators = VectorSpace{{"x", "y"}};
  a.degree = 2;
  VectorSpace sq = tensor_power(a.generators, 2);
  Vec xx(4), yy(4), sym(4);
  xx[0] = 1;
  yy[3] = 1;
  sym[1] = 1;
  sym[2] = 1;
  a.relations = Subspace::span({xx, yy, sym}, sq);
  return a;
}

namespace {

// Distinct relation degrees, lowest first.
std::vector<std::pair<int, const Subspace*>> relation_layers(const AlgebraPresentation& a) {
  std::vector<std::pair<int, const Subspace*>> out;
  out.emplace_back(a.degree, &a.relations);
  for (const auto& [d, s] : a.extra_relations) out.emplace_back(d, &s);
  return out;
}

}  // namespace

GradedComponent graded_component(const AlgebraPresentation& a, int n) {
  if (n < 0) throw invalid_input("graded component of negative degree");
  GradedComponent out;
  VectorSpace vn = tensor_power(a.generators, n);
  if (n == 0) {
    out.dimension = 1;
    out.basis_words = {"1"};
    out.ideal_component = Subspace::zero(vn);
    return out;
  }
  int d = a.generators.dim();
  std::vector<Vec> rows;
  for (const auto& [deg, rel] : relation_layers(a)) {
    if (deg > n || rel->rank() == 0) continue;
    int rest = n - deg;
    int block = 1;
    for (int i = 0; i < deg; ++i) block *= d;
    // V^⊗i ⊗ R ⊗ V^⊗(n-deg-i): embed each relation row at every position.
    for (int i = 0; i <= rest; ++i) {
      int left = 1, right = 1;
      for (int t = 0; t < i; ++t) left *= d;
      for (int t = 0; t < rest - i; ++t) right *= d;
      for (int r = 0; r < rel->basis.rows(); ++r) {
        for (int l = 0; l < left; ++l)
          for (int q = 0; q < right; ++q) {
            Vec row(vn.dim());
            for (int m = 0; m < block; ++m) {
              const Rat& c = rel->basis.at(r, m);
              if (c == 0) continue;
              row[(l * block + m) * right + q] = c;
            }
            rows.push_back(std::move(row));
          }
      }
    }
  }
  out.ideal_component = Subspace::span(rows, vn);
  out.dimension = vn.dim() - out.ideal_component.rank();
  // Monomial basis: non-pivot coordinates of the ideal.
  std::vector<bool> is_pivot(vn.dim(), false);
  for (int i = 0; i < out.ideal_component.basis.rows(); ++i)
    for (int j = 0; j < vn.dim(); ++j)
      if (out.ideal_component.basis.at(i, j) != 0) {
        is_pivot[j] = true;
        break;
      }
  for (int j = 0; j < vn.dim(); ++j)
    if (!is_pivot[j]) out.basis_words.push_back(vn.labels[j]);
  return out;
}

std::vector<int> graded_dimensions(const AlgebraPresentation& a, int max_degree) {
  std::vector<int> dims;
  for (int n = 0; n <= max_degree; ++n) dims.push_back(graded_component(a, n).dimension);
  return dims;
}

AlgebraPresentation dual(const AlgebraPresentation& a) {
  if (!a.is_single_degree())
    throw invalid_input("duality requires single-degree relations");
  AlgebraPresentation out;
  out.generators = a.generators.dual();
  out.degree = a.degree;
  out.relations = annihilator(a.relations, tensor_power(out.generators, a.degree));
  return out;
}

namespace {

// S23-type regrouping of relation rows: from (V_A)^⊗N ⊗ (V_B)^⊗N coordinates
// into (V_A ⊗ V_B)^⊗N coordinates.
Vec interleave_row(const Vec& row, int da, int db, int n) {
  LinearMap s = interleave(n, VectorSpace::anonymous(da, "a"), VectorSpace::anonymous(db, "b"));
  return s(row);
}

std::vector<Vec> product_relations(const AlgebraPresentation& a, const AlgebraPresentation& b,
                                   bool white) {
  int n = a.degree;
  int da = a.generators.dim(), db = b.generators.dim();
  int ta = 1, tb = 1;
  for (int i = 0; i < n; ++i) {
    ta *= da;
    tb *= db;
  }
  std::vector<Vec> rows;
  auto add_pairs = [&](const Matrix& ra, const Matrix& rb) {
    // span of S23(ra_i ⊗ rb_j)
    for (int i = 0; i < ra.rows(); ++i)
      for (int j = 0; j < rb.rows(); ++j) {
        Vec flat(ta * tb);
        for (int x = 0; x < ta; ++x) {
          const Rat& cx = ra.at(i, x);
          if (cx == 0) continue;
          for (int y = 0; y < tb; ++y) {
            const Rat& cy = rb.at(j, y);
            if (cy != 0) flat[x * tb + y] = cx * cy;
          }
        }
        rows.push_back(interleave_row(flat, da, db, n));
      }
  };
  if (white) {
    add_pairs(a.relations.basis, Matrix::identity(tb));
    add_pairs(Matrix::identity(ta), b.relations.basis);
  } else {
    add_pairs(a.relations.basis, b.relations.basis);
  }
  return rows;
}

}  // namespace

AlgebraPresentation white_product(const AlgebraPresentation& a, const AlgebraPresentation& b) {
  if (a.degree != b.degree) throw invalid_input("white product: degree mismatch");
  if (!a.is_single_degree() || !b.is_single_degree())
    throw invalid_input("white product requires single-degree presentations");
  AlgebraPresentation out;
  out.generators = tensor(a.generators, b.generators);
  out.degree = a.degree;
  out.relations = Subspace::span(product_relations(a, b, true),
                                 tensor_power(out.generators, out.degree));
  return out;
}

AlgebraPresentation black_product(const AlgebraPresentation& a, const AlgebraPresentation& b) {
  if (a.degree != b.degree) throw invalid_input("black product: degree mismatch");
  if (!a.is_single_degree() || !b.is_single_degree())
    throw invalid_input("black product requires single-degree presentations");
  AlgebraPresentation out;
  out.generators = tensor(a.generators, b.generators);
  out.degree = a.degree;
  out.relations = Subspace::span(product_relations(a, b, false),
                                 tensor_power(out.generators, out.degree));
  return out;
}

AlgebraPresentation quadratic_truncation(const AlgebraPresentation& b) {
  AlgebraPresentation out;
  out.generators = b.generators;
  out.degree = 2;
  if (b.degree == 2) {
    out.relations = b.relations;
  } else {
    auto it = b.extra_relations.find(2);
    out.relations = it != b.extra_relations.end()
                        ? it->second
                        : Subspace::zero(tensor_power(b.generators, 2));
  }
  return out;
}

CohomResult cohom(const AlgebraPresentation& a, const AlgebraPresentation& b) {
  AlgebraPresentation b_used = b;
  if (!b.is_single_degree() || (b.degree != a.degree)) {
    if (a.degree != 2)
      throw invalid_input("cohom with mismatched degrees requires a quadratic left argument");
    b_used = quadratic_truncation(b);
  }
  CohomResult out;
  out.cohom = black_product(a, dual(b_used));
  int da = a.generators.dim(), db = b.generators.dim();
  // c: x_i -> sum_j (x_i ⊗ x_j*) ⊗ x_j.
  Matrix c(da * db * db, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < db; ++j) c.at((i * db + j) * db + j, i) = 1;
  out.coevaluation =
      LinearMap{a.generators, tensor(out.cohom.generators, b.generators), c};
  return out;
}

CohomResult coend(const AlgebraPresentation& a) {
  return cohom(a, a);
}

bool is_algebra_map(const AlgebraPresentation& a, const AlgebraPresentation& b,
                    const LinearMap& generator_map) {
  if (a.degree != b.degree)
    throw invalid_input("is_algebra_map: degree mismatch");
  int n = a.degree;
  // Map R_A through the n-fold tensor power of the generator map and test
  // membership in b's degree-n ideal component.
  Matrix power = Matrix::identity(1);
  for (int i = 0; i < n; ++i) power = kronecker(power, generator_map.mat);
  GradedComponent target = graded_component(b, n);
  for (int i = 0; i < a.relations.basis.rows(); ++i) {
    Vec img = power.apply(a.relations.basis.row(i));
    if (!target.ideal_component.contains(img)) return false;
  }
  for (const auto& [d, rel] : a.extra_relations) {
    Matrix p = Matrix::identity(1);
    for (int i = 0; i < d; ++i) p = kronecker(p, generator_map.mat);
    GradedComponent t = graded_component(b, d);
    for (int i = 0; i < rel.basis.rows(); ++i)
      if (!t.ideal_component.contains(p.apply(rel.basis.row(i)))) return false;
  }
  return true;
}

Matrix curry_generator_map(const Matrix& phi, int dim_a, int dim_b, int dim_c) {
  // phi: dim_c x (dim_a * dim_b)  ->  mate: (dim_b * dim_c) x dim_a
  if (phi.rows() != dim_c || phi.cols() != dim_a * dim_b)
    throw invalid_input("curry_generator_map: shape mismatch");
  Matrix mate(dim_b * dim_c, dim_a);
  for (int c = 0; c < dim_c; ++c)
    for (int aidx = 0; aidx < dim_a; ++aidx)
      for (int bidx = 0; bidx < dim_b; ++bidx)
        mate.at(bidx * dim_c + c, aidx) = phi.at(c, aidx * dim_b + bidx);
  return mate;
}

Matrix uncurry_generator_map(const Matrix& mate, int dim_a, int dim_b, int dim_c) {
  if (mate.rows() != dim_b * dim_c || mate.cols() != dim_a)
    throw invalid_input("uncurry_generator_map: shape mismatch");
  Matrix phi(dim_c, dim_a * dim_b);
  for (int c = 0; c < dim_c; ++c)
    for (int aidx = 0; aidx < dim_a; ++aidx)
      for (int bidx = 0; bidx < dim_b; ++bidx)
        phi.at(c, aidx * dim_b + bidx) = mate.at(bidx * dim_c + c, aidx);
  return phi;
}

AdjunctionCheck check_adjunction_instance(const AlgebraPresentation& a,
                                          const AlgebraPresentation& b,
                                          const AlgebraPresentation& c, const Matrix& phi) {
  AdjunctionCheck out;
  AlgebraPresentation left = black_product(a, dual(b));
  LinearMap phi_map{left.generators, c.generators, phi};
  out.black_side = is_algebra_map(left, c, phi_map);
  AlgebraPresentation right = white_product(b, c);
  Matrix mate = curry_generator_map(phi, a.generators.dim(), b.generators.dim(),
                                    c.generators.dim());
  LinearMap mate_map{a.generators, right.generators, mate};
  out.white_side = is_algebra_map(a, right, mate_map);
  return out;
}

Comultiplication comultiplication(const AlgebraPresentation& a, const AlgebraPresentation& b,
                                  const AlgebraPresentation& c) {
  Comultiplication out;
  int da = a.generators.dim(), db = b.generators.dim(), dc = c.generators.dim();
  CohomResult eac = cohom(a, c), eab = cohom(a, b), ebc = cohom(b, c);
  // x⊗z* -> sum_y (x⊗y*)⊗(y⊗z*).
  Matrix delta(da * db * db * dc, da * dc);
  for (int x = 0; x < da; ++x)
    for (int z = 0; z < dc; ++z)
      for (int y = 0; y < db; ++y)
        delta.at((x * db + y) * (db * dc) + (y * dc + z), x * dc + z) = 1;
  out.delta = LinearMap{eac.cohom.generators,
                        tensor(eab.cohom.generators, ebc.cohom.generators), delta};
  // Relations of cohom(A,C) must land in the degree-2 ideal of the white
  // product cohom(A,B) ∘ cohom(B,C).
  AlgebraPresentation target = white_product(eab.cohom, ebc.cohom);
  out.relations_preserved = is_algebra_map(eac.cohom, target, out.delta);
  // Coassociativity on generators: both routes send x⊗z* to
  // sum_{y,w} (x⊗y*)⊗(y⊗w*)⊗(w⊗z*); compare them entrywise.
  int triple_dim = (da * db) * (db * db) * (db * dc);
  Matrix left(triple_dim, da * dc), right(triple_dim, da * dc);
  for (int x = 0; x < da; ++x)
    for (int z = 0; z < dc; ++z)
      for (int y = 0; y < db; ++y)
        for (int w = 0; w < db; ++w) {
          int row = ((x * db + y) * (db * db) + (y * db + w)) * (db * dc) + (w * dc + z);
          left.at(row, x * dc + z) += 1;   // (delta ⊗ id) ∘ delta_{A,B,C}
          right.at(row, x * dc + z) += 1;  // (id ⊗ delta) ∘ delta_{A,B,C}
        }
  out.coassociative = left == right;
  // Counit compatibility when the middle factor equals the left one: with
  // eps(x⊗y*) = delta_{x,y}, (eps ⊗ id) ∘ delta must be the identity.
  if (da == db) {
    Matrix computed(db * dc, da * dc);
    for (int col = 0; col < da * dc; ++col)
      for (int x = 0; x < da; ++x)
        for (int y = 0; y < db; ++y)
          for (int w = 0; w < db; ++w)
            for (int z = 0; z < dc; ++z) {
              int row = (x * db + y) * (db * dc) + (w * dc + z);
              if (delta.at(row, col) == 0) continue;
              if (x == y) computed.at(w * dc + z, col) += delta.at(row, col);
            }
    out.counit_compatible = computed == Matrix::identity(da * dc);
  } else {
    out.counit_compatible = true;  // counit needs coend-shaped factors
  }
  return out;
}

bool presentations_match(const AlgebraPresentation& a, const AlgebraPresentation& b,
                         const std::optional<Matrix>& generator_map) {
  if (a.degree != b.degree) return false;
  if (a.generators.dim() != b.generators.dim()) return false;
  if (!generator_map) {
    if (!(a.relations == b.relations)) return false;
  } else {
    Matrix power = Matrix::identity(1);
    for (int i = 0; i < a.degree; ++i) power = kronecker(power, *generator_map);
    std::vector<Vec> mapped;
    for (int i = 0; i < a.relations.basis.rows(); ++i)
      mapped.push_back(power.apply(a.relations.basis.row(i)));
    Subspace image = Subspace::span(mapped, tensor_power(b.generators, a.degree));
    if (!(image == b.relations)) return false;
  }
  if (a.extra_relations.size() != b.extra_relations.size()) return false;
  for (const auto& [d, s] : a.extra_relations) {
    auto it = b.extra_relations.find(d);
    if (it == b.extra_relations.end()) return false;
    if (!generator_map) {
      if (!(s == it->second)) return false;
    } else {
      Matrix power = Matrix::identity(1);
      for (int i = 0; i < d; ++i) power = kronecker(power, *generator_map);
      std::vector<Vec> mapped;
      for (int i = 0; i < s.basis.rows(); ++i) mapped.push_back(power.apply(s.basis.row(i)));
      if (!(Subspace::span(mapped, tensor_power(b.generators, d)) == it->second)) return false;
    }
  }
  return true;
}

}  // namespace opal
