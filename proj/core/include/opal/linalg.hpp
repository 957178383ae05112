#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opal/rational.hpp"

namespace opal {

using Vec = std::vector<Rat>;

// Finite-dimensional rational vector space with an ordered basis of opaque
// labels.  Tensor labels are factor labels joined by a separator, which fixes
// all matrix orderings bit-exactly (left factor slowest).
struct VectorSpace {
  std::vector<std::string> labels;

  int dim() const { return static_cast<int>(labels.size()); }
  bool operator==(const VectorSpace&) const = default;

  static VectorSpace make(std::vector<std::string> labels);
  // n anonymous basis vectors "prefix0".."prefix{n-1}".
  static VectorSpace anonymous(int n, const std::string& prefix = "e");

  // Dual space: label "l" becomes "l!", and "l!" becomes "l" again, so the
  // double dual is the identity on the nose.
  VectorSpace dual() const;
};

constexpr const char* kTensorSep = "⊗";  // ⊗

VectorSpace tensor(const VectorSpace& a, const VectorSpace& b);
VectorSpace tensor_power(const VectorSpace& a, int n);

// Dense row-major matrix of exact rationals.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}

  static Matrix identity(int n);
  static Matrix zero(int rows, int cols) { return Matrix(rows, cols); }
  static Matrix from_rows(const std::vector<Vec>& rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rat& at(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  const Rat& at(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  Matrix operator*(const Matrix& other) const;
  Matrix operator+(const Matrix& other) const;
  Matrix operator-(const Matrix& other) const;
  Matrix scaled(const Rat& c) const;
  Matrix transpose() const;
  Vec apply(const Vec& v) const;
  Vec row(int i) const;
  void append_row(const Vec& r);
  bool is_zero() const;
  bool operator==(const Matrix&) const = default;

 private:
  int rows_, cols_;
  std::vector<Rat> a_;
};

// Kronecker product; index of (i,j) is i * b.cols-ish row-major on both sides.
Matrix kronecker(const Matrix& a, const Matrix& b);

// In-place reduced row echelon form; returns pivot column indices and drops
// zero rows.  The RREF of a row space is its unique canonical basis.
std::vector<int> rref(Matrix& m);

// Basis of the null space {x : m x = 0}, returned as canonical RREF rows.
Matrix kernel(const Matrix& m);

// One solution x of m x = b, if any.
std::optional<Vec> solve(const Matrix& m, const Vec& b);

int rank(Matrix m);

// Subspace of `ambient`, stored as canonical RREF basis rows.  Two subspaces
// are equal iff their ambient dimensions and basis matrices are identical.
struct Subspace {
  VectorSpace ambient;
  Matrix basis;  // rank x dim, RREF

  static Subspace span(const std::vector<Vec>& vectors, const VectorSpace& ambient);
  static Subspace zero(const VectorSpace& ambient);
  static Subspace full(const VectorSpace& ambient);

  int rank() const { return basis.rows(); }
  bool contains(const Vec& v) const;
  bool contains(const Subspace& other) const;
  Subspace sum(const Subspace& other) const;
  Subspace intersect(const Subspace& other) const;
  // Normal form of v modulo the subspace (pivot coordinates eliminated).
  Vec reduce(Vec v) const;
  bool operator==(const Subspace& other) const;
};

// Annihilator S^perp in the dual space: all functionals vanishing on S, under
// the pairing <phi, v> = sum_i phi_i v_i.  An explicit `ambient_dual` may be
// supplied to control dual basis labels; it must have the right dimension.
Subspace annihilator(const Subspace& s);
Subspace annihilator(const Subspace& s, const VectorSpace& ambient_dual);

struct LinearMap {
  VectorSpace domain, codomain;
  Matrix mat;  // codomain.dim x domain.dim

  static LinearMap identity(const VectorSpace& v);
  Vec operator()(const Vec& v) const { return mat.apply(v); }
  LinearMap after(const LinearMap& inner) const;  // this ∘ inner
  bool operator==(const LinearMap&) const = default;
};

// Middle-factor interchange (V1a⊗V1b)⊗(V2a⊗V2b) -> (V1a⊗V2a)⊗(V1b⊗V2b),
// a permutation matrix on basis tensors.
LinearMap shuffle_s23(const VectorSpace& v1a, const VectorSpace& v1b,
                      const VectorSpace& v2a, const VectorSpace& v2b);

// Degree-N interleaving A^⊗N ⊗ B^⊗N -> (A⊗B)^⊗N; for N = 2 this is the S23
// shuffle with V1a = V1b = A, V2a = V2b = B up to factor bookkeeping.
LinearMap interleave(int n, const VectorSpace& a, const VectorSpace& b);

// A finite group acting linearly, presented by generator matrices.  Optional
// relation words (generator indices; -i-1 denotes the inverse of generator i)
// are checked by `check`.
struct GroupAction {
  VectorSpace space;
  std::vector<Matrix> generators;
  std::vector<std::vector<int>> relations;

  static GroupAction trivial(const VectorSpace& v);
  // All group element matrices via closure; throws cap_exceeded past `cap`.
  std::vector<Matrix> elements(int cap = 20000) const;
  // Validates invertibility of the generators and the listed relations.
  std::vector<std::string> check() const;
};

// Coinvariants of a finite group action in characteristic zero, realized as
// the image of the averaging projector P = (1/|G|) sum_g rho(g).
struct Coinvariants {
  VectorSpace space;       // dim = rank(P)
  LinearMap projection;    // ambient -> coinvariants
  LinearMap inclusion;     // coinvariants -> ambient, projection∘inclusion = id
  Matrix symmetrizer;      // P itself, idempotent
};

Coinvariants coinvariants(const VectorSpace& v, const GroupAction& action);

// Basis of the space of equivariant maps {f : f rho(g) = rho'(g) f for all
// generators}, each returned as a codomain.dim x domain.dim matrix.
std::vector<Matrix> equivariant_maps(const GroupAction& domain_action,
                                     const GroupAction& codomain_action);

std::string to_string(const Matrix& m);

}  // namespace opal
