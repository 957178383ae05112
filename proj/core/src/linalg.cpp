#include "opal/linalg.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "opal/errors.hpp"

namespace opal {

VectorSpace VectorSpace::make(std::vector<std::string> labels) {
  VectorSpace v{std::move(labels)};
  std::vector<std::string> sorted = v.labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw invalid_input("basis labels must be pairwise distinct");
  return v;
}

VectorSpace VectorSpace::anonymous(int n, const std::string& prefix) {
  std::vector<std::string> ls;
  ls.reserve(n);
  for (int i = 0; i < n; ++i) ls.push_back(prefix + std::to_string(i));
  return VectorSpace{std::move(ls)};
}

VectorSpace VectorSpace::dual() const {
  std::vector<std::string> ls;
  ls.reserve(labels.size());
  for (const auto& l : labels) {
    if (!l.empty() && l.back() == '!')
      ls.push_back(l.substr(0, l.size() - 1));
    else
      ls.push_back(l + "!");
  }
  return VectorSpace{std::move(ls)};
}

VectorSpace tensor(const VectorSpace& a, const VectorSpace& b) {
  std::vector<std::string> ls;
  ls.reserve(size_t(a.dim()) * b.dim());
  for (const auto& la : a.labels)
    for (const auto& lb : b.labels) ls.push_back(la + kTensorSep + lb);
  return VectorSpace{std::move(ls)};
}

VectorSpace tensor_power(const VectorSpace& a, int n) {
  if (n == 0) return VectorSpace{{"1"}};
  VectorSpace v = a;
  for (int i = 1; i < n; ++i) v = tensor(v, a);
  return v;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows, int cols) {
  Matrix m(static_cast<int>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != cols)
      throw invalid_input("row length mismatch building matrix");
    for (int j = 0; j < cols; ++j) m.at(static_cast<int>(i), j) = rows[i][j];
  }
  return m;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_) throw invalid_input("matrix product shape mismatch");
  Matrix out(rows_, other.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Rat& aik = at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < other.cols_; ++j) {
        const Rat& bkj = other.at(k, j);
        if (bkj != 0) out.at(i, j) += aik * bkj;
      }
    }
  return out;
}

Matrix Matrix::operator+(const Matrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw invalid_input("matrix sum shape mismatch");
  Matrix out(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + other.a_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw invalid_input("matrix difference shape mismatch");
  Matrix out(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] - other.a_[i];
  return out;
}

Matrix Matrix::scaled(const Rat& c) const {
  Matrix out(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * c;
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
  return out;
}

Vec Matrix::apply(const Vec& v) const {
  if (static_cast<int>(v.size()) != cols_)
    throw invalid_input("matrix apply dimension mismatch");
  Vec out(rows_);
  for (int i = 0; i < rows_; ++i) {
    Rat acc = 0;
    for (int j = 0; j < cols_; ++j)
      if (at(i, j) != 0 && v[j] != 0) acc += at(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

Vec Matrix::row(int i) const {
  Vec out(cols_);
  for (int j = 0; j < cols_; ++j) out[j] = at(i, j);
  return out;
}

void Matrix::append_row(const Vec& r) {
  if (static_cast<int>(r.size()) != cols_)
    throw invalid_input("appended row length mismatch");
  a_.insert(a_.end(), r.begin(), r.end());
  ++rows_;
}

bool Matrix::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](const Rat& x) { return x == 0; });
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      if (a.at(i, j) == 0) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          if (b.at(k, l) != 0)
            out.at(i * b.rows() + k, j * b.cols() + l) = a.at(i, j) * b.at(k, l);
    }
  return out;
}

std::vector<int> rref(Matrix& m) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int pivot = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m.at(i, c) != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    if (pivot != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m.at(pivot, j), m.at(r, j));
    Rat inv = Rat(1) / m.at(r, c);
    for (int j = c; j < m.cols(); ++j) m.at(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m.at(i, c) == 0) continue;
      Rat f = m.at(i, c);
      for (int j = c; j < m.cols(); ++j) m.at(i, j) -= f * m.at(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  // Drop zero rows.
  Matrix out(r, m.cols());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(i, j);
  m = out;
  return pivots;
}

Matrix kernel(const Matrix& m) {
  Matrix red = m;
  std::vector<int> pivots = rref(red);
  std::vector<bool> is_pivot(m.cols(), false);
  for (int p : pivots) is_pivot[p] = true;
  Matrix out(0, m.cols());
  for (int c = 0; c < m.cols(); ++c) {
    if (is_pivot[c]) continue;
    Vec v(m.cols());
    v[c] = 1;
    for (size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -red.at(static_cast<int>(i), c);
    out.append_row(v);
  }
  rref(out);
  return out;
}

std::optional<Vec> solve(const Matrix& m, const Vec& b) {
  if (static_cast<int>(b.size()) != m.rows())
    throw invalid_input("solve: rhs dimension mismatch");
  Matrix aug(m.rows(), m.cols() + 1);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols()) = b[i];
  }
  std::vector<int> pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == m.cols()) return std::nullopt;
  Vec x(m.cols());
  for (size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug.at(static_cast<int>(i), m.cols());
  return x;
}

int rank(Matrix m) {
  return static_cast<int>(rref(m).size());
}

Subspace Subspace::span(const std::vector<Vec>& vectors, const VectorSpace& ambient) {
  for (const auto& v : vectors)
    if (static_cast<int>(v.size()) != ambient.dim())
      throw invalid_input("span: vector dimension does not match ambient space");
  Matrix m = Matrix::from_rows(vectors, ambient.dim());
  rref(m);
  return Subspace{ambient, m};
}

Subspace Subspace::zero(const VectorSpace& ambient) {
  return Subspace{ambient, Matrix(0, ambient.dim())};
}

Subspace Subspace::full(const VectorSpace& ambient) {
  return Subspace{ambient, Matrix::identity(ambient.dim())};
}

bool Subspace::contains(const Vec& v) const {
  Vec r = reduce(v);
  return std::all_of(r.begin(), r.end(), [](const Rat& x) { return x == 0; });
}

bool Subspace::contains(const Subspace& other) const {
  for (int i = 0; i < other.basis.rows(); ++i)
    if (!contains(other.basis.row(i))) return false;
  return true;
}

Subspace Subspace::sum(const Subspace& other) const {
  if (ambient.dim() != other.ambient.dim())
    throw invalid_input("subspace sum: ambient dimension mismatch");
  Matrix m = basis;
  for (int i = 0; i < other.basis.rows(); ++i) m.append_row(other.basis.row(i));
  rref(m);
  return Subspace{ambient, m};
}

Subspace Subspace::intersect(const Subspace& other) const {
  if (ambient.dim() != other.ambient.dim())
    throw invalid_input("subspace intersection: ambient dimension mismatch");
  // x = a.basis^T u = other.basis^T w; null space of [basis^T | -other.basis^T].
  int ra = basis.rows(), rb = other.basis.rows();
  Matrix m(ambient.dim(), ra + rb);
  for (int i = 0; i < ambient.dim(); ++i) {
    for (int j = 0; j < ra; ++j) m.at(i, j) = basis.at(j, i);
    for (int j = 0; j < rb; ++j) m.at(i, ra + j) = -other.basis.at(j, i);
  }
  Matrix null = kernel(m);
  std::vector<Vec> vecs;
  for (int i = 0; i < null.rows(); ++i) {
    Vec x(ambient.dim());
    for (int j = 0; j < ra; ++j)
      for (int c = 0; c < ambient.dim(); ++c) x[c] += null.at(i, j) * basis.at(j, c);
    vecs.push_back(std::move(x));
  }
  return span(vecs, ambient);
}

Vec Subspace::reduce(Vec v) const {
  if (static_cast<int>(v.size()) != ambient.dim())
    throw invalid_input("reduce: vector dimension mismatch");
  for (int i = 0; i < basis.rows(); ++i) {
    int pc = -1;
    for (int j = 0; j < basis.cols(); ++j)
      if (basis.at(i, j) != 0) {
        pc = j;
        break;
      }
    if (pc < 0) continue;
    if (v[pc] == 0) continue;
    Rat f = v[pc];
    for (int j = 0; j < basis.cols(); ++j) v[j] -= f * basis.at(i, j);
  }
  return v;
}

bool Subspace::operator==(const Subspace& other) const {
  return ambient.dim() == other.ambient.dim() && basis == other.basis;
}

Subspace annihilator(const Subspace& s) {
  return annihilator(s, s.ambient.dual());
}

Subspace annihilator(const Subspace& s, const VectorSpace& ambient_dual) {
  if (ambient_dual.dim() != s.ambient.dim())
    throw invalid_input("annihilator: dual ambient dimension mismatch");
  Matrix null = kernel(s.basis);
  return Subspace{ambient_dual, null};
}

LinearMap LinearMap::identity(const VectorSpace& v) {
  return LinearMap{v, v, Matrix::identity(v.dim())};
}

LinearMap LinearMap::after(const LinearMap& inner) const {
  if (inner.codomain.dim() != domain.dim())
    throw invalid_input("compose: inner codomain does not match outer domain");
  return LinearMap{inner.domain, codomain, mat * inner.mat};
}

LinearMap shuffle_s23(const VectorSpace& v1a, const VectorSpace& v1b,
                      const VectorSpace& v2a, const VectorSpace& v2b) {
  VectorSpace dom = tensor(tensor(v1a, v1b), tensor(v2a, v2b));
  VectorSpace cod = tensor(tensor(v1a, v2a), tensor(v1b, v2b));
  int da = v1a.dim(), db = v1b.dim(), dc = v2a.dim(), dd = v2b.dim();
  Matrix m(cod.dim(), dom.dim());
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < dc; ++k)
        for (int l = 0; l < dd; ++l) {
          int src = ((i * db + j) * dc + k) * dd + l;
          int dst = ((i * dc + k) * db + j) * dd + l;
          m.at(dst, src) = 1;
        }
  return LinearMap{dom, cod, m};
}

LinearMap interleave(int n, const VectorSpace& a, const VectorSpace& b) {
  if (n < 1) throw invalid_input("interleave: degree must be >= 1");
  VectorSpace dom = tensor(tensor_power(a, n), tensor_power(b, n));
  VectorSpace cod = tensor_power(tensor(a, b), n);
  int da = a.dim(), db = b.dim();
  int total = cod.dim();
  if (dom.dim() != total) throw internal_error("interleave dimension bookkeeping");
  Matrix m(total, total);
  std::vector<int> ai(n), bi(n);
  for (int src = 0; src < total; ++src) {
    int rem = src;
    for (int t = n - 1; t >= 0; --t) {
      bi[t] = rem % db;
      rem /= db;
    }
    for (int t = n - 1; t >= 0; --t) {
      ai[t] = rem % da;
      rem /= da;
    }
    int dst = 0;
    for (int t = 0; t < n; ++t) dst = dst * (da * db) + (ai[t] * db + bi[t]);
    m.at(dst, src) = 1;
  }
  return LinearMap{dom, cod, m};
}

GroupAction GroupAction::trivial(const VectorSpace& v) {
  return GroupAction{v, {}, {}};
}

namespace {
std::string matrix_key(const Matrix& m) {
  std::ostringstream os;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) os << m.at(i, j).str() << ',';
  return os.str();
}
}  // namespace

std::vector<Matrix> GroupAction::elements(int cap) const {
  std::vector<Matrix> out;
  std::map<std::string, int> seen;
  Matrix id = Matrix::identity(space.dim());
  out.push_back(id);
  seen[matrix_key(id)] = 0;
  size_t frontier = 0;
  while (frontier < out.size()) {
    Matrix cur = out[frontier++];
    for (const Matrix& g : generators) {
      Matrix next = g * cur;
      std::string key = matrix_key(next);
      if (seen.emplace(key, static_cast<int>(out.size())).second) {
        out.push_back(next);
        if (static_cast<int>(out.size()) > cap)
          throw cap_exceeded("group closure exceeded element cap");
      }
    }
  }
  return out;
}

std::vector<std::string> GroupAction::check() const {
  std::vector<std::string> problems;
  std::vector<Matrix> inverses;
  for (size_t i = 0; i < generators.size(); ++i) {
    const Matrix& g = generators[i];
    if (g.rows() != space.dim() || g.cols() != space.dim()) {
      problems.push_back("generator " + std::to_string(i) + " has wrong shape");
      continue;
    }
    Matrix m = g;
    if (static_cast<int>(rref(m).size()) != space.dim())
      problems.push_back("generator " + std::to_string(i) + " is singular");
  }
  if (!problems.empty()) return problems;
  // Inverses by solving g X = I columnwise.
  for (const Matrix& g : generators) {
    Matrix inv(space.dim(), space.dim());
    for (int c = 0; c < space.dim(); ++c) {
      Vec e(space.dim());
      e[c] = 1;
      Vec x = *solve(g, e);
      for (int r = 0; r < space.dim(); ++r) inv.at(r, c) = x[r];
    }
    inverses.push_back(inv);
  }
  for (size_t w = 0; w < relations.size(); ++w) {
    Matrix acc = Matrix::identity(space.dim());
    for (int idx : relations[w]) {
      if (idx >= 0) {
        if (idx >= static_cast<int>(generators.size())) {
          problems.push_back("relation word uses unknown generator");
          break;
        }
        acc = generators[idx] * acc;
      } else {
        int i = -idx - 1;
        if (i >= static_cast<int>(generators.size())) {
          problems.push_back("relation word uses unknown generator");
          break;
        }
        acc = inverses[i] * acc;
      }
    }
    if (!(acc == Matrix::identity(space.dim())))
      problems.push_back("relation " + std::to_string(w) + " does not hold");
  }
  return problems;
}

Coinvariants coinvariants(const VectorSpace& v, const GroupAction& action) {
  std::vector<Matrix> els = action.elements();
  if (els.empty()) throw invalid_input("group of order zero");
  Matrix p(v.dim(), v.dim());
  for (const Matrix& g : els) p = p + g;
  p = p.scaled(Rat(1) / Rat(static_cast<long>(els.size())));
  // Image basis: canonical RREF of the column space.
  Matrix cols = p.transpose();
  std::vector<int> pivots = rref(cols);
  int r = cols.rows();
  VectorSpace co = VectorSpace::anonymous(r, "c");
  Matrix incl(v.dim(), r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < v.dim(); ++j) incl.at(j, i) = cols.at(i, j);
  // For RREF basis rows b_i with pivot columns c_i, coordinates of any vector
  // in the span are its entries at the pivots; P rows at pivots project.
  Matrix proj(r, v.dim());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < v.dim(); ++j) proj.at(i, j) = p.at(pivots[i], j);
  return Coinvariants{co, LinearMap{v, co, proj}, LinearMap{co, v, incl}, p};
}

std::vector<Matrix> equivariant_maps(const GroupAction& domain_action,
                                     const GroupAction& codomain_action) {
  if (domain_action.generators.size() != codomain_action.generators.size())
    throw invalid_input("equivariant_maps: generator count mismatch");
  int dv = domain_action.space.dim(), dw = codomain_action.space.dim();
  // Unknowns f[i][j] flattened as i * dv + j; constraint f rho(g) - rho'(g) f = 0.
  Matrix constraints(0, dw * dv);
  for (size_t g = 0; g < domain_action.generators.size(); ++g) {
    const Matrix& a = domain_action.generators[g];
    const Matrix& b = codomain_action.generators[g];
    for (int i = 0; i < dw; ++i)
      for (int j = 0; j < dv; ++j) {
        Vec row(dw * dv);
        for (int k = 0; k < dv; ++k) row[i * dv + k] += a.at(k, j);
        for (int k = 0; k < dw; ++k) row[k * dv + j] -= b.at(i, k);
        constraints.append_row(row);
      }
  }
  Matrix null = constraints.rows() == 0 ? Matrix::identity(dw * dv) : kernel(constraints);
  std::vector<Matrix> out;
  for (int i = 0; i < null.rows(); ++i) {
    Matrix f(dw, dv);
    for (int r = 0; r < dw; ++r)
      for (int c = 0; c < dv; ++c) f.at(r, c) = null.at(i, r * dv + c);
    out.push_back(f);
  }
  return out;
}

std::string to_string(const Matrix& m) {
  std::ostringstream os;
  for (int i = 0; i < m.rows(); ++i) {
    os << (i == 0 ? "[" : " ");
    for (int j = 0; j < m.cols(); ++j) os << (j ? " " : "[") << m.at(i, j).str();
    os << "]" << (i + 1 == m.rows() ? "]" : "\n");
  }
  return os.str();
}

}  // namespace opal
