#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "opal/operad_cohom.hpp"

namespace opal {

// A family of spaces indexed by flavors with one-edge bilinear pairings;
// multi-edge contraction forms are tensor products of these.
struct FlavoredFamily {
  std::map<std::string, VectorSpace> spaces;
  // (flavor of the out half, flavor of the in half) -> form matrix f with
  // f.at(i, j) = <e_i, e_j>; looked up in either order.
  std::map<std::pair<std::string, std::string>, Matrix> pairings;

  // V_out = V, V_in = V* with the canonical evaluation pairing.
  static FlavoredFamily oriented_dual(const VectorSpace& v);
};

// Flavor of a flag under the preset's labeling scheme.
std::string flavor_of(const GammaPreset& preset, const LabeledGraph& g, int flag);

// Endomorphism operad of a flavored family: components are flag-indexed
// tensor products, contractions act by the pairings.
OperadAlgebra op_end(const FlavoredFamily& family, const GammaPreset& preset,
                     const Caps& caps);

// The variety of P-algebra structures on the family: candidate generator
// maps form the equivariant-hom space per class; a point is admissible when
// the relations of P die in the endomorphism operad.
struct StructureSpace {
  std::map<std::string, std::vector<Matrix>> equivariant_basis;
};
StructureSpace p_algebra_structure_space(const PresentedOperad& p, const OperadAlgebra& open);
bool p_structure_admissible(const PresentedOperad& p, const OperadAlgebra& open,
                            const CollectionMorphism& phi);

// An ordinary-preset presented operad P with a symmetric comultiplication
// extended from the generator level, plus the P(1) = u convention.
class POperad {
 public:
  static POperad make(const PresentedOperad& p, const CollectionMorphism& delta1);

  const PresentedOperad& presented() const { return p_; }
  bool delta_symmetric() const { return delta_symmetric_; }
  bool delta_well_defined() const { return delta_well_defined_; }
  int max_arity() const;
  int component_dim(int n) const;              // P(1) = 1 by convention
  const Matrix& delta(int n) const;            // P(n) -> P(n) ⊗ P(n)
  Matrix action_matrix(int n, const std::vector<int>& perm) const;  // on P(n)
  // gamma: P(n) ⊗ P(d_1) ⊗ ... ⊗ P(d_n) -> P(sum d_i); slots with d_i = 1
  // are unit insertions and contribute no tensor factor.
  Matrix compose_2level(const std::vector<int>& arities) const;

 private:
  PresentedOperad p_;
  std::map<int, Matrix> delta_;
  bool delta_symmetric_ = false;
  bool delta_well_defined_ = false;
  mutable std::map<int, std::unique_ptr<ActionTable>> tables_;
};

// Free P-algebra on V1, truncated by degree: degree-n piece is the
// S_n-coinvariants of P(n) ⊗ V1^⊗n (degree 1 is V1 itself).
struct FreePAlgebra {
  const POperad* p = nullptr;
  VectorSpace v1;
  int cap = 0;
  struct Degree {
    int raw_dim = 0;    // dim P(n) * (dim V1)^n
    Coinvariants coin;  // diagonal S_n action
  };
  std::vector<Degree> degrees;  // [0] unused; [n] for 1 <= n <= cap

  int dim(int n) const;
  // Structure map: a P(n)-carrier element applied to arguments given as
  // (degree, coinvariant coordinates); returns degree sum(d_i) coordinates.
  Vec compose(int n, const Vec& p_element,
              const std::vector<std::pair<int, Vec>>& args) const;
  // V^⊗n -> degree-n coordinates through p ⊗ word -> class (functorial
  // identification used by the associative degeneration).
  Matrix word_projection(int n, const Vec& p_element) const;
};

FreePAlgebra free_p_algebra(const POperad& p, const VectorSpace& v1, int cap);

// j(n): F_P(E1 ⊗ W1)_n -> F_P(E1)_n ⊗ F_P(W1)_n from the comultiplication
// plus regrouping, descended to coinvariants.
struct PJMap {
  std::map<int, Matrix> maps;
  bool descends = true;  // the big map is constant on coinvariant classes
};
PJMap p_j_map(const POperad& p, const FreePAlgebra& f_ew, const FreePAlgebra& f_e,
              const FreePAlgebra& f_w);

// Presented P-algebra: generators and a relation subspace per degree.
struct PAlgebraPresentation {
  VectorSpace v1;
  std::map<int, Subspace> relations;  // degree -> subspace of F_P(V1)_degree
};

struct PAlgebraQuotient {
  PAlgebraPresentation presentation;
  FreePAlgebra free;
  std::map<int, Subspace> ideal;
  std::map<int, Matrix> projection;  // F_P(V1)_n -> quotient coordinates
  std::map<int, Matrix> section;
  std::vector<int> dims;             // [n] for 1 <= n <= cap
};

PAlgebraQuotient p_algebra_quotient(const POperad& p, const PAlgebraPresentation& pres,
                                    int cap);

// Tensor product of presented P-algebras through j and the two structures.
struct PTensorResult {
  PAlgebraPresentation presentation;
  PAlgebraQuotient quotient;
};
PTensorResult tensor_p_algebras(const POperad& p, const PAlgebraQuotient& v,
                                const PAlgebraQuotient& w, int cap);

// Inner cohom of presented P-algebras (the Theorem 2.2 pipeline with F_P in
// place of F).
struct PCohomResult {
  VectorSpace e1;                  // V1 ⊗ W1*
  std::map<int, Matrix> h;         // F_P(V1)_n -> F_P(E1)_n ⊗ W_n
  std::map<int, Subspace> r_tilde;
  PAlgebraQuotient e;
  bool coevaluation_well_defined = false;  // relations die in (E-ideal) ⊗ W
};
PCohomResult cohom_p_algebras(const POperad& p, const PAlgebraQuotient& v,
                              const PAlgebraQuotient& w, int cap);

// The associative P with the diagonal comultiplication on its regular-
// representation binary generator, at the given caps.
POperad associative_p_operad(const Caps& caps);

// Identification F_P(V)_n ≅ V^⊗n for the associative P (group algebra acting
// on words); returns per degree the matrix word-coordinates -> degree space.
std::map<int, Matrix> associative_word_identification(const FreePAlgebra& f);

}  // namespace opal
