#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opal/linalg.hpp"

namespace opal {

// A graded algebra presented by generators and homogeneous relations of a
// single degree N >= 2, with optional extra relations in higher degrees.
struct AlgebraPresentation {
  VectorSpace generators;
  int degree = 2;               // N
  Subspace relations;           // inside generators^⊗N
  std::map<int, Subspace> extra_relations;  // degree > N

  bool is_single_degree() const { return extra_relations.empty(); }

  static AlgebraPresentation free_algebra(const VectorSpace& gens, int degree = 2);
  // k[t]: one generator, no relations (unit for the white product).
  static AlgebraPresentation polynomial_line();
  // k[e]/(e^N): one generator, full relation space (unit for the black product).
  static AlgebraPresentation dual_numbers(int degree = 2);
  // k[x,y] as a quadratic algebra (xy - yx).
  static AlgebraPresentation polynomial_plane();
  // Quantum plane: xy - q yx.
  static AlgebraPresentation quantum_plane(const Rat& q);
  // Exterior-type algebra on two generators (x^2, y^2, xy + yx).
  static AlgebraPresentation exterior_plane();
};

struct GradedComponent {
  int dimension = 0;
  std::vector<std::string> basis_words;  // labels of a monomial basis
  Subspace ideal_component;              // inside generators^⊗n
};

// Exact degree-n component A_n = V^⊗n / (ideal ∩ V^⊗n).
GradedComponent graded_component(const AlgebraPresentation& a, int n);

std::vector<int> graded_dimensions(const AlgebraPresentation& a, int max_degree);

// Koszul-style dual: generators V*, relations = annihilator of R in (V*)^⊗N.
AlgebraPresentation dual(const AlgebraPresentation& a);

// Manin white product: relations S23(R_A ⊗ B1^⊗N + A1^⊗N ⊗ R_B).
AlgebraPresentation white_product(const AlgebraPresentation& a, const AlgebraPresentation& b);

// Manin black product: relations S23(R_A ⊗ R_B).
AlgebraPresentation black_product(const AlgebraPresentation& a, const AlgebraPresentation& b);

// Quadratic truncation qB: same generators, only the degree-2 relations.
AlgebraPresentation quadratic_truncation(const AlgebraPresentation& b);

// Inner cohom: A • B^! for matching single-degree presentations, or
// A • (qB)^! when A is quadratic and B carries higher relations.  Also
// returns the coevaluation generator map A1 -> cohom1 ⊗ B1.
struct CohomResult {
  AlgebraPresentation cohom;
  LinearMap coevaluation;  // A1 -> (A1 ⊗ B1*) ⊗ B1
};
CohomResult cohom(const AlgebraPresentation& a, const AlgebraPresentation& b);

// coend(A) = cohom(A, A).
CohomResult coend(const AlgebraPresentation& a);

// Does the generator map extend to a graded algebra morphism?  Checks that
// the image of the relation space lands in the target's degree-N ideal.
bool is_algebra_map(const AlgebraPresentation& a, const AlgebraPresentation& b,
                    const LinearMap& generator_map);

// The two membership conditions of the adjunction Hom(A•B^!, C) = Hom(A, B∘C)
// for a generator-level map phi: A1 ⊗ B1* -> C1 and its curried mate.
struct AdjunctionCheck {
  bool black_side = false;  // phi defines a map A•B^! -> C
  bool white_side = false;  // mate defines a map A -> B∘C
};
AdjunctionCheck check_adjunction_instance(const AlgebraPresentation& a,
                                          const AlgebraPresentation& b,
                                          const AlgebraPresentation& c, const Matrix& phi);

// Currying phi: A1⊗B1* -> C1 into the mate A1 -> B1⊗C1 and back.
Matrix curry_generator_map(const Matrix& phi, int dim_a, int dim_b, int dim_c);
Matrix uncurry_generator_map(const Matrix& mate, int dim_a, int dim_b, int dim_c);

// Comultiplication generator map cohom(A,C)1 -> cohom(A,B)1 ⊗ cohom(B,C)1,
// x⊗z* -> sum_y (x⊗y*)⊗(y⊗z*); verified to respect relations in degree 2.
struct Comultiplication {
  LinearMap delta;          // generator-level map
  bool relations_preserved = false;
  bool coassociative = false;
  bool counit_compatible = false;  // (eps ⊗ id) ∘ delta = id on generators
};
Comultiplication comultiplication(const AlgebraPresentation& a, const AlgebraPresentation& b,
                                  const AlgebraPresentation& c);

// Exact equality of presentations under an optional generator identification
// (a change of basis matrix from a's generators to b's).
bool presentations_match(const AlgebraPresentation& a, const AlgebraPresentation& b,
                         const std::optional<Matrix>& generator_map = std::nullopt);

}  // namespace opal
