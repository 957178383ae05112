#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "opal/free_operad.hpp"
#include "opal/quadratic.hpp"

namespace opal {

// An operad presentation with its computed quotient, kernel and projection.
struct PresentedOperad {
  OperadPresentation presentation;
  QuotientOperad quotient;

  static PresentedOperad make(const OperadPresentation& pres);
  const OperadAlgebra& operad() const { return quotient.algebra; }
  // f: F(A1)(σ) -> A(σ), surjective by construction.
  const Matrix& f_of(const CorollaClassId& id) const { return quotient.projection.at(id.key()); }
};

// Output of the inner-cohomomorphism construction for presented operads.
struct OperadCohomResult {
  Collection e1;                              // cohom(A1, B1) componentwise
  CollectionMorphism coevaluation;            // c: A1 -> E1 ○ B1
  std::map<std::string, Matrix> h;            // F(A1)(σ) -> F(E1)(σ) ⊗ B(σ)
  std::map<std::string, Subspace> r_tilde;    // transported relations in F(E1)
  QuotientOperad e;                           // E = F(E1)/(R~)
  std::map<std::string, Matrix> delta;        // A(σ) -> E(σ) ⊗ B(σ)
  std::map<std::string, Matrix> delta1;       // A1(σ) -> E1(σ) ⊗ B1(σ)
  bool delta_well_defined = false;            // Ker f_A maps into (R~-ideal) ○ B
  bool square_commutes = false;               // (i_E ○ i_B) ∘ delta1 = delta ∘ i_A
};

OperadCohomResult cohom_operads(const PresentedOperad& a, const PresentedOperad& b);

// Uniqueness/initiality spot check: given an object (F, u, u1) of A => B with
// F presented, solve for the factorizing morphism v: E -> F on generators and
// verify it is an operad morphism extending the curried u1.
struct InitialityReport {
  bool factors = false;
  bool unique_on_generators = false;
  std::vector<std::string> notes;
};

InitialityReport verify_initiality(const OperadCohomResult& result, const PresentedOperad& a,
                                   const PresentedOperad& b, const PresentedOperad& f,
                                   const CollectionMorphism& u1);

// The ⊙ product of presented operads: generators A1 ○ B1, carrier the
// suboperad of A ○ B generated by them (computed by weight saturation).
struct OdotResult {
  Collection c1;
  std::map<std::string, Subspace> carrier;  // inside (A ⊗ B)(σ)
  std::map<std::string, int> dims;
};

OdotResult odot_product(const PresentedOperad& a, const PresentedOperad& b);

// Generator-level comultiplication cohom(A1,C1) -> cohom(A1,B1) ○ cohom(B1,C1)
// with relation and coassociativity checks within caps.
struct OperadComultiplication {
  CollectionMorphism delta;
  bool relations_preserved = false;
  bool coassociative = false;
};

OperadComultiplication op_comultiplication(const PresentedOperad& a, const PresentedOperad& b,
                                           const PresentedOperad& c);

// Associative-algebra degeneration: packages a quadratic presentation as a
// linear-preset operad presentation truncated at the caps.
OperadPresentation linear_operad_presentation(const AlgebraPresentation& a, const Caps& caps);

// The identification F_linear(V)(corolla) ≅ ⊕_w V^⊗w: per weight, the matrix
// sending word coordinates to free-operad coordinates.
std::map<int, Matrix> linear_word_identification(const FreeOperad& fx);

}  // namespace opal
