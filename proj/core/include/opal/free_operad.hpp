#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opal/collection.hpp"

namespace opal {

struct Caps {
  int arity = 4;   // max flags per corolla (classes and graph vertices)
  int weight = 3;  // max vertices of a decorated source graph
  int genus = 2;   // genus bound for modular presets
  int edges = 6;   // internal edge bound for the enumerator

  std::string key() const;
  bool operator==(const Caps&) const = default;
};

// Iso class of a morphism tau -> sigma-corolla with empty virtual involution,
// canonically labeled; the atoms of the free-operad colimit.
struct DecoratedClass {
  LabeledGraph tau;                   // canonical ids: vertices 0..w-1
  std::vector<int> pins;              // pins[i] = tau flag hit by sigma flag i
  int weight = 0;
  std::vector<CorollaClassId> vertex_classes;       // per vertex
  std::vector<std::vector<int>> vertex_flag_orders; // per vertex, class order
  std::vector<GraphIso> auts;         // automorphisms fixing all pins
  std::string key;
};

// Complete duplicate-free enumeration of the classes over one corolla class,
// weights 1..caps.weight.  Deterministically ordered by (weight, key).
std::vector<DecoratedClass> enumerate_to_corolla(const GammaPreset& preset,
                                                 const CorollaClassId& sigma,
                                                 const Caps& caps);

// A concrete decorated morphism onto a sigma-corolla: a labeled source graph,
// the pin assignment, and one generator basis index per vertex.
struct ConcreteDecoration {
  LabeledGraph tau;
  std::vector<int> pins;             // tau flag ids by sigma position
  std::map<int, int> vertex_basis;   // tau vertex id -> basis index
};

struct FreeSummand {
  DecoratedClass cls;
  std::vector<int> factor_dims;  // dim X(class of vertex v) per vertex
  int tensor_dim = 0;
  // Identity coinvariants (single automorphism, no weight filtering) are
  // represented implicitly; coin matrices are then empty.
  bool trivial_coinvariants = false;
  Coinvariants coin;             // of the class automorphisms
  int offset = 0;
  int weight = 0;

  int coinv_dim() const { return trivial_coinvariants ? tensor_dim : coin.space.dim(); }
};

struct FreeComponent {
  CorollaClassId sigma;
  std::vector<FreeSummand> summands;
  VectorSpace total;
  std::vector<int> weights;       // per basis vector
  // Aut(sigma) generator matrices, built lazily (see FreeOperad::sigma_action).
  mutable std::vector<Matrix> action;
  mutable bool action_built = false;
  std::map<std::string, int> summand_index;  // class key -> index

  int dim() const { return total.dim(); }
};

// The free operad F(X) of a (possibly weight-graded) collection X, truncated
// at the caps: per corolla class, the direct sum over decorated classes of
// the Aut-coinvariants of the vertexwise tensor product.
class FreeOperad {
 public:
  FreeOperad(GammaPreset preset, Collection generators, Caps caps);

  const GammaPreset& preset() const { return preset_; }
  const Collection& generators() const { return generators_; }
  const Caps& caps() const { return caps_; }
  const std::vector<CorollaClassId>& classes() const { return classes_; }
  const FreeComponent& component(const CorollaClassId& sigma) const;

  // Aut(sigma) generator matrices on the component (lazily built).
  const std::vector<Matrix>& sigma_action(const CorollaClassId& sigma) const;

  // F(X) packaged as a collection with weight grading.
  Collection as_collection() const;

  // Injects a concrete decorated morphism into component coordinates.
  Vec inject(const CorollaClassId& sigma, const ConcreteDecoration& d) const;

  // eta: X(sigma) -> F(X)(sigma), the weight-1 identity-class inclusion.
  Matrix eta(const CorollaClassId& sigma) const;

  // Expansion of a component vector into concrete decorations (the inclusion
  // of coinvariants spelled out summand by summand).
  struct Expansion {
    ConcreteDecoration decoration;
    Rat coefficient;
  };
  std::vector<Expansion> expand(const CorollaClassId& sigma, const Vec& v) const;

  // Substitution: outer decorated graph whose vertices carry elements of
  // F(X) components; result in F(X)(sigma).  Throws cap_exceeded when the
  // total weight leaves the truncation.
  Vec compose_elements(const CorollaClassId& sigma, const LabeledGraph& outer,
                       const std::vector<int>& outer_pins,
                       const std::map<int, Vec>& per_vertex_elements) const;

  const ActionTable& action_table(const CorollaClassId& cls) const;

 private:
  void build_component(const CorollaClassId& sigma);

  GammaPreset preset_;
  Collection generators_;
  Caps caps_;
  std::vector<CorollaClassId> classes_;
  std::map<std::string, FreeComponent> components_;
  mutable std::map<std::string, std::unique_ptr<ActionTable>> action_tables_;
};

// Componentwise matrix of F(phi) for a collection morphism phi: X -> Y.
std::map<std::string, Matrix> free_on_morphism(const FreeOperad& fx, const FreeOperad& fy,
                                               const CollectionMorphism& phi);

// mu: F(F(X)) -> F(X) componentwise, where ffx is the free operad over
// fx.as_collection().
std::map<std::string, Matrix> triple_mu(const FreeOperad& fx, const FreeOperad& ffx);

// An operad presented as a collection with a structure map per component.
struct OperadAlgebra {
  GammaPreset preset{PresetKind::ordinary};
  Collection carrier;
  std::map<std::string, Matrix> alpha;  // F(carrier)(σ).total -> carrier(σ)
  std::shared_ptr<FreeOperad> free_on_carrier;

  const Matrix& alpha_of(const CorollaClassId& id) const;
};

// Checks the triple-algebra axioms within the caps: alpha ∘ eta = id and
// alpha ∘ F(alpha) = alpha ∘ mu on every component.
struct AxiomReport {
  bool ok = true;
  std::vector<std::string> failures;
};
AxiomReport check_operad_axioms(const OperadAlgebra& a);

// Unit law alpha ∘ eta = id only; avoids materializing F(F(carrier)), which
// the full check needs for associativity.
AxiomReport check_operad_unit_laws(const OperadAlgebra& a);

// Value of the operad on an arbitrary labeled morphism (composition route of
// the reconstruction argument): tensor of values over the atomization parts.
LinearMap operad_value_on_morphism(const OperadAlgebra& a, const GraphMorphism& m,
                                   const Labeling& src, const Labeling& tgt);

struct OperadPresentation {
  GammaPreset preset{PresetKind::ordinary};
  Collection generators;
  std::map<std::string, Subspace> relations;  // key: class; inside F(gen)(σ)
  Caps caps;
};

// The ideal generated by a relation sub-collection: the smallest
// automorphism-stable, substitution-stable family of subspaces containing it.
std::map<std::string, Subspace> ideal_generated(const FreeOperad& fx,
                                                const std::map<std::string, Subspace>& r);

struct QuotientOperad {
  OperadPresentation presentation;
  std::shared_ptr<FreeOperad> free;           // F(generators)
  std::map<std::string, Subspace> ideal;
  OperadAlgebra algebra;                      // the quotient operad
  std::map<std::string, Matrix> projection;   // F -> quotient coordinates
  std::map<std::string, Matrix> section;      // quotient -> F (normal forms)
};

// with_algebra controls whether the quotient's structure map (and the free
// operad over the quotient carrier that hosts its domain) is materialized;
// skip it for large carriers and evaluate through the presentation instead.
QuotientOperad quotient_operad(const OperadPresentation& pres, bool with_algebra = true);

// One side of a diagonal evaluation: the free operad on the side's
// generators, plus optional lift/projection through a quotient presentation.
struct OperadSide {
  const FreeOperad* free = nullptr;
  const std::map<std::string, Matrix>* section = nullptr;     // carrier -> F(gen)
  const std::map<std::string, Matrix>* projection = nullptr;  // F(gen) -> carrier
};

// Value of a decorated class whose vertex decorations are pair tensors
// (left ⊗ right), evaluated through the two sides independently; this is the
// diagonal route of the morphism j and never forms a product collection.
Vec diagonal_value(const OperadSide& left, const OperadSide& right,
                   const CorollaClassId& sigma, const LabeledGraph& tau,
                   const std::vector<int>& pins, const std::map<int, Vec>& pair_vectors);

// Extension of phi: X -> Q.carrier to the operad morphism F(X) -> Q computed
// through Q's presentation (lift along the section, compose, project).
std::map<std::string, Matrix> extend_via_presentation(const FreeOperad& fx,
                                                      const QuotientOperad& target,
                                                      const CollectionMorphism& phi);

// The free operad packaged as an OperadAlgebra (alpha = mu).
OperadAlgebra free_operad_algebra(std::shared_ptr<FreeOperad> fx);

// White product of operads: componentwise tensor with the tensored structure
// maps through the regrouping.
OperadAlgebra white_product_operads(const OperadAlgebra& a, const OperadAlgebra& b);

// Extension of a collection morphism X -> B.carrier to an operad morphism
// F(X) -> B; unique by the span argument.
std::map<std::string, Matrix> extend_to_operad_morphism(const FreeOperad& fx,
                                                        const OperadAlgebra& b,
                                                        const CollectionMorphism& phi);

// j: F(E1 ○ B1) -> F(E1) ○ F(B1), the diagonal-summand morphism.
std::map<std::string, Matrix> j_morphism(const FreeOperad& f_eb, const FreeOperad& fe,
                                         const FreeOperad& fb);

// Two-level product (A2 ⊠_c A1)(σ): colimit over two-level sources only.
struct TwoLevelComponent {
  std::vector<DecoratedClass> classes;
  std::vector<int> dims;
  int total_dim = 0;
};
TwoLevelComponent two_level_product(const GammaPreset& preset, const Collection& a1,
                                    const Collection& a2, const CorollaClassId& sigma,
                                    const Caps& caps);

}  // namespace opal
