#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "opal/gamma.hpp"
#include "opal/linalg.hpp"

namespace opal {

// A corolla class: the iso class of labeled one-vertex graphs of one preset
// signature.  Signatures: ordinary/non_symmetric {n inputs}; cyclic {n flags};
// modular/stable_modular {genus, n flags}; prop family {m outputs, n inputs};
// linear {} (one input, one output).
struct CorollaClassId {
  PresetKind preset;
  std::vector<int> sig;

  std::string key() const;
  bool operator<(const CorollaClassId& other) const {
    return key() < other.key();
  }
  bool operator==(const CorollaClassId&) const = default;
};

// Canonical one-vertex representative with a fixed flag order and the
// automorphisms of the class as covariant position permutations.
struct CanonicalCorolla {
  LabeledGraph corolla;  // vertex 0, flags 0..k-1 in canonical order
  std::vector<std::vector<int>> aut_generators;  // perms of flag positions
  int flag_count() const { return static_cast<int>(corolla.graph.flags.size()); }
};

CanonicalCorolla canonical_corolla(const CorollaClassId& id);

// Class of the vertex v inside a labeled graph; throws invalid_input if the
// vertex does not fit the preset's corolla shapes.
CorollaClassId classify_vertex(const GammaPreset& preset, const LabeledGraph& g, int v);

// v's flags listed so that position i corresponds to flag i of the canonical
// corolla (outputs before inputs sorted by id; cyclic classes follow the
// successor order from the output).
std::vector<int> vertex_flag_order(const GammaPreset& preset, const LabeledGraph& g, int v);

// All corolla classes of the preset with at most `arity` flags (and genus at
// most `genus` for modular presets).
std::vector<CorollaClassId> classes_within(const GammaPreset& preset, int arity, int genus);

struct CollectionComponent {
  VectorSpace space;
  std::vector<Matrix> action;  // per canonical aut generator of the class
  std::vector<int> weights;    // per basis vector; empty means all 1
};

// A collection: finite-dimensional space with class-automorphism action per
// corolla class, finitely supported (absent classes read as zero).
struct Collection {
  GammaPreset preset{PresetKind::ordinary};
  std::map<std::string, CollectionComponent> components;
  std::map<std::string, CorollaClassId> ids;

  const CollectionComponent* find(const CorollaClassId& id) const;
  CollectionComponent* find(const CorollaClassId& id);
  void set(const CorollaClassId& id, CollectionComponent comp);
  int dim(const CorollaClassId& id) const;
  GroupAction action_of(const CorollaClassId& id) const;
  std::vector<CorollaClassId> support() const;
};

// Matrix of an arbitrary element of the generated permutation group acting on
// a component, resolved through the generator matrices.
class ActionTable {
 public:
  // degree = number of permuted positions (canonical corolla flag count).
  ActionTable(const std::vector<std::vector<int>>& generator_perms,
              const std::vector<Matrix>& generator_matrices, int dim, int degree);
  const Matrix& matrix_of(const std::vector<int>& perm) const;

 private:
  std::map<std::vector<int>, Matrix> table_;
};

struct CollectionMorphism {
  // target component matrix per class key; absent key means zero map.
  std::map<std::string, Matrix> maps;
  const Matrix* find(const std::string& key) const;
};

// Componentwise tensor with the diagonal action.  Supports intersect.
Collection white_product(const Collection& a, const Collection& b);

// Inner cohom of collections: E1(σ) = A1(σ) ⊗ B1(σ)* with the diagonal
// action, plus the coevaluation A1 -> E1 ○ B1.
struct CollectionCohom {
  Collection e1;
  CollectionMorphism coevaluation;  // A1(σ) -> E1(σ) ⊗ B1(σ)
};

CollectionCohom cohom_collections(const Collection& a, const Collection& b);

// The unit collection: one-dimensional trivial component at every listed class.
Collection unit_collection(const GammaPreset& preset,
                           const std::vector<CorollaClassId>& classes);

// Currying Hom(A1, F ○ B1) = Hom(E1, F): reshapes a per-class matrix
// u: A1(σ) -> F(σ) ⊗ B1(σ) into ũ: A1(σ) ⊗ B1(σ)* -> F(σ) and back.
Matrix curry_map(const Matrix& u, int dim_f, int dim_b);
Matrix uncurry_map(const Matrix& curried, int dim_f, int dim_b);

// Basis of the space of equivariant collection morphisms A -> B per class.
std::map<std::string, std::vector<Matrix>> equivariant_component_maps(const Collection& a,
                                                                      const Collection& b);

}  // namespace opal
