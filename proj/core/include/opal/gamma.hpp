#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opal/labeling.hpp"

namespace opal {

enum class PresetKind {
  ordinary,       // disjoint unions of directed trees, one output and >=2 inputs per vertex
  non_symmetric,  // ordinary with planar (cyclic) vertex orders
  cyclic,         // disjoint unions of unlabeled trees
  modular,        // genus-labeled graphs of arbitrary topology
  stable_modular, // modular with 2g-2+n > 0 at every vertex
  prop,           // directed graphs without oriented wheels; mergers allowed
  properad,       // directed graphs without oriented wheels
  dioperad,       // directed graphs with simply connected components
  half_prop,      // directed trees, every edge unique output or unique input
  linear,         // disjoint unions of directed paths (one input, one output per vertex)
};

std::string to_string(PresetKind k);

// A labeled-graph category: object predicate plus morphism compatibility.
// Morphisms are the composites of the allowed elementary classes; a composite
// carries virtual pairs exactly when its realized source is a valid object.
struct GammaPreset {
  PresetKind kind;

  std::string name() const { return to_string(kind); }
  bool oriented() const;
  bool genus_labeled() const;
  bool cyclic_labeled() const;
  bool allows_mergers() const { return kind == PresetKind::prop; }
  bool allows_virtual_loops() const;  // virtual loop = graftable as a valid loop

  ValidityReport check_object(const LabeledGraph& g) const;
  ValidityReport check_morphism(const GraphMorphism& m, const Labeling& src,
                                const Labeling& tgt) const;

  static GammaPreset by_name(const std::string& name);
  static std::vector<std::string> names();
};

// Label-compatibility part of the morphism check (orientation preservation,
// color preservation, genus bookkeeping, cyclic merge rule), independent of
// the allowed-class restrictions.
ValidityReport check_label_compatibility(const GammaPreset& preset, const GraphMorphism& m,
                                         const Labeling& src, const Labeling& tgt);

// Target labeling induced by a morphism from a labeled source (orientation
// and colors through the flag map, genus by the fiber formula).  Cyclic
// orders are induced for single-edge contractions of distinct corollas per
// the merge rule; otherwise they must be supplied by the caller.
Labeling induced_labeling(const GammaPreset& preset, const GraphMorphism& m,
                          const Labeling& src);

// Def 1.3 axiom spot-checks over a finite sample of labeled graphs and
// morphisms: existence and uniqueness (up to unique label-preserving
// isomorphism) of con_tau and total-grafting lifts, atomization lifts, and
// heredity assembly.
struct GammaAxiomReport {
  bool ok = true;
  std::vector<std::string> failures;
  std::vector<std::string> notes;
};

GammaAxiomReport check_gamma_axioms(const GammaPreset& preset,
                                    const std::vector<LabeledGraph>& sample);

}  // namespace opal
