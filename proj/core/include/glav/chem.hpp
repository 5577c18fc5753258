// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/graph.hpp"

#include <memory>
#include <string>
#include <vector>

namespace glav::chem {

constexpr int kBondNone = 0;
constexpr int kBondSingle = 1;
constexpr int kBondDouble = 2;
constexpr int kBondTriple = 3;
constexpr int kBondAromatic = 4;

struct Atom {
  std::string element;
  int charge = 0;
  int hydrogens = 0;   // final hydrogen count after sanitization
  bool aromatic = false;
  bool h_fixed = false;  // true for bracket atoms, implicit otherwise
};

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;        // kekulized order, 1..3
  bool aromatic = false;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int size() const { return static_cast<int>(atoms.size()); }
  const Bond* find_bond(int a, int b) const;
};

/// Node-class vocabulary for molecule datasets plus the edge-class layout.
/// Aromatic mode uses edge classes {none, single, double, triple, aromatic};
/// kekulized mode drops the aromatic class.
struct MoleculeVocab {
  std::vector<std::string> elements;
  bool aromatic_mode = true;

  int n_node_classes() const { return static_cast<int>(elements.size()); }
  int n_edge_classes() const { return aromatic_mode ? 5 : 4; }
  int class_of(const std::string& element) const;

  static MoleculeVocab qm9(bool aromatic_mode);  // C, N, O, F
};

/// Per-class node attribute rows (K): atomic number, atomic mass, valence
/// electrons, electronegativity, each scaled to roughly unit range.
Mat element_attributes(const MoleculeVocab& vocab);
constexpr int kElementAttrDim = 4;

/// Parses the SMILES subset used by this project (organic subset + brackets,
/// branches, ring closures, aromatic lowercase; stereo markers are ignored,
/// multi-fragment input is rejected) and sanitizes the result: aromatic ring
/// check, kekulization, implicit hydrogen fill, valence check.
/// Throws IngestError on any failure.
Molecule parse_smiles(const std::string& smiles);

/// Canonical SMILES. Isomorphic molecules (including charge/hydrogen state)
/// yield identical strings.
std::string write_smiles(const Molecule& mol);

struct ValidityResult {
  bool valid = false;
  std::string reason;
};

/// Graph conversion. In aromatic mode, aromatic atoms carry (charge, H count)
/// annotations; in kekulized mode bonds are the kekulized orders.
Graph molecule_to_graph(const Molecule& mol, const MoleculeVocab& vocab);
/// Inverse of molecule_to_graph up to sanitization; throws IngestError when the
/// graph does not describe a sanitizable molecule.
Molecule graph_to_molecule(const Graph& g, const MoleculeVocab& vocab);

/// Boundary to the cheminformatics oracle: validity predicate, canonical text
/// and logP for decoded graphs, plus SMILES ingestion.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Graph ingest(const std::string& smiles, const MoleculeVocab& vocab) = 0;
  virtual ValidityResult validity(const Graph& g, const MoleculeVocab& vocab) = 0;
  /// Canonical text of a valid graph; empty string for invalid ones.
  virtual std::string canonical_text(const Graph& g, const MoleculeVocab& vocab) = 0;
  /// logP of a valid graph; throws IngestError for invalid ones.
  virtual double logp(const Graph& g, const MoleculeVocab& vocab) = 0;
};

class BuiltinOracle final : public Oracle {
 public:
  Graph ingest(const std::string& smiles, const MoleculeVocab& vocab) override;
  ValidityResult validity(const Graph& g, const MoleculeVocab& vocab) override;
  std::string canonical_text(const Graph& g, const MoleculeVocab& vocab) override;
  double logp(const Graph& g, const MoleculeVocab& vocab) override;
};

/// Delegates each request to an external command through a line protocol
/// (request file in, response file out). The command is invoked as
/// `cmd <requests >responses`.
class ProcessOracle final : public Oracle {
 public:
  explicit ProcessOracle(std::string command) : command_(std::move(command)) {}
  Graph ingest(const std::string& smiles, const MoleculeVocab& vocab) override;
  ValidityResult validity(const Graph& g, const MoleculeVocab& vocab) override;
  std::string canonical_text(const Graph& g, const MoleculeVocab& vocab) override;
  double logp(const Graph& g, const MoleculeVocab& vocab) override;

 private:
  std::string roundtrip(const std::string& request);
  std::string command_;
};

/// Built-in oracle, or a ProcessOracle when GLAV_ORACLE_CMD is set.
std::unique_ptr<Oracle> make_oracle();

}  // namespace glav::chem
