// SPDX-License-Identifier: Apache-2.0
#include "glav/chem.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace glav;
using namespace glav::chem;

TEST_CASE("methane and ethylene parse to the expected graphs") {
  Molecule methane = parse_smiles("C");
  CHECK(methane.size() == 1);
  CHECK(methane.bonds.empty());
  CHECK(methane.atoms[0].hydrogens == 4);

  Molecule ethylene = parse_smiles("C=C");
  CHECK(ethylene.size() == 2);
  REQUIRE(ethylene.bonds.size() == 1);
  CHECK(ethylene.bonds[0].order == 2);
  CHECK(ethylene.atoms[0].hydrogens == 2);
}

TEST_CASE("benzene in aromatic mode carries annotations") {
  auto vocab = MoleculeVocab::qm9(true);
  BuiltinOracle oracle;
  Graph g = oracle.ingest("c1ccccc1", vocab);
  CHECK(g.size() == 6);
  int aromatic_edges = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      if (g.edge(i, j) == kBondAromatic) ++aromatic_edges;
  CHECK(aromatic_edges == 6);
  REQUIRE(g.has_annotations());
  for (int i = 0; i < 6; ++i) {
    REQUIRE(g.aromatic_annotations[i].has_value());
    CHECK(g.aromatic_annotations[i]->formal_charge == 0);
    CHECK(g.aromatic_annotations[i]->hydrogen_count == 1);
  }
}

TEST_CASE("benzene in kekulized mode resolves to alternating bonds") {
  auto vocab = MoleculeVocab::qm9(false);
  BuiltinOracle oracle;
  Graph g = oracle.ingest("c1ccccc1", vocab);
  int singles = 0, doubles = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) {
      if (g.edge(i, j) == kBondSingle) ++singles;
      if (g.edge(i, j) == kBondDouble) ++doubles;
    }
  CHECK(singles == 3);
  CHECK(doubles == 3);
  CHECK(!g.has_annotations());
}

TEST_CASE("parser rejects malformed and unsupported input") {
  CHECK_THROWS_AS(parse_smiles(""), IngestError);
  CHECK_THROWS_AS(parse_smiles("C1CC"), IngestError);       // unclosed ring
  CHECK_THROWS_AS(parse_smiles("C(C"), IngestError);        // unclosed branch
  CHECK_THROWS_AS(parse_smiles("C(C)(C)(C)(C)C"), IngestError);  // valence
  CHECK_THROWS_AS(parse_smiles("CC.CC"), IngestError);      // fragments
  CHECK_THROWS_AS(parse_smiles("Xx"), IngestError);
  CHECK_THROWS_AS(parse_smiles("c1cc1"), IngestError);  // odd ring, no kekulization
}

TEST_CASE("vocabulary errors surface on ingest") {
  auto vocab = MoleculeVocab::qm9(true);
  BuiltinOracle oracle;
  CHECK_THROWS_AS(oracle.ingest("CS", vocab), IngestError);  // S not in QM9 vocab
  CHECK_THROWS_AS(oracle.ingest("C(((", vocab), IngestError);
}

TEST_CASE("canonical text is invariant across input orderings") {
  const std::vector<std::vector<std::string>> groups = {
      {"CCO", "OCC", "C(O)C"},
      {"Cc1ccccc1", "c1ccccc1C", "c1ccc(C)cc1"},
      {"CC(=O)O", "OC(=O)C", "C(C)(=O)O"},
      {"c1cc[nH]c1", "[nH]1cccc1"},
      {"N#Cc1ccccc1", "c1ccccc1C#N"},
  };
  for (const auto& group : groups) {
    const std::string first = write_smiles(parse_smiles(group[0]));
    for (const auto& smiles : group) CHECK(write_smiles(parse_smiles(smiles)) == first);
  }
  // Distinct molecules stay distinct.
  CHECK(write_smiles(parse_smiles("CCO")) != write_smiles(parse_smiles("CCN")));
  CHECK(write_smiles(parse_smiles("c1ccncc1")) != write_smiles(parse_smiles("c1ccccc1")));
}

TEST_CASE("canonical text round-trips through the parser") {
  for (const std::string smiles :
       {"CCO", "c1ccccc1", "CC(=O)NC", "c1cc[nH]c1", "FC(F)(F)C", "C1CC1CO", "N#N",
        "c1ccc2ccccc2c1", "[NH4+]", "CC[O-]"}) {
    const std::string canon = write_smiles(parse_smiles(smiles));
    CHECK(write_smiles(parse_smiles(canon)) == canon);
  }
}

TEST_CASE("graph round trip preserves the molecule") {
  auto vocab = MoleculeVocab::qm9(true);
  BuiltinOracle oracle;
  for (const std::string smiles : {"CCO", "c1ccccc1", "CC#CC", "c1ccncc1", "CC(N)=O"}) {
    Graph g = oracle.ingest(smiles, vocab);
    const std::string canon = oracle.canonical_text(g, vocab);
    CHECK(canon == write_smiles(parse_smiles(smiles)));
  }
}

TEST_CASE("validity rejects broken aromatic systems and over-valence") {
  auto vocab = MoleculeVocab::qm9(true);
  BuiltinOracle oracle;

  // Aromatic chain (no ring): invalid.
  Graph chain(3);
  chain.node_classes = {0, 0, 0};
  chain.set_edge(0, 1, kBondAromatic);
  chain.set_edge(1, 2, kBondAromatic);
  CHECK_FALSE(oracle.validity(chain, vocab).valid);

  // Five-membered all-carbon aromatic ring: no kekulization exists.
  Graph ring5(5);
  ring5.node_classes = {0, 0, 0, 0, 0};
  for (int i = 0; i < 5; ++i) ring5.set_edge(i, (i + 1) % 5, kBondAromatic);
  CHECK_FALSE(oracle.validity(ring5, vocab).valid);

  // Carbon with five single bonds: over-valenced.
  Graph penta(6);
  penta.node_classes = {0, 0, 0, 0, 0, 0};
  for (int leaf = 1; leaf < 6; ++leaf) penta.set_edge(0, leaf, kBondSingle);
  CHECK_FALSE(oracle.validity(penta, vocab).valid);

  // Plain ethane-like graph: valid.
  Graph ok(2);
  ok.node_classes = {0, 0};
  ok.set_edge(0, 1, kBondSingle);
  CHECK(oracle.validity(ok, vocab).valid);

  // Fluorine with two bonds: invalid.
  Graph f2(3);
  f2.node_classes = {3, 0, 0};
  f2.set_edge(0, 1, kBondSingle);
  f2.set_edge(0, 2, kBondSingle);
  CHECK_FALSE(oracle.validity(f2, vocab).valid);
}

TEST_CASE("logp is deterministic and increases with chain length") {
  auto vocab = MoleculeVocab::qm9(true);
  BuiltinOracle oracle;
  Graph methane = oracle.ingest("C", vocab);
  Graph ethane = oracle.ingest("CC", vocab);
  Graph propane = oracle.ingest("CCC", vocab);
  CHECK(oracle.logp(ethane, vocab) > oracle.logp(methane, vocab));
  CHECK(oracle.logp(propane, vocab) > oracle.logp(ethane, vocab));
  CHECK(oracle.logp(methane, vocab) == oracle.logp(methane, vocab));
  // Polar atoms lower it.
  Graph ethanol = oracle.ingest("CCO", vocab);
  CHECK(oracle.logp(ethanol, vocab) < oracle.logp(propane, vocab));
}

TEST_CASE("element attributes table matches the vocabulary") {
  auto vocab = MoleculeVocab::qm9(true);
  Mat attrs = element_attributes(vocab);
  CHECK(attrs.rows() == 4);
  CHECK(attrs.cols() == kElementAttrDim);
  CHECK(attrs(0, 0) == doctest::Approx(6.0 / 54.0));   // carbon atomic number
  CHECK(attrs(3, 3) == doctest::Approx(3.98 / 4.0));   // fluorine electronegativity
}

TEST_CASE("process oracle delegates through the line protocol") {
  namespace fs = std::filesystem;
  const auto script = fs::temp_directory_path() / "glav_mock_oracle.sh";
  {
    std::ofstream out(script);
    out << "#!/bin/sh\nread line\ncase \"$line\" in\n"
        << "LOGP*) echo 'OK 42.5' ;;\n"
        << "VALID*) echo 'OK 1' ;;\n"
        << "CANON*) echo 'OK MOCK' ;;\n"
        << "*) echo 'ERR unsupported' ;;\nesac\n";
  }
  fs::permissions(script, fs::perms::owner_all);
  ProcessOracle oracle("sh " + script.string());
  auto vocab = MoleculeVocab::qm9(true);
  Graph g(1);
  g.node_classes = {0};
  CHECK(oracle.logp(g, vocab) == doctest::Approx(42.5));
  CHECK(oracle.validity(g, vocab).valid);
  CHECK(oracle.canonical_text(g, vocab) == "MOCK");
  fs::remove(script);
}

TEST_CASE("make_oracle honors the environment hook") {
  unsetenv("GLAV_ORACLE_CMD");
  auto builtin = make_oracle();
  CHECK(dynamic_cast<BuiltinOracle*>(builtin.get()) != nullptr);
  setenv("GLAV_ORACLE_CMD", "cat", 1);
  auto process = make_oracle();
  CHECK(dynamic_cast<ProcessOracle*>(process.get()) != nullptr);
  unsetenv("GLAV_ORACLE_CMD");
}
