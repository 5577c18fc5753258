// SPDX-License-Identifier: Apache-2.0
#include "glav/chem.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace glav::chem {

namespace {

const std::set<std::string> kOrganicSubset = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
const std::set<std::string> kAromaticElements = {"B", "C", "N", "O", "P", "S"};

std::vector<int> allowed_valences(const std::string& elem, int charge) {
  struct Entry {
    const char* elem;
    int charge;
    std::vector<int> valences;
  };
  static const std::vector<Entry> table = {
      {"B", 0, {3}},  {"B", -1, {4}},
      {"C", 0, {4}},  {"C", 1, {3}},  {"C", -1, {3}},
      {"N", 0, {3}},  {"N", 1, {4}},  {"N", -1, {2}},
      {"O", 0, {2}},  {"O", 1, {3}},  {"O", -1, {1}},
      {"F", 0, {1}},  {"F", -1, {0}},
      {"P", 0, {3, 5}}, {"P", 1, {4}},
      {"S", 0, {2, 4, 6}}, {"S", 1, {3}}, {"S", -1, {1}},
      {"Cl", 0, {1}}, {"Cl", -1, {0}},
      {"Br", 0, {1}}, {"Br", -1, {0}},
      {"I", 0, {1}},  {"I", -1, {0}},
  };
  for (const auto& e : table)
    if (elem == e.elem && charge == e.charge) return e.valences;
  return {};
}

/// Target valence of an atom inside an aromatic system.
int aromatic_target_valence(const std::string& elem, int charge) {
  if (elem == "C") return 4 - std::abs(charge);
  if (elem == "N" || elem == "P") return 3 + charge;
  if (elem == "O" || elem == "S") return 2 + charge;
  if (elem == "B") return 3;
  return -1;
}

struct ElementInfo {
  const char* symbol;
  double atomic_number;
  double mass;
  double valence_electrons;
  double electronegativity;
  double logp_plain;
  double logp_aromatic;
};

const std::vector<ElementInfo>& element_table() {
  static const std::vector<ElementInfo> table = {
      {"B", 5, 10.81, 3, 2.04, 0.20, 0.20},
      {"C", 6, 12.011, 4, 2.55, 0.38, 0.31},
      {"N", 7, 14.007, 5, 3.04, -0.58, -0.38},
      {"O", 8, 15.999, 6, 3.44, -0.61, -0.19},
      {"F", 9, 18.998, 7, 3.98, 0.22, 0.22},
      {"P", 15, 30.974, 5, 2.19, -0.50, -0.50},
      {"S", 16, 32.06, 6, 2.58, 0.25, 0.41},
      {"Cl", 17, 35.45, 7, 3.16, 0.65, 0.65},
      {"Br", 35, 79.904, 7, 2.96, 0.86, 0.86},
      {"I", 53, 126.90, 7, 2.66, 1.20, 1.20},
  };
  return table;
}

const ElementInfo* element_info(const std::string& symbol) {
  for (const auto& e : element_table())
    if (symbol == e.symbol) return &e;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Sanitization

std::vector<std::vector<int>> bond_lists(const Molecule& mol) {
  std::vector<std::vector<int>> adj(mol.size());
  for (int b = 0; b < static_cast<int>(mol.bonds.size()); ++b) {
    adj[mol.bonds[b].a].push_back(b);
    adj[mol.bonds[b].b].push_back(b);
  }
  return adj;
}

/// Every aromatic bond must sit on a cycle of aromatic bonds. Finds bridges
/// of the aromatic-bond subgraph by DFS low-links.
bool aromatic_bonds_in_rings(const Molecule& mol) {
  const int n = mol.size();
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, bond idx)
  for (int b = 0; b < static_cast<int>(mol.bonds.size()); ++b) {
    if (!mol.bonds[b].aromatic) continue;
    adj[mol.bonds[b].a].push_back({mol.bonds[b].b, b});
    adj[mol.bonds[b].b].push_back({mol.bonds[b].a, b});
  }
  std::vector<int> disc(n, -1), low(n, 0);
  bool has_bridge = false;
  int timer = 0;
  std::function<void(int, int)> dfs = [&](int v, int parent_bond) {
    disc[v] = low[v] = timer++;
    for (auto [u, b] : adj[v]) {
      if (b == parent_bond) continue;
      if (disc[u] == -1) {
        dfs(u, b);
        low[v] = std::min(low[v], low[u]);
        if (low[u] > disc[v]) has_bridge = true;
      } else {
        low[v] = std::min(low[v], disc[u]);
      }
    }
  };
  for (int v = 0; v < n; ++v)
    if (disc[v] == -1 && !adj[v].empty()) dfs(v, -1);
  return !has_bridge;
}

bool match_doubles(int idx, const std::vector<int>& need_atoms, std::vector<char>& matched,
                   const Molecule& mol, const std::vector<std::vector<int>>& adj,
                   std::vector<char>& bond_is_double, const std::vector<char>& needs) {
  if (idx == static_cast<int>(need_atoms.size())) return true;
  const int v = need_atoms[idx];
  if (matched[v]) return match_doubles(idx + 1, need_atoms, matched, mol, adj, bond_is_double, needs);
  for (int b : adj[v]) {
    if (!mol.bonds[b].aromatic) continue;
    const int u = mol.bonds[b].a == v ? mol.bonds[b].b : mol.bonds[b].a;
    if (!needs[u] || matched[u]) continue;
    matched[v] = matched[u] = 1;
    bond_is_double[b] = 1;
    if (match_doubles(idx + 1, need_atoms, matched, mol, adj, bond_is_double, needs)) return true;
    matched[v] = matched[u] = 0;
    bond_is_double[b] = 0;
  }
  return false;
}

/// Sanitizes in place: checks aromatic flags, kekulizes (assigning orders to
/// aromatic bonds), fills implicit hydrogens, checks valences.
/// Throws IngestError with a reason on failure.
void sanitize(Molecule& mol) {
  const int n = mol.size();
  auto adj = bond_lists(mol);

  for (const auto& bond : mol.bonds) {
    if (bond.aromatic &&
        (!mol.atoms[bond.a].aromatic || !mol.atoms[bond.b].aromatic))
      throw IngestError("aromatic bond touches a non-aromatic atom");
  }
  for (int v = 0; v < n; ++v) {
    if (!mol.atoms[v].aromatic) continue;
    bool any = false;
    for (int b : adj[v]) any = any || mol.bonds[b].aromatic;
    if (!any) throw IngestError("aromatic atom without aromatic bonds");
    if (!kAromaticElements.count(mol.atoms[v].element))
      throw IngestError("element cannot be aromatic: " + mol.atoms[v].element);
  }
  if (!aromatic_bonds_in_rings(mol))
    throw IngestError("aromatic bonds do not form closed rings");

  // Decide which aromatic atoms need exactly one double bond, fixing hydrogen
  // counts of implicit aromatic atoms along the way.
  std::vector<char> needs(n, 0);
  for (int v = 0; v < n; ++v) {
    Atom& atom = mol.atoms[v];
    if (!atom.aromatic) continue;
    const int target = aromatic_target_valence(atom.element, atom.charge);
    if (target < 0) throw IngestError("unsupported aromatic atom state");
    int sigma = 0, extra_pi = 0;
    for (int b : adj[v]) {
      sigma += 1;
      if (!mol.bonds[b].aromatic) extra_pi += mol.bonds[b].order - 1;
    }
    if (atom.h_fixed) {
      const int slack = target - sigma - extra_pi - atom.hydrogens;
      if (slack != 0 && slack != 1)
        throw IngestError("aromatic atom valence out of range");
      needs[v] = slack == 1;
    } else if (atom.element == "C") {
      needs[v] = 1;
      atom.hydrogens = target - sigma - extra_pi - 1;
      if (atom.hydrogens < 0) throw IngestError("aromatic carbon over-valenced");
    } else if (atom.element == "N" || atom.element == "P") {
      needs[v] = sigma < 3;
      atom.hydrogens = 0;
    } else {  // O, S, B
      if (target - sigma - extra_pi != 0) throw IngestError("aromatic atom valence out of range");
      needs[v] = 0;
      atom.hydrogens = 0;
    }
    atom.h_fixed = true;
  }

  std::vector<int> need_atoms;
  for (int v = 0; v < n; ++v)
    if (needs[v]) need_atoms.push_back(v);
  std::vector<char> matched(n, 0), bond_is_double(mol.bonds.size(), 0);
  if (!match_doubles(0, need_atoms, matched, mol, adj, bond_is_double, needs))
    throw IngestError("aromatic system cannot be kekulized");
  for (int b = 0; b < static_cast<int>(mol.bonds.size()); ++b)
    if (mol.bonds[b].aromatic) mol.bonds[b].order = bond_is_double[b] ? 2 : 1;

  // Implicit hydrogens and valence check.
  for (int v = 0; v < n; ++v) {
    Atom& atom = mol.atoms[v];
    int order_sum = 0;
    for (int b : adj[v]) order_sum += mol.bonds[b].order;
    const auto valences = allowed_valences(atom.element, atom.charge);
    if (valences.empty())
      throw IngestError("unsupported element/charge: " + atom.element + "/" +
                        std::to_string(atom.charge));
    if (atom.h_fixed) {
      const int total = order_sum + atom.hydrogens;
      if (std::find(valences.begin(), valences.end(), total) == valences.end())
        throw IngestError("valence " + std::to_string(total) + " not allowed for " + atom.element);
    } else {
      int h = -1;
      for (int val : valences)
        if (val >= order_sum) {
          h = val - order_sum;
          break;
        }
      if (h < 0)
        throw IngestError("over-valenced atom " + atom.element + " (order sum " +
                          std::to_string(order_sum) + ")");
      atom.hydrogens = h;
      atom.h_fixed = true;
    }
  }
}

// ---------------------------------------------------------------------------
// SMILES parsing

struct Token {
  Atom atom;
  bool bracket = false;
};

bool parse_element(const std::string& s, std::size_t& pos, bool bracket, std::string& elem,
                   bool& aromatic) {
  if (pos >= s.size()) return false;
  const char c = s[pos];
  // Two-letter elements first.
  if (pos + 1 < s.size()) {
    const std::string two = s.substr(pos, 2);
    if (two == "Cl" || two == "Br") {
      elem = two;
      aromatic = false;
      pos += 2;
      return true;
    }
  }
  if (std::isupper(static_cast<unsigned char>(c))) {
    elem = std::string(1, c);
    if (!bracket && !kOrganicSubset.count(elem)) return false;
    if (bracket && !element_info(elem)) return false;
    aromatic = false;
    ++pos;
    return true;
  }
  if (std::islower(static_cast<unsigned char>(c))) {
    const std::string up(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (!kAromaticElements.count(up)) return false;
    elem = up;
    aromatic = true;
    ++pos;
    return true;
  }
  return false;
}

Atom parse_bracket_atom(const std::string& s, std::size_t& pos) {
  // pos points just after '['.
  Atom atom;
  atom.h_fixed = true;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;  // isotope, ignored
  if (!parse_element(s, pos, true, atom.element, atom.aromatic))
    throw IngestError("bad element in bracket atom");
  while (pos < s.size() && s[pos] == '@') ++pos;  // stereo, ignored
  if (pos < s.size() && s[pos] == 'H') {
    ++pos;
    atom.hydrogens = 1;
    if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      atom.hydrogens = s[pos] - '0';
      ++pos;
    }
  }
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '+' ? 1 : -1;
    ++pos;
    int magnitude = 1;
    if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      magnitude = s[pos] - '0';
      ++pos;
    } else {
      while (pos < s.size() && s[pos] == (sign > 0 ? '+' : '-')) {
        ++magnitude;
        ++pos;
      }
    }
    atom.charge = sign * magnitude;
  }
  if (pos < s.size() && s[pos] == ':') {  // atom class, ignored
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  if (pos >= s.size() || s[pos] != ']') throw IngestError("unterminated bracket atom");
  ++pos;
  return atom;
}

}  // namespace

const Bond* Molecule::find_bond(int a, int b) const {
  for (const auto& bond : bonds)
    if ((bond.a == a && bond.b == b) || (bond.a == b && bond.b == a)) return &bond;
  return nullptr;
}

int MoleculeVocab::class_of(const std::string& element) const {
  for (int i = 0; i < static_cast<int>(elements.size()); ++i)
    if (elements[i] == element) return i;
  return -1;
}

MoleculeVocab MoleculeVocab::qm9(bool aromatic_mode) {
  return MoleculeVocab{{"C", "N", "O", "F"}, aromatic_mode};
}

Mat element_attributes(const MoleculeVocab& vocab) {
  Mat attrs(vocab.n_node_classes(), kElementAttrDim);
  for (int c = 0; c < vocab.n_node_classes(); ++c) {
    const ElementInfo* info = element_info(vocab.elements[c]);
    if (!info) throw ConfigError("unknown element in vocabulary: " + vocab.elements[c]);
    attrs(c, 0) = info->atomic_number / 54.0;
    attrs(c, 1) = info->mass / 127.0;
    attrs(c, 2) = info->valence_electrons / 8.0;
    attrs(c, 3) = info->electronegativity / 4.0;
  }
  return attrs;
}

Molecule parse_smiles(const std::string& smiles) {
  Molecule mol;
  std::vector<int> branch_stack;
  std::map<int, std::pair<int, int>> open_rings;  // digit -> (atom, bond code)
  int prev = -1;
  int pending_bond = -2;  // -2 none, -1 aromatic ':', else explicit order
  std::size_t pos = 0;

  auto add_bond = [&](int a, int b, int code) {
    if (a == b) throw IngestError("self bond");
    Bond bond;
    bond.a = a;
    bond.b = b;
    if (code == -2) {
      // Default: aromatic between two aromatic atoms, single otherwise.
      bond.aromatic = mol.atoms[a].aromatic && mol.atoms[b].aromatic;
      bond.order = 1;
    } else if (code == -1) {
      bond.aromatic = true;
      bond.order = 1;
    } else {
      bond.aromatic = false;
      bond.order = code;
    }
    if (mol.find_bond(a, b)) throw IngestError("duplicate bond");
    mol.bonds.push_back(bond);
  };

  auto attach_atom = [&](Atom atom) {
    mol.atoms.push_back(std::move(atom));
    const int idx = mol.size() - 1;
    if (prev >= 0) add_bond(prev, idx, pending_bond);
    pending_bond = -2;
    prev = idx;
  };

  auto handle_ring = [&](int digit) {
    auto it = open_rings.find(digit);
    if (it == open_rings.end()) {
      open_rings[digit] = {prev, pending_bond};
    } else {
      auto [other, other_code] = it->second;
      open_rings.erase(it);
      int code = pending_bond;
      if (code == -2) code = other_code;
      else if (other_code != -2 && other_code != code)
        throw IngestError("conflicting ring bond orders");
      add_bond(other, prev, code);
    }
    pending_bond = -2;
  };

  while (pos < smiles.size()) {
    const char c = smiles[pos];
    if (std::isspace(static_cast<unsigned char>(c))) break;  // trailing title field
    if (c == '[') {
      ++pos;
      attach_atom(parse_bracket_atom(smiles, pos));
    } else if (c == '(') {
      if (prev < 0) throw IngestError("branch before any atom");
      branch_stack.push_back(prev);
      ++pos;
    } else if (c == ')') {
      if (branch_stack.empty()) throw IngestError("unmatched ')'");
      prev = branch_stack.back();
      branch_stack.pop_back();
      ++pos;
    } else if (c == '-' || c == '/' || c == '\\') {
      pending_bond = 1;
      ++pos;
    } else if (c == '=') {
      pending_bond = 2;
      ++pos;
    } else if (c == '#') {
      pending_bond = 3;
      ++pos;
    } else if (c == ':') {
      pending_bond = -1;
      ++pos;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      if (prev < 0) throw IngestError("ring closure before any atom");
      handle_ring(c - '0');
      ++pos;
    } else if (c == '%') {
      if (pos + 2 >= smiles.size() || !std::isdigit(static_cast<unsigned char>(smiles[pos + 1])) ||
          !std::isdigit(static_cast<unsigned char>(smiles[pos + 2])))
        throw IngestError("bad %nn ring closure");
      handle_ring((smiles[pos + 1] - '0') * 10 + (smiles[pos + 2] - '0'));
      pos += 3;
    } else if (c == '.') {
      throw IngestError("multi-fragment input not supported");
    } else {
      Atom atom;
      if (!parse_element(smiles, pos, false, atom.element, atom.aromatic))
        throw IngestError(std::string("unexpected character '") + c + "' in: " + smiles);
      attach_atom(std::move(atom));
    }
  }
  if (mol.atoms.empty()) throw IngestError("empty SMILES");
  if (!branch_stack.empty()) throw IngestError("unmatched '('");
  if (!open_rings.empty()) throw IngestError("unclosed ring bond");

  sanitize(mol);
  return mol;
}

// ---------------------------------------------------------------------------
// Canonical SMILES

namespace {

/// True when the plain (non-bracket) token would not round-trip this atom.
bool needs_bracket(const Molecule& mol, int v) {
  const Atom& atom = mol.atoms[v];
  if (atom.charge != 0) return true;
  if (!kOrganicSubset.count(atom.element)) return true;
  if (atom.aromatic) {
    // Re-run the implicit rules the parser would use.
    if (atom.element == "N" || atom.element == "P" || atom.element == "O" || atom.element == "S")
      return atom.hydrogens != 0;
    return false;  // aromatic C hydrogens are derivable
  }
  int order_sum = 0;
  for (const auto& bond : mol.bonds)
    if (bond.a == v || bond.b == v) order_sum += bond.order;
  const auto valences = allowed_valences(atom.element, 0);
  for (int val : valences)
    if (val >= order_sum) return atom.hydrogens != val - order_sum;
  return true;
}

std::string atom_token(const Molecule& mol, int v) {
  const Atom& atom = mol.atoms[v];
  std::string sym = atom.element;
  if (atom.aromatic)
    for (auto& ch : sym) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (!needs_bracket(mol, v)) return sym;
  std::string out = "[" + sym;
  if (atom.hydrogens == 1) out += "H";
  else if (atom.hydrogens > 1) out += "H" + std::to_string(atom.hydrogens);
  if (atom.charge > 0) out += atom.charge == 1 ? "+" : "+" + std::to_string(atom.charge);
  if (atom.charge < 0) out += atom.charge == -1 ? "-" : "-" + std::to_string(-atom.charge);
  return out + "]";
}

std::string bond_token(const Molecule& mol, const Bond& bond) {
  if (bond.aromatic) return "";
  if (bond.order == 2) return "=";
  if (bond.order == 3) return "#";
  // Explicit single between two aromatic atoms (e.g. ring-ring links).
  if (mol.atoms[bond.a].aromatic && mol.atoms[bond.b].aromatic) return "-";
  return "";
}

std::vector<int> initial_invariants(const Molecule& mol) {
  const int n = mol.size();
  std::vector<std::vector<int>> sigs(n);
  for (int v = 0; v < n; ++v) {
    const Atom& a = mol.atoms[v];
    const ElementInfo* info = element_info(a.element);
    std::vector<int> orders;
    for (const auto& bond : mol.bonds)
      if (bond.a == v || bond.b == v) orders.push_back(bond.aromatic ? 9 : bond.order);
    std::sort(orders.begin(), orders.end());
    sigs[v] = {static_cast<int>(info ? info->atomic_number : 0), a.charge, a.hydrogens,
               a.aromatic ? 1 : 0, static_cast<int>(orders.size())};
    sigs[v].insert(sigs[v].end(), orders.begin(), orders.end());
  }
  std::map<std::vector<int>, int> ids;
  for (const auto& s : sigs) ids.emplace(s, 0);
  int next = 0;
  for (auto& [s, id] : ids) id = next++;
  std::vector<int> ranks(n);
  for (int v = 0; v < n; ++v) ranks[v] = ids[sigs[v]];
  return ranks;
}

std::vector<int> refine_ranks(const Molecule& mol, std::vector<int> ranks) {
  const int n = mol.size();
  auto adj = bond_lists(mol);
  while (true) {
    std::vector<std::vector<int>> sigs(n);
    for (int v = 0; v < n; ++v) {
      std::vector<std::pair<int, int>> neigh;
      for (int b : adj[v]) {
        const Bond& bond = mol.bonds[b];
        const int u = bond.a == v ? bond.b : bond.a;
        neigh.push_back({ranks[u], bond.aromatic ? 9 : bond.order});
      }
      std::sort(neigh.begin(), neigh.end());
      sigs[v].push_back(ranks[v]);
      for (auto [r, o] : neigh) {
        sigs[v].push_back(r);
        sigs[v].push_back(o);
      }
    }
    std::map<std::vector<int>, int> ids;
    for (const auto& s : sigs) ids.emplace(s, 0);
    int next = 0;
    for (auto& [s, id] : ids) id = next++;
    std::vector<int> new_ranks(n);
    for (int v = 0; v < n; ++v) new_ranks[v] = ids[sigs[v]];
    if (new_ranks == ranks) return ranks;
    ranks = std::move(new_ranks);
  }
}

std::string write_with_ranks(const Molecule& mol, const std::vector<int>& ranks) {
  const int n = mol.size();
  auto adj = bond_lists(mol);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ranks[a] < ranks[b]; });

  std::vector<char> visited(n, 0);
  std::vector<char> tree_bond(mol.bonds.size(), 0);
  std::vector<std::vector<int>> ring_bonds_at(n);

  // DFS in rank order to classify tree vs ring-closure bonds.
  std::vector<int> parent_bond(n, -1);
  std::function<void(int)> classify = [&](int v) {
    visited[v] = 1;
    std::vector<int> nbrs = adj[v];
    std::sort(nbrs.begin(), nbrs.end(), [&](int b1, int b2) {
      const int u1 = mol.bonds[b1].a == v ? mol.bonds[b1].b : mol.bonds[b1].a;
      const int u2 = mol.bonds[b2].a == v ? mol.bonds[b2].b : mol.bonds[b2].a;
      return ranks[u1] < ranks[u2];
    });
    for (int b : nbrs) {
      if (b == parent_bond[v]) continue;
      const int u = mol.bonds[b].a == v ? mol.bonds[b].b : mol.bonds[b].a;
      if (!visited[u]) {
        tree_bond[b] = 1;
        parent_bond[u] = b;
        classify(u);
      } else if (!tree_bond[b] && ring_bonds_at[v].end() ==
                     std::find(ring_bonds_at[v].begin(), ring_bonds_at[v].end(), b)) {
        ring_bonds_at[u].push_back(b);
        ring_bonds_at[v].push_back(b);
      }
    }
  };

  // Ring digits are allocated in emission order, lowest free digit first.
  std::map<int, int> bond_digit;
  std::vector<char> digit_used(100, 0);
  std::string out;

  std::function<void(int)> emit = [&](int v) {
    out += atom_token(mol, v);
    for (int b : ring_bonds_at[v]) {
      auto it = bond_digit.find(b);
      int digit;
      if (it == bond_digit.end()) {
        digit = 1;
        while (digit_used[digit]) ++digit;
        digit_used[digit] = 1;
        bond_digit[b] = digit;
        out += bond_token(mol, mol.bonds[b]);
      } else {
        digit = it->second;
        digit_used[digit] = 0;
        out += bond_token(mol, mol.bonds[b]);
      }
      out += digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit);
    }
    std::vector<int> children;
    std::vector<int> nbrs = adj[v];
    std::sort(nbrs.begin(), nbrs.end(), [&](int b1, int b2) {
      const int u1 = mol.bonds[b1].a == v ? mol.bonds[b1].b : mol.bonds[b1].a;
      const int u2 = mol.bonds[b2].a == v ? mol.bonds[b2].b : mol.bonds[b2].a;
      return ranks[u1] < ranks[u2];
    });
    for (int b : nbrs)
      if (tree_bond[b] && parent_bond[mol.bonds[b].a == v ? mol.bonds[b].b : mol.bonds[b].a] == b)
        children.push_back(b);
    for (std::size_t k = 0; k < children.size(); ++k) {
      const int b = children[k];
      const int u = mol.bonds[b].a == v ? mol.bonds[b].b : mol.bonds[b].a;
      const bool last = k + 1 == children.size();
      if (!last) out += "(";
      out += bond_token(mol, mol.bonds[b]);
      emit(u);
      if (!last) out += ")";
    }
  };

  classify(order[0]);
  if (std::count(visited.begin(), visited.end(), 1) != n)
    throw IngestError("disconnected molecule cannot be written as SMILES");
  emit(order[0]);
  return out;
}

void canonical_strings(const Molecule& mol, std::vector<int> ranks, std::string& best, int depth) {
  const int n = mol.size();
  if (depth > 64) throw IngestError("canonicalization depth exceeded");
  ranks = refine_ranks(mol, ranks);

  // Find the smallest rank value shared by several atoms.
  std::map<int, std::vector<int>> classes;
  for (int v = 0; v < n; ++v) classes[ranks[v]].push_back(v);
  const std::vector<int>* tied = nullptr;
  for (const auto& [r, members] : classes)
    if (members.size() > 1) {
      tied = &members;
      break;
    }
  if (!tied) {
    std::string s = write_with_ranks(mol, ranks);
    if (best.empty() || s < best) best = s;
    return;
  }
  for (int v : *tied) {
    std::vector<int> forced(n);
    for (int u = 0; u < n; ++u) forced[u] = ranks[u] * 2 + (u == v ? 0 : 1);
    canonical_strings(mol, forced, best, depth + 1);
  }
}

}  // namespace

std::string write_smiles(const Molecule& mol) {
  std::string best;
  canonical_strings(mol, initial_invariants(mol), best, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Graph conversion

Graph molecule_to_graph(const Molecule& mol, const MoleculeVocab& vocab) {
  Graph g(mol.size());
  bool any_aromatic = false;
  for (int v = 0; v < mol.size(); ++v) {
    const int cls = vocab.class_of(mol.atoms[v].element);
    if (cls < 0) throw IngestError("element not in vocabulary: " + mol.atoms[v].element);
    g.node_classes[v] = cls;
    any_aromatic = any_aromatic || mol.atoms[v].aromatic;
  }
  for (const auto& bond : mol.bonds) {
    int cls;
    if (vocab.aromatic_mode)
      cls = bond.aromatic ? kBondAromatic : bond.order;
    else {
      if (bond.aromatic) throw IngestError("aromatic bond in kekulized vocabulary");
      cls = bond.order;
    }
    g.set_edge(bond.a, bond.b, cls);
  }
  if (vocab.aromatic_mode && any_aromatic) {
    g.aromatic_annotations.resize(mol.size());
    for (int v = 0; v < mol.size(); ++v)
      if (mol.atoms[v].aromatic)
        g.aromatic_annotations[v] =
            AromaticAnnotation{mol.atoms[v].charge, mol.atoms[v].hydrogens};
  }
  return g;
}

Molecule graph_to_molecule(const Graph& g, const MoleculeVocab& vocab) {
  Molecule mol;
  mol.atoms.resize(g.size());
  for (int v = 0; v < g.size(); ++v) {
    const int cls = g.node_classes[v];
    if (cls < 0 || cls >= vocab.n_node_classes()) throw IngestError("node class out of vocabulary");
    mol.atoms[v].element = vocab.elements[cls];
  }
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      const int e = g.edge(i, j);
      if (e == kBondNone) continue;
      Bond bond;
      bond.a = i;
      bond.b = j;
      if (e == kBondAromatic) {
        if (!vocab.aromatic_mode) throw IngestError("aromatic edge class in kekulized vocabulary");
        bond.aromatic = true;
        bond.order = 1;
        mol.atoms[i].aromatic = true;
        mol.atoms[j].aromatic = true;
      } else {
        bond.order = e;
      }
      mol.bonds.push_back(bond);
    }
  }
  for (int v = 0; v < g.size(); ++v) {
    if (mol.atoms[v].aromatic && g.has_annotations() && g.aromatic_annotations[v]) {
      mol.atoms[v].charge = g.aromatic_annotations[v]->formal_charge;
      mol.atoms[v].hydrogens = g.aromatic_annotations[v]->hydrogen_count;
      mol.atoms[v].h_fixed = true;
    }
  }
  sanitize(mol);
  return mol;
}

// ---------------------------------------------------------------------------
// Oracles

Graph BuiltinOracle::ingest(const std::string& smiles, const MoleculeVocab& vocab) {
  Molecule mol = parse_smiles(smiles);
  if (!vocab.aromatic_mode) {
    for (auto& atom : mol.atoms) atom.aromatic = false;
    for (auto& bond : mol.bonds) bond.aromatic = false;
  }
  return molecule_to_graph(mol, vocab);
}

ValidityResult BuiltinOracle::validity(const Graph& g, const MoleculeVocab& vocab) {
  try {
    (void)graph_to_molecule(g, vocab);
    return {true, ""};
  } catch (const IngestError& e) {
    return {false, e.what()};
  }
}

std::string BuiltinOracle::canonical_text(const Graph& g, const MoleculeVocab& vocab) {
  try {
    return write_smiles(graph_to_molecule(g, vocab));
  } catch (const IngestError&) {
    return "";
  }
}

double BuiltinOracle::logp(const Graph& g, const MoleculeVocab& vocab) {
  const Molecule mol = graph_to_molecule(g, vocab);
  double total = 0.0;
  for (const auto& atom : mol.atoms) {
    const ElementInfo* info = element_info(atom.element);
    if (!info) throw IngestError("unknown element: " + atom.element);
    total += atom.aromatic ? info->logp_aromatic : info->logp_plain;
    total += 0.12 * atom.hydrogens;
    total -= 1.0 * std::abs(atom.charge);
  }
  return total;
}

std::string ProcessOracle::roundtrip(const std::string& request) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  const auto req = dir / ("glav_oracle_req_" + std::to_string(::getpid()) + ".txt");
  const auto resp = dir / ("glav_oracle_resp_" + std::to_string(::getpid()) + ".txt");
  {
    std::ofstream out(req);
    out << request << '\n';
  }
  const std::string cmd = command_ + " < " + req.string() + " > " + resp.string();
  const int rc = std::system(cmd.c_str());
  std::string line;
  {
    std::ifstream in(resp);
    std::getline(in, line);
  }
  fs::remove(req);
  fs::remove(resp);
  if (rc != 0) throw IngestError("oracle command failed: " + command_);
  if (line.rfind("OK", 0) != 0) throw IngestError("oracle error: " + line);
  return line.size() > 3 ? line.substr(3) : "";
}

Graph ProcessOracle::ingest(const std::string& smiles, const MoleculeVocab& vocab) {
  std::string mode = vocab.aromatic_mode ? "aromatic" : "kekulized";
  return from_record(roundtrip("PARSE " + mode + " " + smiles));
}

ValidityResult ProcessOracle::validity(const Graph& g, const MoleculeVocab& vocab) {
  (void)vocab;
  const std::string payload = roundtrip("VALID " + to_record(g));
  if (payload.rfind("1", 0) == 0) return {true, ""};
  return {false, payload.size() > 2 ? payload.substr(2) : "invalid"};
}

std::string ProcessOracle::canonical_text(const Graph& g, const MoleculeVocab& vocab) {
  (void)vocab;
  return roundtrip("CANON " + to_record(g));
}

double ProcessOracle::logp(const Graph& g, const MoleculeVocab& vocab) {
  (void)vocab;
  return std::stod(roundtrip("LOGP " + to_record(g)));
}

std::unique_ptr<Oracle> make_oracle() {
  if (const char* cmd = std::getenv("GLAV_ORACLE_CMD"); cmd && *cmd)
    return std::make_unique<ProcessOracle>(cmd);
  return std::make_unique<BuiltinOracle>();
}

}  // namespace glav::chem
