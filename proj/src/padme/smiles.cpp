#include "padme/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>

namespace padme {
namespace {

constexpr std::array<std::string_view, 87> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn"};

// Standard valences for organic-subset atoms, lowest first.
std::vector<int> standard_valences(std::uint8_t z) {
  switch (z) {
    case 5: return {3};
    case 6: return {4};
    case 7: return {3};
    case 8: return {2};
    case 15: return {3, 5};
    case 16: return {2, 4, 6};
    case 9:
    case 17:
    case 35:
    case 53: return {1};
    default: return {};
  }
}

int bond_valence(BondOrder o) {
  switch (o) {
    case BondOrder::Double: return 2;
    case BondOrder::Triple: return 3;
    default: return 1;
  }
}

struct RingOpen {
  std::size_t atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  MolGraph run() {
    if (s_.empty()) throw SmilesError(SmilesErrorKind::Empty, 0, "empty SMILES");
    while (pos_ < s_.size()) step();
    if (!branches_.empty()) {
      throw SmilesError(SmilesErrorKind::UnmatchedParenthesis, branches_.back().second,
                        "unclosed '('");
    }
    if (!rings_.empty()) {
      const auto& [num, open] = *rings_.begin();
      throw SmilesError(SmilesErrorKind::UnmatchedRingClosure, open.offset,
                        "ring closure " + std::to_string(num) + " never closed");
    }
    if (pending_) throw SmilesError(SmilesErrorKind::Syntax, pending_offset_, "dangling bond symbol");
    finish();
    return std::move(g_);
  }

 private:
  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        if (!prev_) throw SmilesError(SmilesErrorKind::Syntax, pos_, "branch without a preceding atom");
        if (pending_) throw SmilesError(SmilesErrorKind::Syntax, pos_, "bond symbol before '('");
        branches_.emplace_back(*prev_, pos_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty())
          throw SmilesError(SmilesErrorKind::UnmatchedParenthesis, pos_, "unmatched ')'");
        if (pending_) throw SmilesError(SmilesErrorKind::Syntax, pos_, "bond symbol before ')'");
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
        return;
      case '-': set_pending(BondOrder::Single); return;
      case '=': set_pending(BondOrder::Double); return;
      case '#': set_pending(BondOrder::Triple); return;
      case ':': set_pending(BondOrder::Aromatic); return;
      case '[': bracket_atom(); return;
      case '%': {
        const std::size_t start = pos_;
        if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
          throw SmilesError(SmilesErrorKind::Syntax, pos_, "'%' must be followed by two digits");
        }
        const int num = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
        pos_ += 3;
        ring_bond(num, start);
        return;
      }
      case '/':
      case '\\':
      case '@':
        throw SmilesError(SmilesErrorKind::Unsupported, pos_, "stereochemistry is not supported");
      case '*':
        throw SmilesError(SmilesErrorKind::Unsupported, pos_, "wildcard atoms are not supported");
      case '.':
        throw SmilesError(SmilesErrorKind::Unsupported, pos_, "multi-fragment SMILES are not supported");
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_++;
      ring_bond(c - '0', start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      organic_atom();
      return;
    }
    throw SmilesError(SmilesErrorKind::Syntax, pos_, std::string("unexpected character '") + c + "'");
  }

  void set_pending(BondOrder o) {
    if (pending_) throw SmilesError(SmilesErrorKind::Syntax, pos_, "two consecutive bond symbols");
    if (!prev_) throw SmilesError(SmilesErrorKind::Syntax, pos_, "bond symbol without a preceding atom");
    pending_ = o;
    pending_offset_ = pos_;
    ++pos_;
  }

  void organic_atom() {
    const std::size_t start = pos_;
    Atom a;
    const std::string_view rest = s_.substr(pos_);
    if (rest.starts_with("Cl")) {
      a.element = 17;
      pos_ += 2;
    } else if (rest.starts_with("Br")) {
      a.element = 35;
      pos_ += 2;
    } else {
      const char c = s_[pos_];
      switch (c) {
        case 'B': a.element = 5; break;
        case 'C': a.element = 6; break;
        case 'N': a.element = 7; break;
        case 'O': a.element = 8; break;
        case 'P': a.element = 15; break;
        case 'S': a.element = 16; break;
        case 'F': a.element = 9; break;
        case 'I': a.element = 53; break;
        case 'b': a.element = 5; a.aromatic = true; break;
        case 'c': a.element = 6; a.aromatic = true; break;
        case 'n': a.element = 7; a.aromatic = true; break;
        case 'o': a.element = 8; a.aromatic = true; break;
        case 'p': a.element = 15; a.aromatic = true; break;
        case 's': a.element = 16; a.aromatic = true; break;
        default:
          throw SmilesError(SmilesErrorKind::UnknownElement, start,
                            std::string("unknown organic-subset symbol '") + c + "'");
      }
      ++pos_;
    }
    add_atom(a, start);
  }

  void bracket_atom() {
    const std::size_t open = pos_++;
    auto malformed = [&](const std::string& why) {
      return SmilesError(SmilesErrorKind::MalformedBracketAtom, pos_ < s_.size() ? pos_ : open, why);
    };
    Atom a;
    a.bracket = true;
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      int iso = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        iso = iso * 10 + (s_[pos_++] - '0');
      a.isotope = iso;
    }
    if (pos_ >= s_.size()) throw malformed("unterminated bracket atom");
    const std::size_t sym_start = pos_;
    const char c = s_[pos_];
    if (c == '*') throw SmilesError(SmilesErrorKind::Unsupported, pos_, "wildcard atoms are not supported");
    if (std::islower(static_cast<unsigned char>(c))) {
      const std::string_view rest = s_.substr(pos_);
      std::string sym;
      if (rest.starts_with("se") || rest.starts_with("as")) {
        sym = {static_cast<char>(std::toupper(rest[0])), rest[1]};
        pos_ += 2;
      } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
        sym = std::string(1, static_cast<char>(std::toupper(c)));
        ++pos_;
      } else {
        throw SmilesError(SmilesErrorKind::UnknownElement, sym_start,
                          std::string("unknown aromatic symbol '") + c + "'");
      }
      a.element = *element_number(sym);
      a.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::optional<std::uint8_t> z;
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        z = element_number(s_.substr(pos_, 2));
        if (z) pos_ += 2;
      }
      if (!z) {
        z = element_number(s_.substr(pos_, 1));
        if (!z) {
          std::string sym(1, c);
          if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) sym += s_[pos_ + 1];
          throw SmilesError(SmilesErrorKind::UnknownElement, sym_start, "unknown element symbol '" + sym + "'");
        }
        ++pos_;
      }
      a.element = *z;
    } else {
      throw malformed("bracket atom is missing an element symbol");
    }
    if (pos_ < s_.size() && s_[pos_] == '@')
      throw SmilesError(SmilesErrorKind::Unsupported, pos_, "stereochemistry is not supported");
    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      int h = 1;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        h = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) h = h * 10 + (s_[pos_++] - '0');
      }
      a.explicit_h = h;
    }
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_++];
      int magnitude = 1;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        magnitude = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
          magnitude = magnitude * 10 + (s_[pos_++] - '0');
      } else {
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      a.formal_charge = sign == '+' ? magnitude : -magnitude;
    }
    if (pos_ < s_.size() && s_[pos_] == ':') throw malformed("atom classes are not supported");
    if (pos_ >= s_.size() || s_[pos_] != ']') throw malformed("expected ']'");
    ++pos_;
    add_atom(a, open);
  }

  void add_atom(const Atom& a, std::size_t offset) {
    const std::size_t idx = g_.atoms.size();
    g_.atoms.push_back(a);
    g_.adjacency.emplace_back();
    g_.bond_index.emplace_back();
    if (prev_) {
      const BondOrder order = pending_.value_or(
          g_.atoms[*prev_].aromatic && a.aromatic ? BondOrder::Aromatic : BondOrder::Single);
      add_bond(*prev_, idx, order, offset);
    }
    pending_.reset();
    prev_ = idx;
  }

  void ring_bond(int num, std::size_t offset) {
    if (!prev_) throw SmilesError(SmilesErrorKind::Syntax, offset, "ring closure without a preceding atom");
    auto it = rings_.find(num);
    if (it == rings_.end()) {
      rings_.emplace(num, RingOpen{*prev_, pending_, offset});
      pending_.reset();
      return;
    }
    const RingOpen open = it->second;
    rings_.erase(it);
    if (open.order && pending_ && *open.order != *pending_)
      throw SmilesError(SmilesErrorKind::Syntax, offset, "conflicting ring-closure bond symbols");
    std::optional<BondOrder> order = pending_ ? pending_ : open.order;
    if (!order)
      order = g_.atoms[open.atom].aromatic && g_.atoms[*prev_].aromatic ? BondOrder::Aromatic : BondOrder::Single;
    add_bond(open.atom, *prev_, *order, offset);
    pending_.reset();
  }

  void add_bond(std::size_t a, std::size_t b, BondOrder order, std::size_t offset) {
    if (a == b) throw SmilesError(SmilesErrorKind::Syntax, offset, "atom bonded to itself");
    for (std::size_t n : g_.adjacency[a])
      if (n == b) throw SmilesError(SmilesErrorKind::Syntax, offset, "duplicate bond between atoms");
    const std::size_t bi = g_.bonds.size();
    g_.bonds.push_back(Bond{a, b, order});
    g_.adjacency[a].push_back(b);
    g_.adjacency[b].push_back(a);
    g_.bond_index[a].push_back(bi);
    g_.bond_index[b].push_back(bi);
  }

  void finish() {
    for (std::size_t v = 0; v < g_.atoms.size(); ++v) g_.atoms[v].degree = g_.adjacency[v].size();
    mark_rings();
    for (std::size_t v = 0; v < g_.atoms.size(); ++v) {
      Atom& a = g_.atoms[v];
      if (a.bracket) continue;
      int used = 0;
      for (std::size_t bi : g_.bond_index[v]) used += bond_valence(g_.bonds[bi].order);
      for (int valence : standard_valences(a.element)) {
        const int available = valence - (a.aromatic ? 1 : 0);
        if (available >= used) {
          a.implicit_h = available - used;
          break;
        }
      }
    }
  }

  // An atom is a ring member iff it touches a bond that is not a bridge.
  void mark_rings() {
    const std::size_t n = g_.atoms.size();
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<bool> bridge(g_.bonds.size(), false);
    int timer = 0;
    std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t v, std::size_t parent_bond) {
      disc[v] = low[v] = timer++;
      for (std::size_t i = 0; i < g_.adjacency[v].size(); ++i) {
        const std::size_t u = g_.adjacency[v][i];
        const std::size_t bi = g_.bond_index[v][i];
        if (bi == parent_bond) continue;
        if (disc[u] == -1) {
          dfs(u, bi);
          low[v] = std::min(low[v], low[u]);
          if (low[u] > disc[v]) bridge[bi] = true;
        } else {
          low[v] = std::min(low[v], disc[u]);
        }
      }
    };
    for (std::size_t v = 0; v < n; ++v)
      if (disc[v] == -1) dfs(v, static_cast<std::size_t>(-1));
    for (std::size_t bi = 0; bi < g_.bonds.size(); ++bi) {
      if (bridge[bi]) continue;
      g_.atoms[g_.bonds[bi].begin].ring_member = true;
      g_.atoms[g_.bonds[bi].end].ring_member = true;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MolGraph g_;
  std::optional<std::size_t> prev_;
  std::optional<BondOrder> pending_;
  std::size_t pending_offset_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> branches_;  // (atom, offset of '(')
  std::map<int, RingOpen> rings_;
};

std::string kind_label(SmilesErrorKind k) {
  switch (k) {
    case SmilesErrorKind::Empty: return "empty input";
    case SmilesErrorKind::UnmatchedParenthesis: return "unmatched parenthesis";
    case SmilesErrorKind::UnmatchedRingClosure: return "unmatched ring closure";
    case SmilesErrorKind::UnknownElement: return "unknown element";
    case SmilesErrorKind::MalformedBracketAtom: return "malformed bracket atom";
    case SmilesErrorKind::Unsupported: return "unsupported token";
    case SmilesErrorKind::Syntax: return "syntax error";
  }
  return "error";
}

}  // namespace

SmilesError::SmilesError(SmilesErrorKind kind, std::size_t offset, const std::string& what)
    : Error("SMILES " + kind_label(kind) + " at offset " + std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

MolGraph parse_smiles(std::string_view smiles) { return Parser(smiles).run(); }

std::string_view element_symbol(std::uint8_t z) {
  return z < kSymbols.size() ? kSymbols[z] : std::string_view{};
}

std::optional<std::uint8_t> element_number(std::string_view symbol) {
  if (symbol.empty()) return std::nullopt;
  for (std::size_t z = 1; z < kSymbols.size(); ++z)
    if (kSymbols[z] == symbol) return static_cast<std::uint8_t>(z);
  return std::nullopt;
}

std::vector<std::size_t> canonical_atom_order(const MolGraph& g) {
  const std::size_t n = g.atom_count();
  // Dense ranks of a keyed sequence: equal keys share a rank.
  auto rank_by = [n](const auto& keys) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t i = 1; i < n; ++i)
      rank[idx[i]] = rank[idx[i - 1]] + (keys[idx[i - 1]] < keys[idx[i]] ? 1 : 0);
    return rank;
  };

  std::vector<std::tuple<std::size_t, int, int>> initial(n);
  for (std::size_t v = 0; v < n; ++v)
    initial[v] = {g.atoms[v].degree, g.atoms[v].element, g.atoms[v].formal_charge};
  std::vector<std::size_t> cls = rank_by(initial);
  auto count_classes = [](const std::vector<std::size_t>& c) {
    return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
  };

  std::size_t classes = count_classes(cls);
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> keys(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::size_t> nbr;
      for (std::size_t u : g.adjacency[v]) nbr.push_back(cls[u]);
      std::sort(nbr.begin(), nbr.end());
      keys[v] = {cls[v], std::move(nbr)};
    }
    auto next = rank_by(keys);
    const std::size_t next_classes = count_classes(next);
    cls = std::move(next);
    if (next_classes == classes) break;
    classes = next_classes;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cls[a] < cls[b]; });
  return order;
}

}  // namespace padme
