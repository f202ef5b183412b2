#include "q8/group.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

namespace q8::group {

Perm16::Perm16() {
  for (int i = 0; i < kCells; ++i) images_[i] = static_cast<std::uint8_t>(i);
}

Perm16 Perm16::from_images(const std::array<int, kCells>& images) {
  std::array<bool, kCells> seen{};
  Perm16 p;
  for (int i = 0; i < kCells; ++i) {
    int v = images[i];
    if (v < 1 || v > kCells || seen[v - 1]) {
      throw std::invalid_argument("Perm16: images are not a bijection on {1..16}");
    }
    seen[v - 1] = true;
    p.images_[i] = static_cast<std::uint8_t>(v - 1);
  }
  return p;
}

Perm16 Perm16::from_cycles(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) && c != ' '; }),
          s.end());
  auto trimmed = s;
  trimmed.erase(std::remove(trimmed.begin(), trimmed.end(), ' '), trimmed.end());
  Perm16 p;
  if (trimmed.empty() || trimmed == "()" || trimmed == "Id" || trimmed == "e") return p;

  std::array<bool, kCells> used{};
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  };
  skip_ws();
  while (pos < s.size()) {
    if (s[pos] != '(') throw CycleParseError("expected '(' at position " + std::to_string(pos));
    ++pos;
    std::vector<int> cycle;
    for (;;) {
      skip_ws();
      if (pos >= s.size()) throw CycleParseError("unterminated cycle");
      if (s[pos] == ')') {
        ++pos;
        break;
      }
      if (!std::isdigit(static_cast<unsigned char>(s[pos]))) {
        throw CycleParseError(std::string("unexpected character '") + s[pos] + "'");
      }
      int v = 0;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + (s[pos] - '0');
        ++pos;
      }
      if (v < 1 || v > kCells) throw CycleParseError("cell " + std::to_string(v) + " out of range");
      if (used[v - 1]) throw CycleParseError("symbol " + std::to_string(v) + " repeated");
      used[v - 1] = true;
      cycle.push_back(v - 1);
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      p.images_[cycle[k]] = static_cast<std::uint8_t>(cycle[(k + 1) % cycle.size()]);
    }
    skip_ws();
  }
  return p;
}

std::array<int, kCells> Perm16::images() const {
  std::array<int, kCells> out{};
  for (int i = 0; i < kCells; ++i) out[i] = images_[i] + 1;
  return out;
}

Perm16 Perm16::inverse() const {
  Perm16 r;
  for (int i = 0; i < kCells; ++i) r.images_[images_[i]] = static_cast<std::uint8_t>(i);
  return r;
}

bool Perm16::is_identity() const { return *this == Perm16{}; }

int Perm16::order() const {
  int k = 1;
  Perm16 q = *this;
  while (!q.is_identity()) {
    q = compose(*this, q);
    ++k;
  }
  return k;
}

std::string Perm16::cycles() const {
  std::array<bool, kCells> seen{};
  std::ostringstream os;
  for (int i = 0; i < kCells; ++i) {
    if (seen[i] || images_[i] == i) continue;
    os << '(';
    int j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) os << ' ';
      os << j + 1;
      first = false;
      j = images_[j];
    }
    os << ')';
  }
  std::string out = os.str();
  return out.empty() ? "()" : out;
}

Perm16 compose(const Perm16& p, const Perm16& q) {
  std::array<int, kCells> img{};
  for (int i = 0; i < kCells; ++i) img[i] = p.image0(q.image0(i)) + 1;
  return Perm16::from_images(img);
}

Perm16 power(const Perm16& p, int k) {
  Perm16 base = k < 0 ? p.inverse() : p;
  Perm16 r;
  for (int i = 0; i < std::abs(k); ++i) r = compose(base, r);
  return r;
}

std::pair<Perm16, Perm16> printed_generators() {
  return {Perm16::from_cycles("(1 2 3 4 9 10 11 12)(5 16 15 14 13 8 7 6)"),
          Perm16::from_cycles("(1 5 9 13)(2 6 10 14)(3 7 11 15)(4 8 12 16)")};
}

std::string expand_word(std::string_view label) {
  std::string s;
  for (char c : label) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty() || s == "Id" || s == "e" || s == "1") return {};
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    char g = s[pos];
    if (g != 'a' && g != 'b') throw std::invalid_argument("bad generator word: " + std::string(label));
    ++pos;
    int exp = 1;
    if (pos < s.size() && s[pos] == '^') {
      ++pos;
      if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) {
        throw std::invalid_argument("bad exponent in word: " + std::string(label));
      }
      exp = 0;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        exp = exp * 10 + (s[pos] - '0');
        ++pos;
      }
    }
    out.append(static_cast<std::size_t>(exp), g);
  }
  return out;
}

std::string pretty_word(std::string_view word) {
  if (word.empty()) return "e";
  std::string out;
  std::size_t i = 0;
  while (i < word.size()) {
    std::size_t j = i;
    while (j < word.size() && word[j] == word[i]) ++j;
    out.push_back(word[i]);
    if (j - i > 1) out += "^" + std::to_string(j - i);
    i = j;
  }
  return out;
}

std::optional<std::size_t> GroupTable::index_of(const Perm16& p) const {
  auto it = std::find(elements_.begin(), elements_.end(), p);
  if (it == elements_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - elements_.begin());
}

std::size_t GroupTable::inverse_index(std::size_t i) const {
  for (std::size_t j = 0; j < size(); ++j) {
    if (mult_[i][j] == identity_index()) return j;
  }
  throw std::logic_error("GroupTable: element without inverse");
}

Perm16 GroupTable::evaluate(std::string_view label) const {
  Perm16 r;
  for (char g : expand_word(label)) r = compose(r, g == 'a' ? a() : b());
  return r;
}

bool GroupTable::is_abelian() const {
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j)
      if (mult_[i][j] != mult_[j][i]) return false;
  return true;
}

GroupTable generate_group(const Perm16& a, const Perm16& b,
                          std::optional<std::size_t> expected_order) {
  GroupTable t;
  // Breadth-first over words in shortlex order; the first word reaching an
  // element is its name.
  std::deque<std::size_t> queue;
  t.elements_.push_back(Perm16{});
  t.words_.push_back("");
  queue.push_back(0);
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    for (char g : {'a', 'b'}) {
      Perm16 next = compose(t.elements_[cur], g == 'a' ? a : b);
      if (t.index_of(next)) continue;
      if (t.elements_.size() == static_cast<std::size_t>(kCells)) {
        throw GroupGenerationError("closure exceeds 16 elements; generator data corrupted");
      }
      t.elements_.push_back(next);
      t.words_.push_back(t.words_[cur] + g);
      queue.push_back(t.elements_.size() - 1);
    }
  }
  if (expected_order && t.elements_.size() != *expected_order) {
    throw GroupGenerationError("closure has " + std::to_string(t.elements_.size()) +
                               " elements, expected " + std::to_string(*expected_order));
  }
  const std::size_t n = t.elements_.size();
  t.mult_.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      t.mult_[i][j] = *t.index_of(compose(t.elements_[i], t.elements_[j]));
  t.a_index_ = *t.index_of(a);
  t.b_index_ = *t.index_of(b);
  return t;
}

std::vector<Relation> verify_presentation(const GroupTable& t) {
  auto eq = [&](std::string_view l, std::string_view r) { return t.evaluate(l) == t.evaluate(r); };
  return {
      {"a^8 = Id", eq("a^8", "Id")},
      {"a^4 = b^2", eq("a^4", "b^2")},
      {"b^2 = abab", eq("b^2", "abab")},
      {"aba = b", eq("aba", "b")},
      {"b^4 = Id", eq("b^4", "Id")},
  };
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Match: return "match";
    case Verdict::Mismatch: return "mismatch";
    case Verdict::Malformed: return "malformed";
  }
  return "?";
}

const std::vector<PrintedElementRow>& printed_element_rows() {
  static const std::vector<PrintedElementRow> rows = {
      {"Id", "Id"},
      {"a", "(1 2 3 4 9 10 11 12)(5 16 15 14 13 8 7 6)"},
      {"b", "(1 5 9 13)(2 6 10 14)(3 7 11 15)(4 8 12 16)"},
      {"ab", "(1 16 9 8)(2 5 10 13)(3 6 11 14)(4 7 12 15)"},
      {"b^2", "(1 9)(2 10)(2 11)(4 12)(5 13)(6 14)(7 15)(8 16)"},
      {"a^2", "(1 3 9 11)(2 4 10 12)(5 15 13 7)(6 16 14 8)"},
      {"a^3", "(1 4 11 2 9 12 3 10)(5 14 7 16 13 6 15 8)"},
      {"ab^2", "(1 10 3 12 9 2 11 4)(5 8 15 6 13 16 7 4)"},
      {"a^2b^2", "(1 11 9 3)(2 12 10 4)(5 7 13 15)(6 8 14 16)"},
      {"a^3b^2", "(1 12 11 10 9 4 3 2)(5 6 7 8 13 14 15 16)"},
      {"ba", "(1 6 9 14)(2 7 10 15)(3 8 11 16)(4 13 12 15)"},
      {"ba^2", "(1 7 9 15)(2 8 10 16)(3 13 11 5)(4 14 12 16)"},
      {"b^3", "(1 13 9 5)(2 14)(3 15 11 7)(4 16 12 8)(6 10)"},
      {"ab^3", "(1 8 9 16)(2 13 10 5)(3 4 15 14)(6 11 12 7)"},
      {"a^3b", "(1 14 9 6)(2 15 10 7)(3 16 11 8)(4 5 12 13)"},
      {"a^2b", "(1 15 9 7)(2 16 10 8)(3 5 11 13)(4 6 12 14)"},
  };
  return rows;
}

std::vector<AuditRow> audit_element_table(const GroupTable& t) {
  std::vector<AuditRow> out;
  for (const auto& row : printed_element_rows()) {
    AuditRow r;
    r.label = std::string(row.label);
    r.printed = std::string(row.cycles);
    Perm16 derived = t.evaluate(row.label);
    r.corrected = derived.cycles();
    try {
      Perm16 printed = Perm16::from_cycles(row.cycles);
      if (printed == derived) {
        r.verdict = Verdict::Match;
      } else {
        r.verdict = Verdict::Mismatch;
        int differing = 0;
        for (int c = 1; c <= kCells; ++c) differing += printed(c) != derived(c);
        r.note = std::to_string(differing) + " cells map differently";
      }
    } catch (const CycleParseError& e) {
      r.verdict = Verdict::Malformed;
      r.note = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

int CayleyGraph::a_successor(int cell) const { return a_edges[cell - 1].second; }
int CayleyGraph::b_successor(int cell) const { return b_edges[cell - 1].second; }

namespace {

void validate_edges(const std::array<std::pair<int, int>, kCells>& edges, int order,
                    const char* name) {
  std::array<int, kCells> out_deg{}, in_deg{};
  std::array<int, kCells> succ{};
  for (auto [from, to] : edges) {
    if (from < 1 || from > kCells || to < 1 || to > kCells) {
      throw std::invalid_argument(std::string(name) + "-edge endpoint out of range");
    }
    ++out_deg[from - 1];
    ++in_deg[to - 1];
    succ[from - 1] = to;
  }
  for (int i = 0; i < kCells; ++i) {
    if (out_deg[i] != 1 || in_deg[i] != 1) {
      throw std::invalid_argument(std::string(name) + "-edges are not a permutation of the nodes");
    }
  }
  for (int i = 1; i <= kCells; ++i) {
    int j = i;
    for (int k = 0; k < order; ++k) j = succ[j - 1];
    if (j != i) {
      throw std::invalid_argument(std::string(name) + "-edges do not return after " +
                                  std::to_string(order) + " steps");
    }
  }
}

}  // namespace

void CayleyGraph::validate() const {
  validate_edges(a_edges, 8, "a");
  validate_edges(b_edges, 4, "b");
}

std::array<Perm16, kCells> CayleyGraph::node_elements() const {
  std::array<int, kCells> a_img{}, b_img{};
  for (auto [from, to] : a_edges) a_img[from - 1] = to;
  for (auto [from, to] : b_edges) b_img[from - 1] = to;
  const Perm16 a = Perm16::from_images(a_img);
  const Perm16 b = Perm16::from_images(b_img);

  std::array<std::optional<Perm16>, kCells> found;
  found[0] = Perm16{};
  std::deque<int> queue{1};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (const Perm16* g : {&a, &b}) {
      int next = (*g)(cur);
      if (found[next - 1]) continue;
      found[next - 1] = compose(*g, *found[cur - 1]);
      queue.push_back(next);
    }
  }
  std::array<Perm16, kCells> out;
  for (int i = 0; i < kCells; ++i) {
    if (!found[i]) throw std::invalid_argument("Cayley graph is not connected");
    out[i] = *found[i];
  }
  return out;
}

CayleyGraph CayleyGraph::relabeled(const Perm16& relabel) const {
  CayleyGraph g;
  for (int i = 0; i < kCells; ++i) {
    auto [af, at] = a_edges[i];
    auto [bf, bt] = b_edges[i];
    g.a_edges[relabel(af) - 1] = {relabel(af), relabel(at)};
    g.b_edges[relabel(bf) - 1] = {relabel(bf), relabel(bt)};
  }
  return g;
}

CayleyGraph build_cayley_graph(const GroupTable& t) {
  CayleyGraph g;
  for (int i = 1; i <= kCells; ++i) {
    g.a_edges[i - 1] = {i, t.a()(i)};
    g.b_edges[i - 1] = {i, t.b()(i)};
  }
  g.validate();
  return g;
}

}  // namespace q8::group
