#pragma once

// The order-16 quaternion group acting on 16 cells: permutations, closure,
// presentation checks, Cayley graph and the audit of the printed element
// table.
//
// Cell indices are 1-based at every public boundary.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace q8::group {

inline constexpr int kCells = 16;

class CycleParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Perm16 {
 public:
  Perm16();  // identity

  // `images[i-1]` is the image of cell i. Throws std::invalid_argument unless
  // the images form a bijection on {1..16}.
  static Perm16 from_images(const std::array<int, kCells>& images);

  // Cycle notation, e.g. "(1 2 3)(4 5)". "", "()" and "Id" denote the
  // identity. Throws CycleParseError on syntax errors, out-of-range cells and
  // repeated symbols.
  static Perm16 from_cycles(std::string_view text);

  int operator()(int cell) const { return images_[cell - 1] + 1; }
  int image0(int cell0) const { return images_[cell0]; }

  std::array<int, kCells> images() const;
  Perm16 inverse() const;
  bool is_identity() const;
  int order() const;
  std::string cycles() const;

  auto operator<=>(const Perm16&) const = default;

 private:
  std::array<std::uint8_t, kCells> images_{};  // 0-based
};

// p∘q: apply q first, then p.
Perm16 compose(const Perm16& p, const Perm16& q);
Perm16 power(const Perm16& p, int k);

// The two trusted generator rows of the printed element table.
std::pair<Perm16, Perm16> printed_generators();

// Normalises a word label: "a^3b^2" -> "aaabb", "Id" / "e" -> "".
// Throws std::invalid_argument for anything outside {a, b} words.
std::string expand_word(std::string_view label);
// Inverse of expand_word: "aaabb" -> "a^3b^2", "" -> "e".
std::string pretty_word(std::string_view word);

class GroupTable {
 public:
  std::size_t size() const { return elements_.size(); }
  const std::vector<Perm16>& elements() const { return elements_; }
  const Perm16& element(std::size_t i) const { return elements_[i]; }
  const std::string& word(std::size_t i) const { return words_[i]; }
  std::string name(std::size_t i) const { return pretty_word(words_[i]); }
  std::size_t product(std::size_t i, std::size_t j) const { return mult_[i][j]; }
  std::size_t identity_index() const { return 0; }
  std::size_t a_index() const { return a_index_; }
  std::size_t b_index() const { return b_index_; }
  const Perm16& a() const { return elements_[a_index_]; }
  const Perm16& b() const { return elements_[b_index_]; }

  std::optional<std::size_t> index_of(const Perm16& p) const;
  std::size_t inverse_index(std::size_t i) const;
  // Evaluates a word in the generators ("a^3b", "abab", "Id").
  Perm16 evaluate(std::string_view label) const;

  bool is_abelian() const;

  friend GroupTable generate_group(const Perm16& a, const Perm16& b,
                                   std::optional<std::size_t> expected_order);

 private:
  std::vector<Perm16> elements_;
  std::vector<std::string> words_;
  std::vector<std::vector<std::size_t>> mult_;
  std::size_t a_index_ = 0;
  std::size_t b_index_ = 0;
};

class GroupGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closure of {a, b}. Elements are listed in shortlex order of their shortest
// generator words, so element names are the lexicographically least shortest
// words. Throws GroupGenerationError if the closure exceeds 16 elements, or
// differs from `expected_order` when one is given.
GroupTable generate_group(const Perm16& a, const Perm16& b,
                          std::optional<std::size_t> expected_order = std::nullopt);

struct Relation {
  std::string name;
  bool holds = false;
};

std::vector<Relation> verify_presentation(const GroupTable& t);

enum class Verdict { Match, Mismatch, Malformed };
std::string_view to_string(Verdict v);

struct AuditRow {
  std::string label;
  std::string printed;
  Verdict verdict = Verdict::Match;
  std::string corrected;  // derived value, cycle notation or argument list
  std::string note;
};

struct PrintedElementRow {
  std::string_view label;
  std::string_view cycles;
};

// The 16 rows of the printed element table, verbatim.
const std::vector<PrintedElementRow>& printed_element_rows();

// Recomputes every printed row from its label and compares.
std::vector<AuditRow> audit_element_table(const GroupTable& t);

// Nodes are cells 1..16; one a-edge i -> a(i) and one b-edge i -> b(i) per
// node (left multiplication, cell i identified with the element g_i having
// g_i(1) = i).
struct CayleyGraph {
  std::array<std::pair<int, int>, kCells> a_edges{};
  std::array<std::pair<int, int>, kCells> b_edges{};

  int a_successor(int cell) const;
  int b_successor(int cell) const;

  // Throws std::invalid_argument unless each node has exactly one incoming
  // and one outgoing edge per generator, a-edges have order 8 and b-edges
  // order 4.
  void validate() const;

  // g_i for every node i, reconstructed by walking edges from node 1.
  std::array<Perm16, kCells> node_elements() const;

  // Relabels nodes by `relabel` (node i becomes relabel(i)).
  CayleyGraph relabeled(const Perm16& relabel) const;
};

CayleyGraph build_cayley_graph(const GroupTable& t);

}  // namespace q8::group
