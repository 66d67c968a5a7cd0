#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace alab {

using Letter = std::uint8_t;

// Sequence of generator indices. Ordering is shortlex (length first, then lexicographic
// in the presentation's generator order).
struct Word {
  std::vector<Letter> letters;

  Word() = default;
  explicit Word(std::vector<Letter> l) : letters(std::move(l)) {}
  Word(std::initializer_list<Letter> l) : letters(l) {}

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  Letter operator[](std::size_t i) const { return letters[i]; }
  Word prefix(std::size_t n) const;
  Word suffix_from(std::size_t start) const;
  Word operator*(const Word& rhs) const;

  bool operator==(const Word&) const = default;
  std::strong_ordering operator<=>(const Word& rhs) const;
};

enum class GroupKind { free_group, surface, triangle };

struct Presentation {
  GroupKind kind = GroupKind::free_group;
  int rank = 0;                    // free groups
  int genus = 0;                   // surface groups
  std::array<int, 3> orders{};     // triangle groups: m12, m23, m31
  std::vector<std::string> names;  // generator names, in shortlex order
  std::vector<Letter> inverse;     // inverse[s] = index of s^{-1}
  std::vector<Word> relators;

  std::size_t generator_count() const { return names.size(); }
  Word invert(const Word& w) const;
  // free reduction followed by cancelling first against last letters; a conjugate of w
  Word cyclic_free_reduce(const Word& w) const;
  Word parse_word(std::string_view text) const;
  std::string format_word(const Word& w, std::string_view separator = "") const;
  // Canonical one-line description, e.g. "surface genus=2"; used for hashing and metadata.
  std::string label() const;
  bool has_circle_boundary() const { return kind != GroupKind::free_group; }
};

Presentation free_presentation(int rank);
Presentation surface_presentation(int genus);
Presentation triangle_presentation(int p, int q, int r);

// Parses the plain-text presentation grammar:
//   line 1: [kind] free|surface|triangle followed by parameters (rank=k, genus=g, or p q r)
//   further lines: parameters as `key value` / `key=value`, or `relator <word>` lines that
//   must match (up to rotation and inversion) the canonical relators. `#` starts a comment.
Presentation parse_presentation(std::string_view text);

}  // namespace alab
