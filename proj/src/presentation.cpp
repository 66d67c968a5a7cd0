#include "anosov_lab/presentation.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "anosov_lab/errors.hpp"

namespace alab {

Word Word::prefix(std::size_t n) const {
  return Word(std::vector<Letter>(letters.begin(), letters.begin() + static_cast<std::ptrdiff_t>(std::min(n, size()))));
}

Word Word::suffix_from(std::size_t start) const {
  if (start >= size()) return {};
  return Word(std::vector<Letter>(letters.begin() + static_cast<std::ptrdiff_t>(start), letters.end()));
}

Word Word::operator*(const Word& rhs) const {
  Word out = *this;
  out.letters.insert(out.letters.end(), rhs.letters.begin(), rhs.letters.end());
  return out;
}

std::strong_ordering Word::operator<=>(const Word& rhs) const {
  if (size() != rhs.size()) return size() <=> rhs.size();
  return letters <=> rhs.letters;
}

Word Presentation::invert(const Word& w) const {
  Word out;
  out.letters.reserve(w.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) out.letters.push_back(inverse[*it]);
  return out;
}

Word Presentation::cyclic_free_reduce(const Word& w) const {
  std::vector<Letter> st;
  for (Letter s : w.letters) {
    if (!st.empty() && st.back() == inverse[s])
      st.pop_back();
    else
      st.push_back(s);
  }
  std::size_t lo = 0, hi = st.size();
  while (hi - lo >= 2 && st[lo] == inverse[st[hi - 1]]) ++lo, --hi;
  return Word(std::vector<Letter>(st.begin() + static_cast<std::ptrdiff_t>(lo), st.begin() + static_cast<std::ptrdiff_t>(hi)));
}

namespace {

Word power(const Word& w, int n) {
  Word out;
  for (int i = 0; i < n; ++i) out = out * w;
  return out;
}

bool is_identity_token(std::string_view tok) { return tok == "1" || tok == "()" || tok == "id"; }

}  // namespace

Word Presentation::parse_word(std::string_view text) const {
  Word out;
  std::size_t i = 0;
  auto skip_separators = [&] {
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '*' || text[i] == '.'))
      ++i;
  };
  skip_separators();
  if (is_identity_token(text.substr(i))) return out;
  while (i < text.size()) {
    std::size_t best = 0;
    int best_gen = -1;
    for (std::size_t s = 0; s < names.size(); ++s) {
      const std::string& n = names[s];
      if (n.size() > best && text.substr(i, n.size()) == n) {
        best = n.size();
        best_gen = static_cast<int>(s);
      }
    }
    if (best_gen < 0) {
      throw InputError("unknown generator at '" + std::string(text.substr(i)) + "' for presentation " + label());
    }
    i += best;
    long exponent = 1;
    if (i < text.size() && text[i] == '^') {
      ++i;
      std::size_t start = i;
      if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      try {
        exponent = std::stol(std::string(text.substr(start, i - start)));
      } catch (const std::exception&) {
        throw InputError("malformed exponent in word '" + std::string(text) + "'");
      }
    }
    Letter g = static_cast<Letter>(best_gen);
    if (exponent < 0) {
      g = inverse[g];
      exponent = -exponent;
    }
    for (long k = 0; k < exponent; ++k) out.letters.push_back(g);
    skip_separators();
  }
  return out;
}

std::string Presentation::format_word(const Word& w, std::string_view separator) const {
  if (w.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += separator;
    out += names[w[i]];
  }
  return out;
}

std::string Presentation::label() const {
  switch (kind) {
    case GroupKind::free_group: return "free rank=" + std::to_string(rank);
    case GroupKind::surface: return "surface genus=" + std::to_string(genus);
    case GroupKind::triangle:
      return "triangle " + std::to_string(orders[0]) + " " + std::to_string(orders[1]) + " " +
             std::to_string(orders[2]);
  }
  return {};
}

Presentation free_presentation(int rank) {
  if (rank < 1 || rank > 13) throw InputError("free rank must be in [1, 13]");
  Presentation p;
  p.kind = GroupKind::free_group;
  p.rank = rank;
  for (int i = 0; i < rank; ++i) {
    char c = static_cast<char>('a' + i);
    p.names.emplace_back(1, c);
    p.names.emplace_back(1, static_cast<char>(std::toupper(c)));
    p.inverse.push_back(static_cast<Letter>(2 * i + 1));
    p.inverse.push_back(static_cast<Letter>(2 * i));
  }
  return p;
}

Presentation surface_presentation(int genus) {
  if (genus < 2 || genus > 16) throw InputError("surface genus must be in [2, 16]");
  Presentation p;
  p.kind = GroupKind::surface;
  p.genus = genus;
  for (int i = 1; i <= genus; ++i) {
    for (char c : {'a', 'b'}) {
      p.names.push_back(std::string(1, c) + std::to_string(i));
      p.names.push_back(std::string(1, static_cast<char>(std::toupper(c))) + std::to_string(i));
    }
  }
  for (std::size_t s = 0; s < p.names.size(); ++s) p.inverse.push_back(static_cast<Letter>(s ^ 1U));
  Word rel;
  for (int i = 0; i < genus; ++i) {
    Letter a = static_cast<Letter>(4 * i), b = static_cast<Letter>(4 * i + 2);
    rel.letters.insert(rel.letters.end(), {a, b, static_cast<Letter>(a + 1), static_cast<Letter>(b + 1)});
  }
  p.relators.push_back(rel);
  return p;
}

Presentation triangle_presentation(int a, int b, int c) {
  for (int m : {a, b, c})
    if (m < 2) throw InputError("triangle orders must be >= 2");
  if (1.0 / a + 1.0 / b + 1.0 / c >= 1.0) throw InputError("triangle group must be hyperbolic: 1/p + 1/q + 1/r < 1");
  Presentation p;
  p.kind = GroupKind::triangle;
  p.orders = {a, b, c};
  p.names = {"r1", "r2", "r3"};
  p.inverse = {0, 1, 2};
  for (Letter s = 0; s < 3; ++s) p.relators.push_back(Word{s, s});
  p.relators.push_back(power(Word{0, 1}, a));
  p.relators.push_back(power(Word{1, 2}, b));
  p.relators.push_back(power(Word{2, 0}, c));
  return p;
}

namespace {

std::string strip_comment(std::string line) {
  if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
  return line;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '=' || ch == ',') {
      if (!cur.empty()) out.push_back(cur), cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int parse_int(const std::string& tok, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InputError("malformed presentation: expected integer for " + what + ", got '" + tok + "'");
  }
}

Word cyclic_rotation(const Word& w, std::size_t k) {
  Word out;
  for (std::size_t i = 0; i < w.size(); ++i) out.letters.push_back(w[(i + k) % w.size()]);
  return out;
}

bool matches_relator(const Presentation& p, const Word& w) {
  for (const Word& r : p.relators) {
    if (r.size() != w.size()) continue;
    for (const Word& cand : {r, p.invert(r)})
      for (std::size_t k = 0; k < cand.size(); ++k)
        if (cyclic_rotation(cand, k) == w) return true;
  }
  return false;
}

}  // namespace

Presentation parse_presentation(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string kind;
  std::vector<std::string> params;
  std::vector<std::string> relator_lines;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "relator") {
      std::string rest;
      auto pos = line.find("relator");
      rest = line.substr(pos + 7);
      relator_lines.push_back(rest);
      continue;
    }
    if (kind.empty()) {
      std::size_t start = 0;
      if (tokens[0] == "kind") start = 1;
      if (start >= tokens.size()) throw InputError("malformed presentation: missing kind");
      kind = tokens[start];
      params.insert(params.end(), tokens.begin() + static_cast<std::ptrdiff_t>(start + 1), tokens.end());
    } else {
      params.insert(params.end(), tokens.begin(), tokens.end());
    }
  }
  if (kind.empty()) throw InputError("malformed presentation: empty document");

  auto keyed = [&](const std::string& key) -> std::string {
    for (std::size_t i = 0; i + 1 < params.size(); ++i)
      if (params[i] == key) return params[i + 1];
    return {};
  };
  Presentation p;
  if (kind == "free") {
    std::string v = keyed("rank");
    if (v.empty() && params.size() == 1) v = params[0];
    if (v.empty()) throw InputError("malformed presentation: free group needs rank");
    p = free_presentation(parse_int(v, "rank"));
  } else if (kind == "surface") {
    std::string v = keyed("genus");
    if (v.empty() && params.size() == 1) v = params[0];
    if (v.empty()) throw InputError("malformed presentation: surface group needs genus");
    p = surface_presentation(parse_int(v, "genus"));
  } else if (kind == "triangle") {
    std::vector<int> orders;
    if (!keyed("p").empty()) {
      orders = {parse_int(keyed("p"), "p"), parse_int(keyed("q"), "q"), parse_int(keyed("r"), "r")};
    } else {
      for (const auto& tok : params)
        if (tok != "orders") orders.push_back(parse_int(tok, "triangle order"));
    }
    if (orders.size() != 3) throw InputError("malformed presentation: triangle needs three orders");
    p = triangle_presentation(orders[0], orders[1], orders[2]);
  } else {
    throw InputError("malformed presentation: unknown kind '" + kind + "'");
  }
  for (const std::string& rl : relator_lines) {
    Word w = p.parse_word(rl);
    if (w.empty()) throw InputError("malformed presentation: empty relator");
    if (!matches_relator(p, w)) {
      throw InputError("relator '" + rl + "' is not a rotation of the canonical relators of " + p.label());
    }
  }
  return p;
}

}  // namespace alab
