#pragma once

// Reduced words over the free-group alphabet {a_1, a_1^-1, ..., a_r, a_r^-1}.
// Letter encoding: 2*j is generator j, 2*j + 1 its inverse, so
// inverse(letter) == letter ^ 1. Text form: 'a'..'g' for generators,
// 'A'..'G' for inverses.

#include <cstdint>
#include <string>
#include <vector>

#include "joinlab/common.hpp"

namespace joinlab {

using Letter = uint8_t;

inline Letter inverse_letter(Letter l) { return l ^ 1u; }

struct Word {
  std::vector<Letter> letters;

  Word() = default;
  explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

  size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  bool operator==(const Word&) const = default;
  auto operator<=>(const Word&) const = default;
};

inline bool is_reduced(const Word& w) {
  for (size_t i = 1; i < w.letters.size(); ++i)
    if (w.letters[i] == inverse_letter(w.letters[i - 1])) return false;
  return true;
}

inline Word inverse(const Word& w) {
  Word out;
  out.letters.reserve(w.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
    out.letters.push_back(inverse_letter(*it));
  return out;
}

// Concatenate and freely reduce.
inline Word reduced_product(const Word& a, const Word& b) {
  Word out = a;
  for (Letter l : b.letters) {
    if (!out.letters.empty() && out.letters.back() == inverse_letter(l)) {
      out.letters.pop_back();
    } else {
      out.letters.push_back(l);
    }
  }
  return out;
}

// Remove matching first/last letters until cyclically reduced.
inline Word cyclic_reduction(Word w) {
  while (w.letters.size() >= 2 &&
         w.letters.front() == inverse_letter(w.letters.back())) {
    w.letters.erase(w.letters.begin());
    w.letters.pop_back();
  }
  return w;
}

inline bool is_cyclically_reduced(const Word& w) {
  if (!is_reduced(w)) return false;
  if (w.letters.size() >= 2 &&
      w.letters.front() == inverse_letter(w.letters.back()))
    return false;
  return true;
}

// Lexicographically minimal rotation over the cyclic rotations of w and of
// its inverse; canonical key for a conjugacy class closed under inversion.
inline Word conjugacy_key(const Word& w) {
  Word best = w;
  auto consider = [&best](const Word& cand) {
    if (cand.letters < best.letters) best = cand;
  };
  const size_t n = w.size();
  const Word inv = inverse(w);
  for (size_t s = 0; s < n; ++s) {
    Word rot, roti;
    rot.letters.reserve(n);
    roti.letters.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      rot.letters.push_back(w.letters[(s + i) % n]);
      roti.letters.push_back(inv.letters[(s + i) % n]);
    }
    consider(rot);
    consider(roti);
  }
  return best;
}

// Apply a free-group endomorphism given by generator images.
inline Word apply_automorphism(const std::vector<Word>& images, const Word& w) {
  Word out;
  for (Letter l : w.letters) {
    const Word& im = images[l >> 1];
    out = reduced_product(out, (l & 1u) ? inverse(im) : im);
  }
  return out;
}

inline std::string format_word(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (Letter l : w.letters) {
    const char base = static_cast<char>((l & 1u) ? 'A' : 'a');
    s.push_back(static_cast<char>(base + (l >> 1)));
  }
  return s;
}

inline Word parse_word(const std::string& s, int rank) {
  Word w;
  if (s == "e" || s.empty()) return w;
  for (char c : s) {
    Letter l;
    if (c >= 'a' && c < 'a' + rank) {
      l = static_cast<Letter>(2 * (c - 'a'));
    } else if (c >= 'A' && c < 'A' + rank) {
      l = static_cast<Letter>(2 * (c - 'A') + 1);
    } else {
      throw ConfigError(std::string("bad letter '") + c + "' in word \"" + s + "\"");
    }
    w.letters.push_back(l);
  }
  if (!is_reduced(w)) throw ConfigError("word \"" + s + "\" is not reduced");
  return w;
}

}  // namespace joinlab
