#pragma once

// A joined representation of a rank-r free group into a product of at most
// three rank-one factors. Generators are stored as unit-determinant complex
// 2x2 matrices; real factors keep exactly zero imaginary parts.

#include <optional>
#include <vector>

#include "joinlab/mobius.hpp"
#include "joinlab/word.hpp"

namespace joinlab {

struct Factor {
  FactorKind kind = FactorKind::Real2;
  std::vector<Mat2c> gens;      // size rank, normalized
  std::vector<Mat2c> gen_by_letter;  // size 2*rank: generator, inverse, ...
};

struct RepresentationSpec {
  int rank = 0;
  std::vector<Factor> factors;
  // Optional twisting automorphism (generator images); factor i may be
  // declared as the first factor precomposed with its (i-1)-th power.
  std::optional<std::vector<Word>> twist;

  int k() const { return static_cast<int>(factors.size()); }

  const Mat2c& generator(int factor, Letter letter) const {
    return factors[factor].gen_by_letter[letter];
  }
};

inline Factor make_factor(FactorKind kind, std::vector<Mat2c> gens) {
  Factor f;
  f.kind = kind;
  f.gens.reserve(gens.size());
  for (auto& g : gens) f.gens.push_back(normalized(g));
  for (const auto& g : f.gens) {
    if (!is_loxodromic(g))
      throw ConfigError("generator is not loxodromic (eigenvalue moduli equal)");
  }
  f.gen_by_letter.resize(2 * f.gens.size());
  for (size_t j = 0; j < f.gens.size(); ++j) {
    f.gen_by_letter[2 * j] = f.gens[j];
    f.gen_by_letter[2 * j + 1] = normalized(inverse_unit_det(f.gens[j]));
  }
  return f;
}

inline void validate(const RepresentationSpec& rep) {
  if (rep.rank < 1) throw ConfigError("free-group rank must be >= 1");
  if (rep.k() < 1 || rep.k() > 3)
    throw ConfigError(
        "number of factors must be between 1 and 3 (the strip counting "
        "argument needs k <= 3)");
  for (const auto& f : rep.factors) {
    if (static_cast<int>(f.gens.size()) != rep.rank)
      throw ConfigError("factor generator count does not match the rank");
  }
  if (rep.twist) {
    if (static_cast<int>(rep.twist->size()) != rep.rank)
      throw ConfigError("twist must give one image word per generator");
  }
}

// Evaluate the factor representation on a reduced word by a left-to-right
// matrix product, renormalizing the determinant.
inline Mat2c compose(const Word& word, const RepresentationSpec& rep, int factor) {
  if (factor < 0 || factor >= rep.k()) throw DomainError("factor index out of range");
  if (!is_reduced(word)) throw DomainError("word is not reduced");
  Mat2c acc = Mat2c::Identity();
  for (Letter l : word.letters) acc = normalized(Mat2c(acc * rep.generator(factor, l)));
  return acc;
}

}  // namespace joinlab
