#pragma once

// Breadth-first enumeration of the joined orbit over reduced words, plus
// conjugacy-class enumeration for the stretch constants. The dataset is
// columnar and immutable once built; downstream estimators stream over the
// Cartan-vector columns.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "joinlab/representation.hpp"

namespace joinlab {

struct OrbitDataset {
  RepresentationSpec rep;
  int max_word_length = 0;
  double t_cap = std::numeric_limits<double>::infinity();

  // Rows sorted by |mu| ascending (ties by word length, then letters).
  std::vector<std::vector<double>> mu;           // [k][N], componentwise >= 0
  std::vector<double> norm;                      // [N], |mu| cached
  std::vector<uint8_t> lox;                      // [N], loxodromic in every factor
  std::vector<std::vector<Eigen::Vector3d>> xi;  // [k][N], attracting points

  uint8_t bits_per_letter = 2;
  std::vector<uint8_t> word_length;   // [N]
  std::vector<uint32_t> word_offset;  // [N], byte offset into word_blob
  std::vector<uint8_t> word_blob;

  size_t size() const { return norm.size(); }
  int k() const { return static_cast<int>(mu.size()); }

  Word word_at(size_t i) const;
  Eigen::VectorXd mu_at(size_t i) const;
};

inline constexpr size_t kDefaultMemoryBudget = size_t(3500) * 1024 * 1024;

// Enumerates every reduced word of length 1..max_word_length whose Cartan
// vector has norm <= t_cap. Deterministic output independent of the thread
// count. Throws EnumerationLimitError when the projected memory footprint
// exceeds the budget, carrying the last fully materialized depth.
OrbitDataset enumerate_orbit(const RepresentationSpec& rep, int max_word_length,
                             double t_cap = std::numeric_limits<double>::infinity(),
                             int threads = 0,
                             size_t memory_budget = kDefaultMemoryBudget);

struct ConjugacyClassEntry {
  Word representative;              // lex-minimal over rotations of w and w^-1
  std::vector<double> lengths;      // translation length per factor
};

// One entry per conjugacy class (rotation + inversion orbit of cyclically
// reduced words) of length <= max_word_length with loxodromic images.
std::vector<ConjugacyClassEntry> enumerate_conjugacy_classes(
    const RepresentationSpec& rep, int max_word_length);

// Indices of points with angle(mu, v) < eps and mu != 0; v unit.
std::vector<uint32_t> filter_cone(const OrbitDataset& data,
                                  const Eigen::VectorXd& v, double eps);

// Indices of points whose mu lies within distance R of the ray R_{>=0} u.
std::vector<uint32_t> filter_strip(const OrbitDataset& data,
                                   const Eigen::VectorXd& u, double R);

// All indices (identity permutation helper).
std::vector<uint32_t> all_indices(const OrbitDataset& data);

}  // namespace joinlab
