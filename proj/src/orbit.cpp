#include "joinlab/orbit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <thread>

namespace joinlab {

namespace {

constexpr int kMaxFactors = 3;

struct FrontierEntry {
  std::array<Mat2c, kMaxFactors> mats;
  uint32_t node = 0;  // index into the tree level of this entry
  Letter last = 0;
};

struct TreeLevel {
  std::vector<uint32_t> parent;
  std::vector<Letter> letter;
};

// Raw emitted rows in tree order, before the final sort.
struct EmitBuffer {
  std::vector<double> mu[kMaxFactors];
  std::vector<double> norm;
  std::vector<uint8_t> lox;
  std::vector<Eigen::Vector3d> xi[kMaxFactors];
  std::vector<uint8_t> depth;
  std::vector<uint32_t> node;

  void reserve_more(size_t n, int k) {
    for (int i = 0; i < k; ++i) {
      mu[i].reserve(mu[i].size() + n);
      xi[i].reserve(xi[i].size() + n);
    }
    norm.reserve(norm.size() + n);
    lox.reserve(lox.size() + n);
    depth.reserve(depth.size() + n);
    node.reserve(node.size() + n);
  }

  void append(EmitBuffer&& other, int k) {
    for (int i = 0; i < k; ++i) {
      mu[i].insert(mu[i].end(), other.mu[i].begin(), other.mu[i].end());
      xi[i].insert(xi[i].end(), other.xi[i].begin(), other.xi[i].end());
    }
    norm.insert(norm.end(), other.norm.begin(), other.norm.end());
    lox.insert(lox.end(), other.lox.begin(), other.lox.end());
    depth.insert(depth.end(), other.depth.begin(), other.depth.end());
    node.insert(node.end(), other.node.begin(), other.node.end());
  }

  size_t size() const { return norm.size(); }
};

struct ChunkOutput {
  EmitBuffer emitted;
  std::vector<FrontierEntry> next;
  std::vector<uint32_t> parent;
  std::vector<Letter> letter;
};

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

uint8_t letter_bits(int rank) { return rank <= 2 ? 2 : 4; }

void pack_word(const std::vector<Letter>& letters, uint8_t bits,
               std::vector<uint8_t>& blob) {
  uint32_t acc = 0;
  int fill = 0;
  for (Letter l : letters) {
    acc |= static_cast<uint32_t>(l) << fill;
    fill += bits;
    while (fill >= 8) {
      blob.push_back(static_cast<uint8_t>(acc & 0xff));
      acc >>= 8;
      fill -= 8;
    }
  }
  if (fill > 0) blob.push_back(static_cast<uint8_t>(acc & 0xff));
}

}  // namespace

Word OrbitDataset::word_at(size_t i) const {
  Word w;
  const int len = word_length[i];
  w.letters.resize(len);
  const uint8_t* p = word_blob.data() + word_offset[i];
  uint32_t acc = 0;
  int fill = 0;
  size_t byte = 0;
  const uint32_t mask = (1u << bits_per_letter) - 1u;
  for (int j = 0; j < len; ++j) {
    while (fill < bits_per_letter) {
      acc |= static_cast<uint32_t>(p[byte++]) << fill;
      fill += 8;
    }
    w.letters[j] = static_cast<Letter>(acc & mask);
    acc >>= bits_per_letter;
    fill -= bits_per_letter;
  }
  return w;
}

Eigen::VectorXd OrbitDataset::mu_at(size_t i) const {
  Eigen::VectorXd v(k());
  for (int c = 0; c < k(); ++c) v[c] = mu[c][i];
  return v;
}

OrbitDataset enumerate_orbit(const RepresentationSpec& rep, int max_word_length,
                             double t_cap, int threads, size_t memory_budget) {
  validate(rep);
  if (max_word_length < 1) throw ConfigError("max word length must be >= 1");
  if (max_word_length > 255) throw ConfigError("max word length above 255 unsupported");
  if (!(t_cap > 0)) throw ConfigError("displacement cap must be positive");
  const int k = rep.k();
  const int r = rep.rank;
  const int nthreads = resolve_threads(threads);
  const bool capped = std::isfinite(t_cap);

  // Per-factor worst-case single-letter displacement, for safe subtree pruning.
  std::array<double, kMaxFactors> max_step{};
  for (int i = 0; i < k; ++i) {
    double m = 0;
    for (const auto& g : rep.factors[i].gen_by_letter)
      m = std::max(m, displacement(g));
    max_step[i] = m;
  }

  const size_t per_point_bytes = 16 + 34 * static_cast<size_t>(k);
  const size_t per_frontier_bytes = sizeof(FrontierEntry) + 5;

  std::vector<TreeLevel> tree(max_word_length);
  EmitBuffer emitted;
  std::vector<FrontierEntry> frontier;

  // Depth 1 from the virtual root, serial.
  {
    tree[0].parent.resize(2 * r);
    tree[0].letter.resize(2 * r);
    for (Letter l = 0; l < 2 * r; ++l) {
      tree[0].parent[l] = 0;
      tree[0].letter[l] = l;
      FrontierEntry fe;
      fe.node = l;
      fe.last = l;
      for (int i = 0; i < k; ++i) fe.mats[i] = rep.generator(i, l);
      Eigen::VectorXd m(k);
      bool all_lox = true;
      for (int i = 0; i < k; ++i) {
        m[i] = displacement(fe.mats[i]);
        all_lox = all_lox && is_loxodromic(fe.mats[i]);
      }
      const double n2 = m.norm();
      if (!capped || n2 <= t_cap) {
        for (int i = 0; i < k; ++i) {
          emitted.mu[i].push_back(m[i]);
          emitted.xi[i].push_back(all_lox ? attracting_point(fe.mats[i], rep.factors[i].kind)
                                          : Eigen::Vector3d::Zero());
        }
        emitted.norm.push_back(n2);
        emitted.lox.push_back(all_lox ? 1 : 0);
        emitted.depth.push_back(1);
        emitted.node.push_back(l);
      }
      if (max_word_length > 1) frontier.push_back(fe);
    }
  }

  for (int depth = 2; depth <= max_word_length; ++depth) {
    if (frontier.empty()) break;
    const size_t projected_children = frontier.size() * (2 * r - 1);
    const size_t projected_bytes =
        emitted.size() * per_point_bytes +
        projected_children * (per_point_bytes + per_frontier_bytes) +
        frontier.size() * per_frontier_bytes;
    if (projected_bytes > memory_budget) {
      throw EnumerationLimitError(
          "memory budget exceeded while extending to depth " + std::to_string(depth),
          depth - 1);
    }

    const size_t chunk_count =
        std::min<size_t>(frontier.size(), static_cast<size_t>(nthreads) * 4);
    const size_t chunk_size = (frontier.size() + chunk_count - 1) / chunk_count;

    auto run_chunk = [&](size_t lo, size_t hi) {
      ChunkOutput out;
      out.emitted.reserve_more((hi - lo) * (2 * r - 1), k);
      for (size_t fi = lo; fi < hi; ++fi) {
        const FrontierEntry& fe = frontier[fi];
        const Letter banned = inverse_letter(fe.last);
        for (Letter l = 0; l < 2 * r; ++l) {
          if (l == banned) continue;
          FrontierEntry child;
          child.last = l;
          Eigen::VectorXd m(k);
          bool all_lox = true;
          for (int i = 0; i < k; ++i) {
            child.mats[i] = normalized(Mat2c(fe.mats[i] * rep.generator(i, l)));
            m[i] = displacement(child.mats[i]);
            all_lox = all_lox && is_loxodromic(child.mats[i]);
          }
          const double n2 = m.norm();
          const uint32_t node_slot = static_cast<uint32_t>(out.parent.size());
          out.parent.push_back(fe.node);
          out.letter.push_back(l);
          if (!capped || n2 <= t_cap) {
            for (int i = 0; i < k; ++i) {
              out.emitted.mu[i].push_back(m[i]);
              out.emitted.xi[i].push_back(
                  all_lox ? attracting_point(child.mats[i], rep.factors[i].kind)
                          : Eigen::Vector3d::Zero());
            }
            out.emitted.norm.push_back(n2);
            out.emitted.lox.push_back(all_lox ? 1 : 0);
            out.emitted.depth.push_back(static_cast<uint8_t>(depth));
            out.emitted.node.push_back(node_slot);  // chunk-local; fixed below
          }
          if (depth < max_word_length) {
            bool keep = true;
            if (capped) {
              // A descendant can lower each component by at most
              // (remaining letters) * max_step; prune only when even that
              // cannot re-enter the cap.
              double lb2 = 0;
              const double budget = static_cast<double>(max_word_length - depth);
              for (int i = 0; i < k; ++i) {
                const double lb = std::max(0.0, m[i] - budget * max_step[i]);
                lb2 += lb * lb;
              }
              if (std::sqrt(lb2) > t_cap) keep = false;
            }
            if (keep) {
              child.node = node_slot;  // chunk-local; fixed below
              out.next.push_back(child);
            }
          }
        }
      }
      return out;
    };

    std::vector<std::future<ChunkOutput>> futures;
    futures.reserve(chunk_count);
    for (size_t c = 0; c < chunk_count; ++c) {
      const size_t lo = c * chunk_size;
      const size_t hi = std::min(frontier.size(), lo + chunk_size);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, run_chunk, lo, hi));
    }

    TreeLevel& level = tree[depth - 1];
    std::vector<FrontierEntry> next;
    for (auto& fut : futures) {
      ChunkOutput out = fut.get();
      const uint32_t base = static_cast<uint32_t>(level.parent.size());
      level.parent.insert(level.parent.end(), out.parent.begin(), out.parent.end());
      level.letter.insert(level.letter.end(), out.letter.begin(), out.letter.end());
      for (auto& n : out.emitted.node) n += base;
      for (auto& fe : out.next) fe.node += base;
      emitted.append(std::move(out.emitted), k);
      next.insert(next.end(), out.next.begin(), out.next.end());
    }
    frontier = std::move(next);
  }

  // Reconstruct words (tree order), then sort rows by |mu|.
  const size_t n = emitted.size();
  OrbitDataset ds;
  ds.rep = rep;
  ds.max_word_length = max_word_length;
  ds.t_cap = t_cap;
  ds.bits_per_letter = letter_bits(r);

  std::vector<std::vector<Letter>> words(n);
  for (size_t i = 0; i < n; ++i) {
    int d = emitted.depth[i];
    uint32_t node = emitted.node[i];
    auto& w = words[i];
    w.resize(d);
    while (d > 0) {
      w[d - 1] = tree[d - 1].letter[node];
      node = tree[d - 1].parent[node];
      --d;
    }
  }

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (emitted.norm[a] != emitted.norm[b]) return emitted.norm[a] < emitted.norm[b];
    if (words[a].size() != words[b].size()) return words[a].size() < words[b].size();
    return words[a] < words[b];
  });

  ds.mu.assign(k, {});
  ds.xi.assign(k, {});
  for (int i = 0; i < k; ++i) {
    ds.mu[i].resize(n);
    ds.xi[i].resize(n);
  }
  ds.norm.resize(n);
  ds.lox.resize(n);
  ds.word_length.resize(n);
  ds.word_offset.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const uint32_t src = order[j];
    for (int i = 0; i < k; ++i) {
      ds.mu[i][j] = emitted.mu[i][src];
      ds.xi[i][j] = emitted.xi[i][src];
    }
    ds.norm[j] = emitted.norm[src];
    ds.lox[j] = emitted.lox[src];
    ds.word_length[j] = static_cast<uint8_t>(words[src].size());
    ds.word_offset[j] = static_cast<uint32_t>(ds.word_blob.size());
    pack_word(words[src], ds.bits_per_letter, ds.word_blob);
  }
  return ds;
}

std::vector<ConjugacyClassEntry> enumerate_conjugacy_classes(
    const RepresentationSpec& rep, int max_word_length) {
  validate(rep);
  if (max_word_length < 1) throw ConfigError("max word length must be >= 1");
  const int k = rep.k();
  const int r = rep.rank;

  std::map<std::vector<Letter>, ConjugacyClassEntry> classes;
  std::vector<Letter> stack;

  auto consider = [&](const std::vector<Letter>& letters) {
    Word w{letters};
    if (!is_cyclically_reduced(w)) return;
    Word key = conjugacy_key(w);
    if (classes.count(key.letters)) return;
    ConjugacyClassEntry entry;
    entry.representative = key;
    entry.lengths.resize(k);
    for (int i = 0; i < k; ++i) {
      const Mat2c g = compose(key, rep, i);
      if (!is_loxodromic(g)) return;  // class excluded
      entry.lengths[i] = translation_length(g);
    }
    classes.emplace(key.letters, std::move(entry));
  };

  // Depth-first over reduced words.
  std::function<void(int)> dfs = [&](int depth) {
    if (depth > 0) consider(stack);
    if (depth == max_word_length) return;
    const Letter banned =
        stack.empty() ? static_cast<Letter>(255) : inverse_letter(stack.back());
    for (Letter l = 0; l < 2 * r; ++l) {
      if (l == banned) continue;
      stack.push_back(l);
      dfs(depth + 1);
      stack.pop_back();
    }
  };
  dfs(0);

  std::vector<ConjugacyClassEntry> out;
  out.reserve(classes.size());
  for (auto& [key, entry] : classes) out.push_back(std::move(entry));
  return out;
}

std::vector<uint32_t> filter_cone(const OrbitDataset& data,
                                  const Eigen::VectorXd& v, double eps) {
  if (v.size() != data.k()) throw DomainError("direction dimension mismatch");
  if (!(eps > 0) || !(eps < M_PI / 2)) throw DomainError("cone half-angle must be in (0, pi/2)");
  const Eigen::VectorXd u = v.normalized();
  const double c = std::cos(eps);
  const int k = data.k();
  std::vector<uint32_t> idx;
  for (size_t i = 0; i < data.size(); ++i) {
    if (data.norm[i] <= 0) continue;
    double dot = 0;
    for (int j = 0; j < k; ++j) dot += data.mu[j][i] * u[j];
    if (dot > c * data.norm[i]) idx.push_back(static_cast<uint32_t>(i));
  }
  return idx;
}

std::vector<uint32_t> filter_strip(const OrbitDataset& data,
                                   const Eigen::VectorXd& u, double R) {
  if (u.size() != data.k()) throw DomainError("direction dimension mismatch");
  if (!(R > 0)) throw DomainError("strip width must be positive");
  const Eigen::VectorXd un = u.normalized();
  const int k = data.k();
  const double R2 = R * R;
  std::vector<uint32_t> idx;
  for (size_t i = 0; i < data.size(); ++i) {
    double dot = 0;
    for (int j = 0; j < k; ++j) dot += data.mu[j][i] * un[j];
    const double n2 = data.norm[i] * data.norm[i];
    const double d2 = dot <= 0 ? n2 : std::max(0.0, n2 - dot * dot);
    if (d2 <= R2) idx.push_back(static_cast<uint32_t>(i));
  }
  return idx;
}

std::vector<uint32_t> all_indices(const OrbitDataset& data) {
  std::vector<uint32_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0u);
  return idx;
}

}  // namespace joinlab
