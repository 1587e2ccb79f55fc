#include "fslam/bow/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "fslam/util/binary_io.hpp"

namespace fslam {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'L', 'V'};
constexpr std::uint32_t kVersion = 1;

struct Centroid {
  std::vector<std::uint8_t> bin;
  std::vector<float> real;
};

double memberDistance(const DescriptorSet& corpus, std::size_t a, std::size_t b) {
  return corpus.distance(a, corpus, b);
}

double centroidDistance(const DescriptorSet& corpus, std::size_t row, const Centroid& c) {
  return corpus.kind() == DescriptorKind::Binary ? hammingDistance(corpus.binaryRow(row), c.bin)
                                                 : euclideanDistance(corpus.realRow(row), c.real);
}

Centroid memberCentroid(const DescriptorSet& corpus, std::size_t row) {
  Centroid c;
  if (corpus.kind() == DescriptorKind::Binary) {
    auto span = corpus.binaryRow(row);
    c.bin.assign(span.begin(), span.end());
  } else {
    auto span = corpus.realRow(row);
    c.real.assign(span.begin(), span.end());
  }
  return c;
}

/// Hamming medoid: the member minimizing total distance to the others.
/// Exact for clusters up to 512 members; beyond that, the member nearest to
/// the per-bit majority vector.
Centroid binaryMedoid(const DescriptorSet& corpus, const std::vector<std::size_t>& members) {
  if (members.size() == 1) return memberCentroid(corpus, members[0]);
  std::size_t best = members[0];
  if (members.size() <= 512) {
    double best_total = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
      double total = 0.0;
      for (std::size_t j : members)
        if (i != j) total += memberDistance(corpus, i, j);
      if (total < best_total) {
        best_total = total;
        best = i;
      }
    }
  } else {
    const int bits = corpus.length();
    std::vector<int> votes(static_cast<std::size_t>(bits), 0);
    for (std::size_t m : members) {
      auto row = corpus.binaryRow(m);
      for (int b = 0; b < bits; ++b)
        if (row[static_cast<std::size_t>(b / 8)] & (1u << (b % 8))) ++votes[static_cast<std::size_t>(b)];
    }
    Centroid majority;
    majority.bin.assign(static_cast<std::size_t>(corpus.byteStride()), 0);
    const int half = static_cast<int>(members.size() + 1) / 2;
    for (int b = 0; b < bits; ++b)
      if (votes[static_cast<std::size_t>(b)] >= half)
        majority.bin[static_cast<std::size_t>(b / 8)] |= static_cast<std::uint8_t>(1u << (b % 8));
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m : members) {
      const double d = centroidDistance(corpus, m, majority);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
  }
  return memberCentroid(corpus, best);
}

Centroid realMean(const DescriptorSet& corpus, const std::vector<std::size_t>& members) {
  Centroid c;
  c.real.assign(static_cast<std::size_t>(corpus.length()), 0.0f);
  std::vector<double> acc(static_cast<std::size_t>(corpus.length()), 0.0);
  for (std::size_t m : members) {
    auto row = corpus.realRow(m);
    for (std::size_t d = 0; d < row.size(); ++d) acc[d] += row[d];
  }
  for (std::size_t d = 0; d < acc.size(); ++d)
    c.real[d] = static_cast<float>(acc[d] / static_cast<double>(members.size()));
  return c;
}

Centroid clusterCentroid(const DescriptorSet& corpus, const std::vector<std::size_t>& members) {
  return corpus.kind() == DescriptorKind::Binary ? binaryMedoid(corpus, members)
                                                 : realMean(corpus, members);
}

/// uniform double in [0, 1) from raw engine output, portable across stdlibs
double unitReal(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// k-means++ seeds followed by Lloyd iterations; returns non-empty clusters.
std::vector<std::vector<std::size_t>> kMeans(const DescriptorSet& corpus,
                                             const std::vector<std::size_t>& members, int k,
                                             std::mt19937_64& rng, std::vector<Centroid>& centroids) {
  const std::size_t n = members.size();
  const int kk = std::min<int>(k, static_cast<int>(n));

  // Seeding: first uniform, then d^2-weighted.
  centroids.clear();
  std::vector<char> is_seed(n, 0);
  {
    const std::size_t first = static_cast<std::size_t>(rng() % n);
    centroids.push_back(memberCentroid(corpus, members[first]));
    is_seed[first] = 1;
  }
  std::vector<double> d2(n, 0.0);
  while (static_cast<int>(centroids.size()) < kk) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, centroidDistance(corpus, members[i], c));
      d2[i] = best * best;
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unitReal(rng) * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = n - 1;  // numeric edge of the scan
    } else {
      // Every member coincides with a seed; take the first unused one.
      for (std::size_t i = 0; i < n; ++i)
        if (!is_seed[i]) {
          pick = i;
          break;
        }
      if (pick == n) break;  // nothing distinct left to seed
    }
    is_seed[pick] = 1;
    centroids.push_back(memberCentroid(corpus, members[pick]));
  }

  std::vector<int> assign(n, -1);
  for (int round = 0; round < 10; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = centroidDistance(corpus, members[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && round > 0) break;

    for (std::size_t c = 0; c < centroids.size(); ++c) {
      std::vector<std::size_t> cluster;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] == static_cast<int>(c)) cluster.push_back(members[i]);
      if (!cluster.empty()) centroids[c] = clusterCentroid(corpus, cluster);
    }
  }

  std::vector<std::vector<std::size_t>> clusters(centroids.size());
  for (std::size_t i = 0; i < n; ++i)
    clusters[static_cast<std::size_t>(assign[i])].push_back(members[i]);

  // Drop empty clusters, keeping centroid order stable.
  std::vector<std::vector<std::size_t>> live;
  std::vector<Centroid> live_centroids;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (!clusters[c].empty()) {
      live.push_back(std::move(clusters[c]));
      live_centroids.push_back(std::move(centroids[c]));
    }
  centroids = std::move(live_centroids);
  return live;
}

bool allIdentical(const DescriptorSet& corpus, const std::vector<std::size_t>& members) {
  for (std::size_t i = 1; i < members.size(); ++i)
    if (memberDistance(corpus, members[0], members[i]) > 0.0) return false;
  return true;
}

}  // namespace

Vocabulary Vocabulary::train(const DescriptorSet& corpus, int k, int L, std::uint64_t seed) {
  if (k < 2 || L < 1)
    throw VocabularyError(VocabularyError::Kind::InvalidConfig,
                          "vocabulary needs k >= 2 and L >= 1");
  if (static_cast<int>(corpus.size()) < k)
    throw VocabularyError(VocabularyError::Kind::CorpusTooSmall,
                          "corpus smaller than branching factor");

  Vocabulary vocab;
  vocab.kind_ = corpus.kind();
  vocab.length_ = corpus.length();
  vocab.k_ = k;
  vocab.levels_ = L;
  vocab.nodes_.emplace_back();  // root

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> training_leaf(corpus.size(), 0);  // descriptor -> leaf node index

  struct Job {
    std::uint32_t node;
    std::vector<std::size_t> members;
    int level;
  };
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  // Depth-first expansion keeps node numbering (and therefore word ids and
  // the serialized file) deterministic.
  std::vector<Job> stack;
  stack.push_back({0u, std::move(all), 0});
  while (!stack.empty()) {
    Job job = std::move(stack.back());
    stack.pop_back();

    if (job.level == L || job.members.size() == 1 || allIdentical(corpus, job.members)) {
      vocab.nodes_[job.node].leaf = true;
      for (std::size_t m : job.members) training_leaf[m] = job.node;
      continue;
    }

    std::vector<Centroid> centroids;
    auto clusters = kMeans(corpus, job.members, k, rng, centroids);
    if (clusters.size() == 1) {  // could not split further
      vocab.nodes_[job.node].leaf = true;
      for (std::size_t m : job.members) training_leaf[m] = job.node;
      continue;
    }

    // Children pushed in reverse so the stack expands them in order.
    std::vector<Job> child_jobs;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      VocabNode child;
      child.parent = job.node;
      child.bin = std::move(centroids[c].bin);
      child.real = std::move(centroids[c].real);
      const auto child_index = static_cast<std::uint32_t>(vocab.nodes_.size());
      vocab.nodes_[job.node].children.push_back(child_index);
      vocab.nodes_.push_back(std::move(child));
      child_jobs.push_back({child_index, std::move(clusters[c]), job.level + 1});
    }
    for (auto it = child_jobs.rbegin(); it != child_jobs.rend(); ++it) stack.push_back(std::move(*it));
  }

  // Word ids in node order; IDF from training-leaf populations.
  std::vector<std::size_t> population(vocab.nodes_.size(), 0);
  for (std::size_t node : training_leaf) ++population[node];
  const double N = static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < vocab.nodes_.size(); ++i) {
    VocabNode& node = vocab.nodes_[i];
    if (!node.leaf) continue;
    node.word = static_cast<std::uint32_t>(vocab.leaf_node_.size());
    vocab.leaf_node_.push_back(static_cast<std::uint32_t>(i));
    node.idf = population[i] > 0 ? std::log(1.0 + N / static_cast<double>(population[i]))
                                 : std::log(1.0 + N);
  }
  return vocab;
}

double Vocabulary::nodeDistance(std::uint32_t node, const DescriptorSet& set, std::size_t row) const {
  const VocabNode& n = nodes_[node];
  return kind_ == DescriptorKind::Binary ? hammingDistance(set.binaryRow(row), n.bin)
                                         : euclideanDistance(set.realRow(row), n.real);
}

std::uint32_t Vocabulary::wordOf(const DescriptorSet& set, std::size_t row) const {
  std::uint32_t node = 0;
  while (!nodes_[node].leaf) {
    const auto& children = nodes_[node].children;
    std::uint32_t best = children[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t c : children) {
      const double d = nodeDistance(c, set, row);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    node = best;
  }
  return nodes_[node].word;
}

BowVector Vocabulary::toBow(const DescriptorSet& descriptors) const {
  BowVector bow;
  if (descriptors.empty()) return bow;
  if (descriptors.kind() != kind_ || descriptors.length() != length_)
    throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                          "descriptor variant does not match vocabulary");

  std::map<std::uint32_t, double> tf;
  for (std::size_t i = 0; i < descriptors.size(); ++i) tf[wordOf(descriptors, i)] += 1.0;

  double total = 0.0;
  for (const auto& [word, count] : tf) {
    const double w = count * wordIdf(word);
    if (w > 0.0) {
      bow[word] = w;
      total += w;
    }
  }
  if (total > 0.0)
    for (auto& [_, w] : bow) w /= total;
  return bow;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw VocabularyError(VocabularyError::Kind::Io, "cannot open " + path.string());
  out.write(kMagic, 4);
  writeLE(out, kVersion);
  writeLE(out, static_cast<std::uint32_t>(k_));
  writeLE(out, static_cast<std::uint32_t>(levels_));
  writeLE(out, static_cast<std::uint8_t>(kind_));
  writeLE(out, static_cast<std::uint32_t>(length_));
  writeLE(out, wordCount());
  writeLE(out, static_cast<std::uint32_t>(nodes_.size()));

  const std::size_t payload = kind_ == DescriptorKind::Binary
                                  ? static_cast<std::size_t>((length_ + 7) / 8)
                                  : static_cast<std::size_t>(length_) * 4;
  std::vector<std::uint8_t> zeros(payload, 0);
  for (const auto& node : nodes_) {
    writeLE(out, node.parent);
    writeLE(out, static_cast<std::uint8_t>(node.leaf ? 1 : 0));
    writeLE(out, node.word);
    writeLE(out, node.idf);
    if (kind_ == DescriptorKind::Binary) {
      const auto& payload_bytes = node.bin.empty() ? zeros : node.bin;
      out.write(reinterpret_cast<const char*>(payload_bytes.data()),
                static_cast<std::streamsize>(payload));
    } else {
      if (node.real.empty()) {
        out.write(reinterpret_cast<const char*>(zeros.data()), static_cast<std::streamsize>(payload));
      } else {
        for (float v : node.real) writeLE(out, v);
      }
    }
  }
  if (!out) throw VocabularyError(VocabularyError::Kind::Io, "write failed: " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VocabularyError(VocabularyError::Kind::Io, "cannot open " + path.string());

  auto malformed = [&](const char* what) {
    return VocabularyError(VocabularyError::Kind::Malformed, std::string(what) + ": " + path.string());
  };

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw malformed("bad magic");

  Vocabulary vocab;
  std::uint32_t version = 0, k = 0, L = 0, length = 0, words = 0, node_count = 0;
  std::uint8_t variant = 0;
  if (!readLE(in, version) || version != kVersion) throw malformed("unsupported version");
  if (!readLE(in, k) || !readLE(in, L) || !readLE(in, variant) || !readLE(in, length) ||
      !readLE(in, words) || !readLE(in, node_count))
    throw malformed("truncated header");
  if (variant > 1 || length == 0 || node_count == 0) throw malformed("invalid header fields");
  vocab.k_ = static_cast<int>(k);
  vocab.levels_ = static_cast<int>(L);
  vocab.kind_ = static_cast<DescriptorKind>(variant);
  vocab.length_ = static_cast<int>(length);

  const std::size_t payload = vocab.kind_ == DescriptorKind::Binary
                                  ? static_cast<std::size_t>((vocab.length_ + 7) / 8)
                                  : static_cast<std::size_t>(vocab.length_) * 4;
  vocab.nodes_.resize(node_count);
  for (std::uint32_t i = 0; i < node_count; ++i) {
    VocabNode& node = vocab.nodes_[i];
    std::uint8_t leaf = 0;
    if (!readLE(in, node.parent) || !readLE(in, leaf) || !readLE(in, node.word) ||
        !readLE(in, node.idf))
      throw malformed("truncated node table");
    node.leaf = leaf != 0;
    if (vocab.kind_ == DescriptorKind::Binary) {
      node.bin.resize(payload);
      in.read(reinterpret_cast<char*>(node.bin.data()), static_cast<std::streamsize>(payload));
      if (in.gcount() != static_cast<std::streamsize>(payload)) throw malformed("truncated payload");
    } else {
      node.real.resize(static_cast<std::size_t>(vocab.length_));
      for (auto& v : node.real)
        if (!readLE(in, v)) throw malformed("truncated payload");
    }
    if (node.parent != VocabNode::kNone) {
      if (node.parent >= i) throw malformed("node parent not topologically ordered");
      vocab.nodes_[node.parent].children.push_back(i);
    } else if (i != 0) {
      throw malformed("multiple roots");
    }
  }
  vocab.rebuildDerived();
  if (vocab.wordCount() != words) throw malformed("word count mismatch");
  return vocab;
}

void Vocabulary::rebuildDerived() {
  std::uint32_t max_word = 0;
  bool any = false;
  for (const auto& node : nodes_)
    if (node.leaf && node.word != VocabNode::kNone) {
      max_word = std::max(max_word, node.word);
      any = true;
    }
  leaf_node_.assign(any ? max_word + 1 : 0, 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].leaf && nodes_[i].word != VocabNode::kNone)
      leaf_node_[nodes_[i].word] = static_cast<std::uint32_t>(i);
}

}  // namespace fslam
