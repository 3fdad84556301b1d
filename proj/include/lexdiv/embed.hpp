#pragma once

// Subword skip-gram embeddings with negative sampling, orthogonal alignment of
// two embedding spaces, and the cross-space divergence ranking.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexdiv/lexstats.hpp"
#include "lexdiv/linalg.hpp"

namespace lexdiv::embed {

struct EmbeddingParams {
  int dim = 50;
  int window = 5;
  int min_count = 5;
  int epochs = 5;
  int negative_samples = 5;
  int minn = 3;
  int maxn = 5;
  double learning_rate = 0.05;
  std::uint32_t bucket_count = 2'000'000;
  double subsample = 1e-4;
  std::size_t negative_table_size = 10'000'000;
  std::uint64_t seed = 1;
  int workers = 1;  // >1 trains asynchronously and is not bit-reproducible

  void validate() const;
  std::string describe() const;  // compact key=value summary
  bool operator==(const EmbeddingParams&) const = default;
};

// Character n-grams of "<word>" for lengths minn..maxn, followed by the full
// bracketed word when it is not already among them.
std::vector<std::string> subword_ngrams(std::string_view word, int minn, int maxn);
std::uint32_t ngram_bucket(std::string_view ngram, std::uint32_t bucket_count);

using Corpus = std::vector<std::vector<std::string>>;

class Embedding {
 public:
  const EmbeddingParams& params() const { return params_; }
  std::size_t size() const { return words_.size(); }
  int dim() const { return params_.dim; }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::optional<std::size_t> index(std::string_view word) const;

  // Composed vector: mean of the word's own row and its subword rows.
  std::span<const double> vector(std::size_t i) const { return word_vectors_.row(i); }
  const linalg::Matrix& word_vectors() const { return word_vectors_; }
  // Composes a vector for any word from the available rows; empty when none
  // of its parts are known.
  std::vector<double> compose(std::string_view word) const;

  std::size_t ngram_rows() const { return bucket_index_.size(); }

  // Text vectors ("|V| dim" header, then "word v1 .. vdim") plus a binary
  // sidecar at path + ".ngrams" holding counts, own rows and subword rows.
  void save(const std::string& vec_path) const;
  static Embedding load(const std::string& vec_path);

  friend class Trainer;
  friend Embedding make_embedding(const std::vector<std::string>& words, const linalg::Matrix& vectors);

 private:
  void compose_all();
  std::vector<std::uint32_t> subword_buckets(std::string_view word) const;

  EmbeddingParams params_;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> own_rows_;                               // size() x dim
  std::unordered_map<std::uint32_t, std::size_t> bucket_index_;  // bucket -> row
  std::vector<std::uint32_t> bucket_ids_;                      // row -> bucket
  std::vector<float> bucket_rows_;                             // rows x dim
  linalg::Matrix word_vectors_;
};

// Embedding from plain vectors without subword information (tests, imports).
Embedding make_embedding(const std::vector<std::string>& words, const linalg::Matrix& vectors);

struct TrainStats {
  std::uint64_t tokens = 0;
  std::uint64_t vocab = 0;
  double final_loss = 0.0;
};

Embedding train(const Corpus& corpus, const EmbeddingParams& params, TrainStats* stats = nullptr);

struct AlignOptions {
  bool center = true;
};

struct AlignedPair {
  std::vector<std::string> shared_vocab;
  linalg::Matrix left;    // normalized (and centered) rows
  linalg::Matrix right;   // same preprocessing, before rotation
  linalg::Matrix rotation;  // Q with left ≈ right·Qᵀ
  double mean_self_similarity = 0.0;

  // Right row i mapped into the left space.
  std::vector<double> mapped_right(std::size_t i) const;
  double distance(std::size_t i) const;  // 1 - cosine(left_i, mapped_right_i)
};

// Orthogonal Q minimizing ||A·Q - B||_F, from the SVD of AᵀB.
linalg::Matrix procrustes(const linalg::Matrix& a, const linalg::Matrix& b);

AlignedPair align(const Embedding& left, const Embedding& right, const std::vector<std::string>& shared_vocab,
                  const AlignOptions& options = {});
// Same, from row matrices already restricted to a shared vocabulary.
AlignedPair align_rows(const linalg::Matrix& left, const linalg::Matrix& right, std::vector<std::string> vocab,
                       const AlignOptions& options = {});

struct DivergenceRow {
  std::string lexeme;
  double distance = 0.0;
  double user_share = 0.0;
  std::uint64_t tweets_left = 0;
  std::uint64_t tweets_right = 0;
};

// Sorted by distance descending, then lexeme. Counts are joined from the
// lexeme table when present.
std::vector<DivergenceRow> divergence_table(const AlignedPair& pair,
                                            const std::vector<lexstats::LexemeStats>& counts = {});
void write_divergence(std::ostream& os, const std::vector<DivergenceRow>& rows);
std::vector<DivergenceRow> read_divergence(const std::string& path);

// Shared vocabulary for alignment: the EMBED profile intersected with both
// vocabularies.
std::vector<std::string> shared_vocabulary(const Embedding& left, const Embedding& right,
                                           const std::vector<lexstats::LexemeStats>& counts,
                                           const lexstats::EligibilityProfile& profile);

struct TunePoint {
  EmbeddingParams params;
  std::optional<double> objective;
  std::size_t shared = 0;
  std::string error;
};

struct TuneResult {
  std::vector<TunePoint> trace;
  std::optional<std::size_t> best;
};

TuneResult tune(const std::vector<EmbeddingParams>& grid, const Corpus& left, const Corpus& right,
                const std::vector<lexstats::LexemeStats>& counts, const lexstats::EligibilityProfile& profile,
                const AlignOptions& options = {});
void write_tune_trace(std::ostream& os, const TuneResult& result);

}  // namespace lexdiv::embed
