#include "lexdiv/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/utf8.hpp"

namespace lexdiv::embed {

void EmbeddingParams::validate() const {
  require(dim >= 2, "embedding dim must be at least 2");
  require(window >= 1, "window must be positive");
  require(min_count >= 1, "min_count must be positive");
  require(epochs >= 1, "epochs must be positive");
  require(negative_samples >= 1, "negative_samples must be positive");
  require(minn >= 1 && minn <= maxn, "subword bounds need 1 <= minn <= maxn");
  require(learning_rate > 0, "learning rate must be positive");
  require(bucket_count >= 1, "bucket_count must be positive");
  require(subsample > 0, "subsample threshold must be positive");
  require(negative_table_size >= 1000, "negative table too small");
  require(workers >= 1, "workers must be positive");
}

std::string EmbeddingParams::describe() const {
  std::ostringstream os;
  os << "dim=" << dim << " window=" << window << " min_count=" << min_count << " epochs=" << epochs
     << " neg=" << negative_samples << " minn=" << minn << " maxn=" << maxn
     << " lr=" << format_number(learning_rate) << " buckets=" << bucket_count
     << " subsample=" << format_number(subsample) << " seed=" << seed;
  return os.str();
}

std::vector<std::string> subword_ngrams(std::string_view word, int minn, int maxn) {
  std::u32string w = U"<";
  w += utf8::decode(word);
  w += U">";
  std::vector<std::string> out;
  const std::string full = utf8::encode(w);
  bool has_full = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (int n = minn; n <= maxn && i + static_cast<std::size_t>(n) <= w.size(); ++n) {
      std::string g = utf8::encode(std::u32string_view(w).substr(i, static_cast<std::size_t>(n)));
      if (g == full) has_full = true;
      out.push_back(std::move(g));
    }
  }
  if (!has_full) out.push_back(full);
  return out;
}

std::uint32_t ngram_bucket(std::string_view ngram, std::uint32_t bucket_count) {
  return fnv1a32(ngram) % bucket_count;
}

std::optional<std::size_t> Embedding::index(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> Embedding::subword_buckets(std::string_view word) const {
  std::vector<std::uint32_t> out;
  const std::string full = "<" + std::string(word) + ">";
  for (const auto& g : subword_ngrams(word, params_.minn, params_.maxn))
    if (g != full) out.push_back(ngram_bucket(g, params_.bucket_count));
  return out;
}

void Embedding::compose_all() {
  const auto d = static_cast<std::size_t>(params_.dim);
  word_vectors_ = linalg::Matrix(words_.size(), d);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto out = word_vectors_.row(i);
    for (std::size_t k = 0; k < d; ++k) out[k] = own_rows_[i * d + k];
    std::size_t parts = 1;
    for (auto b : subword_buckets(words_[i])) {
      auto it = bucket_index_.find(b);
      if (it == bucket_index_.end()) continue;
      const float* row = &bucket_rows_[it->second * d];
      for (std::size_t k = 0; k < d; ++k) out[k] += row[k];
      ++parts;
    }
    for (auto& x : out) x /= static_cast<double>(parts);
  }
}

std::vector<double> Embedding::compose(std::string_view word) const {
  if (auto i = index(word)) {
    auto v = vector(*i);
    return {v.begin(), v.end()};
  }
  const auto d = static_cast<std::size_t>(params_.dim);
  std::vector<double> out(d, 0.0);
  std::size_t parts = 0;
  for (auto b : subword_buckets(word)) {
    auto it = bucket_index_.find(b);
    if (it == bucket_index_.end()) continue;
    for (std::size_t k = 0; k < d; ++k) out[k] += bucket_rows_[it->second * d + k];
    ++parts;
  }
  if (parts == 0) return {};
  for (auto& x : out) x /= static_cast<double>(parts);
  return out;
}

Embedding make_embedding(const std::vector<std::string>& words, const linalg::Matrix& vectors) {
  require(words.size() == vectors.rows(), "one vector per word required");
  require(vectors.cols() >= 2, "vectors need at least two dimensions");
  Embedding e;
  e.params_.dim = static_cast<int>(vectors.cols());
  e.words_ = words;
  e.counts_.assign(words.size(), 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!e.index_.emplace(words[i], i).second) fail(ErrorKind::InvalidArgument, "duplicate word: " + words[i]);
  }
  e.own_rows_.resize(words.size() * vectors.cols());
  for (std::size_t i = 0; i < vectors.data().size(); ++i) e.own_rows_[i] = static_cast<float>(vectors.data()[i]);
  e.word_vectors_ = vectors;
  return e;
}

namespace {

constexpr char kSidecarMagic[8] = {'L', 'D', 'V', 'N', 'G', 'R', 'M', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::Parse, "truncated sidecar: " + path);
  return v;
}

void put_floats(std::ostream& os, const float* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(float)));
}

void get_floats(std::istream& is, float* p, std::size_t n, const std::string& path) {
  if (!is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(float))))
    fail(ErrorKind::Parse, "truncated sidecar: " + path);
}

std::string float_text(double v) { return format_number(v); }

}  // namespace

void Embedding::save(const std::string& vec_path) const {
  {
    std::ofstream os(vec_path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot write " + vec_path);
    os << words_.size() << ' ' << params_.dim << '\n';
    for (std::size_t i = 0; i < words_.size(); ++i) {
      os << words_[i];
      for (double x : word_vectors_.row(i)) os << ' ' << float_text(x);
      os << '\n';
    }
    if (!os) fail(ErrorKind::Io, "write failed: " + vec_path);
  }
  const std::string side = vec_path + ".ngrams";
  std::ofstream os(side, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot write " + side);
  os.write(kSidecarMagic, sizeof kSidecarMagic);
  put<std::int32_t>(os, params_.dim);
  put<std::int32_t>(os, params_.window);
  put<std::int32_t>(os, params_.min_count);
  put<std::int32_t>(os, params_.epochs);
  put<std::int32_t>(os, params_.negative_samples);
  put<std::int32_t>(os, params_.minn);
  put<std::int32_t>(os, params_.maxn);
  put<double>(os, params_.learning_rate);
  put<std::uint32_t>(os, params_.bucket_count);
  put<double>(os, params_.subsample);
  put<std::uint64_t>(os, params_.negative_table_size);
  put<std::uint64_t>(os, params_.seed);
  put<std::uint64_t>(os, words_.size());
  const auto d = static_cast<std::size_t>(params_.dim);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    put<std::uint64_t>(os, counts_[i]);
    put_floats(os, &own_rows_[i * d], d);
  }
  put<std::uint64_t>(os, bucket_ids_.size());
  for (std::size_t r = 0; r < bucket_ids_.size(); ++r) {
    put<std::uint32_t>(os, bucket_ids_[r]);
    put_floats(os, &bucket_rows_[r * d], d);
  }
  if (!os) fail(ErrorKind::Io, "write failed: " + side);
}

Embedding Embedding::load(const std::string& vec_path) {
  std::ifstream in(vec_path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingInput, "embedding not found: " + vec_path);
  std::size_t n = 0;
  int dim = 0;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, vec_path + ": missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> n >> dim) || dim < 1) fail(ErrorKind::Parse, vec_path + ": bad header");
  }
  std::vector<std::string> words;
  linalg::Matrix vecs(n, static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) fail(ErrorKind::Parse, vec_path + ": fewer rows than declared");
    const auto f = split_fields(line, ' ');
    if (f.size() != static_cast<std::size_t>(dim) + 1)
      fail(ErrorKind::Parse, vec_path + ":" + std::to_string(i + 2) + ": expected word and " + std::to_string(dim) + " values");
    words.emplace_back(f[0]);
    for (int k = 0; k < dim; ++k) {
      auto v = parse_number(f[static_cast<std::size_t>(k) + 1]);
      if (!v) fail(ErrorKind::Parse, vec_path + ":" + std::to_string(i + 2) + ": bad value");
      vecs(i, static_cast<std::size_t>(k)) = *v;
    }
  }
  Embedding e = make_embedding(words, vecs);

  const std::string side = vec_path + ".ngrams";
  std::ifstream sc(side, std::ios::binary);
  if (!sc) return e;
  char magic[8];
  if (!sc.read(magic, 8) || std::memcmp(magic, kSidecarMagic, 8) != 0) fail(ErrorKind::Parse, side + ": bad magic");
  EmbeddingParams p;
  p.dim = get<std::int32_t>(sc, side);
  p.window = get<std::int32_t>(sc, side);
  p.min_count = get<std::int32_t>(sc, side);
  p.epochs = get<std::int32_t>(sc, side);
  p.negative_samples = get<std::int32_t>(sc, side);
  p.minn = get<std::int32_t>(sc, side);
  p.maxn = get<std::int32_t>(sc, side);
  p.learning_rate = get<double>(sc, side);
  p.bucket_count = get<std::uint32_t>(sc, side);
  p.subsample = get<double>(sc, side);
  p.negative_table_size = get<std::uint64_t>(sc, side);
  p.seed = get<std::uint64_t>(sc, side);
  if (p.dim != dim || get<std::uint64_t>(sc, side) != n) fail(ErrorKind::Parse, side + ": does not match " + vec_path);
  e.params_ = p;
  const auto d = static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < n; ++i) {
    e.counts_[i] = get<std::uint64_t>(sc, side);
    get_floats(sc, &e.own_rows_[i * d], d, side);
  }
  const auto nb = get<std::uint64_t>(sc, side);
  e.bucket_ids_.resize(nb);
  e.bucket_rows_.resize(nb * d);
  for (std::size_t r = 0; r < nb; ++r) {
    e.bucket_ids_[r] = get<std::uint32_t>(sc, side);
    get_floats(sc, &e.bucket_rows_[r * d], d, side);
    e.bucket_index_.emplace(e.bucket_ids_[r], r);
  }
  return e;
}

class Trainer {
 public:
  Trainer(const Corpus& corpus, const EmbeddingParams& params) : corpus_(corpus), p_(params) {}

  Embedding run(TrainStats* stats) {
    p_.validate();
    build_vocab();
    init_rows();
    build_negative_table();
    const std::uint64_t total = static_cast<std::uint64_t>(p_.epochs) * ntokens_;
    if (p_.workers == 1) {
      Rng rng(mix_seed(p_.seed, fnv1a64("train")));
      Worker w{rng, 0.0, 0};
      for (int epoch = 0; epoch < p_.epochs; ++epoch)
        for (const auto& line : corpus_) train_line(line, w, total);
      loss_ = w.pairs ? w.loss / static_cast<double>(w.pairs) : 0.0;
    } else {
      run_parallel(total);
    }

    // Move rows into the embedding: own rows first, then subword rows.
    const auto d = static_cast<std::size_t>(p_.dim);
    emb_.own_rows_.assign(input_.begin(), input_.begin() + static_cast<std::ptrdiff_t>(emb_.words_.size() * d));
    emb_.bucket_rows_.assign(input_.begin() + static_cast<std::ptrdiff_t>(emb_.words_.size() * d), input_.end());
    emb_.compose_all();
    for (double x : emb_.word_vectors_.data())
      if (!std::isfinite(x)) fail(ErrorKind::Runtime, "training diverged: non-finite vector entry");
    if (stats) {
      stats->tokens = ntokens_;
      stats->vocab = emb_.words_.size();
      stats->final_loss = loss_;
    }
    return std::move(emb_);
  }

 private:
  struct Worker {
    Rng rng;
    double loss;
    std::uint64_t pairs;
  };

  void build_vocab() {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& line : corpus_)
      for (const auto& t : line) ++counts[t];
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [w, c] : counts)
      if (c >= static_cast<std::uint64_t>(p_.min_count)) kept.emplace_back(w, c);
    if (kept.empty()) fail(ErrorKind::Runtime, "empty effective vocabulary: no token reaches min_count");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    emb_.params_ = p_;
    for (auto& [w, c] : kept) {
      emb_.index_.emplace(w, emb_.words_.size());
      emb_.words_.push_back(w);
      emb_.counts_.push_back(c);
      ntokens_ += c;
    }
    pdiscard_.resize(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const double f = static_cast<double>(emb_.counts_[i]) / static_cast<double>(ntokens_);
      pdiscard_[i] = std::sqrt(p_.subsample / f) + p_.subsample / f;
    }
  }

  void init_rows() {
    const auto d = static_cast<std::size_t>(p_.dim);
    const std::size_t nwords = emb_.words_.size();
    rows_of_.resize(nwords);
    for (std::size_t i = 0; i < nwords; ++i) {
      rows_of_[i].push_back(static_cast<std::uint32_t>(i));
      for (auto b : emb_.subword_buckets(emb_.words_[i])) {
        auto [it, inserted] = emb_.bucket_index_.emplace(b, emb_.bucket_ids_.size());
        if (inserted) emb_.bucket_ids_.push_back(b);
        rows_of_[i].push_back(static_cast<std::uint32_t>(nwords + it->second));
      }
    }
    input_.assign((nwords + emb_.bucket_ids_.size()) * d, 0.0f);
    const float bound = 1.0f / static_cast<float>(p_.dim);
    // Each row's initial values depend only on the seed and its identity.
    auto fill = [&](std::size_t row, std::uint64_t tag) {
      Rng r(mix_seed(p_.seed, tag));
      for (std::size_t k = 0; k < d; ++k) input_[row * d + k] = static_cast<float>(r.uniform(-bound, bound));
    };
    for (std::size_t i = 0; i < nwords; ++i) fill(i, fnv1a64(emb_.words_[i]));
    for (std::size_t r = 0; r < emb_.bucket_ids_.size(); ++r)
      fill(nwords + r, (std::uint64_t{1} << 40) | emb_.bucket_ids_[r]);
    output_.assign(nwords * d, 0.0f);
  }

  void build_negative_table() {
    double z = 0.0;
    for (auto c : emb_.counts_) z += std::pow(static_cast<double>(c), 0.75);
    for (std::size_t i = 0; i < emb_.counts_.size(); ++i) {
      const double share = std::pow(static_cast<double>(emb_.counts_[i]), 0.75) / z;
      const auto slots = static_cast<std::size_t>(share * static_cast<double>(p_.negative_table_size));
      negatives_.insert(negatives_.end(), std::max<std::size_t>(slots, 1), static_cast<std::uint32_t>(i));
    }
    Rng rng(mix_seed(p_.seed, fnv1a64("negatives")));
    rng.shuffle(negatives_);
  }

  static float sigmoid(float x) {
    if (x < -8.0f) return 0.0f;
    if (x > 8.0f) return 1.0f;
    return 1.0f / (1.0f + std::exp(-x));
  }

  void train_line(const std::vector<std::string>& line, Worker& w, std::uint64_t total) {
    std::vector<std::uint32_t> ids;
    ids.reserve(line.size());
    std::uint64_t seen = 0;
    for (const auto& t : line) {
      auto it = emb_.index_.find(t);
      if (it == emb_.index_.end()) continue;
      ++seen;
      if (w.rng.uniform() > pdiscard_[it->second]) continue;
      ids.push_back(static_cast<std::uint32_t>(it->second));
    }
    const std::uint64_t before = processed_.fetch_add(seen, std::memory_order_relaxed);
    const double progress = std::min(1.0, static_cast<double>(before) / static_cast<double>(total));
    const auto lr = static_cast<float>(p_.learning_rate * (1.0 - progress));
    const auto n = static_cast<std::int64_t>(ids.size());
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t b = w.rng.between(1, p_.window);
      for (std::int64_t c = -b; c <= b; ++c) {
        if (c == 0 || i + c < 0 || i + c >= n) continue;
        update(rows_of_[ids[static_cast<std::size_t>(i)]], ids[static_cast<std::size_t>(i + c)], lr, w);
      }
    }
  }

  void update(const std::vector<std::uint32_t>& rows, std::uint32_t target, float lr, Worker& w) {
    const auto d = static_cast<std::size_t>(p_.dim);
    thread_local std::vector<float> hidden, grad;
    hidden.assign(d, 0.0f);
    grad.assign(d, 0.0f);
    for (auto r : rows) {
      const float* src = &input_[r * d];
      for (std::size_t k = 0; k < d; ++k) hidden[k] += src[k];
    }
    const float inv = 1.0f / static_cast<float>(rows.size());
    for (auto& x : hidden) x *= inv;

    auto step = [&](std::uint32_t out_row, float label) {
      float* wo = &output_[out_row * d];
      float s = 0.0f;
      for (std::size_t k = 0; k < d; ++k) s += wo[k] * hidden[k];
      const float score = sigmoid(s);
      const float alpha = lr * (label - score);
      for (std::size_t k = 0; k < d; ++k) grad[k] += alpha * wo[k];
      for (std::size_t k = 0; k < d; ++k) wo[k] += alpha * hidden[k];
      const float pr = label > 0.5f ? score : 1.0f - score;
      w.loss -= std::log(std::max(pr, 1e-5f));
    };
    step(target, 1.0f);
    for (int k = 0; k < p_.negative_samples; ++k) {
      std::uint32_t neg;
      do {
        neg = negatives_[w.rng.below(negatives_.size())];
      } while (neg == target && emb_.words_.size() > 1);
      step(neg, 0.0f);
    }
    ++w.pairs;
    for (auto r : rows) {
      float* dst = &input_[r * d];
      for (std::size_t k = 0; k < d; ++k) dst[k] += grad[k];
    }
  }

  void run_parallel(std::uint64_t total) {
    const auto nthreads = static_cast<std::size_t>(p_.workers);
    std::vector<std::thread> threads;
    std::vector<double> losses(nthreads, 0.0);
    std::vector<std::uint64_t> pairs(nthreads, 0);
    for (std::size_t t = 0; t < nthreads; ++t) {
      threads.emplace_back([&, t] {
        Worker w{Rng(mix_seed(p_.seed, 0x7000 + t)), 0.0, 0};
        const std::size_t lo = corpus_.size() * t / nthreads, hi = corpus_.size() * (t + 1) / nthreads;
        for (int epoch = 0; epoch < p_.epochs; ++epoch)
          for (std::size_t i = lo; i < hi; ++i) train_line(corpus_[i], w, total);
        losses[t] = w.loss;
        pairs[t] = w.pairs;
      });
    }
    for (auto& th : threads) th.join();
    double l = 0;
    std::uint64_t p = 0;
    for (std::size_t t = 0; t < nthreads; ++t) {
      l += losses[t];
      p += pairs[t];
    }
    loss_ = p ? l / static_cast<double>(p) : 0.0;
  }

  const Corpus& corpus_;
  EmbeddingParams p_;
  Embedding emb_;
  std::uint64_t ntokens_ = 0;
  std::vector<double> pdiscard_;
  std::vector<std::vector<std::uint32_t>> rows_of_;
  std::vector<float> input_;
  std::vector<float> output_;
  std::vector<std::uint32_t> negatives_;
  std::atomic<std::uint64_t> processed_{0};
  double loss_ = 0.0;
};

Embedding train(const Corpus& corpus, const EmbeddingParams& params, TrainStats* stats) {
  Trainer trainer(corpus, params);
  return trainer.run(stats);
}

}  // namespace lexdiv::embed
