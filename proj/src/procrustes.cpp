#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "lexdiv/embed.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"

namespace lexdiv::embed {

using linalg::Matrix;

Matrix procrustes(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "procrustes needs equally shaped matrices");
  const auto svd = linalg::jacobi_svd(linalg::multiply_at_b(a, b));
  return linalg::multiply(svd.u, svd.v.transpose());
}

std::vector<double> AlignedPair::mapped_right(std::size_t i) const {
  const std::size_t d = rotation.rows();
  std::vector<double> out(d, 0.0);
  auto b = right.row(i);
  for (std::size_t r = 0; r < d; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += b[c] * rotation(r, c);
    out[r] = s;
  }
  return out;
}

double AlignedPair::distance(std::size_t i) const {
  const auto m = mapped_right(i);
  return 1.0 - linalg::cosine(left.row(i), m);
}

namespace {

void normalize_rows(Matrix& m, const char* side) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double n = linalg::norm(r);
    if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorKind::Runtime, std::string("zero or non-finite vector on the ") + side + " side");
    for (auto& x : r) x /= n;
  }
}

void center_columns(Matrix& m) {
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += m(i, c);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) m(i, c) -= mean;
  }
}

}  // namespace

AlignedPair align_rows(const Matrix& left, const Matrix& right, std::vector<std::string> vocab,
                       const AlignOptions& options) {
  require(left.rows() == right.rows() && left.rows() == vocab.size(), "aligned rows must match the vocabulary");
  require(!vocab.empty(), "shared vocabulary is empty");
  require(left.cols() == right.cols(), "embeddings differ in dimension");
  AlignedPair p;
  p.shared_vocab = std::move(vocab);
  p.left = left;
  p.right = right;
  normalize_rows(p.left, "left");
  normalize_rows(p.right, "right");
  if (options.center) {
    center_columns(p.left);
    center_columns(p.right);
  }
  if (linalg::frobenius_norm(p.left) < 1e-12 || linalg::frobenius_norm(p.right) < 1e-12)
    fail(ErrorKind::Runtime, "degenerate vocabulary: all vectors are identical");

  // Q maps left onto right (A·Q ≈ B); right rows come back via B·Qᵀ.
  p.rotation = procrustes(p.left, p.right);
  const double residual = linalg::orthogonality_residual(p.rotation);
  if (residual > 1e-6) fail(ErrorKind::Runtime, "rotation lost orthogonality: residual " + format_number(residual));

  double sum = 0.0;
  for (std::size_t i = 0; i < p.shared_vocab.size(); ++i) sum += 1.0 - p.distance(i);
  p.mean_self_similarity = sum / static_cast<double>(p.shared_vocab.size());
  return p;
}

AlignedPair align(const Embedding& left, const Embedding& right, const std::vector<std::string>& shared_vocab,
                  const AlignOptions& options) {
  require(left.dim() == right.dim(), "embeddings differ in dimension");
  const auto d = static_cast<std::size_t>(left.dim());
  Matrix a(shared_vocab.size(), d), b(shared_vocab.size(), d);
  for (std::size_t i = 0; i < shared_vocab.size(); ++i) {
    auto li = left.index(shared_vocab[i]);
    auto ri = right.index(shared_vocab[i]);
    if (!li || !ri) fail(ErrorKind::InvalidArgument, "shared word missing from an embedding: " + shared_vocab[i]);
    std::copy_n(left.vector(*li).begin(), d, a.row(i).begin());
    std::copy_n(right.vector(*ri).begin(), d, b.row(i).begin());
  }
  return align_rows(a, b, shared_vocab, options);
}

std::vector<DivergenceRow> divergence_table(const AlignedPair& pair,
                                            const std::vector<lexstats::LexemeStats>& counts) {
  std::unordered_map<std::string_view, const lexstats::LexemeStats*> by_lexeme;
  for (const auto& s : counts) by_lexeme.emplace(s.lexeme, &s);
  std::vector<DivergenceRow> rows;
  rows.reserve(pair.shared_vocab.size());
  for (std::size_t i = 0; i < pair.shared_vocab.size(); ++i) {
    DivergenceRow r;
    r.lexeme = pair.shared_vocab[i];
    r.distance = pair.distance(i);
    if (auto it = by_lexeme.find(r.lexeme); it != by_lexeme.end()) {
      r.user_share = it->second->user_share;
      r.tweets_left = it->second->tweets_left;
      r.tweets_right = it->second->tweets_right;
    }
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const DivergenceRow& a, const DivergenceRow& b) {
    return a.distance != b.distance ? a.distance > b.distance : a.lexeme < b.lexeme;
  });
  return rows;
}

void write_divergence(std::ostream& os, const std::vector<DivergenceRow>& rows) {
  os << "lexeme\tdistance\tuser_share\ttweets_l\ttweets_r\n";
  for (const auto& r : rows)
    os << r.lexeme << '\t' << format_number(r.distance) << '\t' << format_number(r.user_share) << '\t'
       << r.tweets_left << '\t' << r.tweets_right << '\n';
}

std::vector<DivergenceRow> read_divergence(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "divergence table not found: " + path);
  std::vector<DivergenceRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("lexeme\t", 0) == 0)) continue;
    const auto f = split_fields(line);
    auto d = f.size() == 5 ? parse_number(f[1]) : std::nullopt;
    auto u = f.size() == 5 ? parse_number(f[2]) : std::nullopt;
    if (!d || !u) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": malformed row");
    DivergenceRow r;
    r.lexeme = std::string(f[0]);
    r.distance = *d;
    r.user_share = *u;
    r.tweets_left = std::stoull(std::string(f[3]));
    r.tweets_right = std::stoull(std::string(f[4]));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::string> shared_vocabulary(const Embedding& left, const Embedding& right,
                                           const std::vector<lexstats::LexemeStats>& counts,
                                           const lexstats::EligibilityProfile& profile) {
  std::vector<std::string> out;
  for (const auto& lx : lexstats::eligible_lexicon(counts, profile))
    if (left.index(lx) && right.index(lx)) out.push_back(lx);
  return out;
}

TuneResult tune(const std::vector<EmbeddingParams>& grid, const Corpus& left, const Corpus& right,
                const std::vector<lexstats::LexemeStats>& counts, const lexstats::EligibilityProfile& profile,
                const AlignOptions& options) {
  require(!grid.empty(), "tuning grid is empty");
  TuneResult result;
  for (const auto& params : grid) {
    TunePoint point;
    point.params = params;
    try {
      const Embedding l = train(left, params);
      const Embedding r = train(right, params);
      const auto vocab = shared_vocabulary(l, r, counts, profile);
      point.shared = vocab.size();
      if (vocab.empty()) fail(ErrorKind::Runtime, "no shared eligible vocabulary");
      point.objective = align(l, r, vocab, options).mean_self_similarity;
    } catch (const Error& e) {
      point.error = e.what();
    }
    result.trace.push_back(std::move(point));
  }
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& obj = result.trace[i].objective;
    if (obj && (!result.best || *obj > *result.trace[*result.best].objective)) result.best = i;
  }
  return result;
}

void write_tune_trace(std::ostream& os, const TuneResult& result) {
  os << "point\tparams\tshared\tobjective\tbest\terror\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& p = result.trace[i];
    os << i << '\t' << p.params.describe() << '\t' << p.shared << '\t'
       << (p.objective ? format_number(*p.objective) : std::string("NA")) << '\t'
       << (result.best && *result.best == i ? 1 : 0) << '\t' << p.error << '\n';
  }
}

}  // namespace lexdiv::embed
