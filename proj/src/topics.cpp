#include "lexdiv/topics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/stats.hpp"

namespace lexdiv::topics {

IdfTable IdfTable::build(const std::vector<std::vector<std::string>>& documents) {
  IdfTable t;
  t.documents_ = documents.size();
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto term : seen) ++df[std::string(term)];
  }
  const auto n = static_cast<double>(t.documents_);
  for (auto& [term, count] : df) t.idf_.emplace(term, std::log(n / static_cast<double>(count)) + 1.0);
  return t;
}

double IdfTable::weight(std::string_view term) const {
  auto it = idf_.find(std::string(term));
  if (it != idf_.end()) return it->second;
  return std::log(static_cast<double>(std::max<std::size_t>(documents_, 1))) + 1.0;
}

DocVector doc_vector(const std::vector<std::string>& tokens, const embed::Embedding& embedding,
                     const IdfTable& idf) {
  DocVector dv;
  const auto d = static_cast<std::size_t>(embedding.dim());
  dv.vector.assign(d, 0.0);
  double total = 0.0;
  for (const auto& t : tokens) {
    auto i = embedding.index(t);
    if (!i) continue;
    const double w = idf.weight(t);
    auto v = embedding.vector(*i);
    for (std::size_t k = 0; k < d; ++k) dv.vector[k] += w * v[k];
    total += w;
  }
  if (total <= 0.0) {
    dv.degenerate = true;
    return dv;
  }
  for (auto& x : dv.vector) x /= total;
  const double n = linalg::norm(dv.vector);
  if (n < 1e-12) {
    dv.degenerate = true;
    std::fill(dv.vector.begin(), dv.vector.end(), 0.0);
    return dv;
  }
  for (auto& x : dv.vector) x /= n;
  return dv;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> region(const std::vector<std::vector<double>>& pts, std::size_t i, double eps2) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < pts.size(); ++j)
    if (squared_distance(pts[i], pts[j]) <= eps2) out.push_back(j);
  return out;
}

}  // namespace

Clustering dbscan(const std::vector<std::vector<double>>& points, double eps, std::size_t min_pts) {
  require(eps > 0.0, "eps must be positive");
  require(min_pts >= 2, "min_pts must be at least 2");
  Clustering c;
  c.eps = eps;
  c.min_pts = min_pts;
  constexpr int kUnvisited = -2;
  c.labels.assign(points.size(), kUnvisited);
  const double eps2 = std::isinf(eps) ? std::numeric_limits<double>::infinity() : eps * eps;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (c.labels[i] != kUnvisited) continue;
    auto seeds = region(points, i, eps2);
    if (seeds.size() < min_pts) {
      c.labels[i] = kNoise;
      continue;
    }
    const int id = c.clusters++;
    c.labels[i] = id;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (c.labels[j] == kNoise) c.labels[j] = id;  // border point
      if (c.labels[j] != kUnvisited) continue;
      c.labels[j] = id;
      auto more = region(points, j, eps2);
      if (more.size() >= min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return c;
}

double suggest_eps(const std::vector<std::vector<double>>& points, std::size_t k) {
  require(points.size() > k, "too few points to suggest eps");
  std::vector<double> kd;
  kd.reserve(points.size());
  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) dist[j] = squared_distance(points[i], points[j]);
    // dist[i] = 0 is the point itself, so index k is the k-th neighbour.
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    kd.push_back(std::sqrt(dist[k]));
  }
  std::sort(kd.begin(), kd.end());
  const double x0 = 0, y0 = kd.front();
  const double x1 = static_cast<double>(kd.size() - 1), y1 = kd.back();
  const double len = std::hypot(x1 - x0, y1 - y0);
  if (len == 0.0 || y1 == y0) return std::max(kd.back(), 1e-9);
  std::size_t best = 0;
  double best_dist = -1.0;
  for (std::size_t i = 0; i < kd.size(); ++i) {
    const double x = static_cast<double>(i);
    const double d = std::fabs((y1 - y0) * x - (x1 - x0) * kd[i] + x1 * y0 - y1 * x0) / len;
    if (d > best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return std::max(kd[best], 1e-9);
}

std::vector<std::vector<Keyword>> cluster_keywords(const std::vector<std::vector<std::string>>& cluster_docs,
                                                   std::size_t k) {
  require(!cluster_docs.empty(), "keyword extraction needs at least one cluster");
  std::map<std::string, std::size_t> df;
  std::vector<std::map<std::string, std::size_t>> tf(cluster_docs.size());
  for (std::size_t c = 0; c < cluster_docs.size(); ++c) {
    for (const auto& t : cluster_docs[c]) ++tf[c][t];
    for (const auto& [term, n] : tf[c]) ++df[term];
  }
  const auto nclusters = static_cast<double>(cluster_docs.size());
  std::vector<std::vector<Keyword>> out(cluster_docs.size());
  for (std::size_t c = 0; c < cluster_docs.size(); ++c) {
    const auto total = static_cast<double>(cluster_docs[c].size());
    for (const auto& [term, n] : tf[c]) {
      const double idf = std::log(nclusters / static_cast<double>(df[term])) + 1.0;
      out[c].push_back({term, static_cast<double>(n) / total * idf});
    }
    std::sort(out[c].begin(), out[c].end(), [](const Keyword& a, const Keyword& b) {
      return a.score != b.score ? a.score > b.score : a.term < b.term;
    });
    if (out[c].size() > k) out[c].resize(k);
  }
  return out;
}

Projection project_2d(const std::vector<std::vector<double>>& vectors) {
  require(vectors.size() >= 3, "projection needs at least three vectors");
  const std::size_t n = vectors.size(), d = vectors.front().size();
  require(d >= 2, "projection needs at least two dimensions");
  Projection p;
  p.mean.assign(d, 0.0);
  for (const auto& v : vectors) {
    require(v.size() == d, "vectors differ in dimension");
    for (std::size_t k = 0; k < d; ++k) p.mean[k] += v[k];
  }
  for (auto& m : p.mean) m /= static_cast<double>(n);
  linalg::Matrix cov(d, d);
  for (const auto& v : vectors)
    for (std::size_t a = 0; a < d; ++a) {
      const double da = v[a] - p.mean[a];
      for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (v[b] - p.mean[b]);
    }
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }
    trace += cov(a, a);
  }
  if (!(trace > 1e-300)) fail(ErrorKind::InvalidArgument, "zero-variance data cannot be projected");
  const auto eig = linalg::jacobi_eigen(cov);
  p.components = linalg::Matrix(2, d);
  for (std::size_t c = 0; c < 2; ++c) {
    std::size_t arg = 0;
    for (std::size_t k = 0; k < d; ++k)
      if (std::fabs(eig.vectors(k, c)) > std::fabs(eig.vectors(arg, c)) + 1e-12) arg = k;
    const double sign = eig.vectors(arg, c) < 0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < d; ++k) p.components(c, k) = sign * eig.vectors(k, c);
    p.explained_variance[c] = std::max(0.0, eig.values[c]);
  }
  p.coords.reserve(n);
  for (const auto& v : vectors) {
    std::array<double, 2> xy{};
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < d; ++k) xy[c] += (v[k] - p.mean[k]) * p.components(c, k);
    p.coords.push_back(xy);
  }
  return p;
}

double LdaClassifier::score(std::span<const double> x) const { return linalg::dot(x, weights) - threshold; }

LdaClassifier fit_lda(const std::vector<std::vector<double>>& vectors, const std::vector<Side>& labels,
                      double ridge_scale) {
  require(vectors.size() == labels.size(), "one label per vector required");
  require(!vectors.empty(), "no training vectors");
  const std::size_t d = vectors.front().size();
  LdaClassifier m;
  m.mean_left.assign(d, 0.0);
  m.mean_right.assign(d, 0.0);
  std::size_t nl = 0, nr = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    require(vectors[i].size() == d, "vectors differ in dimension");
    auto& mu = labels[i] == Side::Right ? m.mean_right : m.mean_left;
    require(labels[i] == Side::Left || labels[i] == Side::Right, "labels must be left or right");
    (labels[i] == Side::Right ? nr : nl) += 1;
    for (std::size_t k = 0; k < d; ++k) mu[k] += vectors[i][k];
  }
  if (nl == 0 || nr == 0) fail(ErrorKind::InvalidArgument, "both classes must be present");
  for (auto& x : m.mean_left) x /= static_cast<double>(nl);
  for (auto& x : m.mean_right) x /= static_cast<double>(nr);

  m.covariance = linalg::Matrix(d, d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& mu = labels[i] == Side::Right ? m.mean_right : m.mean_left;
    for (std::size_t a = 0; a < d; ++a) {
      const double da = vectors[i][a] - mu[a];
      for (std::size_t b = a; b < d; ++b) m.covariance(a, b) += da * (vectors[i][b] - mu[b]);
    }
  }
  const double dof = std::max<double>(1.0, static_cast<double>(vectors.size()) - 2.0);
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      m.covariance(a, b) /= dof;
      m.covariance(b, a) = m.covariance(a, b);
    }
    trace += m.covariance(a, a);
  }
  const double lambda = ridge_scale * trace / static_cast<double>(d);
  for (std::size_t a = 0; a < d; ++a) m.covariance(a, a) += lambda;

  std::vector<double> diff(d);
  for (std::size_t k = 0; k < d; ++k) diff[k] = m.mean_right[k] - m.mean_left[k];
  try {
    m.weights = linalg::cholesky_solve(m.covariance, diff);
  } catch (const Error&) {
    fail(ErrorKind::Runtime, "covariance is singular even after regularization");
  }
  m.prior_left = static_cast<double>(nl) / static_cast<double>(vectors.size());
  m.prior_right = static_cast<double>(nr) / static_cast<double>(vectors.size());
  std::vector<double> mid(d);
  for (std::size_t k = 0; k < d; ++k) mid[k] = 0.5 * (m.mean_left[k] + m.mean_right[k]);
  m.threshold = linalg::dot(mid, m.weights) - std::log(m.prior_right / m.prior_left);
  return m;
}

Evaluation evaluate(const std::vector<std::vector<double>>& vectors, const std::vector<Side>& labels,
                    const EvaluateOptions& options) {
  require(vectors.size() == labels.size(), "one label per vector required");
  require(options.bootstrap >= 1, "at least one split required");
  require(options.train_fraction > 0 && options.train_fraction < 1, "train fraction must be in (0, 1)");
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Side::Right ? right : left).push_back(i);
  if (left.size() < 2 || right.size() < 2) fail(ErrorKind::InvalidArgument, "each class needs at least two vectors");

  Rng rng(mix_seed(options.seed, fnv1a64("evaluate")));
  std::vector<double> accs, chances, kappas;
  for (std::size_t s = 0; s < options.bootstrap; ++s) {
    std::vector<std::size_t> train, test;
    for (auto* cls : {&left, &right}) {
      std::vector<std::size_t> idx = *cls;
      rng.shuffle(idx);
      auto ntrain = static_cast<std::size_t>(std::llround(options.train_fraction * static_cast<double>(idx.size())));
      ntrain = std::clamp<std::size_t>(ntrain, 1, idx.size() - 1);
      train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ntrain));
      test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(ntrain), idx.end());
    }
    std::vector<std::vector<double>> xs;
    std::vector<Side> ys;
    for (auto i : train) {
      xs.push_back(vectors[i]);
      ys.push_back(labels[i]);
    }
    const auto model = fit_lda(xs, ys, options.ridge_scale);
    std::size_t correct = 0, true_right = 0, pred_right = 0;
    for (auto i : test) {
      const Side p = model.predict(vectors[i]);
      correct += p == labels[i];
      true_right += labels[i] == Side::Right;
      pred_right += p == Side::Right;
    }
    const auto nt = static_cast<double>(test.size());
    const double acc = static_cast<double>(correct) / nt;
    const double tr = static_cast<double>(true_right) / nt, pr = static_cast<double>(pred_right) / nt;
    const double pe = tr * pr + (1 - tr) * (1 - pr);
    accs.push_back(acc);
    chances.push_back(pe);
    kappas.push_back(pe < 1.0 ? (acc - pe) / (1.0 - pe) : 0.0);
  }
  Evaluation e;
  e.n = vectors.size();
  e.splits = options.bootstrap;
  e.accuracy = stats::mean(accs);
  e.p_chance = stats::mean(chances);
  e.kappa = e.p_chance < 1.0 ? (e.accuracy - e.p_chance) / (1.0 - e.p_chance) : 0.0;
  e.accuracy_lo = stats::quantile(accs, 0.025);
  e.accuracy_hi = stats::quantile(accs, 0.975);
  e.kappa_lo = stats::quantile(kappas, 0.025);
  e.kappa_hi = stats::quantile(kappas, 0.975);
  return e;
}

void write_evaluation(std::ostream& os, const Evaluation& e) {
  os << "accuracy\tkappa\tp_chance\taccuracy_lo\taccuracy_hi\tkappa_lo\tkappa_hi\tn\tsplits\n";
  os << format_number(e.accuracy) << '\t' << format_number(e.kappa) << '\t' << format_number(e.p_chance) << '\t'
     << format_number(e.accuracy_lo) << '\t' << format_number(e.accuracy_hi) << '\t' << format_number(e.kappa_lo)
     << '\t' << format_number(e.kappa_hi) << '\t' << e.n << '\t' << e.splits << '\n';
}

}  // namespace lexdiv::topics
