// Acceptance suite: one check per criterion, one result line each.
//   acceptance        run every criterion
//   acceptance N      run criterion N; exit status 0 only if it passes

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexdiv/annotate.hpp"
#include "lexdiv/artifacts.hpp"
#include "lexdiv/config.hpp"
#include "lexdiv/corpus.hpp"
#include "lexdiv/delineate.hpp"
#include "lexdiv/embed.hpp"
#include "lexdiv/fixture.hpp"
#include "lexdiv/lexstats.hpp"
#include "lexdiv/linalg.hpp"
#include "lexdiv/pipeline.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/sentiment.hpp"
#include "lexdiv/stats.hpp"
#include "lexdiv/textprep.hpp"
#include "lexdiv/topics.hpp"
#include "unit/helpers.hpp"

using namespace lexdiv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note("FAILED " + what);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void quiet(const std::string&) {}

config::PipelineConfig fixture_config(const fs::path& workdir, const fixture::FixtureFiles& files) {
  auto cfg = config::PipelineConfig::defaults();
  cfg.workdir = workdir.string();
  cfg.registry = files.registry.string();
  cfg.followers = {files.followers.string()};
  cfg.profiles = files.profiles.string();
  cfg.tweets = files.tweets.string();
  cfg.embedding.workers = 1;
  return cfg;
}

bool run_stages(const std::vector<std::string>& stages, const config::PipelineConfig& cfg, Outcome& o) {
  std::string last;
  const auto log = [&](const std::string& s) { last = s; };
  for (const auto& s : stages) {
    if (pipeline::run(s, cfg, log) != pipeline::kOk) {
      o.require(false, "stage " + s + " (" + last + ")");
      return false;
    }
  }
  return true;
}

// ------------------------------------------------------------------ 1

Outcome sentiment_anchors() {
  Outcome o;
  const std::string data = LEXDIV_DEFAULT_DATA_DIR;
  const auto cfg =
      sentiment::SentimentConfig::from_files(data + "/vader_lexicon.txt", data + "/emoji_utf8_lexicon.txt");
  const std::pair<const char*, double> anchors[] = {
      {"This is great!", 0.66}, {"This is great! :)", 0.81}, {"This is not great!", -0.51}};
  for (const auto& [text, expected] : anchors) {
    const double got = sentiment::score_compound(text, cfg);
    o.note(std::string("\"") + text + "\" " + fmt(got));
    o.require(std::abs(got - expected) <= 0.01, std::string("\"") + text + "\" expected " + fmt(expected, 2) + " ± 0.01");
  }
  return o;
}

// ------------------------------------------------------------------ 2

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == 't' || s[i + 1] == 'n')) {
      out.push_back(s[i + 1] == 't' ? '\t' : '\n');
      ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

Outcome cleaning_suite() {
  Outcome o;
  std::size_t cases = 0, exact = 0;
  std::set<std::string> rules;
  for (const auto& line : testing::lines_of(testing::slurp(testing::data_path("clean_cases.tsv")))) {
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    const std::string raw = unescape(line.substr(0, t1));
    const std::string expected = line.substr(t1 + 1, t2 - t1 - 1);
    std::stringstream tags(line.substr(t2 + 1));
    for (std::string tag; std::getline(tags, tag, ',');) rules.insert(tag);
    ++cases;
    const auto got = textprep::clean_text(raw);
    if (got == expected)
      ++exact;
    else
      o.note("mismatch on \"" + raw + "\" -> \"" + got + "\"");
  }
  o.note(std::to_string(exact) + "/" + std::to_string(cases) + " fixture pairs exact");
  o.require(cases >= 50, "at least 50 fixture pairs");
  o.require(exact == cases, "every fixture pair byte-exact");
  for (const char* r : {"url", "mention", "time", "hash", "punct", "case", "space", "redup", "emoticon", "modifier"})
    o.require(rules.count(r) == 1, std::string("fixture covers ") + r);

  Rng rng(20210201);
  std::size_t stable = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto raw = testing::random_tweet_text(rng);
    const auto once = textprep::clean_text(raw);
    if (textprep::clean_text(once) == once)
      ++stable;
    else if (o.pass)
      o.note("not idempotent on \"" + raw + "\"");
  }
  o.note(std::to_string(stable) + "/10000 fuzz inputs idempotent");
  o.require(stable == 10000, "idempotence on fuzz inputs");
  return o;
}

// ------------------------------------------------------------------ 3

Outcome delineation_oracle() {
  Outcome o;
  using namespace delineate;
  std::vector<Outlet> outlets;
  for (int i = 0; i < 100; ++i)
    outlets.push_back({"acct" + std::to_string(i), "Outlet " + std::to_string(i), static_cast<Category>(i % 5), 1000});
  const OutletRegistry reg(outlets);

  auto pick = [&](Rng& rng, std::initializer_list<Category> allowed) {
    for (;;) {
      const auto& out = outlets[rng.below(outlets.size())];
      for (auto c : allowed)
        if (out.category == c) return out.account_id;
    }
  };

  Rng rng(3);
  const std::size_t users = 10000;
  std::map<std::string, std::set<std::string>> follows;
  for (std::size_t u = 0; u < users; ++u) {
    auto& f = follows["u" + std::to_string(u)];
    const auto kind = rng.below(4);
    const auto n = 1 + rng.below(5);
    for (std::size_t k = 0; k < n; ++k) {
      if (kind == 0) f.insert(pick(rng, {Category::Left}));
      else if (kind == 1) f.insert(pick(rng, {Category::LeanRight, Category::Right}));
      else f.insert(outlets[rng.below(outlets.size())].account_id);
    }
    if (kind == 3) f.insert(pick(rng, {Category::Center, Category::LeanLeft}));
  }

  // Brute recount straight from the known follow sets.
  std::map<std::string, Group> expected;
  std::map<std::string, std::array<std::uint32_t, kCategoryCount>> expected_counts;
  for (const auto& [u, f] : follows) {
    std::array<std::uint32_t, kCategoryCount> c{};
    for (const auto& acct : f)
      for (const auto& out : outlets)
        if (out.account_id == acct) ++c[static_cast<std::size_t>(out.category)];
    const auto left = c[0], right = c[3] + c[4], other = c[1] + c[2];
    expected[u] = left >= 2 && right == 0 && other == 0   ? Group::Left
                  : right >= 2 && left == 0 && other == 0 ? Group::Right
                                                          : Group::Excluded;
    expected_counts[u] = c;
  }
  std::size_t direct = 0;
  std::map<Group, std::size_t> tally_by_group;
  for (const auto& [u, f] : follows) {
    if (assign_group(f, reg, u).group == expected[u]) ++direct;
    ++tally_by_group[expected[u]];
  }
  o.note("assign_group " + std::to_string(direct) + "/" + std::to_string(users) + " (" +
         std::to_string(tally_by_group[Group::Left]) + " L, " + std::to_string(tally_by_group[Group::Right]) + " R)");
  o.require(direct == users, "assign_group matches the recount");

  // One million shuffled records with duplicates and unknown accounts.
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [u, f] : follows)
    for (const auto& a : f) edges.emplace_back(a, u);
  const std::size_t unique_edges = edges.size();
  std::vector<std::pair<std::string, std::string>> records = edges;
  while (records.size() < 1'000'000) {
    if (rng.bernoulli(0.01))
      records.emplace_back("ghost" + std::to_string(rng.below(50)), "u" + std::to_string(rng.below(users)));
    else
      records.push_back(edges[rng.below(unique_edges)]);
  }

  testing::TempDir dir("acc3");
  auto write_split = [&](const std::string& tag, std::size_t parts) {
    rng.shuffle(records);
    std::vector<std::string> files;
    std::vector<std::ofstream> outs;
    for (std::size_t p = 0; p < parts; ++p) {
      files.push_back((dir / (tag + std::to_string(p) + ".tsv")).string());
      outs.emplace_back(files.back());
    }
    for (std::size_t i = 0; i < records.size(); ++i)
      outs[i % parts] << records[i].first << '\t' << records[i].second << '\n';
    return files;
  };

  const auto files_a = write_split("a", 1);
  TallySummary sa;
  const auto tally_a = stream_tally(files_a, reg, {}, &sa);
  const auto files_b = write_split("b", 4);
  TallyOptions spill;
  spill.memory_budget_users = 1500;
  spill.temp_dir = dir.path().string();
  spill.workers = 2;
  TallySummary sb;
  const auto tally_b = stream_tally(files_b, reg, spill, &sb);

  std::size_t agree = 0;
  for (const auto& [u, c] : expected_counts) {
    const auto it = tally_a.find(u);
    if (it != tally_a.end() && it->second.by_category == c && assign_from_counts(u, it->second).group == expected[u])
      ++agree;
  }
  o.note(std::to_string(sa.records) + " records, " + std::to_string(sb.spilled_runs) + " spilled runs");
  o.require(sa.records == 1'000'000, "all records read");
  o.require(tally_a.size() == users && agree == users, "streamed tally matches the recount for every user");
  o.require(tally_a == tally_b, "tally invariant to order, file split, duplicates and spilling");
  o.require(sb.spilled_runs > 0, "budget forced spilled runs");
  return o;
}

// ------------------------------------------------------------------ 4

Outcome frequency_metrics() {
  Outcome o;
  o.require(lexstats::log2_fold(100, 200) == 1.0, "200/100 -> 1");
  o.require(lexstats::log2_fold(100, 400) == 2.0, "400/100 -> 2");
  o.require(lexstats::log2_fold(400, 50) == -3.0, "50/400 -> -3");

  Rng rng(4);
  std::size_t rows = 0, violations = 0;
  for (int t = 0; t < 1000; ++t) {
    lexstats::Counter base, mirror, doubled;
    const auto n = 20 + rng.below(80);
    for (std::size_t i = 0; i < n; ++i) {
      const Side side = rng.bernoulli(0.5) ? Side::Left : Side::Right;
      const Side other = side == Side::Left ? Side::Right : Side::Left;
      std::vector<std::string> lex;
      const auto len = 1 + rng.below(8);
      for (std::size_t k = 0; k < len; ++k) lex.push_back("w" + std::to_string(rng.below(15)));
      const std::string user = "u" + std::to_string(rng.below(12));
      base.add(side, user, lex);
      mirror.add(other, user, lex);
      doubled.add(side, user, lex);
      doubled.add(side, user + "x", lex);
    }
    const auto a = base.table(), m = mirror.table(), d = doubled.table();
    if (a.size() != m.size() || a.size() != d.size()) {
      ++violations;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i].rate_left > 0 && a[i].rate_right > 0)) continue;
      ++rows;
      const double f = lexstats::log2_fold(a[i].rate_left, a[i].rate_right);
      if (lexstats::log2_fold(m[i].rate_left, m[i].rate_right) != -f) ++violations;
      if (lexstats::log2_fold(d[i].rate_left, d[i].rate_right) != f) ++violations;
    }
  }
  o.note("1000 tables, " + std::to_string(rows) + " two-sided rows, " + std::to_string(violations) + " violations");
  o.require(rows > 1000, "tables exercise two-sided rows");
  o.require(violations == 0, "swap negates and doubling preserves every fold");
  return o;
}

// ------------------------------------------------------------------ 5

Eigen::MatrixXd haar_rotation(Rng& rng, int n) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

Outcome procrustes_recovery() {
  Outcome o;
  const int dim = 50;
  const std::size_t vocab = 500;
  Rng rng(5);
  double sum_sim = 0.0, worst_sim = 1.0, worst_orth = 0.0, worst_recovery = 0.0;
  std::size_t optimal_trials = 0;
  std::vector<std::string> words(vocab);
  for (std::size_t i = 0; i < vocab; ++i) words[i] = "w" + std::to_string(i);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd planted = haar_rotation(rng, dim);
    linalg::Matrix right(vocab, dim), left(vocab, dim);
    for (std::size_t i = 0; i < vocab; ++i)
      for (int j = 0; j < dim; ++j) right(i, j) = rng.normal();
    for (std::size_t i = 0; i < vocab; ++i)
      for (int r = 0; r < dim; ++r) {
        double s = 0.0;
        for (int c = 0; c < dim; ++c) s += right(i, c) * planted(r, c);
        left(i, r) = s + 1e-4 * rng.normal();
      }
    const auto pair = embed::align_rows(left, right, words);
    sum_sim += pair.mean_self_similarity;
    worst_sim = std::min(worst_sim, pair.mean_self_similarity);

    Eigen::MatrixXd q(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) q(r, c) = pair.rotation(r, c);
    worst_orth = std::max(worst_orth, (q.transpose() * q - Eigen::MatrixXd::Identity(dim, dim)).norm());
    worst_recovery = std::max(worst_recovery, (q - planted).cwiseAbs().maxCoeff());

    // ||X·Mᵀ − Y||² = ||X||² + ||Y||² − 2·tr(M·XᵀY) for orthogonal M.
    Eigen::MatrixXd x(vocab, dim), y(vocab, dim);
    for (std::size_t i = 0; i < vocab; ++i)
      for (int j = 0; j < dim; ++j) {
        x(i, j) = pair.right(i, j);
        y(i, j) = pair.left(i, j);
      }
    const Eigen::MatrixXd cross = x.transpose() * y;
    const double fitted = (q * cross).trace();
    bool optimal = true;
    for (int k = 0; k < 1000 && optimal; ++k) optimal = fitted >= (haar_rotation(rng, dim) * cross).trace();
    if (optimal) ++optimal_trials;
  }
  const double mean_sim = sum_sim / 100.0;
  o.note("mean self-similarity " + fmt(mean_sim, 9) + ", worst " + fmt(worst_sim, 9));
  o.note("orthogonality residual " + sci(worst_orth) + ", max |Q - R| " + sci(worst_recovery));
  o.note("optimal in " + std::to_string(optimal_trials) + "/100 trials");
  o.require(mean_sim >= 0.999999, "mean self-similarity >= 0.999999");
  o.require(worst_orth <= 1e-6, "orthogonality residual <= 1e-6");
  o.require(optimal_trials == 100, "beats 1000 random rotations in every trial");
  return o;
}

// ------------------------------------------------------------------ 6

Outcome planted_homonym() {
  Outcome o;
  std::size_t hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    testing::TempDir inputs("acc6in"), work("acc6w");
    const auto spec = fixture::FixtureSpec::standard(seed);
    const auto files = fixture::make_fixture(spec, inputs.path());
    const auto cfg = fixture_config(work.path(), files);
    if (!run_stages({"delineate", "clean", "freq", "embed", "align", "diverge"}, cfg, o)) return o;
    const auto rows = embed::read_divergence(pipeline::artifact(cfg, "divergence.tsv").string());
    const std::string& word = spec.homonyms.front().word;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].lexeme == word) rank = i + 1;
    const std::size_t decile = (rows.size() + 9) / 10;
    const bool top = rank >= 1 && rank <= decile;
    if (top) ++hits;
    o.note("seed " + std::to_string(seed) + " rank " + std::to_string(rank) + "/" + std::to_string(rows.size()));
  }
  o.require(hits >= 4, "homonym top-decile in at least 4 of 5 seeds");
  return o;
}

// ------------------------------------------------------------------ 7

struct DocSet {
  std::vector<std::vector<double>> vectors;
  std::vector<Side> sides;
};

DocSet doc_set(const config::PipelineConfig& cfg) {
  const auto corpus = read_corpus(pipeline::artifact(cfg, "cleaned.jsonl").string());
  const auto emb = embed::Embedding::load(pipeline::artifact(cfg, "embed_pooled.vec").string());
  std::vector<std::vector<std::string>> docs;
  for (const auto& r : corpus) docs.push_back(r.tokens ? *r.tokens : std::vector<std::string>{});
  const auto idf = topics::IdfTable::build(docs);
  DocSet d;
  for (const auto& r : corpus) {
    if (!r.tokens || (r.side != Side::Left && r.side != Side::Right)) continue;
    auto v = topics::doc_vector(*r.tokens, emb, idf);
    if (v.degenerate) continue;
    d.vectors.push_back(std::move(v.vector));
    d.sides.push_back(r.side);
  }
  return d;
}

Outcome classifier_sanity() {
  Outcome o;
  std::optional<DocSet> first;
  for (std::uint64_t seed : {21, 22}) {
    testing::TempDir inputs("acc7in"), work("acc7w");
    auto spec = fixture::FixtureSpec::standard(seed);
    spec.users_per_side = 100;
    spec.tweets_per_side = 15000;
    spec.topic_skew = 0.3;
    const auto files = fixture::make_fixture(spec, inputs.path());
    auto cfg = fixture_config(work.path(), files);
    cfg.bootstrap = 100;
    if (!run_stages({"delineate", "clean", "embed", "classify"}, cfg, o)) return o;
    const auto table = testing::lines_of(testing::slurp(pipeline::artifact(cfg, "classify.tsv")));
    std::stringstream row(table.at(1));
    double accuracy = 0, kappa = 0;
    row >> accuracy >> kappa;
    o.note("skew seed " + std::to_string(seed) + " accuracy " + fmt(accuracy, 3) + " kappa " + fmt(kappa, 3));
    o.require(accuracy > 0.55 && kappa > 0.05, "skewed fixture separable");
    if (!first) first = doc_set(cfg);
  }

  Rng rng(7);
  auto shuffled = first->sides;
  rng.shuffle(shuffled);
  topics::EvaluateOptions opts;
  opts.bootstrap = 100;
  opts.seed = 77;
  const auto e = topics::evaluate(first->vectors, shuffled, opts);
  o.note("shuffled accuracy " + fmt(e.accuracy, 3) + " kappa " + fmt(e.kappa, 3));
  o.require(std::abs(e.accuracy - 0.5) <= 0.03, "shuffled accuracy 0.50 ± 0.03");
  o.require(std::abs(e.kappa) <= 0.05, "shuffled kappa within ± 0.05");
  return o;
}

// ------------------------------------------------------------------ 8

Outcome durel_math() {
  Outcome o;
  using namespace annotate;
  const auto schedule = build_session("acc", testing::synthetic_targets(8), 8);
  std::map<PairKind, std::size_t> kinds;
  for (const auto& p : schedule.pairs) ++kinds[p.kind];
  o.note("composition LR " + std::to_string(kinds[PairKind::LR]) + " LL " + std::to_string(kinds[PairKind::LL]) +
         " RR " + std::to_string(kinds[PairKind::RR]));
  o.require(schedule.pairs.size() == 320, "320 pairs");
  o.require(kinds[PairKind::LR] == 160 && kinds[PairKind::LL] == 80 && kinds[PairKind::RR] == 80,
            "composition 160/80/80");

  // Scripted ratings. Target tK, with m = K mod 4:
  //   LR: h1 rates m+1 everywhere; h2 rates 4 on its first ten LR pairs, 3 on the rest.
  //   LL: h1 rates 4; h2 rates 1 for even K, 2 for odd K.
  //   RR: both rate 3 for K < 4, 2 otherwise.
  testing::TempDir dir("acc8");
  Session::create(dir / "s", schedule);
  auto session = Session::open(dir / "s");
  std::map<std::string, int> lr_seen;
  std::vector<std::tuple<std::string, std::string, int>> script;
  for (const auto& p : schedule.pairs) {
    const int k = std::stoi(p.target.substr(1));
    switch (p.kind) {
      case PairKind::LR:
        script.emplace_back(p.pair_id, "h1", k % 4 + 1);
        script.emplace_back(p.pair_id, "h2", lr_seen[p.target]++ < 10 ? 4 : 3);
        break;
      case PairKind::LL:
        script.emplace_back(p.pair_id, "h1", 4);
        script.emplace_back(p.pair_id, "h2", k % 2 == 0 ? 1 : 2);
        break;
      case PairKind::RR:
        script.emplace_back(p.pair_id, "h1", k < 4 ? 3 : 2);
        script.emplace_back(p.pair_id, "h2", k < 4 ? 3 : 2);
        break;
    }
  }
  Rng rng(88);
  rng.shuffle(script);
  for (const auto& [pair, who, v] : script) session.record_rating(pair, who, v);
  const auto reopened = Session::open(dir / "s");
  const auto scores = session_scores(reopened.schedule(), reopened.ratings(), {"h1", "h2"});

  // Hand-computed: divergence = 4 - (h1 + 3.5) / 2; polysemy_left = 4 - (4 + h2) / 2.
  const double divergence[8] = {1.75, 1.25, 0.75, 0.25, 1.75, 1.25, 0.75, 0.25};
  const double polysemy_left[8] = {1.5, 1.0, 1.5, 1.0, 1.5, 1.0, 1.5, 1.0};
  const double polysemy_right[8] = {1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0};
  std::size_t exact = 0;
  for (const auto& s : scores) {
    const int k = std::stoi(s.target.substr(1));
    if (s.divergence == divergence[k] && s.polysemy_left == polysemy_left[k] && s.polysemy_right == polysemy_right[k] &&
        s.polysemy_right_se == 0.0 && s.n_lr == 20 && s.n_ll == 10 && s.n_rr == 10)
      ++exact;
    else
      o.note(s.target + " got " + fmt(s.divergence) + "/" + fmt(s.polysemy_left) + "/" + fmt(s.polysemy_right));
  }
  o.note(std::to_string(exact) + "/8 targets exact");
  o.require(scores.size() == 8 && exact == 8, "scripted scores reproduce the hand-computed values");

  const auto same = agreement({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto reversed = agreement({1, 2, 3, 4}, {4, 3, 2, 1});
  const auto swapped = agreement({1, 2, 3, 4}, {2, 1, 4, 3});
  o.note("spearman " + fmt(*same, 17) + ", " + fmt(*reversed, 17) + ", " + fmt(*swapped, 17));
  o.require(same == 1.0 && reversed == -1.0 && swapped == 0.6, "Spearman examples exact");
  return o;
}

// ------------------------------------------------------------------ 9

Outcome side_effect_estimator() {
  Outcome o;
  double worst_err = 0.0, worst_p = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto users = fixture::user_means(100, 0.1, -0.2, 0.05, seed);
    const auto r = sentiment::side_effect(users, {10000, seed});
    worst_err = std::max(worst_err, std::abs(r.slope + 0.2));
    worst_p = std::max(worst_p, r.p_value);
  }
  o.note("planted -0.2: worst |beta error| " + fmt(worst_err, 4) + ", worst p " + sci(worst_p));
  o.require(worst_err <= 0.02, "beta within ± 0.02");
  o.require(worst_p < 0.001, "permutation p < 0.001");

  std::vector<double> null_p;
  for (std::uint64_t seed = 100; seed < 150; ++seed)
    null_p.push_back(sentiment::side_effect(fixture::user_means(100, 0.1, 0.0, 0.05, seed), {2000, seed}).p_value);
  const auto ks = stats::ks_uniform(null_p);
  o.note("null p-values KS p " + fmt(ks.p_value, 3));
  o.require(ks.p_value > 0.01, "null p-values uniform (KS p > 0.01)");
  return o;
}

// ------------------------------------------------------------------ 10

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).string();
    if (rel == ".lexdiv.lock") continue;
    std::string content = artifacts::read_file(e.path());
    if (rel.rfind("manifests/", 0) == 0) {
      // Wall-clock fields are the only run-dependent manifest content.
      auto m = artifacts::Manifest::from_json(content);
      m.wall_seconds = 0.0;
      m.started_at.clear();
      content = m.to_json();
    }
    out[rel] = artifacts::sha256_hex(content);
  }
  return out;
}

Outcome reproducibility() {
  Outcome o;
  testing::TempDir inputs("acc10in"), base("acc10w");
  const auto files = fixture::make_fixture(fixture::FixtureSpec::standard(7), inputs.path());
  const fs::path work = base / "work";
  const auto cfg = fixture_config(work, files);
  std::vector<std::map<std::string, std::string>> runs;
  for (int i = 0; i < 2; ++i) {
    std::string last;
    if (pipeline::run_all(cfg, [&](const std::string& s) { last = s; }) != pipeline::kOk) {
      o.require(false, "run " + std::to_string(i + 1) + " (" + last + ")");
      return o;
    }
    runs.push_back(snapshot(work));
    fs::rename(work, base / ("run" + std::to_string(i)));
  }
  std::vector<std::string> differing;
  for (const auto& [name, hash] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != hash) differing.push_back(name);
  }
  o.note(std::to_string(runs[0].size()) + " artifacts compared, " + std::to_string(differing.size()) + " differ");
  for (const auto& d : differing) o.note("differs: " + d);
  o.require(runs[0].size() > 20, "full artifact set produced");
  o.require(runs[0].size() == runs[1].size() && differing.empty(), "byte-identical artifacts");
  return o;
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"sentiment anchors", 1, sentiment_anchors},
      {"cleaning fixture suite", 10, cleaning_suite},
      {"delineation oracle", 30, delineation_oracle},
      {"frequency metrics", 5, frequency_metrics},
      {"procrustes recovery", 60, procrustes_recovery},
      {"planted homonym detection", 600, planted_homonym},
      {"classifier sanity", 120, classifier_sanity},
      {"annotation scoring", 5, durel_math},
      {"side-effect estimator", 120, side_effect_estimator},
      {"pipeline reproducibility", 900, reproducibility},
  };
  return list;
}

bool run_one(std::size_t n) {
  const auto& c = criteria().at(n - 1);
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.check();
  } catch (const std::exception& e) {
    o.require(false, std::string("threw: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < c.limit_seconds, "runtime limit");
  std::cout << "acceptance " << n << (o.pass ? " PASS " : " FAIL ") << c.name << " | " << o.detail << " | "
            << fmt(secs, 2) << " s (limit " << c.limit_seconds << " s)" << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::cerr << "usage: acceptance [1-10]\n";
    return 2;
  }
  if (argc == 2) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria().size())) {
      std::cerr << "usage: acceptance [1-10]\n";
      return 2;
    }
    return run_one(static_cast<std::size_t>(n)) ? 0 : 1;
  }
  bool all = true;
  for (std::size_t n = 1; n <= criteria().size(); ++n) all = run_one(n) && all;
  return all ? 0 : 1;
}
