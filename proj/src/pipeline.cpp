#include "lexdiv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lexdiv/annotate.hpp"
#include "lexdiv/artifacts.hpp"
#include "lexdiv/delineate.hpp"
#include "lexdiv/embed.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/lexstats.hpp"
#include "lexdiv/llm.hpp"
#include "lexdiv/rng.hpp"
#include "lexdiv/sentiment.hpp"
#include "lexdiv/textprep.hpp"
#include "lexdiv/topics.hpp"

namespace lexdiv::pipeline {

namespace {

using config::PipelineConfig;

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) fail(ErrorKind::MissingInput, what + " not configured");
  if (!fs::exists(p)) fail(ErrorKind::MissingInput, what + " not found: " + p.string());
}

fs::path data_file(const std::string& configured, const char* bundled) {
  return configured.empty() ? fs::path(LEXDIV_DEFAULT_DATA_DIR) / bundled : fs::path(configured);
}

std::vector<TweetRecord> read_cleaned(const PipelineConfig& cfg) {
  const fs::path p = artifact(cfg, "cleaned.jsonl");
  require_file(p, "cleaned corpus");
  return read_corpus(p.string());
}

textprep::RuleLemmatizer make_lemmatizer(const PipelineConfig& cfg) {
  textprep::RuleLemmatizer lem;
  if (!cfg.lemma_exceptions.empty()) {
    require_file(cfg.lemma_exceptions, "lemma exception table");
    lem.load_exceptions(cfg.lemma_exceptions);
  }
  return lem;
}

void save_embedding(const embed::Embedding& e, const fs::path& path) {
  artifacts::publish_atomic(path, [&](const fs::path& tmp) {
    e.save(tmp.string());
    std::error_code ec;
    fs::rename(tmp.string() + ".ngrams", path.string() + ".ngrams", ec);
    if (ec) fail(ErrorKind::Io, "cannot publish " + path.string() + ".ngrams");
  });
}

embed::Embedding load_embedding(const PipelineConfig& cfg, const char* name) {
  const fs::path p = artifact(cfg, name);
  require_file(p, std::string("embedding ") + name);
  return embed::Embedding::load(p.string());
}

std::vector<lexstats::LexemeStats> read_counts(const PipelineConfig& cfg) {
  const fs::path p = artifact(cfg, "counts.tsv");
  require_file(p, "lexeme counts");
  return lexstats::read_counts(p.string());
}

// Two-column key/value table.
void write_summary(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& rows) {
  artifacts::write_atomic(path, [&](std::ostream& os) {
    os << "key\tvalue\n";
    for (const auto& [k, v] : rows) os << k << '\t' << v << '\n';
  });
}

// ---------------------------------------------------------------- delineate

StageResult stage_delineate(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  require_file(cfg.registry, "outlet registry");
  require_file(cfg.profiles, "user profiles");
  require_file(cfg.tweets, "raw tweets");
  if (cfg.followers.empty()) fail(ErrorKind::MissingInput, "follower listings not configured");
  for (const auto& f : cfg.followers) require_file(f, "follower listing");
  r.inputs = {cfg.registry, cfg.profiles, cfg.tweets};
  for (const auto& f : cfg.followers) r.inputs.emplace_back(f);

  const auto registry = delineate::OutletRegistry::load(cfg.registry);
  registry.validate_poles();
  delineate::TallyOptions opts;
  opts.memory_budget_users = cfg.tally_memory_users;
  const fs::path tmp = artifact(cfg, "tmp");
  fs::create_directories(tmp);
  opts.temp_dir = tmp.string();

  std::map<std::string, delineate::GroupAssignment> assignments;
  const auto summary = delineate::stream_tally_to(
      cfg.followers, registry,
      [&](const std::string& user, const delineate::CategoryCounts& counts) {
        assignments.emplace(user, delineate::assign_from_counts(user, counts));
      },
      opts);
  fs::remove_all(tmp);

  std::size_t n_left = 0, n_right = 0, n_excluded = 0;
  for (const auto& [u, a] : assignments) {
    if (a.group == delineate::Group::Left) ++n_left;
    else if (a.group == delineate::Group::Right) ++n_right;
    else ++n_excluded;
  }
  log("delineate: " + std::to_string(n_left) + " left, " + std::to_string(n_right) + " right, " +
      std::to_string(n_excluded) + " excluded");

  std::set<std::string> admitted;
  std::map<std::string, std::size_t> rule_failures;
  for (const auto& p : delineate::load_profiles(cfg.profiles)) {
    const auto d = delineate::admit_user(p, cfg.window, cfg.admission);
    if (d.admitted)
      admitted.insert(p.user_id);
    else
      for (const auto& rule : d.failed_rules) ++rule_failures[rule];
  }

  std::map<std::string, std::vector<TweetRecord>> by_user;
  std::size_t tweets_in = 0, malformed = 0, outside = 0, unassigned = 0;
  for_each_record(
      cfg.tweets,
      [&](TweetRecord&& rec) {
        ++tweets_in;
        const auto it = assignments.find(rec.user);
        if (it == assignments.end() || it->second.group == delineate::Group::Excluded || !admitted.count(rec.user)) {
          ++unassigned;
          return;
        }
        const auto date = parse_date(rec.ts);
        if (!date || !cfg.window.contains(*date)) {
          ++outside;
          return;
        }
        rec.side = it->second.group == delineate::Group::Left ? Side::Left : Side::Right;
        by_user[rec.user].push_back(std::move(rec));
      },
      [&](std::size_t, const std::string&) { ++malformed; });

  std::vector<TweetRecord> corpus;
  for (auto& [user, tweets] : by_user) {
    auto kept = delineate::cap_tweets(std::move(tweets), cfg.tweet_cap);
    for (auto& t : kept) corpus.push_back(std::move(t));
  }
  std::sort(corpus.begin(), corpus.end(),
            [](const TweetRecord& a, const TweetRecord& b) { return delineate::tweet_id_less(a.id, b.id); });

  const fs::path assign_path = artifact(cfg, "assignments.tsv");
  artifacts::write_atomic(assign_path, [&](std::ostream& os) {
    os << "user_id\tgroup\tleft_count\tright_pole_count\tother_count\n";
    for (const auto& [u, a] : assignments) os << delineate::format_assignment(a) << '\n';
  });
  const fs::path corpus_path = artifact(cfg, "corpus.jsonl");
  artifacts::write_atomic(corpus_path, [&](std::ostream& os) { write_corpus(os, corpus); });

  std::vector<std::pair<std::string, std::string>> rows = {
      {"follower_records", std::to_string(summary.records)},
      {"follower_malformed", std::to_string(summary.malformed)},
      {"follower_unknown_account", std::to_string(summary.unknown_account)},
      {"users_tallied", std::to_string(summary.users)},
      {"users_left", std::to_string(n_left)},
      {"users_right", std::to_string(n_right)},
      {"users_excluded", std::to_string(n_excluded)},
      {"users_admitted", std::to_string(admitted.size())},
      {"tweets_read", std::to_string(tweets_in)},
      {"tweets_malformed", std::to_string(malformed)},
      {"tweets_unassigned", std::to_string(unassigned)},
      {"tweets_outside_window", std::to_string(outside)},
      {"tweets_kept", std::to_string(corpus.size())},
  };
  for (const auto& [rule, n] : rule_failures) rows.emplace_back("rejected_" + rule, std::to_string(n));
  const fs::path summary_path = artifact(cfg, "delineate_summary.tsv");
  write_summary(summary_path, rows);

  r.outputs = {assign_path, corpus_path, summary_path};
  r.notes["tweets_kept"] = std::to_string(corpus.size());
  return r;
}

// -------------------------------------------------------------------- clean

StageResult stage_clean(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const fs::path in = artifact(cfg, "corpus.jsonl");
  require_file(in, "delineated corpus");
  r.inputs = {in};
  const textprep::CleanRuleSet rules;
  const auto lem = make_lemmatizer(cfg);
  std::size_t excluded = 0, empty = 0, kept = 0;
  const fs::path out = artifact(cfg, "cleaned.jsonl");
  artifacts::write_atomic(out, [&](std::ostream& os) {
    for_each_record(in.string(), [&](TweetRecord&& rec) {
      if (textprep::is_excluded_tweet(rec, rules)) {
        ++excluded;
        return;
      }
      auto tokens = textprep::lexemes(rec.text, rules, lem);
      if (tokens.empty()) {
        ++empty;
        return;
      }
      rec.raw = rec.text;
      rec.text = textprep::clean_text(rec.text, rules);
      rec.tokens = std::move(tokens);
      os << serialize_record(rec) << '\n';
      ++kept;
    });
  });
  log("clean: kept " + std::to_string(kept) + ", excluded " + std::to_string(excluded) + ", empty " +
      std::to_string(empty));
  r.outputs = {out};
  r.notes["kept"] = std::to_string(kept);
  r.notes["excluded"] = std::to_string(excluded);
  r.notes["empty_after_cleaning"] = std::to_string(empty);
  return r;
}

// -------------------------------------------------------------------- stats

StageResult stage_stats(const PipelineConfig& cfg, const LogFn&) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  r.inputs = {artifact(cfg, "cleaned.jsonl")};
  // Raw side: whitespace tokens of the original text, untouched.
  std::map<std::string, textprep::CorpusStatsAccumulator> raw, clean;
  for (const auto& rec : corpus) {
    const std::string side = to_string(rec.side);
    std::vector<std::string> raw_tokens;
    std::istringstream ss(rec.raw ? *rec.raw : rec.text);
    for (std::string t; ss >> t;) raw_tokens.push_back(t);
    for (const std::string& scope : {std::string("all"), side}) {
      raw[scope].add(rec.user, raw_tokens);
      clean[scope].add(rec.user, rec.tokens ? *rec.tokens : std::vector<std::string>{});
    }
  }
  const fs::path out = artifact(cfg, "corpus_stats.tsv");
  artifacts::write_atomic(out, [&](std::ostream& os) {
    os << "scope\tstage\ttokens\ttypes\tttr\ttweets\tusers\n";
    for (const auto& scope : {"all", "left", "right"}) {
      for (const auto& [stage, table] : {std::pair{"raw", &raw}, std::pair{"clean", &clean}}) {
        auto it = table->find(scope);
        const auto s = it == table->end() ? textprep::CorpusStats{} : it->second.result();
        os << scope << '\t' << stage << '\t' << s.token_count << '\t' << s.type_count << '\t'
           << (s.empty ? std::string("NA") : format_number(s.ttr)) << '\t' << s.tweet_count << '\t' << s.user_count
           << '\n';
      }
    }
  });
  r.outputs = {out};
  return r;
}

// --------------------------------------------------------------------- freq

StageResult stage_freq(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  r.inputs = {artifact(cfg, "cleaned.jsonl")};
  lexstats::Counter counter;
  for (const auto& rec : corpus)
    if (rec.tokens && (rec.side == Side::Left || rec.side == Side::Right)) counter.add(rec.side, rec.user, *rec.tokens);
  if (counter.tweets(Side::Left) == 0 || counter.tweets(Side::Right) == 0)
    fail(ErrorKind::Runtime, "freq: one side has no tweets");
  const auto table = counter.table();
  const auto ranked = lexstats::fold_ranking(table, cfg.freq);
  const fs::path counts = artifact(cfg, "counts.tsv");
  const fs::path fold = artifact(cfg, "fold.tsv");
  artifacts::write_atomic(counts, [&](std::ostream& os) { lexstats::write_counts(os, table); });
  artifacts::write_atomic(fold, [&](std::ostream& os) { lexstats::write_fold_table(os, ranked); });
  log("freq: " + std::to_string(table.size()) + " lexemes, " + std::to_string(ranked.size()) + " eligible");
  r.outputs = {counts, fold};
  r.notes["eligible"] = std::to_string(ranked.size());
  return r;
}

// ---------------------------------------------------------------- sentiment

StageResult stage_sentiment(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  const fs::path lex = data_file(cfg.lexicon, "vader_lexicon.txt");
  const fs::path emoji = data_file(cfg.emoji_lexicon, "emoji_utf8_lexicon.txt");
  require_file(lex, "sentiment lexicon");
  r.inputs = {artifact(cfg, "cleaned.jsonl"), lex};
  std::string emoji_path;
  if (fs::exists(emoji)) {
    emoji_path = emoji.string();
    r.inputs.push_back(emoji);
  }
  const auto scfg = sentiment::SentimentConfig::from_files(lex.string(), emoji_path);
  const auto rules = textprep::sentiment_channel_rules();

  std::map<std::string, std::vector<sentiment::Score>> per_user;
  std::map<std::string, Side> user_side;
  std::vector<sentiment::DatedScore> dated;
  for (const auto& rec : corpus) {
    if (rec.side != Side::Left && rec.side != Side::Right) continue;
    const auto score = sentiment::score_text(textprep::clean_text(rec.raw ? *rec.raw : rec.text, rules), scfg);
    per_user[rec.user].push_back(score);
    user_side[rec.user] = rec.side;
    if (const auto d = parse_date(rec.ts)) dated.push_back({*d, rec.side, score});
  }

  std::vector<sentiment::UserMean> means;
  const fs::path users_path = artifact(cfg, "sentiment_users.tsv");
  artifacts::write_atomic(users_path, [&](std::ostream& os) {
    os << "user\tside\tmean\tscored\ttotal\n";
    for (const auto& [user, scores] : per_user) {
      const auto p = sentiment::user_sentiment_profile(scores);
      os << user << '\t' << to_string(user_side[user]) << '\t' << (p.defined() ? format_number(p.mean) : "NA")
         << '\t' << p.scored << '\t' << p.total << '\n';
      if (p.defined()) means.push_back({user, user_side[user], p.mean, static_cast<double>(p.scored)});
    }
  });

  const auto gran = sentiment::parse_granularity(cfg.granularity);
  const auto series = sentiment::side_series(dated, gran.value_or(sentiment::Granularity::Weekly));
  const fs::path series_path = artifact(cfg, "sentiment_series.tsv");
  artifacts::write_atomic(series_path, [&](std::ostream& os) { sentiment::write_series(os, series); });

  sentiment::PermutationOptions perm{cfg.permutations, cfg.seed_for("sentiment")};
  const auto effect = sentiment::side_effect(means, perm);
  std::optional<sentiment::RegressionResult> pop, pop_side;
  if (!cfg.profiles.empty() && fs::exists(cfg.profiles)) {
    r.inputs.emplace_back(cfg.profiles);
    std::unordered_map<std::string, std::int64_t> followers;
    for (const auto& p : delineate::load_profiles(cfg.profiles)) followers[p.user_id] = p.followers_count;
    std::vector<sentiment::PopularityPoint> points;
    for (const auto& m : means) {
      const auto it = followers.find(m.user);
      if (it != followers.end()) points.push_back({it->second, m.mean, m.side});
    }
    if (points.size() >= 4) {
      pop = sentiment::popularity_regression(points, false, perm);
      pop_side = sentiment::popularity_regression(points, true, perm);
    }
  }
  const fs::path reg_path = artifact(cfg, "sentiment_regression.tsv");
  artifacts::write_atomic(reg_path, [&](std::ostream& os) {
    sentiment::write_regression(os, "side_effect", effect, true);
    if (pop) sentiment::write_regression(os, "popularity", *pop, false);
    if (pop_side) sentiment::write_regression(os, "popularity_side", *pop_side, false);
  });
  log("sentiment: right minus left " + format_fixed(effect.slope, 4) + ", p " + format_number(effect.p_value));
  r.outputs = {users_path, series_path, reg_path};
  r.notes["side_effect"] = format_number(effect.slope);
  return r;
}

// -------------------------------------------------------------------- embed

std::vector<embed::EmbeddingParams> tune_grid(const PipelineConfig& cfg) {
  std::vector<embed::EmbeddingParams> grid{cfg.embedding};
  auto expand = [&](const std::vector<int>& values, auto setter) {
    if (values.empty()) return;
    std::vector<embed::EmbeddingParams> next;
    for (const auto& p : grid)
      for (int v : values) {
        auto q = p;
        setter(q, v);
        next.push_back(q);
      }
    grid.swap(next);
  };
  expand(cfg.tune_dim, [](embed::EmbeddingParams& p, int v) { p.dim = v; });
  expand(cfg.tune_window, [](embed::EmbeddingParams& p, int v) { p.window = v; });
  expand(cfg.tune_epochs, [](embed::EmbeddingParams& p, int v) { p.epochs = v; });
  expand(cfg.tune_min_count, [](embed::EmbeddingParams& p, int v) { p.min_count = v; });
  return grid;
}

StageResult stage_embed(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  r.inputs = {artifact(cfg, "cleaned.jsonl")};
  embed::Corpus left, right, pooled;
  for (const auto& rec : corpus) {
    if (!rec.tokens) continue;
    if (rec.side == Side::Left) left.push_back(*rec.tokens);
    if (rec.side == Side::Right) right.push_back(*rec.tokens);
    pooled.push_back(*rec.tokens);
  }
  if (left.empty() || right.empty()) fail(ErrorKind::Runtime, "embed: one side has no tweets");

  embed::EmbeddingParams params = cfg.embedding;
  const bool tuning = !cfg.tune_dim.empty() || !cfg.tune_window.empty() || !cfg.tune_epochs.empty() ||
                      !cfg.tune_min_count.empty();
  if (tuning) {
    const auto counts = read_counts(cfg);
    r.inputs.push_back(artifact(cfg, "counts.tsv"));
    const auto grid = tune_grid(cfg);
    log("embed: tuning over " + std::to_string(grid.size()) + " settings");
    const auto result = embed::tune(grid, left, right, counts, cfg.embed_profile, {cfg.center});
    const fs::path trace = artifact(cfg, "tune_trace.tsv");
    artifacts::write_atomic(trace, [&](std::ostream& os) { embed::write_tune_trace(os, result); });
    r.outputs.push_back(trace);
    if (!result.best) fail(ErrorKind::Runtime, "embed: no tuning point produced an alignment");
    params = result.trace[*result.best].params;
    r.notes["tuned_params"] = params.describe();
  }

  struct Job {
    const char* name;
    const embed::Corpus* corpus;
  };
  for (const Job& job : {Job{"embed_left.vec", &left}, Job{"embed_right.vec", &right}, Job{"embed_pooled.vec", &pooled}}) {
    embed::TrainStats stats;
    const auto e = embed::train(*job.corpus, params, &stats);
    const fs::path out = artifact(cfg, job.name);
    save_embedding(e, out);
    log(std::string("embed: ") + job.name + " vocab " + std::to_string(stats.vocab) + ", tokens " +
        std::to_string(stats.tokens));
    r.outputs.push_back(out);
    r.outputs.push_back(out.string() + ".ngrams");
  }
  r.notes["params"] = params.describe();
  return r;
}

// ------------------------------------------------------------ align/diverge

embed::AlignedPair aligned_pair(const PipelineConfig& cfg, StageResult& r) {
  const auto left = load_embedding(cfg, "embed_left.vec");
  const auto right = load_embedding(cfg, "embed_right.vec");
  const auto counts = read_counts(cfg);
  r.inputs = {artifact(cfg, "embed_left.vec"), artifact(cfg, "embed_right.vec"), artifact(cfg, "counts.tsv")};
  const auto vocab = embed::shared_vocabulary(left, right, counts, cfg.embed_profile);
  if (vocab.size() < static_cast<std::size_t>(left.dim()))
    fail(ErrorKind::Runtime, "align: only " + std::to_string(vocab.size()) + " shared lexemes pass the " +
                                 cfg.embed_profile.name + " profile; need at least the dimension (" +
                                 std::to_string(left.dim()) + ")");
  return embed::align(left, right, vocab, {cfg.center});
}

StageResult stage_align(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto pair = aligned_pair(cfg, r);
  const double residual = linalg::orthogonality_residual(pair.rotation);
  const fs::path summary = artifact(cfg, "alignment.tsv");
  write_summary(summary, {{"shared_vocab", std::to_string(pair.shared_vocab.size())},
                          {"mean_self_similarity", format_number(pair.mean_self_similarity)},
                          {"orthogonality_residual", format_number(residual)},
                          {"centered", cfg.center ? "true" : "false"}});
  const fs::path rotation = artifact(cfg, "rotation.tsv");
  artifacts::write_atomic(rotation, [&](std::ostream& os) {
    for (std::size_t i = 0; i < pair.rotation.rows(); ++i) {
      for (std::size_t j = 0; j < pair.rotation.cols(); ++j) os << (j ? "\t" : "") << format_number(pair.rotation(i, j));
      os << '\n';
    }
  });
  log("align: " + std::to_string(pair.shared_vocab.size()) + " shared lexemes, self-similarity " +
      format_fixed(pair.mean_self_similarity, 4));
  r.outputs = {summary, rotation};
  r.notes["mean_self_similarity"] = format_number(pair.mean_self_similarity);
  return r;
}

StageResult stage_diverge(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto pair = aligned_pair(cfg, r);
  const auto table = embed::divergence_table(pair, read_counts(cfg));
  const fs::path out = artifact(cfg, "divergence.tsv");
  artifacts::write_atomic(out, [&](std::ostream& os) { embed::write_divergence(os, table); });
  if (!table.empty()) log("diverge: top lexeme " + table.front().lexeme + " at " + format_fixed(table.front().distance, 4));
  r.outputs = {out};
  return r;
}

// ---------------------------------------------------------- topics/classify

struct Docs {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  std::vector<Side> sides;
  std::vector<const std::vector<std::string>*> tokens;
};

Docs doc_vectors(const PipelineConfig& cfg, const std::vector<TweetRecord>& corpus, StageResult& r) {
  const auto e = load_embedding(cfg, "embed_pooled.vec");
  r.inputs.push_back(artifact(cfg, "embed_pooled.vec"));
  std::vector<std::vector<std::string>> documents;
  for (const auto& rec : corpus) documents.push_back(rec.tokens ? *rec.tokens : std::vector<std::string>{});
  const auto idf = topics::IdfTable::build(documents);
  Docs d;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus[i];
    if (!rec.tokens || (rec.side != Side::Left && rec.side != Side::Right)) continue;
    auto v = topics::doc_vector(*rec.tokens, e, idf);
    if (v.degenerate) continue;
    d.ids.push_back(rec.id);
    d.vectors.push_back(std::move(v.vector));
    d.sides.push_back(rec.side);
    d.tokens.push_back(&*rec.tokens);
  }
  return d;
}

StageResult stage_topics(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  r.inputs.push_back(artifact(cfg, "cleaned.jsonl"));
  Docs all = doc_vectors(cfg, corpus, r);
  if (all.ids.size() < 3) fail(ErrorKind::Runtime, "topics: fewer than 3 usable documents");

  // Seeded subsample for the quadratic clustering step, kept in id order.
  std::vector<std::size_t> pick(all.ids.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  if (pick.size() > cfg.map_max_docs) {
    Rng rng(cfg.seed_for("topics"));
    rng.shuffle(pick);
    pick.resize(cfg.map_max_docs);
    std::sort(pick.begin(), pick.end());
  }
  std::vector<std::vector<double>> points;
  for (std::size_t i : pick) points.push_back(all.vectors[i]);

  const double eps = cfg.dbscan_eps > 0.0 ? cfg.dbscan_eps : topics::suggest_eps(points, 4);
  const auto clustering = topics::dbscan(points, eps, cfg.dbscan_min_pts);
  const auto proj = topics::project_2d(points);

  std::vector<std::vector<std::string>> cluster_docs(static_cast<std::size_t>(clustering.clusters));
  std::vector<std::size_t> members(cluster_docs.size(), 0), right_members(cluster_docs.size(), 0);
  for (std::size_t k = 0; k < pick.size(); ++k) {
    const int c = clustering.labels[k];
    if (c == topics::kNoise) continue;
    auto& doc = cluster_docs[static_cast<std::size_t>(c)];
    doc.insert(doc.end(), all.tokens[pick[k]]->begin(), all.tokens[pick[k]]->end());
    ++members[static_cast<std::size_t>(c)];
    if (all.sides[pick[k]] == Side::Right) ++right_members[static_cast<std::size_t>(c)];
  }
  const auto keywords = cluster_docs.empty() ? std::vector<std::vector<topics::Keyword>>{}
                                             : topics::cluster_keywords(cluster_docs, cfg.keywords);

  const fs::path map_path = artifact(cfg, "topic_map.tsv");
  artifacts::write_atomic(map_path, [&](std::ostream& os) {
    os << "tweet_id\tx\ty\tside\tcluster\n";
    for (std::size_t k = 0; k < pick.size(); ++k) {
      const int c = clustering.labels[k];
      os << all.ids[pick[k]] << '\t' << format_number(proj.coords[k][0]) << '\t' << format_number(proj.coords[k][1])
         << '\t' << to_string(all.sides[pick[k]]) << '\t' << (c == topics::kNoise ? std::string("noise") : std::to_string(c))
         << '\n';
    }
  });
  const fs::path kw_path = artifact(cfg, "topic_keywords.tsv");
  artifacts::write_atomic(kw_path, [&](std::ostream& os) {
    os << "cluster\trank\tterm\tscore\tred_share\n";
    for (std::size_t c = 0; c < keywords.size(); ++c) {
      const double red = members[c] ? static_cast<double>(right_members[c]) / static_cast<double>(members[c]) : 0.0;
      for (std::size_t k = 0; k < keywords[c].size(); ++k)
        os << c << '\t' << (k + 1) << '\t' << keywords[c][k].term << '\t' << format_number(keywords[c][k].score)
           << '\t' << format_number(red) << '\n';
    }
  });
  log("topics: " + std::to_string(clustering.clusters) + " clusters over " + std::to_string(points.size()) +
      " documents, eps " + format_fixed(eps, 4));
  r.outputs = {map_path, kw_path};
  r.notes["eps"] = format_number(eps);
  r.notes["clusters"] = std::to_string(clustering.clusters);
  return r;
}

StageResult stage_classify(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  r.inputs.push_back(artifact(cfg, "cleaned.jsonl"));
  const Docs d = doc_vectors(cfg, corpus, r);
  topics::EvaluateOptions opts;
  opts.bootstrap = cfg.bootstrap;
  opts.train_fraction = cfg.train_fraction;
  opts.seed = cfg.seed_for("classify");
  opts.ridge_scale = cfg.ridge_scale;
  const auto e = topics::evaluate(d.vectors, d.sides, opts);
  const fs::path out = artifact(cfg, "classify.tsv");
  artifacts::write_atomic(out, [&](std::ostream& os) { topics::write_evaluation(os, e); });
  log("classify: accuracy " + format_fixed(e.accuracy, 3) + ", kappa " + format_fixed(e.kappa, 3));
  r.outputs = {out};
  r.notes["accuracy"] = format_number(e.accuracy);
  r.notes["kappa"] = format_number(e.kappa);
  return r;
}

// ----------------------------------------------------------------- annotate

bool word_like(const std::string& lexeme) {
  return !lexeme.empty() && std::all_of(lexeme.begin(), lexeme.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

StageResult stage_annotate(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto corpus = read_cleaned(cfg);
  r.inputs.push_back(artifact(cfg, "cleaned.jsonl"));
  std::vector<std::string> candidates = cfg.targets;
  const bool explicit_targets = !candidates.empty();
  if (!explicit_targets) {
    const fs::path div = artifact(cfg, "divergence.tsv");
    require_file(div, "divergence table");
    r.inputs.push_back(div);
    for (const auto& row : embed::read_divergence(div.string()))
      if (word_like(row.lexeme)) candidates.push_back(row.lexeme);
  }

  const std::uint64_t seed = cfg.seed_for("annotate");
  std::vector<annotate::TargetPassages> chosen;
  std::vector<std::string> skipped;
  for (const auto& target : candidates) {
    if (chosen.size() >= cfg.n_targets) break;
    try {
      annotate::TargetPassages tp;
      tp.target = target;
      tp.left = annotate::sample_passages(corpus, target, Side::Left, 20, seed);
      tp.right = annotate::sample_passages(corpus, target, Side::Right, 20, seed);
      chosen.push_back(std::move(tp));
    } catch (const Error& e) {
      if (explicit_targets) throw;
      skipped.push_back(target);
    }
  }
  if (chosen.empty()) fail(ErrorKind::Runtime, "annotate: no target has 20 qualifying passages per side");
  if (chosen.size() < cfg.n_targets)
    log("annotate: only " + std::to_string(chosen.size()) + " of " + std::to_string(cfg.n_targets) +
        " targets have enough passages");

  const auto schedule = annotate::build_session(cfg.session, chosen, seed);
  const fs::path dir = session_dir(cfg);
  annotate::Session::create(dir, schedule);
  log("annotate: session " + cfg.session + " with " + std::to_string(schedule.pairs.size()) + " pairs");
  r.outputs = {dir / "schedule.json", dir / "events.jsonl"};
  std::string names;
  for (const auto& t : schedule.targets) names += (names.empty() ? "" : ",") + t;
  r.notes["targets"] = names;
  r.notes["skipped_candidates"] = std::to_string(skipped.size());
  return r;
}

// ------------------------------------------------------------------- report

struct Svg {
  double width = 640, height = 480, margin = 50;
  std::string body;
};

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct PlotPoint {
  double x, y;
  std::string label;
};

std::string scatter_svg(const std::vector<PlotPoint>& pts, const std::string& xlabel, const std::string& ylabel,
                        std::size_t labelled) {
  const double w = 640, h = 480, m = 56;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts[0].x;
    y0 = y1 = pts[0].y;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
  }
  auto sx = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto sy = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 16 << "\" text-anchor=\"middle\">" << escape_xml(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << h / 2 << ")\">"
     << escape_xml(ylabel) << "</text>\n";
  os << "<text x=\"" << m << "\" y=\"" << h - m + 14 << "\">" << format_fixed(x0, 2) << "</text>\n";
  os << "<text x=\"" << w - m << "\" y=\"" << h - m + 14 << "\" text-anchor=\"end\">" << format_fixed(x1, 2) << "</text>\n";
  os << "<text x=\"" << m - 4 << "\" y=\"" << h - m << "\" text-anchor=\"end\">" << format_fixed(y0, 2) << "</text>\n";
  os << "<text x=\"" << m - 4 << "\" y=\"" << m + 4 << "\" text-anchor=\"end\">" << format_fixed(y1, 2) << "</text>\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const char* colour = p.x < 0 ? "#2b6cb0" : "#c53030";
    os << "<circle cx=\"" << format_fixed(sx(p.x), 2) << "\" cy=\"" << format_fixed(sy(p.y), 2)
       << "\" r=\"2.5\" fill=\"" << colour << "\" fill-opacity=\"0.6\"/>\n";
    if (i < labelled)
      os << "<text x=\"" << format_fixed(sx(p.x) + 4, 2) << "\" y=\"" << format_fixed(sy(p.y) - 3, 2) << "\">"
         << escape_xml(p.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

StageResult stage_report(const PipelineConfig& cfg, const LogFn& log) {
  StageResult r;
  const auto counts = read_counts(cfg);
  r.inputs.push_back(artifact(cfg, "counts.tsv"));
  const fs::path div_path = artifact(cfg, "divergence.tsv");
  require_file(div_path, "divergence table");
  r.inputs.push_back(div_path);
  const auto divergence = embed::read_divergence(div_path.string());
  const auto ranked = lexstats::fold_ranking(counts, cfg.freq);

  std::map<std::string, annotate::TargetScores> durel;
  const fs::path scores_path = session_dir(cfg) / "scores.tsv";
  if (fs::exists(scores_path)) {
    r.inputs.push_back(scores_path);
    std::istringstream in(artifacts::read_file(scores_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("target\t", 0) == 0) continue;
      const auto f = split_fields(line);
      if (f.size() < 7) continue;
      annotate::TargetScores s;
      s.target = std::string(f[0]);
      s.divergence = parse_number(f[1]).value_or(NAN);
      s.polysemy_left = parse_number(f[3]).value_or(NAN);
      s.polysemy_right = parse_number(f[5]).value_or(NAN);
      durel[s.target] = s;
    }
  }

  struct Row {
    std::optional<double> fold, distance;
    double user_share = 0.0;
  };
  std::map<std::string, Row> rows;
  for (const auto& s : ranked) {
    auto& row = rows[s.lexeme];
    row.fold = lexstats::log2_fold(s.rate_left, s.rate_right);
    row.user_share = s.user_share;
  }
  for (const auto& d : divergence) {
    auto& row = rows[d.lexeme];
    row.distance = d.distance;
    row.user_share = d.user_share;
  }
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  const fs::path report = artifact(cfg, "report.tsv");
  artifacts::write_atomic(report, [&](std::ostream& os) {
    os << "lexeme\tlog2_fold\tuser_share\tcosine_distance\tdurel_divergence\tpolysemy_left\tpolysemy_right\n";
    for (const auto& [lexeme, row] : rows) {
      const auto it = durel.find(lexeme);
      os << lexeme << '\t' << opt(row.fold) << '\t' << format_number(row.user_share) << '\t' << opt(row.distance)
         << '\t' << (it == durel.end() ? "NA" : format_number(it->second.divergence)) << '\t'
         << (it == durel.end() ? "NA" : format_number(it->second.polysemy_left)) << '\t'
         << (it == durel.end() ? "NA" : format_number(it->second.polysemy_right)) << '\n';
    }
  });

  std::vector<PlotPoint> freq_pts, sem_pts;
  for (const auto& s : ranked)
    freq_pts.push_back({lexstats::log2_fold(s.rate_left, s.rate_right), s.user_share * 100.0, s.lexeme});
  for (const auto& d : divergence) sem_pts.push_back({d.distance, d.user_share * 100.0, d.lexeme});
  const fs::path fig_freq = artifact(cfg, "fig_frequency.svg");
  const fs::path fig_sem = artifact(cfg, "fig_semantic.svg");
  artifacts::write_file_atomic(fig_freq, scatter_svg(freq_pts, "log2 fold (right / left)", "% of users", 15));
  artifacts::write_file_atomic(fig_sem, scatter_svg(sem_pts, "cosine distance", "% of users", 15));
  log("report: " + std::to_string(rows.size()) + " lexemes");
  r.outputs = {report, fig_freq, fig_sem};
  return r;
}

using StageFn = StageResult (*)(const PipelineConfig&, const LogFn&);

const std::vector<std::pair<std::string, StageFn>>& stage_table() {
  static const std::vector<std::pair<std::string, StageFn>> table = {
      {"delineate", stage_delineate}, {"clean", stage_clean},     {"stats", stage_stats},
      {"freq", stage_freq},           {"sentiment", stage_sentiment}, {"embed", stage_embed},
      {"align", stage_align},         {"diverge", stage_diverge}, {"topics", stage_topics},
      {"classify", stage_classify},   {"annotate", stage_annotate}, {"report", stage_report}};
  return table;
}

void write_manifest(const std::string& command, const PipelineConfig& cfg, const StageResult& r, double seconds,
                    const std::string& started) {
  artifacts::Manifest m;
  m.command = command;
  m.version = version();
  m.config_hash = cfg.hash();
  m.seeds["master"] = cfg.seed;
  m.seeds["stage"] = cfg.seed_for(command);
  m.seeds["embed"] = cfg.embedding.seed;
  for (const auto& p : r.inputs) {
    m.inputs.push_back(p.string());
    if (fs::is_regular_file(p)) m.input_hashes[p.string()] = artifacts::file_sha256(p);
  }
  for (const auto& p : r.outputs) {
    m.outputs.push_back(p.string());
    if (fs::is_regular_file(p)) m.output_hashes[p.string()] = artifacts::file_sha256(p);
  }
  m.notes = r.notes;
  m.wall_seconds = seconds;
  m.started_at = started;
  artifacts::write_file_atomic(artifacts::manifest_path(cfg.workdir, command), m.to_json());
}

template <class Fn>
int guarded(const std::string& name, const LogFn& log, Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const std::exception& e) {
    log(name + ": error: " + e.what());
    return exit_code_for(e);
  }
}

std::vector<std::string> session_annotators(const annotate::Session& s, const std::vector<std::string>& given) {
  if (!given.empty()) return given;
  const auto set = s.annotators();
  if (set.empty()) fail(ErrorKind::State, "session has no ratings yet");
  return {set.begin(), set.end()};
}

}  // namespace

const std::vector<std::string>& stages() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, fn] : stage_table()) v.push_back(n);
    return v;
  }();
  return names;
}

bool is_stage(std::string_view name) {
  const auto& s = stages();
  return std::find(s.begin(), s.end(), name) != s.end();
}

fs::path artifact(const PipelineConfig& cfg, std::string_view name) { return fs::path(cfg.workdir) / std::string(name); }

fs::path session_dir(const PipelineConfig& cfg) { return fs::path(cfg.workdir) / "annotation" / cfg.session; }

StageResult run_stage(const std::string& stage, const PipelineConfig& cfg, const LogFn& log) {
  for (const auto& [name, fn] : stage_table())
    if (name == stage) return fn(cfg, log ? log : [](const std::string&) {});
  fail(ErrorKind::InvalidArgument, "unknown stage '" + stage + "'");
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    if (err->kind() == ErrorKind::MissingInput) return kMissingDependency;
    if (err->kind() == ErrorKind::InvalidArgument) return kUsage;
  }
  return kRuntimeFailure;
}

int run(const std::string& stage, const PipelineConfig& cfg, const LogFn& log_in) {
  const LogFn log = log_in ? log_in : [](const std::string&) {};
  if (!is_stage(stage)) {
    log("unknown stage '" + stage + "'");
    return kUsage;
  }
  return guarded(stage, log, [&] {
    fs::create_directories(cfg.workdir);
    artifacts::DirLock lock(cfg.workdir);
    artifacts::remove_stale_temps(cfg.workdir);
    const std::string started = annotate::now_timestamp();
    const auto t0 = std::chrono::steady_clock::now();
    const StageResult r = run_stage(stage, cfg, log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(stage, cfg, r, secs, started);
  });
}

int run_all(const PipelineConfig& cfg, const LogFn& log) {
  for (const auto& s : stages()) {
    const int code = run(s, cfg, log);
    if (code != kOk) return code;
  }
  return kOk;
}

int annotate_score(const PipelineConfig& cfg, const std::vector<std::string>& annotators, const LogFn& log) {
  return guarded("annotate score", log, [&] {
    artifacts::DirLock lock(cfg.workdir);
    const auto session = annotate::Session::open(session_dir(cfg));
    const auto who = session_annotators(session, annotators);
    const auto scores = annotate::session_scores(session.schedule(), session.ratings(), who);
    StageResult r;
    r.inputs = {session_dir(cfg) / "schedule.json", session_dir(cfg) / "events.jsonl"};
    const fs::path out = session_dir(cfg) / "scores.tsv";
    artifacts::write_atomic(out, [&](std::ostream& os) { annotate::write_scores(os, scores); });
    r.outputs = {out};
    std::string names;
    for (const auto& a : who) names += (names.empty() ? "" : ",") + a;
    r.notes["annotators"] = names;
    write_manifest("annotate-score", cfg, r, 0.0, annotate::now_timestamp());
    for (const auto& s : scores)
      log(s.target + ": divergence " + format_fixed(s.divergence, 3) + ", polysemy L " +
          format_fixed(s.polysemy_left, 3) + " R " + format_fixed(s.polysemy_right, 3));
  });
}

int annotate_agreement(const PipelineConfig& cfg, const std::vector<std::string>& annotators,
                       const std::vector<std::string>& only_targets, const LogFn& log) {
  return guarded("annotate agreement", log, [&] {
    artifacts::DirLock lock(cfg.workdir);
    const auto session = annotate::Session::open(session_dir(cfg));
    const auto who = session_annotators(session, annotators);
    if (who.size() < 2) fail(ErrorKind::InvalidArgument, "agreement needs at least two annotators");
    const auto rows = annotate::session_agreement(session, who, {only_targets.begin(), only_targets.end()});
    const fs::path out = session_dir(cfg) / "agreement.tsv";
    artifacts::write_atomic(out, [&](std::ostream& os) {
      os << "annotator_a\tannotator_b\tn\trho\n";
      for (const auto& row : rows)
        os << row.annotator_a << '\t' << row.annotator_b << '\t' << row.n << '\t'
           << (row.rho ? format_number(*row.rho) : std::string("NA")) << '\n';
    });
    StageResult r;
    r.inputs = {session_dir(cfg) / "events.jsonl"};
    r.outputs = {out};
    write_manifest("annotate-agreement", cfg, r, 0.0, annotate::now_timestamp());
    for (const auto& row : rows)
      log(row.annotator_a + " vs " + row.annotator_b + ": rho " +
          (row.rho ? format_fixed(*row.rho, 3) : std::string("undefined")) + " over " + std::to_string(row.n));
  });
}

int annotate_llm(const PipelineConfig& cfg, const LogFn& log) {
  return guarded("annotate llm", log, [&] {
    auto session = annotate::Session::open(session_dir(cfg));
    const std::string tmpl = llm::load_prompt_template(cfg.llm.prompt_path);
    llm::HttpChatClient client(cfg.llm);
    const auto summary = llm::rate_all(session, client, cfg.llm, tmpl);
    log("annotate llm: rated " + std::to_string(summary.rated) + ", failed " + std::to_string(summary.failed) +
        ", already done " + std::to_string(summary.skipped));
  });
}

std::string version() { return LEXDIV_VERSION_STRING; }

}  // namespace lexdiv::pipeline
