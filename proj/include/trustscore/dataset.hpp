// Feature rows, clipping and min-max normalization, labeled/test/pool
// splits, and dataset persistence.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "data_model.hpp"
#include "scoring.hpp"

namespace trust {

inline constexpr std::size_t kFeatureCount = 19;
inline constexpr int kSchemaVersion = 1;

using FeatureRow = std::array<double, kFeatureCount>;

// Column order of every feature row.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "followers_count",
    "friends_count",
    "statuses_count",
    "listed_count",
    "total_tweets",
    "retweet_ratio",
    "liked_ratio",
    "url_ratio",
    "hashtag_ratio",
    "mention_ratio",
    "original_content_ratio",
    "positive_count",
    "neutral_count",
    "negative_count",
    "sentiment_score",
    "tweet_credibility",
    "social_reputation",
    "retweet_hindex_plus_like_hindex",
    "influence_score",
};

// Features without a natural upper bound; only these are percentile clipped.
inline constexpr std::array<bool, kFeatureCount> kClippedFeatures = {
    true,  true,  true,  true,  true,                       // counts
    false, false, false, false, false, false,               // ratios
    true,  true,  true,                                     // sentiment tallies
    false, false,                                           // bounded scores
    true,  true,  true,                                     // reputation, h-sum, influence
};

inline std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kFeatureNames[i] == name) return i;
  return std::nullopt;
}

struct FeatureVector {
  std::string user_id;
  FeatureRow values{};
  std::optional<Label> label;

  bool operator==(const FeatureVector&) const = default;
};

using Matrix = std::vector<FeatureRow>;

namespace detail {

inline void require_both_classes(std::span<const FeatureVector> train, const char* who) {
  if (train.empty()) throw invalid_argument(std::string(who) + ": empty training set");
  bool has0 = false, has1 = false;
  for (const auto& v : train) {
    if (!v.label) throw invalid_argument(std::string(who) + ": unlabeled training example '" + v.user_id + "'");
    (*v.label == Label::trustworthy ? has1 : has0) = true;
  }
  if (!(has0 && has1))
    throw invalid_argument(std::string(who) + ": training set must contain both classes");
}

}  // namespace detail

inline FeatureRow feature_row(const ScoreCard& sc, const UserRecord& u) {
  return {static_cast<double>(u.followers_count),
          static_cast<double>(u.friends_count),
          static_cast<double>(u.statuses_count),
          static_cast<double>(u.listed_count),
          static_cast<double>(sc.basic.total_tweets),
          sc.basic.retweet_ratio,
          sc.basic.liked_ratio,
          sc.basic.url_ratio,
          sc.basic.hashtag_ratio,
          sc.basic.mention_ratio,
          sc.basic.original_content_ratio,
          static_cast<double>(sc.counts.positive),
          static_cast<double>(sc.counts.neutral),
          static_cast<double>(sc.counts.negative),
          sc.sentiment_score,
          sc.tweet_credibility,
          sc.social_reputation,
          static_cast<double>(sc.retweet_hindex + sc.like_hindex),
          sc.influence_score};
}

// One raw row per scorecard, in scorecard order.
inline std::vector<FeatureVector> assemble(std::span<const ScoreCard> scorecards,
                                           std::span<const UserRecord> users) {
  std::unordered_map<std::string_view, const UserRecord*> by_id;
  by_id.reserve(users.size());
  for (const auto& u : users) by_id.emplace(u.user_id, &u);
  std::vector<FeatureVector> out;
  out.reserve(scorecards.size());
  for (const auto& sc : scorecards) {
    auto it = by_id.find(sc.user_id);
    if (it == by_id.end())
      throw corpus_error("scorecard for unknown user '" + sc.user_id + "'");
    out.push_back({sc.user_id, feature_row(sc, *it->second), std::nullopt});
  }
  return out;
}

inline Matrix matrix_of(std::span<const FeatureVector> vs) {
  Matrix m;
  m.reserve(vs.size());
  for (const auto& v : vs) m.push_back(v.values);
  return m;
}

struct ClipBound {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const ClipBound&) const = default;
};

using ClipBounds = std::array<std::optional<ClipBound>, kFeatureCount>;

// Nearest-rank percentile of an ascending column: element ceil(p/100 * n)
// (1-based), clamped to [1, n].
inline double nearest_rank(std::span<const double> sorted, double pct) {
  const auto n = sorted.size();
  // pct * n is exact for integral inputs, so the ceiling never rounds up
  // spuriously.
  auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

inline ClipBounds fit_clip(const Matrix& m, double low_pct, double high_pct,
                           const std::array<bool, kFeatureCount>& clipped = kClippedFeatures) {
  if (m.empty()) throw invalid_argument("fit_clip: empty matrix");
  if (!(low_pct >= 0.0 && low_pct < high_pct && high_pct <= 100.0))
    throw invalid_argument("fit_clip: need 0 <= low < high <= 100");
  ClipBounds bounds{};
  std::vector<double> col(m.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!clipped[f]) continue;
    for (std::size_t r = 0; r < m.size(); ++r) col[r] = m[r][f];
    std::sort(col.begin(), col.end());
    bounds[f] = ClipBound{nearest_rank(col, low_pct), nearest_rank(col, high_pct)};
  }
  return bounds;
}

inline void clip_row(FeatureRow& row, const ClipBounds& bounds) {
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    if (bounds[f]) row[f] = std::clamp(row[f], bounds[f]->low, bounds[f]->high);
}

inline Matrix apply_clip(Matrix m, const ClipBounds& bounds) {
  for (auto& row : m) clip_row(row, bounds);
  return m;
}

struct MinMax {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const MinMax&) const = default;
};

using MinMaxParams = std::array<MinMax, kFeatureCount>;

// Constant features map to 0. Values outside the fitted range are clamped.
inline double scale_value(double x, const MinMax& mm) {
  const double span = mm.max - mm.min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((x - mm.min) / span, 0.0, 1.0);
}

inline MinMaxParams fit_min_max(const Matrix& m) {
  if (m.empty()) throw invalid_argument("min_max_normalize: empty matrix");
  MinMaxParams p;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    p[f] = {m[0][f], m[0][f]};
    for (const auto& row : m) {
      p[f].min = std::min(p[f].min, row[f]);
      p[f].max = std::max(p[f].max, row[f]);
    }
  }
  return p;
}

inline std::pair<Matrix, MinMaxParams> min_max_normalize(Matrix m) {
  auto p = fit_min_max(m);
  for (auto& row : m)
    for (std::size_t f = 0; f < kFeatureCount; ++f) row[f] = scale_value(row[f], p[f]);
  return {std::move(m), p};
}

struct NormalizationParams {
  double clip_low_pct = 1.0;
  double clip_high_pct = 99.0;
  ClipBounds clip{};
  MinMaxParams scale{};

  FeatureRow transform(FeatureRow row) const {
    clip_row(row, clip);
    for (std::size_t f = 0; f < kFeatureCount; ++f) row[f] = scale_value(row[f], scale[f]);
    return row;
  }

  bool operator==(const NormalizationParams&) const = default;
};

inline NormalizationParams fit_normalization(const Matrix& m, double low_pct = 1.0,
                                             double high_pct = 99.0) {
  NormalizationParams p;
  p.clip_low_pct = low_pct;
  p.clip_high_pct = high_pct;
  p.clip = fit_clip(m, low_pct, high_pct);
  p.scale = fit_min_max(apply_clip(m, p.clip));
  return p;
}

// Fits clip bounds and min-max on the full set, then transforms every row.
inline std::pair<std::vector<FeatureVector>, NormalizationParams> normalize_vectors(
    std::vector<FeatureVector> vs, double low_pct = 1.0, double high_pct = 99.0) {
  if (vs.empty()) throw invalid_argument("normalize_vectors: empty input");
  auto params = fit_normalization(matrix_of(vs), low_pct, high_pct);
  for (auto& v : vs) v.values = params.transform(v.values);
  return {std::move(vs), params};
}

struct SplitDataset {
  std::vector<FeatureVector> train_labeled;
  std::vector<FeatureVector> test_labeled;
  std::vector<FeatureVector> pool_unlabeled;
  NormalizationParams normalization;

  std::size_t size() const {
    return train_labeled.size() + test_labeled.size() + pool_unlabeled.size();
  }
  bool operator==(const SplitDataset&) const = default;
};

// Labeled vectors are shuffled with the seed and split train/test with
// round(labeled * test_fraction) test rows; the rest form the pool.
inline SplitDataset split(std::vector<FeatureVector> vectors,
                          const std::unordered_map<std::string, Label>& labels,
                          double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw invalid_argument("split: test_fraction must be in (0,1)");
  std::unordered_set<std::string_view> ids;
  ids.reserve(vectors.size());
  for (const auto& v : vectors) ids.insert(v.user_id);
  for (const auto& [id, _] : labels)
    if (!ids.count(id)) throw invalid_argument("split: labeled id '" + id + "' not in dataset");

  SplitDataset out;
  std::vector<FeatureVector> labeled;
  for (auto& v : vectors) {
    auto it = labels.find(v.user_id);
    if (it != labels.end()) {
      v.label = it->second;
      labeled.push_back(std::move(v));
    } else {
      v.label.reset();
      out.pool_unlabeled.push_back(std::move(v));
    }
  }
  const auto n = labeled.size();
  const auto n_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n)
    throw invalid_argument("split: test_fraction leaves an empty train or test partition");
  std::mt19937_64 rng(seed);
  portable_shuffle(labeled.begin(), labeled.end(), rng);
  out.test_labeled.assign(std::make_move_iterator(labeled.begin()),
                          std::make_move_iterator(labeled.begin() + static_cast<std::ptrdiff_t>(n_test)));
  out.train_labeled.assign(std::make_move_iterator(labeled.begin() + static_cast<std::ptrdiff_t>(n_test)),
                           std::make_move_iterator(labeled.end()));
  return out;
}

// Noisy linear threshold over a normalized feature row: trustworthy iff
// weights . x > threshold, then flipped with probability `noise` by a hash of
// (user_id, seed).
struct LabelRule {
  FeatureRow weights{};
  double threshold = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;

  bool fires(const FeatureRow& x) const {
    double s = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) s += weights[f] * x[f];
    return s > threshold;
  }

  bool flipped(std::string_view user_id) const {
    if (noise <= 0.0) return false;
    return unit_uniform(splitmix64(fnv1a(user_id) ^ splitmix64(seed))) < noise;
  }

  Label label(const FeatureVector& v) const {
    bool t = fires(v.values) != flipped(v.user_id);
    return t ? Label::trustworthy : Label::untrustworthy;
  }
};

// Default ground-truth rule: reputation, credibility and sentiment must
// jointly clear a bar.
inline LabelRule default_label_rule(double noise = 0.0, std::uint64_t seed = 0) {
  LabelRule r;
  r.weights[*feature_index("social_reputation")] = 1.0;
  r.weights[*feature_index("tweet_credibility")] = 1.0;
  r.weights[*feature_index("sentiment_score")] = 1.0;
  r.threshold = 1.55;
  r.noise = noise;
  r.seed = seed;
  return r;
}

struct SyntheticParams {
  LabelRule rule = default_label_rule();
  std::size_t min_tweets = 5;
  std::size_t max_tweets = 40;
  double engaged_fraction = 0.5;
  double clip_low_pct = 1.0;
  double clip_high_pct = 99.0;
};

struct SyntheticCorpus {
  Corpus corpus;
  std::unordered_map<std::string, Label> labels;
};

namespace detail {

inline const std::vector<std::string>& polar_words(bool positive) {
  static const auto words = [] {
    std::array<std::vector<std::string>, 2> w;
    for (const auto& e : kDefaultEntries) w[e.weight > 0.0 ? 1 : 0].emplace_back(e.token);
    for (auto& v : w) std::sort(v.begin(), v.end());
    return w;
  }();
  return words[positive ? 1 : 0];
}

inline constexpr const char* kFillerWords[] = {
    "today", "the", "vote", "council", "meeting", "policy", "bill", "debate", "budget",
    "office", "district", "report", "update", "session", "plan", "week", "city", "state",
};

struct Archetype {
  double log_followers_mu, log_friends_mu, log_statuses_mu, log_listed_mu;
  double retweet_lo, retweet_hi, like_lo, like_hi, url_lo, url_hi, tag_lo, tag_hi;
  double mention_lo, mention_hi, repost_lo, repost_hi, pos_lo, pos_hi, neg_lo, neg_hi;
};

inline constexpr Archetype kEngaged{7.0, 5.5, 8.0, 3.0,  0.45, 0.95, 0.55, 0.98, 0.15, 0.6,
                                    0.1, 0.6, 0.2,  0.7,  0.0,  0.35, 0.45, 0.8,  0.0,  0.1};
inline constexpr Archetype kLowQuality{3.5, 6.5, 7.0, 0.5, 0.0,  0.45, 0.05, 0.5,  0.2, 0.8,
                                       0.0, 0.5, 0.1, 0.6, 0.45, 0.95, 0.05, 0.35, 0.2, 0.55};

}  // namespace detail

// Synthetic corpus of eligible users drawn from two account archetypes.
// Labels come from params.rule applied to the normalized feature rows of the
// whole corpus (default lexicon, params' clip percentiles).
inline SyntheticCorpus generate_synthetic(std::size_t n_users, std::uint64_t seed,
                                          const SyntheticParams& params = {}) {
  SyntheticCorpus out;
  if (n_users == 0) {
    out.corpus = build_corpus({}, {});
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto lognormal_count = [&](double mu, double sigma) {
    return static_cast<std::int64_t>(std::floor(std::exp(mu + sigma * gauss(rng))));
  };
  auto engagement = [&](double p, double scale) -> std::int64_t {
    if (unit(rng) >= p) return 0;
    return 1 + static_cast<std::int64_t>(std::floor(-std::log(1.0 - unit(rng)) * scale));
  };

  std::vector<UserRecord> users;
  std::vector<TweetRecord> tweets;
  users.reserve(n_users);
  const auto& pos = detail::polar_words(true);
  const auto& neg = detail::polar_words(false);
  const auto n_filler = std::size(detail::kFillerWords);

  for (std::size_t i = 0; i < n_users; ++i) {
    const bool engaged = unit(rng) < params.engaged_fraction;
    const auto& a = engaged ? detail::kEngaged : detail::kLowQuality;
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "u%06zu", i);
    UserRecord u;
    u.user_id = idbuf;
    u.screen_name = "acct_" + std::to_string(i);
    u.followers_count = std::max<std::int64_t>(1, lognormal_count(a.log_followers_mu, 1.2));
    u.friends_count = std::max<std::int64_t>(1, lognormal_count(a.log_friends_mu, 1.0));
    u.statuses_count = lognormal_count(a.log_statuses_mu, 1.0);
    u.listed_count = lognormal_count(a.log_listed_mu, 1.0);
    u.is_protected = false;

    const double p_rt = uniform(a.retweet_lo, a.retweet_hi);
    const double p_like = uniform(a.like_lo, a.like_hi);
    const double p_url = uniform(a.url_lo, a.url_hi);
    const double p_tag = uniform(a.tag_lo, a.tag_hi);
    const double p_mention = uniform(a.mention_lo, a.mention_hi);
    const double p_repost = uniform(a.repost_lo, a.repost_hi);
    const double p_pos = uniform(a.pos_lo, a.pos_hi);
    const double p_neg = uniform(a.neg_lo, a.neg_hi);
    const double reach = 1.0 + std::log1p(static_cast<double>(u.followers_count));

    const auto n_tweets =
        params.min_tweets + uniform_index(rng, params.max_tweets - params.min_tweets + 1);
    for (std::size_t k = 0; k < n_tweets; ++k) {
      TweetRecord t;
      t.tweet_id = u.user_id + "-" + std::to_string(k);
      t.author_id = u.user_id;
      std::string text = detail::kFillerWords[uniform_index(rng, n_filler)];
      text += ' ';
      text += detail::kFillerWords[uniform_index(rng, n_filler)];
      const double r = unit(rng);
      if (r < p_pos)
        text += " " + pos[uniform_index(rng, pos.size())];
      else if (r < p_pos + p_neg)
        text += " " + neg[uniform_index(rng, neg.size())];
      t.is_retweet_of_other = unit(rng) < p_repost;
      t.retweet_count = engagement(p_rt, reach);
      t.like_count = engagement(p_like, 1.5 * reach);
      if (unit(rng) < p_url) text += " https://t.co/x" + std::to_string(k);
      if (unit(rng) < p_tag) text += " #topic" + std::to_string(uniform_index(rng, 20));
      if (unit(rng) < p_mention) text += " @acct_" + std::to_string(uniform_index(rng, n_users));
      t.text = std::move(text);
      t.url_count = scan_url_count(t.text);
      t.hashtag_count = scan_hashtag_count(t.text);
      t.mention_count = scan_mention_count(t.text);
      tweets.push_back(std::move(t));
    }
    users.push_back(std::move(u));
  }
  out.corpus = build_corpus(std::move(users), std::move(tweets));

  auto cards = score_corpus(out.corpus, default_lexicon());
  auto [normalized, _] = normalize_vectors(assemble(cards, out.corpus.users()),
                                           params.clip_low_pct, params.clip_high_pct);
  out.labels.reserve(normalized.size());
  for (const auto& v : normalized) out.labels.emplace(v.user_id, params.rule.label(v));
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: "<path>" holds a comma-separated table with header
// user_id,<19 feature names>,label (label 1/0, empty when unlabeled); rows
// are train, then test, then pool. "<path>.meta.json" carries the schema
// version, partition sizes and normalization parameters. Numbers use the
// shortest round-trip decimal form, so a load reproduces every bit.

inline std::string metadata_path(const std::string& path) { return path + ".meta.json"; }

namespace detail {

inline nlohmann::json normalization_to_json(const NormalizationParams& p) {
  nlohmann::json feats = nlohmann::json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    nlohmann::json e = {{"name", std::string(kFeatureNames[f])},
                        {"min", format_double(p.scale[f].min)},
                        {"max", format_double(p.scale[f].max)}};
    if (p.clip[f]) {
      e["clip_low"] = format_double(p.clip[f]->low);
      e["clip_high"] = format_double(p.clip[f]->high);
    } else {
      e["clip_low"] = nullptr;
      e["clip_high"] = nullptr;
    }
    feats.push_back(std::move(e));
  }
  return {{"clip_percentiles", {format_double(p.clip_low_pct), format_double(p.clip_high_pct)}},
          {"features", std::move(feats)}};
}

inline double json_double(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw format_error("expected a number");
  auto v = parse_double(j.get<std::string>());
  if (!v) throw format_error("bad number '" + j.get<std::string>() + "'");
  return *v;
}

inline NormalizationParams normalization_from_json(const nlohmann::json& j) {
  NormalizationParams p;
  const auto& pct = j.at("clip_percentiles");
  p.clip_low_pct = json_double(pct.at(0));
  p.clip_high_pct = json_double(pct.at(1));
  const auto& feats = j.at("features");
  if (!feats.is_array() || feats.size() != kFeatureCount)
    throw format_error("normalization: expected 19 feature entries");
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& e = feats[f];
    if (e.at("name").get<std::string>() != kFeatureNames[f])
      throw format_error("normalization: feature order mismatch at " + std::to_string(f));
    p.scale[f] = {json_double(e.at("min")), json_double(e.at("max"))};
    if (!e.at("clip_low").is_null())
      p.clip[f] = ClipBound{json_double(e.at("clip_low")), json_double(e.at("clip_high"))};
  }
  return p;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline std::vector<std::string> schema_names() {
  return {kFeatureNames.begin(), kFeatureNames.end()};
}

inline std::string dataset_header() {
  std::string h = "user_id";
  for (auto n : kFeatureNames) {
    h += ',';
    h += n;
  }
  h += ",label";
  return h;
}

inline void write_vector_row(std::ostream& out, const FeatureVector& v) {
  if (v.user_id.find_first_of(",\n\r") != std::string::npos)
    throw invalid_argument("user_id '" + v.user_id + "' cannot be stored in a table row");
  out << v.user_id;
  for (double x : v.values) out << ',' << format_double(x);
  out << ',';
  if (v.label) out << to_int(*v.label);
  out << '\n';
}

inline void save_dataset(const SplitDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write dataset '" + path + "'");
  out << dataset_header() << '\n';
  for (const auto* part : {&ds.train_labeled, &ds.test_labeled, &ds.pool_unlabeled})
    for (const auto& v : *part) write_vector_row(out, v);
  if (!out) throw error("write failed for '" + path + "'");

  nlohmann::json meta = {
      {"format", "trustscore-dataset"},
      {"version", kSchemaVersion},
      {"schema", schema_names()},
      {"partitions",
       {{"train", ds.train_labeled.size()},
        {"test", ds.test_labeled.size()},
        {"pool", ds.pool_unlabeled.size()}}},
      {"normalization", detail::normalization_to_json(ds.normalization)}};
  std::ofstream mo(metadata_path(path), std::ios::binary);
  if (!mo) throw error("cannot write metadata '" + metadata_path(path) + "'");
  mo << meta.dump(2) << '\n';
}

inline FeatureVector parse_vector_row(std::string_view line, std::size_t lineno) {
  auto cells = detail::split_csv(line);
  if (cells.size() != kFeatureCount + 2)
    throw format_error("dataset line " + std::to_string(lineno) + ": expected " +
                       std::to_string(kFeatureCount + 2) + " columns, got " +
                       std::to_string(cells.size()));
  FeatureVector v;
  v.user_id = std::string(cells[0]);
  if (v.user_id.empty()) throw format_error("dataset line " + std::to_string(lineno) + ": empty user_id");
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    auto x = parse_double(cells[f + 1]);
    if (!x) throw format_error("dataset line " + std::to_string(lineno) + ": bad number");
    v.values[f] = *x;
  }
  auto lab = cells.back();
  if (!lab.empty()) {
    auto l = parse_label(lab);
    if (!l) throw format_error("dataset line " + std::to_string(lineno) + ": bad label");
    v.label = *l;
  }
  return v;
}

inline SplitDataset load_dataset(const std::string& path) {
  std::ifstream mi(metadata_path(path), std::ios::binary);
  if (!mi) throw not_found("missing dataset metadata '" + metadata_path(path) + "'");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(mi);
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("dataset metadata: ") + e.what());
  }
  SplitDataset ds;
  std::size_t n_train = 0, n_test = 0, n_pool = 0;
  try {
    if (meta.at("format") != "trustscore-dataset") throw format_error("not a dataset metadata file");
    const int version = meta.at("version").get<int>();
    if (version != kSchemaVersion)
      throw version_error("dataset version " + std::to_string(version) + " unsupported (expected " +
                          std::to_string(kSchemaVersion) + ")");
    const auto& schema = meta.at("schema");
    if (schema.size() != kFeatureCount) throw format_error("schema must list 19 features");
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      if (schema[f].get<std::string>() != kFeatureNames[f]) throw format_error("schema mismatch");
    n_train = meta.at("partitions").at("train").get<std::size_t>();
    n_test = meta.at("partitions").at("test").get<std::size_t>();
    n_pool = meta.at("partitions").at("pool").get<std::size_t>();
    ds.normalization = detail::normalization_from_json(meta.at("normalization"));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("dataset metadata: ") + e.what());
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw not_found("cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != dataset_header())
    throw format_error("dataset header mismatch in '" + path + "'");
  std::size_t lineno = 1;
  const std::size_t total = n_train + n_test + n_pool;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto v = parse_vector_row(line, lineno);
    const bool labeled_part = row < n_train + n_test;
    if (labeled_part != v.label.has_value())
      throw format_error("dataset line " + std::to_string(lineno) + ": label presence does not match partition");
    if (row < n_train)
      ds.train_labeled.push_back(std::move(v));
    else if (row < n_train + n_test)
      ds.test_labeled.push_back(std::move(v));
    else
      ds.pool_unlabeled.push_back(std::move(v));
    ++row;
  }
  if (row != total)
    throw format_error("dataset '" + path + "' truncated: expected " + std::to_string(total) +
                       " rows, found " + std::to_string(row));
  return ds;
}

}  // namespace trust
