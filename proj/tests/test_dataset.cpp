#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "trustscore/dataset.hpp"

using namespace trust;
using testing_support::TempDir;

namespace {

const std::size_t kFollowers = *feature_index("followers_count");
const std::size_t kRetweetRatio = *feature_index("retweet_ratio");

Matrix column_matrix(const std::vector<double>& col, std::size_t feature) {
  Matrix m(col.size());
  for (std::size_t r = 0; r < col.size(); ++r) {
    m[r].fill(0.0);
    m[r][feature] = col[r];
  }
  return m;
}

// Nearest-rank percentile written out directly: the smallest value with at
// least p% of the column at or below it.
double rank_oracle(std::vector<double> col, double p) {
  std::sort(col.begin(), col.end());
  for (double v : col) {
    auto at_or_below = std::count_if(col.begin(), col.end(), [v](double x) { return x <= v; });
    if (100.0 * static_cast<double>(at_or_below) >= p * static_cast<double>(col.size())) return v;
  }
  return col.back();
}

std::vector<FeatureVector> random_vectors(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> heavy(3.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<FeatureVector> vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    vs[i].user_id = "v" + std::to_string(i);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      vs[i].values[f] = kClippedFeatures[f] ? std::floor(heavy(rng)) : unit(rng);
  }
  return vs;
}

}  // namespace

TEST(Schema, NineteenNamedFeatures) {
  EXPECT_EQ(kFeatureNames.size(), 19u);
  EXPECT_EQ(kFeatureNames.back(), "influence_score");
  std::set<std::string_view> names(kFeatureNames.begin(), kFeatureNames.end());
  EXPECT_EQ(names.size(), 19u);
  EXPECT_FALSE(feature_index("nope").has_value());
  // Ratios and bounded scores are not clipped; counts and unbounded scores are.
  for (auto name : {"retweet_ratio", "liked_ratio", "url_ratio", "hashtag_ratio", "mention_ratio",
                    "original_content_ratio", "sentiment_score", "tweet_credibility"})
    EXPECT_FALSE(kClippedFeatures[*feature_index(name)]) << name;
  for (auto name : {"followers_count", "friends_count", "statuses_count", "listed_count", "total_tweets",
                    "positive_count", "social_reputation", "retweet_hindex_plus_like_hindex", "influence_score"})
    EXPECT_TRUE(kClippedFeatures[*feature_index(name)]) << name;
}

TEST(Assemble, WorkedExampleCarriesInfluenceLast) {
  const auto u = testing_support::worked_user();
  const auto sc = score_user(u, testing_support::worked_tweets(), default_lexicon());
  const std::vector<ScoreCard> cards{sc};
  const std::vector<UserRecord> users{u};
  auto vs = assemble(cards, users);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_NEAR(vs[0].values[18], 3.96784, 1e-5);
  EXPECT_NEAR(vs[0].values[18], testing_support::worked_influence(), 1e-9);
  EXPECT_EQ(vs[0].values[*feature_index("retweet_hindex_plus_like_hindex")], 8.0);
  EXPECT_EQ(vs[0].values[kFollowers], 100.0);
  EXPECT_FALSE(vs[0].label.has_value());
}

TEST(Assemble, ZeroActivityUser) {
  const auto u = testing_support::user("idle", 3, 2, 0);
  const std::vector<ScoreCard> cards{score_user(u, {}, default_lexicon())};
  const std::vector<UserRecord> users{u};
  const auto v = assemble(cards, users).at(0).values;
  for (auto name : {"total_tweets", "retweet_ratio", "liked_ratio", "url_ratio", "hashtag_ratio", "mention_ratio",
                    "original_content_ratio", "positive_count", "neutral_count", "negative_count",
                    "tweet_credibility", "retweet_hindex_plus_like_hindex"})
    EXPECT_EQ(v[*feature_index(name)], 0.0) << name;
  EXPECT_EQ(v[*feature_index("sentiment_score")], 1.0);
}

TEST(Assemble, EmptyAndUnknownUser) {
  EXPECT_TRUE(assemble({}, {}).empty());
  const std::vector<ScoreCard> cards{score_user(testing_support::user("x", 1, 1, 1), {}, default_lexicon())};
  EXPECT_THROW(assemble(cards, {}), corpus_error);
}

TEST(FitClip, OneToHundred) {
  std::vector<double> col;
  for (int i = 1; i <= 100; ++i) col.push_back(i);
  auto b = fit_clip(column_matrix(col, kFollowers), 1, 99);
  ASSERT_TRUE(b[kFollowers].has_value());
  EXPECT_EQ(*b[kFollowers], (ClipBound{1, 99}));
  EXPECT_FALSE(b[kRetweetRatio].has_value());
}

TEST(FitClip, ConstantAndSingletonColumns) {
  auto c = fit_clip(column_matrix({4, 4, 4, 4}, kFollowers), 1, 99);
  EXPECT_EQ(*c[kFollowers], (ClipBound{4, 4}));
  auto s = fit_clip(column_matrix({17}, kFollowers), 1, 99);
  EXPECT_EQ(*s[kFollowers], (ClipBound{17, 17}));
}

TEST(FitClip, EmptyMatrixAndBadPercentiles) {
  EXPECT_THROW(fit_clip({}, 1, 99), invalid_argument);
  EXPECT_THROW(fit_clip(column_matrix({1, 2}, kFollowers), 50, 50), invalid_argument);
  EXPECT_THROW(fit_clip(column_matrix({1, 2}, kFollowers), -1, 99), invalid_argument);
}

TEST(FitClip, MatchesNearestRankOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 120;
    std::vector<double> col(n);
    for (auto& x : col) x = static_cast<double>(rng() % 50);
    const double lo = static_cast<double>(rng() % 20);
    const double hi = 80 + static_cast<double>(rng() % 21);
    auto b = fit_clip(column_matrix(col, kFollowers), lo, hi);
    EXPECT_EQ(b[kFollowers]->low, rank_oracle(col, lo)) << "n=" << n << " p=" << lo;
    EXPECT_EQ(b[kFollowers]->high, rank_oracle(col, hi)) << "n=" << n << " p=" << hi;
  }
}

TEST(ApplyClip, Examples) {
  ClipBounds b{};
  b[kFollowers] = ClipBound{1, 99};
  auto m = apply_clip(column_matrix({100, 50, 0}, kFollowers), b);
  EXPECT_EQ(m[0][kFollowers], 99);
  EXPECT_EQ(m[1][kFollowers], 50);
  EXPECT_EQ(m[2][kFollowers], 1);
}

TEST(ApplyClip, UnclippedFeaturesPassThrough) {
  ClipBounds b{};
  b[kFollowers] = ClipBound{0, 0};
  Matrix m(1);
  m[0].fill(0.75);
  auto out = apply_clip(m, b);
  EXPECT_EQ(out[0][kFollowers], 0.0);
  EXPECT_EQ(out[0][kRetweetRatio], 0.75);
}

TEST(MinMax, Examples) {
  auto [m, p] = min_max_normalize(column_matrix({2, 4, 6}, kFollowers));
  EXPECT_EQ(m[0][kFollowers], 0.0);
  EXPECT_EQ(m[1][kFollowers], 0.5);
  EXPECT_EQ(m[2][kFollowers], 1.0);
  EXPECT_EQ(p[kFollowers], (MinMax{2, 6}));
  // Every other column is constant zero and maps to 0.
  EXPECT_EQ(m[1][kRetweetRatio], 0.0);

  auto [c, cp] = min_max_normalize(column_matrix({5, 5}, kFollowers));
  EXPECT_EQ(c[0][kFollowers], 0.0);
  EXPECT_EQ(c[1][kFollowers], 0.0);

  auto [u, up] = min_max_normalize(column_matrix({0, 1}, kFollowers));
  EXPECT_EQ(u[0][kFollowers], 0.0);
  EXPECT_EQ(u[1][kFollowers], 1.0);

  EXPECT_THROW(min_max_normalize({}), invalid_argument);
}

TEST(Normalize, UnitRangeOrderAndTransformAgreement) {
  auto raw = random_vectors(500, 4);
  auto [vs, params] = normalize_vectors(raw, 1, 99);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (double x : vs[i].values) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    EXPECT_EQ(params.transform(raw[i].values), vs[i].values);
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
      const double a = raw[i].values[f], b = raw[i + 1].values[f];
      const bool inside = !params.clip[f] || (a >= params.clip[f]->low && a <= params.clip[f]->high &&
                                              b >= params.clip[f]->low && b <= params.clip[f]->high);
      if (inside && a < b) {
        EXPECT_LE(vs[i].values[f], vs[i + 1].values[f]);
      }
    }
  }
}

TEST(Normalize, TransformOfUnseenRowsStaysInUnitRange) {
  auto [vs, params] = normalize_vectors(random_vectors(100, 8));
  FeatureRow extreme;
  extreme.fill(1e12);
  for (double x : params.transform(extreme)) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  extreme.fill(-5.0);
  for (double x : params.transform(extreme)) EXPECT_EQ(x, 0.0);
}

TEST(Split, FiftyThousandRowSizes) {
  auto vs = random_vectors(50000, 1);
  std::unordered_map<std::string, Label> labels;
  for (std::size_t i = 0; i < 1000; ++i)
    labels[vs[i * 50].user_id] = i % 3 == 0 ? Label::trustworthy : Label::untrustworthy;
  auto ds = split(vs, labels, 0.2, 99);
  EXPECT_EQ(ds.train_labeled.size(), 800u);
  EXPECT_EQ(ds.test_labeled.size(), 200u);
  EXPECT_EQ(ds.pool_unlabeled.size(), 49000u);

  std::set<std::string> seen;
  for (const auto* part : {&ds.train_labeled, &ds.test_labeled, &ds.pool_unlabeled})
    for (const auto& v : *part) EXPECT_TRUE(seen.insert(v.user_id).second) << v.user_id;
  EXPECT_EQ(seen.size(), vs.size());
  for (const auto& v : ds.train_labeled) EXPECT_EQ(*v.label, labels.at(v.user_id));
  for (const auto& v : ds.test_labeled) EXPECT_EQ(*v.label, labels.at(v.user_id));
  for (const auto& v : ds.pool_unlabeled) EXPECT_FALSE(v.label.has_value());
}

TEST(Split, DeterministicPerSeed) {
  auto vs = random_vectors(300, 2);
  std::unordered_map<std::string, Label> labels;
  for (std::size_t i = 0; i < 100; ++i) labels[vs[i].user_id] = static_cast<Label>(i % 2);
  EXPECT_EQ(split(vs, labels, 0.2, 5), split(vs, labels, 0.2, 5));
  EXPECT_NE(split(vs, labels, 0.2, 5).test_labeled, split(vs, labels, 0.2, 6).test_labeled);
}

TEST(Split, Errors) {
  auto vs = random_vectors(20, 3);
  std::unordered_map<std::string, Label> labels{{vs[0].user_id, Label::trustworthy},
                                                {vs[1].user_id, Label::untrustworthy}};
  EXPECT_THROW(split(vs, labels, 0.1, 0), invalid_argument);
  EXPECT_THROW(split(vs, labels, 0.0, 0), invalid_argument);
  EXPECT_THROW(split(vs, labels, 1.0, 0), invalid_argument);
  labels["ghost"] = Label::trustworthy;
  EXPECT_THROW(split(vs, labels, 0.5, 0), invalid_argument);
}

TEST(Synthetic, EmptyAndDeterministic) {
  auto empty = generate_synthetic(0, 1);
  EXPECT_TRUE(empty.corpus.users().empty());
  EXPECT_TRUE(empty.labels.empty());
  auto a = generate_synthetic(150, 42), b = generate_synthetic(150, 42), c = generate_synthetic(150, 43);
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_FALSE(a.corpus == c.corpus);
}

TEST(Synthetic, NoiseFreeLabelsFollowTheRule) {
  const auto rule = default_label_rule();
  auto syn = generate_synthetic(1000, 12);
  std::vector<FeatureVector> raw;
  for (const auto& u : syn.corpus.users())
    raw.push_back({u.user_id, feature_row(score_user(u, syn.corpus.tweets_of(u.user_id), default_lexicon()), u),
                   std::nullopt});
  auto [vs, params] = normalize_vectors(raw);
  std::size_t trustworthy = 0;
  for (const auto& v : vs) {
    // Recompute the rule by hand: weights . x > threshold.
    double s = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) s += rule.weights[f] * v.values[f];
    const Label expected = s > rule.threshold ? Label::trustworthy : Label::untrustworthy;
    EXPECT_EQ(syn.labels.at(v.user_id), expected) << v.user_id;
    trustworthy += expected == Label::trustworthy;
  }
  // Both classes well represented.
  EXPECT_GT(trustworthy, 300u);
  EXPECT_LT(trustworthy, 700u);
  // Every generated user passes the eligibility filter.
  EXPECT_EQ(filter_eligible(syn.corpus).users().size(), syn.corpus.users().size());
}

TEST(Synthetic, NoiseFlipsAboutTheRequestedShare) {
  SyntheticParams p;
  p.rule = default_label_rule(0.1, 3);
  auto noisy = generate_synthetic(2000, 5, p);
  auto clean = generate_synthetic(2000, 5);
  EXPECT_EQ(noisy.corpus, clean.corpus);
  std::size_t flips = 0;
  for (const auto& [id, l] : clean.labels) flips += noisy.labels.at(id) != l;
  EXPECT_GT(flips, 140u);
  EXPECT_LT(flips, 260u);
}

TEST(Persistence, RoundTripIsValueIdentical) {
  TempDir dir("ds");
  auto vs = random_vectors(400, 6);
  auto [norm, params] = normalize_vectors(vs);
  std::unordered_map<std::string, Label> labels;
  for (std::size_t i = 0; i < 100; ++i) labels[norm[i * 3].user_id] = static_cast<Label>(i % 2);
  auto ds = split(norm, labels, 0.2, 1);
  ds.normalization = params;
  const auto path = dir.file("d.csv");
  save_dataset(ds, path);
  const auto back = load_dataset(path);
  EXPECT_EQ(back, ds);

  // Saving again yields identical bytes.
  const auto path2 = dir.file("e.csv");
  save_dataset(back, path2);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(path), slurp(path2));
}

TEST(Persistence, TruncatedFileIsFormatError) {
  TempDir dir("trunc");
  auto [norm, params] = normalize_vectors(random_vectors(50, 7));
  std::unordered_map<std::string, Label> labels;
  for (std::size_t i = 0; i < 10; ++i) labels[norm[i].user_id] = static_cast<Label>(i % 2);
  auto ds = split(norm, labels, 0.2, 1);
  ds.normalization = params;
  const auto path = dir.file("d.csv");
  save_dataset(ds, path);

  std::ifstream in(path, std::ios::binary);
  std::string text(std::istreambuf_iterator<char>(in), {});
  in.close();
  // Cut mid-row and at a row boundary.
  for (std::size_t cut : {text.size() / 2, text.rfind('\n', text.size() - 2) + 1}) {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << text.substr(0, cut);
    EXPECT_THROW(load_dataset(path), format_error) << cut;
  }
}

TEST(Persistence, VersionMismatchIsVersionError) {
  TempDir dir("ver");
  auto [norm, params] = normalize_vectors(random_vectors(20, 8));
  SplitDataset ds;
  ds.pool_unlabeled = norm;
  ds.normalization = params;
  const auto path = dir.file("d.csv");
  save_dataset(ds, path);
  std::ifstream mi(metadata_path(path));
  auto meta = nlohmann::json::parse(mi);
  mi.close();
  meta["version"] = 2;
  std::ofstream(metadata_path(path), std::ios::trunc) << meta.dump();
  EXPECT_THROW(load_dataset(path), version_error);
}

TEST(Persistence, MissingMetadataAndBadHeader) {
  TempDir dir("bad");
  EXPECT_THROW(load_dataset(dir.file("none.csv")), not_found);
  auto [norm, params] = normalize_vectors(random_vectors(5, 9));
  SplitDataset ds;
  ds.pool_unlabeled = norm;
  ds.normalization = params;
  const auto path = dir.file("d.csv");
  save_dataset(ds, path);
  std::ofstream(path, std::ios::trunc) << "user_id,whatever\n";
  EXPECT_THROW(load_dataset(path), format_error);
}
