// Fixtures and independent reference computations shared by the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "trustscore/data_model.hpp"
#include "trustscore/dataset.hpp"

namespace testing_support {

// max{h : at least h values are >= h}, by direct counting.
inline std::int64_t brute_h_index(const std::vector<std::int64_t>& xs) {
  std::int64_t best = 0;
  for (std::int64_t h = 0; h <= static_cast<std::int64_t>(xs.size()); ++h) {
    auto n = std::count_if(xs.begin(), xs.end(), [h](std::int64_t x) { return x >= h; });
    if (n >= h) best = h;
  }
  return best;
}

inline trust::TweetRecord tweet(const std::string& id, const std::string& author, const std::string& text,
                                std::int64_t rt = 0, std::int64_t likes = 0, bool repost = false,
                                std::int64_t urls = 0, std::int64_t tags = 0, std::int64_t mentions = 0) {
  trust::TweetRecord t;
  t.tweet_id = id;
  t.author_id = author;
  t.text = text;
  t.retweet_count = rt;
  t.like_count = likes;
  t.is_retweet_of_other = repost;
  t.url_count = urls;
  t.hashtag_count = tags;
  t.mention_count = mentions;
  return t;
}

inline trust::UserRecord user(const std::string& id, std::int64_t followers, std::int64_t friends,
                              std::int64_t statuses, bool is_protected = false) {
  trust::UserRecord u;
  u.user_id = id;
  u.screen_name = "name_" + id;
  u.followers_count = followers;
  u.friends_count = friends;
  u.statuses_count = statuses;
  u.listed_count = 1;
  u.is_protected = is_protected;
  return u;
}

// The worked-example account: 100 followers, 10 friends, 50 statuses and
// ten tweets with retweets [5,4,3,1,0 x6], likes [9,8,7,6,5,1,0 x4], two
// hashtag tweets, two URL tweets, five reposts, and 6 positive / 3 neutral /
// 1 negative texts under the default lexicon.
inline trust::UserRecord worked_user() { return user("worked", 100, 10, 50); }

inline std::vector<trust::TweetRecord> worked_tweets() {
  const std::int64_t rts[10] = {5, 4, 3, 1, 0, 0, 0, 0, 0, 0};
  const std::int64_t likes[10] = {9, 8, 7, 6, 5, 1, 0, 0, 0, 0};
  const char* texts[10] = {"what a great day",     "love this team",   "good news everyone",
                           "excellent work",       "happy to help",    "amazing result",
                           "meeting at noon",      "see the schedule", "posting the agenda",
                           "this is terrible"};
  std::vector<trust::TweetRecord> out;
  for (int i = 0; i < 10; ++i)
    out.push_back(tweet("w" + std::to_string(i), "worked", texts[i], rts[i], likes[i],
                        /*repost=*/i % 2 == 1, /*urls=*/i < 2 ? 1 : 0, /*tags=*/i >= 8 ? 1 : 0, 0));
  return out;
}

// 2 ln 101 + ln 51 - ln 11, the worked example's social reputation.
inline double worked_reputation() { return 2.0 * std::log(101.0) + std::log(51.0) - std::log(11.0); }

// Mean of the worked example's five components computed from scratch:
// sentiment (6+3)/10, credibility ((0.4+0.6+0.2+0.2)/4)*0.5, reputation,
// retweet h-index 3, like h-index 5.
inline double worked_influence() {
  return (0.9 + 0.175 + worked_reputation() + 3.0 + 5.0) / 5.0;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("trustscore-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Labeled vectors whose label is the default rule applied to a normalized
// synthetic corpus.
inline std::vector<trust::FeatureVector> labeled_synthetic(std::size_t n, std::uint64_t seed, double noise) {
  trust::SyntheticParams p;
  p.rule = trust::default_label_rule(noise, seed);
  auto syn = trust::generate_synthetic(n, seed, p);
  std::vector<trust::FeatureVector> raw;
  for (const auto& u : syn.corpus.users()) {
    auto sc = trust::score_user(u, syn.corpus.tweets_of(u.user_id), trust::default_lexicon());
    raw.push_back({u.user_id, trust::feature_row(sc, u), std::nullopt});
  }
  auto [vs, params] = trust::normalize_vectors(std::move(raw));
  for (auto& v : vs) v.label = syn.labels.at(v.user_id);
  return vs;
}

}  // namespace testing_support
