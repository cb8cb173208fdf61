// Per-user engagement ratios computed from a tweet list.
//
// Every ratio counts the tweets that qualify (at least one retweet, one
// like, one URL, ...) and divides by the number of tweets, so each lies
// in [0,1]. An empty tweet list yields 0 for every ratio.
#pragma once

#include <cstdint>
#include <span>

#include "data_model.hpp"

namespace trust {

struct BasicFeatures {
  std::int64_t total_tweets = 0;
  double retweet_ratio = 0.0;
  double liked_ratio = 0.0;
  double url_ratio = 0.0;
  double hashtag_ratio = 0.0;
  double mention_ratio = 0.0;
  double original_content_ratio = 0.0;

  bool operator==(const BasicFeatures&) const = default;
};

template <typename Pred>
double fraction_of(std::span<const TweetRecord> tweets, Pred qualifies) {
  if (tweets.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& t : tweets)
    if (qualifies(t)) ++n;
  return static_cast<double>(n) / static_cast<double>(tweets.size());
}

inline double retweet_ratio(std::span<const TweetRecord> tweets) {
  return fraction_of(tweets, [](const TweetRecord& t) { return t.retweet_count >= 1; });
}

inline double liked_ratio(std::span<const TweetRecord> tweets) {
  return fraction_of(tweets, [](const TweetRecord& t) { return t.like_count >= 1; });
}

inline double url_ratio(std::span<const TweetRecord> tweets) {
  return fraction_of(tweets, [](const TweetRecord& t) { return t.url_count >= 1; });
}

inline double hashtag_ratio(std::span<const TweetRecord> tweets) {
  return fraction_of(tweets, [](const TweetRecord& t) { return t.hashtag_count >= 1; });
}

inline double mention_ratio(std::span<const TweetRecord> tweets) {
  return fraction_of(tweets, [](const TweetRecord& t) { return t.mention_count >= 1; });
}

// (N - reposts) / N
inline double original_content_ratio(std::span<const TweetRecord> tweets) {
  return fraction_of(tweets, [](const TweetRecord& t) { return !t.is_retweet_of_other; });
}

inline BasicFeatures basic_features(std::span<const TweetRecord> tweets) {
  BasicFeatures f;
  f.total_tweets = static_cast<std::int64_t>(tweets.size());
  f.retweet_ratio = retweet_ratio(tweets);
  f.liked_ratio = liked_ratio(tweets);
  f.url_ratio = url_ratio(tweets);
  f.hashtag_ratio = hashtag_ratio(tweets);
  f.mention_ratio = mention_ratio(tweets);
  f.original_content_ratio = original_content_ratio(tweets);
  return f;
}

}  // namespace trust
