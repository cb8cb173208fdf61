// Derived per-user scores and the influence score that averages them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "features.hpp"
#include "sentiment.hpp"

namespace trust {

struct ScoreCard {
  std::string user_id;
  BasicFeatures basic;
  SentimentCounts counts;
  double sentiment_score = 0.0;
  double social_reputation = 0.0;
  std::int64_t retweet_hindex = 0;
  std::int64_t like_hindex = 0;
  double tweet_credibility = 0.0;
  double influence_score = 0.0;

  bool operator==(const ScoreCard&) const = default;
};

// 2*ln(1+followers) + ln(1+statuses) - ln(1+friends). The followers term
// appears squared inside the first logarithm of the published formula and is
// kept that way.
inline double social_reputation(std::int64_t followers, std::int64_t friends,
                                std::int64_t statuses) {
  const double f = static_cast<double>(followers);
  const double s = static_cast<double>(statuses);
  const double fr = static_cast<double>(friends);
  return std::log((1.0 + f) * (1.0 + f)) + std::log1p(s) - std::log1p(fr);
}

// Largest h such that h entries are >= h. Walks the engagements in
// decreasing order; the entry at 1-based rank r failing `value >= r` ends
// the scan with h = r - 1.
inline std::int64_t h_index(std::vector<std::int64_t> engagements) {
  std::sort(engagements.begin(), engagements.end(), std::greater<>());
  for (std::size_t i = 0; i < engagements.size(); ++i) {
    const auto rank = static_cast<std::int64_t>(i + 1);
    if (engagements[i] < rank) return rank - 1;
  }
  return static_cast<std::int64_t>(engagements.size());
}

inline double tweet_credibility(const BasicFeatures& b) {
  return ((b.retweet_ratio + b.liked_ratio + b.hashtag_ratio + b.url_ratio) / 4.0) *
         b.original_content_ratio;
}

inline double influence_score(double sentiment, double credibility, double reputation,
                              std::int64_t retweet_h, std::int64_t like_h) {
  return (sentiment + credibility + reputation + static_cast<double>(retweet_h) +
          static_cast<double>(like_h)) /
         5.0;
}

inline ScoreCard score_user(const UserRecord& user, std::span<const TweetRecord> tweets,
                            const Lexicon& lex) {
  ScoreCard sc;
  sc.user_id = user.user_id;
  sc.basic = basic_features(tweets);
  sc.counts = sentiment_counts(tweets, lex);
  sc.sentiment_score = sentiment_score(sc.counts);
  sc.social_reputation =
      social_reputation(user.followers_count, user.friends_count, user.statuses_count);

  std::vector<std::int64_t> retweets, likes;
  retweets.reserve(tweets.size());
  likes.reserve(tweets.size());
  for (const auto& t : tweets) {
    retweets.push_back(t.retweet_count);
    likes.push_back(t.like_count);
  }
  sc.retweet_hindex = h_index(std::move(retweets));
  sc.like_hindex = h_index(std::move(likes));
  sc.tweet_credibility = tweet_credibility(sc.basic);
  sc.influence_score = influence_score(sc.sentiment_score, sc.tweet_credibility,
                                       sc.social_reputation, sc.retweet_hindex,
                                       sc.like_hindex);
  return sc;
}

// Scores every user of the corpus, in corpus order.
inline std::vector<ScoreCard> score_corpus(const Corpus& corpus, const Lexicon& lex) {
  std::vector<ScoreCard> out;
  out.reserve(corpus.users().size());
  for (const auto& u : corpus.users()) out.push_back(score_user(u, corpus.tweets_of(u.user_id), lex));
  return out;
}

}  // namespace trust
