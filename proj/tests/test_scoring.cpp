#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "trustscore/scoring.hpp"

using namespace trust;
using testing_support::brute_h_index;

TEST(SocialReputation, WorkedExample) {
  EXPECT_NEAR(social_reputation(100, 10, 50), testing_support::worked_reputation(), 1e-9);
  EXPECT_NEAR(social_reputation(100, 10, 50), 10.7642, 1e-4);
}

TEST(SocialReputation, AllZeroIsZero) { EXPECT_EQ(social_reputation(0, 0, 0), 0.0); }

TEST(SocialReputation, StrictMonotonicity) {
  for (std::int64_t base : {0, 1, 7, 1000, 123456}) {
    EXPECT_LT(social_reputation(5, base + 1, 9), social_reputation(5, base, 9));
    EXPECT_GT(social_reputation(base + 1, 5, 9), social_reputation(base, 5, 9));
    EXPECT_GT(social_reputation(5, 9, base + 1), social_reputation(5, 9, base));
  }
}

TEST(HIndex, Examples) {
  EXPECT_EQ(h_index({5, 4, 3, 2, 1}), 3);
  EXPECT_EQ(h_index({0, 0, 0}), 0);
  EXPECT_EQ(h_index({10, 10, 10}), 3);
  EXPECT_EQ(h_index({}), 0);
  EXPECT_EQ(h_index({1}), 1);
  EXPECT_EQ(h_index({5, 4, 3, 1, 0, 0, 0, 0, 0, 0}), 3);
  EXPECT_EQ(h_index({9, 8, 7, 6, 5, 1, 0, 0, 0, 0}), 5);
}

TEST(HIndex, MatchesBruteForceAndProperties) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng() % 40;
    const std::int64_t cap = static_cast<std::int64_t>(1 + rng() % 60);
    std::vector<std::int64_t> xs(n);
    for (auto& x : xs) x = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cap));
    const auto h = h_index(xs);
    ASSERT_EQ(h, brute_h_index(xs));
    EXPECT_LE(h, static_cast<std::int64_t>(n));

    auto shuffled = xs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(h_index(shuffled), h);

    auto grown = xs;
    grown.push_back(static_cast<std::int64_t>(rng() % 80));
    EXPECT_GE(h_index(grown), h);
  }
}

TEST(TweetCredibility, Examples) {
  BasicFeatures b;
  b.retweet_ratio = 0.4;
  b.liked_ratio = 0.6;
  b.hashtag_ratio = 0.2;
  b.url_ratio = 0.2;
  b.original_content_ratio = 0.5;
  EXPECT_EQ(tweet_credibility(b), 0.175);

  b.original_content_ratio = 0.0;
  EXPECT_EQ(tweet_credibility(b), 0.0);

  BasicFeatures ones{10, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(tweet_credibility(ones), 1.0);
}

TEST(TweetCredibility, BoundedAndMonotone) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    BasicFeatures b{1, u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const double c = tweet_credibility(b);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    for (double BasicFeatures::*field : {&BasicFeatures::retweet_ratio, &BasicFeatures::liked_ratio,
                                         &BasicFeatures::url_ratio, &BasicFeatures::hashtag_ratio,
                                         &BasicFeatures::original_content_ratio}) {
      auto up = b;
      up.*field = std::min(1.0, up.*field + 0.1);
      EXPECT_GE(tweet_credibility(up), c);
    }
  }
}

TEST(InfluenceScore, Examples) {
  EXPECT_NEAR(influence_score(0.9, 0.175, 10.7642, 3, 5), 3.96784, 1e-9);
  EXPECT_EQ(influence_score(0, 0, 0, 0, 0), 0.0);
  EXPECT_EQ(influence_score(1, 1, 1, 1, 1), 1.0);
}

TEST(ScoreUser, WorkedExampleEndToEnd) {
  const auto u = testing_support::worked_user();
  const auto ts = testing_support::worked_tweets();
  const auto sc = score_user(u, ts, default_lexicon());
  EXPECT_EQ(sc.user_id, "worked");
  EXPECT_EQ(sc.sentiment_score, 0.9);
  EXPECT_EQ(sc.tweet_credibility, 0.175);
  EXPECT_EQ(sc.retweet_hindex, 3);
  EXPECT_EQ(sc.like_hindex, 5);
  EXPECT_NEAR(sc.social_reputation, testing_support::worked_reputation(), 1e-12);
  EXPECT_NEAR(sc.influence_score, testing_support::worked_influence(), 1e-9);
  EXPECT_NEAR(sc.influence_score, 3.96784, 1e-5);
}

TEST(ScoreUser, ZeroTweetUser) {
  const auto u = testing_support::user("quiet", 40, 3, 12);
  const auto sc = score_user(u, {}, default_lexicon());
  EXPECT_EQ(sc.retweet_hindex, 0);
  EXPECT_EQ(sc.like_hindex, 0);
  EXPECT_EQ(sc.tweet_credibility, 0.0);
  EXPECT_EQ(sc.sentiment_score, 1.0);
  EXPECT_NEAR(sc.influence_score, (1.0 + social_reputation(40, 3, 12)) / 5.0, 1e-12);
}

TEST(ScoreUser, DeterministicAndInvariantsHold) {
  auto syn = generate_synthetic(200, 77);
  const auto lex = default_lexicon();
  for (const auto& u : syn.corpus.users()) {
    const auto& ts = syn.corpus.tweets_of(u.user_id);
    const auto a = score_user(u, ts, lex);
    EXPECT_EQ(a, score_user(u, ts, lex));
    EXPECT_LE(a.retweet_hindex, a.basic.total_tweets);
    EXPECT_LE(a.like_hindex, a.basic.total_tweets);
    EXPECT_GE(a.tweet_credibility, 0.0);
    EXPECT_LE(a.tweet_credibility, 1.0);
    const double sum = a.sentiment_score + a.tweet_credibility + a.social_reputation +
                       static_cast<double>(a.retweet_hindex) + static_cast<double>(a.like_hindex);
    EXPECT_NEAR(5.0 * a.influence_score - sum, 0.0, 1e-12);
    EXPECT_EQ(a.counts.total(), a.basic.total_tweets);
  }
}

TEST(ScoreUser, IdenticalUsersScoreIdentically) {
  auto a = testing_support::worked_user();
  auto b = a;
  auto ts = testing_support::worked_tweets();
  EXPECT_EQ(score_user(a, ts, default_lexicon()), score_user(b, ts, default_lexicon()));
}

TEST(ScoreCorpus, OneCardPerUserInOrder) {
  auto c = build_corpus({testing_support::worked_user(), testing_support::user("z", 1, 1, 1)},
                        testing_support::worked_tweets());
  auto cards = score_corpus(c, default_lexicon());
  ASSERT_EQ(cards.size(), 2u);
  EXPECT_EQ(cards[0].user_id, "worked");
  EXPECT_EQ(cards[1].user_id, "z");
  EXPECT_NEAR(cards[0].influence_score, testing_support::worked_influence(), 1e-9);
}
