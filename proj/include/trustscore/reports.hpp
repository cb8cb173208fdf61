// Scorecard tables and JSON views shared by the CLI and the service.
#pragma once

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "data_model.hpp"
#include "dataset.hpp"
#include "scoring.hpp"

namespace trust {

inline nlohmann::json scorecard_to_json(const ScoreCard& sc) {
  return {{"user_id", sc.user_id},
          {"total_tweets", sc.basic.total_tweets},
          {"retweet_ratio", sc.basic.retweet_ratio},
          {"liked_ratio", sc.basic.liked_ratio},
          {"url_ratio", sc.basic.url_ratio},
          {"hashtag_ratio", sc.basic.hashtag_ratio},
          {"mention_ratio", sc.basic.mention_ratio},
          {"original_content_ratio", sc.basic.original_content_ratio},
          {"positive_count", sc.counts.positive},
          {"neutral_count", sc.counts.neutral},
          {"negative_count", sc.counts.negative},
          {"sentiment_score", sc.sentiment_score},
          {"social_reputation", sc.social_reputation},
          {"retweet_hindex", sc.retweet_hindex},
          {"like_hindex", sc.like_hindex},
          {"tweet_credibility", sc.tweet_credibility},
          {"influence_score", sc.influence_score}};
}

inline nlohmann::json features_to_json(const FeatureRow& row) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t f = 0; f < kFeatureCount; ++f) j[std::string(kFeatureNames[f])] = row[f];
  return j;
}

// Scorecard table: one row per user carrying the account counts alongside
// every score, so a dataset can be built from the table alone.
inline constexpr std::array<std::string_view, 22> kScorecardColumns = {
    "user_id",         "screen_name",       "followers_count", "friends_count",
    "statuses_count",  "listed_count",      "total_tweets",    "retweet_ratio",
    "liked_ratio",     "url_ratio",         "hashtag_ratio",   "mention_ratio",
    "original_content_ratio", "positive_count", "neutral_count", "negative_count",
    "sentiment_score", "social_reputation", "retweet_hindex",  "like_hindex",
    "tweet_credibility", "influence_score"};

struct ScoredUser {
  UserRecord user;
  ScoreCard card;
};

inline void write_scorecard_header(std::ostream& out) {
  for (std::size_t i = 0; i < kScorecardColumns.size(); ++i)
    out << (i ? "," : "") << kScorecardColumns[i];
  out << '\n';
}

inline void write_scorecard_row(std::ostream& out, const UserRecord& u, const ScoreCard& sc) {
  for (const auto* s : {&u.user_id, &u.screen_name})
    if (s->find_first_of(",\n\r") != std::string::npos)
      throw invalid_argument("'" + *s + "' cannot be stored in a table row");
  out << u.user_id << ',' << u.screen_name << ',' << u.followers_count << ',' << u.friends_count << ','
      << u.statuses_count << ',' << u.listed_count << ',' << sc.basic.total_tweets << ','
      << format_double(sc.basic.retweet_ratio) << ',' << format_double(sc.basic.liked_ratio) << ','
      << format_double(sc.basic.url_ratio) << ',' << format_double(sc.basic.hashtag_ratio) << ','
      << format_double(sc.basic.mention_ratio) << ',' << format_double(sc.basic.original_content_ratio)
      << ',' << sc.counts.positive << ',' << sc.counts.neutral << ',' << sc.counts.negative << ','
      << format_double(sc.sentiment_score) << ',' << format_double(sc.social_reputation) << ','
      << sc.retweet_hindex << ',' << sc.like_hindex << ',' << format_double(sc.tweet_credibility) << ','
      << format_double(sc.influence_score) << '\n';
}

inline std::vector<ScoredUser> read_scorecards(std::istream& in) {
  std::string line;
  std::string header;
  for (std::size_t i = 0; i < kScorecardColumns.size(); ++i)
    header += std::string(i ? "," : "") + std::string(kScorecardColumns[i]);
  if (!std::getline(in, line) || line != header) throw format_error("scorecard table: header mismatch");
  std::vector<ScoredUser> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = detail::split_csv(line);
    if (cells.size() != kScorecardColumns.size())
      throw format_error("scorecard table line " + std::to_string(lineno) + ": wrong column count");
    auto real = [&](std::size_t i) {
      auto v = parse_double(cells[i]);
      if (!v) throw format_error("scorecard table line " + std::to_string(lineno) + ": bad number");
      return *v;
    };
    auto count = [&](std::size_t i) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (ec != std::errc{} || p != cells[i].data() + cells[i].size() || v < 0)
        throw format_error("scorecard table line " + std::to_string(lineno) + ": bad count");
      return v;
    };
    ScoredUser s;
    s.user.user_id = std::string(cells[0]);
    s.user.screen_name = std::string(cells[1]);
    s.user.followers_count = count(2);
    s.user.friends_count = count(3);
    s.user.statuses_count = count(4);
    s.user.listed_count = count(5);
    s.card.user_id = s.user.user_id;
    s.card.basic.total_tweets = count(6);
    s.card.basic.retweet_ratio = real(7);
    s.card.basic.liked_ratio = real(8);
    s.card.basic.url_ratio = real(9);
    s.card.basic.hashtag_ratio = real(10);
    s.card.basic.mention_ratio = real(11);
    s.card.basic.original_content_ratio = real(12);
    s.card.counts = {count(13), count(14), count(15)};
    s.card.sentiment_score = real(16);
    s.card.social_reputation = real(17);
    s.card.retweet_hindex = count(18);
    s.card.like_hindex = count(19);
    s.card.tweet_credibility = real(20);
    s.card.influence_score = real(21);
    out.push_back(std::move(s));
  }
  return out;
}

// Reads a "user_id,label" table (header optional). Labels accept 1/0 or
// trustworthy/untrustworthy.
inline std::unordered_map<std::string, Label> read_labels(std::istream& in) {
  std::unordered_map<std::string, Label> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv(line);
    if (lineno == 1 && cells.size() == 2 && cells[0] == "user_id") continue;
    if (cells.size() != 2) throw format_error("labels line " + std::to_string(lineno) + ": expected user_id,label");
    auto l = parse_label(cells[1]);
    if (!l) throw format_error("labels line " + std::to_string(lineno) + ": bad label '" + std::string(cells[1]) + "'");
    if (!out.emplace(std::string(cells[0]), *l).second)
      throw format_error("labels line " + std::to_string(lineno) + ": duplicate user '" + std::string(cells[0]) + "'");
  }
  return out;
}

inline void write_labels(std::ostream& out, const std::vector<std::pair<std::string, Label>>& labels) {
  out << "user_id,label\n";
  for (const auto& [id, l] : labels) out << id << ',' << to_int(l) << '\n';
}

}  // namespace trust
