// Corpus types and ingestion of line-delimited JSON archives.
#pragma once

#include <cctype>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace trust {

struct UserRecord {
  std::string user_id;
  std::string screen_name;
  std::int64_t followers_count = 0;
  std::int64_t friends_count = 0;
  std::int64_t statuses_count = 0;
  std::int64_t listed_count = 0;
  bool is_protected = false;

  bool operator==(const UserRecord&) const = default;
};

struct TweetRecord {
  std::string tweet_id;
  std::string author_id;
  std::string text;
  std::int64_t retweet_count = 0;
  std::int64_t like_count = 0;
  bool is_retweet_of_other = false;
  std::int64_t url_count = 0;
  std::int64_t hashtag_count = 0;
  std::int64_t mention_count = 0;

  bool operator==(const TweetRecord&) const = default;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<LineError> errors;
};

class Corpus {
 public:
  Corpus() = default;

  const std::vector<UserRecord>& users() const { return users_; }

  // Tweets of one user in ingestion order; empty for unknown ids.
  const std::vector<TweetRecord>& tweets_of(const std::string& user_id) const {
    static const std::vector<TweetRecord> none;
    auto it = tweets_by_user_.find(user_id);
    return it == tweets_by_user_.end() ? none : it->second;
  }

  const UserRecord* find_user(const std::string& user_id) const {
    auto it = index_.find(user_id);
    return it == index_.end() ? nullptr : &users_[it->second];
  }

  std::size_t tweet_count() const {
    std::size_t n = 0;
    for (const auto& [_, ts] : tweets_by_user_) n += ts.size();
    return n;
  }

  bool operator==(const Corpus& o) const {
    return users_ == o.users_ && tweets_by_user_ == o.tweets_by_user_;
  }

 private:
  friend Corpus build_corpus(std::vector<UserRecord>, std::vector<TweetRecord>);

  std::vector<UserRecord> users_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<TweetRecord>> tweets_by_user_;
};

namespace detail {

inline std::int64_t require_count(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw format_error(std::string("missing key '") + key + "'");
  if (!it->is_number_integer())
    throw format_error(std::string("key '") + key + "' is not an integer");
  auto v = it->get<std::int64_t>();
  if (v < 0) throw format_error(std::string("key '") + key + "' is negative");
  return v;
}

inline std::optional<std::int64_t> optional_count(const nlohmann::json& obj,
                                                  const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return require_count(obj, key);
}

inline std::string require_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw format_error(std::string("missing key '") + key + "'");
  if (!it->is_string())
    throw format_error(std::string("key '") + key + "' is not a string");
  return it->get<std::string>();
}

inline bool require_bool(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw format_error(std::string("missing key '") + key + "'");
  if (!it->is_boolean())
    throw format_error(std::string("key '") + key + "' is not a boolean");
  return it->get<bool>();
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

template <typename Record, typename Decode>
ParseResult<Record> parse_lines(std::istream& in, Decode decode) {
  ParseResult<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw format_error("record is not an object");
      out.records.push_back(decode(obj));
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back({lineno, e.what()});
    } catch (const format_error& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  return out;
}

}  // namespace detail

// Whitespace-token scans used when an archive lacks entity counts.
inline std::int64_t count_tokens_with_prefix(std::string_view text,
                                             std::string_view prefix,
                                             std::size_t min_len) {
  std::int64_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    auto tok = text.substr(i, j - i);
    if (tok.size() >= min_len && tok.substr(0, prefix.size()) == prefix) ++n;
    i = j;
  }
  return n;
}

inline std::int64_t scan_url_count(std::string_view text) {
  // "https" tokens also start with "http".
  return count_tokens_with_prefix(text, "http", 4);
}
inline std::int64_t scan_hashtag_count(std::string_view text) {
  return count_tokens_with_prefix(text, "#", 2);
}
inline std::int64_t scan_mention_count(std::string_view text) {
  return count_tokens_with_prefix(text, "@", 2);
}

inline UserRecord decode_user(const nlohmann::json& obj) {
  UserRecord u;
  u.user_id = detail::require_string(obj, "user_id");
  if (u.user_id.empty()) throw format_error("empty user_id");
  u.screen_name = detail::require_string(obj, "screen_name");
  u.followers_count = detail::require_count(obj, "followers_count");
  u.friends_count = detail::require_count(obj, "friends_count");
  u.statuses_count = detail::require_count(obj, "statuses_count");
  u.listed_count = detail::require_count(obj, "listed_count");
  u.is_protected = detail::require_bool(obj, "is_protected");
  return u;
}

inline TweetRecord decode_tweet(const nlohmann::json& obj) {
  TweetRecord t;
  t.tweet_id = detail::require_string(obj, "tweet_id");
  if (t.tweet_id.empty()) throw format_error("empty tweet_id");
  t.author_id = detail::require_string(obj, "author_id");
  t.text = detail::require_string(obj, "text");
  t.retweet_count = detail::require_count(obj, "retweet_count");
  t.like_count = detail::require_count(obj, "like_count");
  t.is_retweet_of_other = detail::require_bool(obj, "is_retweet_of_other");
  t.url_count = detail::optional_count(obj, "url_count").value_or(scan_url_count(t.text));
  t.hashtag_count =
      detail::optional_count(obj, "hashtag_count").value_or(scan_hashtag_count(t.text));
  t.mention_count =
      detail::optional_count(obj, "mention_count").value_or(scan_mention_count(t.text));
  return t;
}

inline nlohmann::json encode_user(const UserRecord& u) {
  return {{"user_id", u.user_id},
          {"screen_name", u.screen_name},
          {"followers_count", u.followers_count},
          {"friends_count", u.friends_count},
          {"statuses_count", u.statuses_count},
          {"listed_count", u.listed_count},
          {"is_protected", u.is_protected}};
}

inline nlohmann::json encode_tweet(const TweetRecord& t) {
  return {{"tweet_id", t.tweet_id},
          {"author_id", t.author_id},
          {"text", t.text},
          {"retweet_count", t.retweet_count},
          {"like_count", t.like_count},
          {"is_retweet_of_other", t.is_retweet_of_other},
          {"url_count", t.url_count},
          {"hashtag_count", t.hashtag_count},
          {"mention_count", t.mention_count}};
}

// Malformed lines are collected; a duplicate user_id throws corpus_error.
inline ParseResult<UserRecord> parse_users(std::istream& in) {
  auto result = detail::parse_lines<UserRecord>(in, decode_user);
  std::unordered_set<std::string> seen;
  for (const auto& u : result.records)
    if (!seen.insert(u.user_id).second)
      throw corpus_error("duplicate user_id '" + u.user_id + "'");
  return result;
}

inline ParseResult<TweetRecord> parse_tweets(std::istream& in) {
  return detail::parse_lines<TweetRecord>(in, decode_tweet);
}

inline Corpus build_corpus(std::vector<UserRecord> users, std::vector<TweetRecord> tweets) {
  Corpus c;
  c.index_.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (users[i].user_id.empty()) throw corpus_error("empty user_id");
    if (!c.index_.emplace(users[i].user_id, i).second)
      throw corpus_error("duplicate user_id '" + users[i].user_id + "'");
    c.tweets_by_user_[users[i].user_id];
  }
  std::unordered_set<std::string> tweet_ids;
  tweet_ids.reserve(tweets.size());
  for (auto& t : tweets) {
    if (!tweet_ids.insert(t.tweet_id).second)
      throw corpus_error("duplicate tweet_id '" + t.tweet_id + "'");
    auto it = c.tweets_by_user_.find(t.author_id);
    if (it == c.tweets_by_user_.end())
      throw corpus_error("tweet '" + t.tweet_id + "' references unknown author '" +
                         t.author_id + "'");
    it->second.push_back(std::move(t));
  }
  c.users_ = std::move(users);
  return c;
}

// Keeps public accounts with followers and friends and at least
// `min_tweets` archived tweets.
inline Corpus filter_eligible(const Corpus& corpus, std::size_t min_tweets = 1) {
  std::vector<UserRecord> users;
  std::vector<TweetRecord> tweets;
  for (const auto& u : corpus.users()) {
    const auto& ts = corpus.tweets_of(u.user_id);
    if (u.is_protected || u.followers_count <= 0 || u.friends_count <= 0 ||
        ts.size() < min_tweets)
      continue;
    users.push_back(u);
    tweets.insert(tweets.end(), ts.begin(), ts.end());
  }
  return build_corpus(std::move(users), std::move(tweets));
}

}  // namespace trust
