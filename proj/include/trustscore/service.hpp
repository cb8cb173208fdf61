// Annotation service: a store of active-learning sessions driven by human
// labels, plus read-only scorecard lookups. The request handlers are plain
// functions returning a status and a JSON body; service_http.hpp binds them
// to HTTP routes.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "active_learning.hpp"
#include "common.hpp"
#include "data_model.hpp"
#include "dataset.hpp"
#include "reports.hpp"
#include "scoring.hpp"
#include "sentiment.hpp"

namespace trust {

struct Reply {
  int status = 200;
  nlohmann::json body;
};

inline Reply error_reply(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

inline constexpr std::size_t kSampleTweetLimit = 10;

// Up to `limit` tweets ordered by retweets + likes, descending; ties by
// tweet_id.
inline std::vector<TweetRecord> most_engaged(std::span<const TweetRecord> tweets,
                                             std::size_t limit = kSampleTweetLimit) {
  std::vector<TweetRecord> out(tweets.begin(), tweets.end());
  std::sort(out.begin(), out.end(), [](const TweetRecord& a, const TweetRecord& b) {
    const auto ea = a.retweet_count + a.like_count, eb = b.retweet_count + b.like_count;
    if (ea != eb) return ea > eb;
    return a.tweet_id < b.tweet_id;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

// Immutable data shared by all sessions: the split dataset and, when
// available, the scored users behind it.
class Workspace {
 public:
  Workspace(std::string dataset_name, SplitDataset dataset)
      : name_(std::move(dataset_name)), dataset_(std::move(dataset)) {}

  void add_user(UserRecord user, ScoreCard card, std::span<const TweetRecord> tweets = {}) {
    auto id = user.user_id;
    users_[id] = Entry{std::move(user), std::move(card), most_engaged(tweets)};
  }

  void add_corpus(const Corpus& corpus, const Lexicon& lex) {
    for (const auto& u : corpus.users()) {
      const auto& tweets = corpus.tweets_of(u.user_id);
      add_user(u, score_user(u, tweets, lex), tweets);
    }
  }

  const std::string& dataset_name() const { return name_; }
  const SplitDataset& dataset() const { return dataset_; }

  struct Entry {
    UserRecord user;
    ScoreCard card;
    std::vector<TweetRecord> sample_tweets;
  };

  const Entry* find(const std::string& user_id) const {
    auto it = users_.find(user_id);
    return it == users_.end() ? nullptr : &it->second;
  }

 private:
  std::string name_;
  SplitDataset dataset_;
  std::unordered_map<std::string, Entry> users_;
};

inline nlohmann::json tweet_to_json(const TweetRecord& t) {
  return {{"tweet_id", t.tweet_id},     {"text", t.text},
          {"retweet_count", t.retweet_count}, {"like_count", t.like_count},
          {"is_retweet_of_other", t.is_retweet_of_other}};
}

inline constexpr int kSessionFileVersion = 1;

class Service {
 public:
  // Sessions persisted under `data_dir` are restored; an empty `data_dir`
  // disables persistence.
  Service(std::shared_ptr<const Workspace> ws, std::string data_dir)
      : ws_(std::move(ws)), dir_(std::move(data_dir)) {
    if (!dir_.empty()) {
      std::filesystem::create_directories(sessions_dir());
      restore();
    }
  }

  std::size_t session_count() const {
    std::shared_lock lk(map_mu_);
    return slots_.size();
  }

  Reply healthz() const {
    return {200,
            {{"status", "ok"},
             {"dataset", ws_->dataset_name()},
             {"sessions", session_count()}}};
  }

  Reply create_session(const nlohmann::json& body) {
    SessionConfig cfg;
    try {
      cfg = parse_create(body);
    } catch (const invalid_argument& e) {
      return error_reply(400, e.what());
    } catch (const not_found& e) {
      return error_reply(404, e.what());
    }
    std::string id;
    {
      std::unique_lock lk(map_mu_);
      id = next_id();
    }
    auto slot = std::make_shared<Slot>(id, now_seconds(), Session(ws_->dataset(), cfg));
    if (!slot->session.stopped()) slot->session.select_batch();
    std::lock_guard guard(slot->guard);
    {
      std::unique_lock lk(map_mu_);
      slots_.emplace(id, slot);
    }
    persist(*slot);
    nlohmann::json out = {{"session_id", id},
                          {"batch_token", token_of(*slot)},
                          {"batch_size", slot->session.pending().size()},
                          {"completed", slot->session.stopped()},
                          {"curve", curve_json(slot->session)}};
    return {200, std::move(out)};
  }

  Reply get_batch(const std::string& session_id) const {
    auto slot = find(session_id);
    if (!slot) return error_reply(404, "unknown session '" + session_id + "'");
    std::lock_guard guard(slot->guard);
    const auto& s = slot->session;
    nlohmann::json instances = nlohmann::json::array();
    for (const auto& v : s.pending()) instances.push_back(display(s, v));
    return {200,
            {{"session_id", session_id},
             {"batch_token", token_of(*slot)},
             {"completed", s.stopped()},
             {"stop_reason", std::string(to_string(s.stop_reason()))},
             {"instances", std::move(instances)},
             {"progress",
              {{"iteration", s.iteration()},
               {"labeled_count", s.train().size()},
               {"pool_size", s.pool().size()}}}}};
  }

  // Exactly one concurrent submission per session proceeds; the others see
  // 409. A replayed batch token answers 409 with the recorded result.
  Reply post_labels(const std::string& session_id, const nlohmann::json& body) {
    auto slot = find(session_id);
    if (!slot) return error_reply(404, "unknown session '" + session_id + "'");
    std::unique_lock guard(slot->guard, std::try_to_lock);
    if (!guard.owns_lock()) return error_reply(409, "session is busy with another submission");

    std::string token;
    std::map<std::string, Label> labels;
    try {
      std::tie(token, labels) = parse_labels(body);
    } catch (const invalid_argument& e) {
      return error_reply(400, e.what());
    }
    if (auto it = slot->receipts.find(token); it != slot->receipts.end()) {
      Reply r = error_reply(409, "batch already submitted");
      r.body["result"] = it->second;
      return r;
    }
    auto& s = slot->session;
    if (s.stopped()) return error_reply(409, "session is complete");
    if (token != token_of(*slot)) return error_reply(409, "batch token does not match the pending batch");

    try {
      s.submit_labels(labels);
    } catch (const invalid_argument& e) {
      return error_reply(400, e.what());
    }
    const double acc = s.refit();
    if (!s.stopped()) s.select_batch();
    const auto& point = s.history().back();
    nlohmann::json result = {{"session_id", session_id},
                             {"batch_token", token},
                             {"point",
                              {{"iteration", point.iteration},
                               {"labeled_count", point.labeled_count},
                               {"accuracy", acc}}},
                             {"completed", s.stopped()},
                             {"stop_reason", std::string(to_string(s.stop_reason()))},
                             {"next", {{"batch_token", token_of(*slot)}, {"batch_size", s.pending().size()}}}};
    slot->receipts[token] = result;
    persist(*slot);
    return {200, std::move(result)};
  }

  Reply get_curve(const std::string& session_id) const {
    auto slot = find(session_id);
    if (!slot) return error_reply(404, "unknown session '" + session_id + "'");
    std::lock_guard guard(slot->guard);
    const auto& s = slot->session;
    return {200,
            {{"session_id", session_id},
             {"learner", std::string(to_string(s.config().learner.kind))},
             {"strategy", std::string(to_string(s.config().strategy))},
             {"seed", s.config().seed},
             {"points", curve_json(s)}}};
  }

  Reply get_scorecard(const std::string& user_id) const {
    const auto* e = ws_->find(user_id);
    if (!e) return error_reply(404, "unknown user '" + user_id + "'");
    auto j = scorecard_to_json(e->card);
    j["screen_name"] = e->user.screen_name;
    return {200, std::move(j)};
  }

 private:
  struct Slot {
    Slot(std::string id_, std::int64_t created_, Session session_)
        : id(std::move(id_)), created(created_), session(std::move(session_)) {}

    mutable std::mutex guard;
    std::string id;
    std::int64_t created = 0;
    Session session;
    std::map<std::string, nlohmann::json> receipts;
  };

  static std::int64_t now_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  // Tokens name a query round, so each selected batch gets a fresh one.
  static std::string token_of(const Slot& slot) {
    const auto& s = slot.session;
    if (s.pending().empty()) return "";
    return slot.id + "-b" + std::to_string(s.queries().size());
  }

  static nlohmann::json curve_json(const Session& s) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.history())
      pts.push_back({{"iteration", p.iteration}, {"labeled_count", p.labeled_count}, {"accuracy", p.accuracy}});
    return pts;
  }

  nlohmann::json display(const Session& s, const FeatureVector& v) const {
    const auto p = s.model().proba(v.values);
    nlohmann::json j = {{"user_id", v.user_id},
                        {"features", features_to_json(v.values)},
                        {"probability",
                         {{"trustworthy", p.p_trustworthy()}, {"untrustworthy", p.p_untrustworthy()}}}};
    if (const auto* e = ws_->find(v.user_id)) {
      j["screen_name"] = e->user.screen_name;
      j["raw_features"] = features_to_json(feature_row(e->card, e->user));
      j["scorecard"] = scorecard_to_json(e->card);
      nlohmann::json tw = nlohmann::json::array();
      for (const auto& t : e->sample_tweets) tw.push_back(tweet_to_json(t));
      j["sample_tweets"] = std::move(tw);
    } else {
      j["raw_features"] = nullptr;
      j["scorecard"] = nullptr;
      j["sample_tweets"] = nlohmann::json::array();
    }
    return j;
  }

  SessionConfig parse_create(const nlohmann::json& body) const {
    if (!body.is_object()) throw invalid_argument("request body must be an object");
    static const char* kKeys[] = {"learner", "strategy", "batch_size", "seed", "max_iterations",
                                  "patience", "min_delta", "dataset"};
    for (const auto& [k, _] : body.items())
      if (std::find(std::begin(kKeys), std::end(kKeys), k) == std::end(kKeys))
        throw invalid_argument("unknown field '" + k + "'");

    auto text = [&](const char* key, const char* fallback) {
      if (!body.contains(key)) return std::string(fallback);
      if (!body[key].is_string()) throw invalid_argument(std::string(key) + " must be a string");
      return body[key].get<std::string>();
    };
    auto count = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
      if (!body.contains(key)) return fallback;
      const auto& v = body[key];
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw invalid_argument(std::string(key) + " must be a non-negative integer");
      return v.get<std::uint64_t>();
    };

    if (body.contains("dataset")) {
      const auto ref = text("dataset", "");
      if (ref != ws_->dataset_name()) throw not_found("unknown dataset '" + ref + "'");
    }
    SessionConfig cfg;
    const auto learner = text("learner", "forest");
    const auto kind = parse_learner(learner);
    if (!kind) throw invalid_argument("unknown learner '" + learner + "'");
    cfg.learner.kind = *kind;
    const auto strategy = text("strategy", "entropy");
    const auto strat = parse_strategy(strategy);
    if (!strat) throw invalid_argument("unknown strategy '" + strategy + "'");
    cfg.strategy = *strat;
    cfg.batch_size = count("batch_size", cfg.batch_size);
    cfg.seed = count("seed", 0);
    cfg.max_iterations = count("max_iterations", cfg.max_iterations);
    cfg.patience = count("patience", cfg.patience);
    if (body.contains("min_delta")) {
      if (!body["min_delta"].is_number()) throw invalid_argument("min_delta must be a number");
      cfg.min_delta = body["min_delta"].get<double>();
    }
    if (cfg.max_iterations == 0) throw invalid_argument("max_iterations must be positive");
    cfg.validate();
    return cfg;
  }

  static std::pair<std::string, std::map<std::string, Label>> parse_labels(const nlohmann::json& body) {
    if (!body.is_object()) throw invalid_argument("request body must be an object");
    if (!body.contains("batch_token") || !body["batch_token"].is_string())
      throw invalid_argument("batch_token must be a string");
    if (!body.contains("labels") || !body["labels"].is_object())
      throw invalid_argument("labels must be an object mapping user_id to label");
    std::map<std::string, Label> labels;
    for (const auto& [id, v] : body["labels"].items()) {
      std::optional<Label> l;
      if (v.is_string()) l = parse_label(v.get<std::string>());
      else if (v.is_number_integer() && (v == 0 || v == 1)) l = static_cast<Label>(v.get<int>());
      if (!l) throw invalid_argument("invalid label for '" + id + "'");
      labels.emplace(id, *l);
    }
    return {body["batch_token"].get<std::string>(), std::move(labels)};
  }

  std::shared_ptr<Slot> find(const std::string& id) const {
    std::shared_lock lk(map_mu_);
    auto it = slots_.find(id);
    return it == slots_.end() ? nullptr : it->second;
  }

  std::string next_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(++counter_));
    return buf;
  }

  std::filesystem::path sessions_dir() const { return std::filesystem::path(dir_) / "sessions"; }

  // Write to a temporary file and rename, so a crash leaves either the old
  // or the new snapshot.
  void persist(const Slot& slot) const {
    if (dir_.empty()) return;
    nlohmann::json receipts = nlohmann::json::object();
    for (const auto& [tok, r] : slot.receipts) receipts[tok] = r;
    nlohmann::json doc = {{"format", "trustscore-session"},
                          {"version", kSessionFileVersion},
                          {"session_id", slot.id},
                          {"created", slot.created},
                          {"dataset", ws_->dataset_name()},
                          {"state", slot.session.state_to_json()},
                          {"receipts", std::move(receipts)}};
    const auto final_path = sessions_dir() / (slot.id + ".json");
    auto tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << doc.dump() << '\n';
      out.flush();
      if (!out) throw error("cannot write session snapshot '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, final_path);
  }

  void restore() {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(sessions_dir()))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
      std::ifstream in(path, std::ios::binary);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw format_error("session snapshot '" + path.string() + "': " + e.what());
      }
      try {
        if (doc.at("format") != "trustscore-session") throw format_error("not a session snapshot");
        if (doc.at("version").get<int>() != kSessionFileVersion)
          throw version_error("unsupported session snapshot version");
        if (doc.at("dataset").get<std::string>() != ws_->dataset_name())
          throw format_error("snapshot belongs to dataset '" + doc.at("dataset").get<std::string>() + "'");
        const auto id = doc.at("session_id").get<std::string>();
        auto slot = std::make_shared<Slot>(id, doc.at("created").get<std::int64_t>(),
                                           Session::from_state(ws_->dataset(), doc.at("state")));
        for (const auto& [tok, r] : doc.at("receipts").items()) slot->receipts[tok] = r;
        if (id.size() > 1 && id[0] == 's')
          counter_ = std::max<std::uint64_t>(counter_, std::stoull(id.substr(1)));
        slots_.emplace(id, std::move(slot));
      } catch (const std::exception& e) {
        throw format_error("session snapshot '" + path.string() + "': " + e.what());
      }
    }
  }

  std::shared_ptr<const Workspace> ws_;
  std::string dir_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::uint64_t counter_ = 0;
};

}  // namespace trust
