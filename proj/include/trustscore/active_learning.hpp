// Pool-based active learning: query strategies, sessions, oracles and the
// learning curve.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "learners.hpp"
#include "probability.hpp"

namespace trust {

enum class Strategy { uncertainty, margin, entropy, random };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::uncertainty: return "uncertainty";
    case Strategy::margin: return "margin";
    case Strategy::entropy: return "entropy";
    case Strategy::random: return "random";
  }
  return "random";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "uncertainty") return Strategy::uncertainty;
  if (s == "margin") return Strategy::margin;
  if (s == "entropy") return Strategy::entropy;
  if (s == "random") return Strategy::random;
  return std::nullopt;
}

// Scores over a full class distribution. Higher uncertainty or entropy means
// more informative; for margin the smallest value is queried first.

inline double uncertainty_score(std::span<const double> probs) {
  return 1.0 - *std::max_element(probs.begin(), probs.end());
}

inline double margin_score(std::span<const double> probs) {
  double first = -1.0, second = -1.0;
  for (double p : probs) {
    if (p > first) {
      second = first;
      first = p;
    } else if (p > second) {
      second = p;
    }
  }
  return probs.size() < 2 ? first : first - second;
}

inline double entropy_score(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

inline std::array<double, 2> distribution(const ProbEstimate& p) {
  return {p.p_trustworthy(), p.p_untrustworthy()};
}

inline double uncertainty_score(const ProbEstimate& p) { return uncertainty_score(distribution(p)); }
inline double margin_score(const ProbEstimate& p) { return margin_score(distribution(p)); }
inline double entropy_score(const ProbEstimate& p) { return entropy_score(distribution(p)); }

inline double strategy_score(Strategy s, const ProbEstimate& p) {
  switch (s) {
    case Strategy::uncertainty: return uncertainty_score(p);
    case Strategy::margin: return margin_score(p);
    case Strategy::entropy: return entropy_score(p);
    case Strategy::random: return 0.0;
  }
  return 0.0;
}

// Indices of the k most informative estimates under a score-based strategy,
// most informative first; equal scores go to the lower id.
inline std::vector<std::size_t> top_k(Strategy s, std::span<const ProbEstimate> probs,
                                      std::span<const std::string> ids, std::size_t k) {
  if (s == Strategy::random) throw invalid_argument("top_k: random strategy has no ranking");
  if (probs.size() != ids.size()) throw invalid_argument("top_k: size mismatch");
  std::vector<double> score(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) score[i] = strategy_score(s, probs[i]);
  const bool ascending = s == Strategy::margin;
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (score[a] != score[b])
                        return ascending ? score[a] < score[b] : score[a] > score[b];
                      return ids[a] < ids[b];
                    });
  order.resize(k);
  return order;
}

// Label source for queried instances. The interactive kind never answers;
// its labels arrive through Session::submit_labels.
class Oracle {
 public:
  static Oracle simulated(LabelRule rule) { return Oracle(std::move(rule)); }
  static Oracle table(std::unordered_map<std::string, Label> truth) { return Oracle(std::move(truth)); }
  static Oracle interactive() { return Oracle(std::monostate{}); }

  bool is_interactive() const { return std::holds_alternative<std::monostate>(impl_); }

  Label label(const FeatureVector& v) const {
    if (const auto* rule = std::get_if<LabelRule>(&impl_)) return rule->label(v);
    if (const auto* truth = std::get_if<std::unordered_map<std::string, Label>>(&impl_)) {
      auto it = truth->find(v.user_id);
      if (it == truth->end()) throw not_found("oracle has no label for '" + v.user_id + "'");
      return it->second;
    }
    throw invalid_argument("interactive oracle cannot label automatically");
  }

 private:
  using Impl = std::variant<std::monostate, LabelRule, std::unordered_map<std::string, Label>>;
  explicit Oracle(Impl impl) : impl_(std::move(impl)) {}
  Impl impl_;
};

struct SessionConfig {
  LearnerConfig learner;
  Strategy strategy = Strategy::entropy;
  std::size_t batch_size = 100;
  std::size_t max_iterations = 100;
  double min_delta = 0.001;  // plateau threshold on accuracy gain
  std::size_t patience = 5;  // 0 disables the plateau stop
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size == 0) throw invalid_argument("batch_size must be positive");
    if (!(min_delta >= 0.0)) throw invalid_argument("min_delta must be non-negative");
  }
};

struct CurvePoint {
  std::size_t iteration = 0;
  std::size_t labeled_count = 0;
  double accuracy = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

struct QueryRecord {
  std::size_t iteration = 0;  // iteration whose model chose the batch
  std::vector<std::string> ids;
  bool operator==(const QueryRecord&) const = default;
};

enum class StopReason { none, max_iterations, pool_exhausted, plateau };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::pool_exhausted: return "pool_exhausted";
    case StopReason::plateau: return "plateau";
  }
  return "none";
}

// Active-learning state. Construction trains the seed model and records
// the initial test accuracy as iteration 0. A session has one writer.
class Session {
 public:
  Session(SplitDataset dataset, SessionConfig config)
      : config_(std::move(config)), data_(std::move(dataset)) {
    config_.validate();
    if (data_.test_labeled.empty()) throw invalid_argument("session: empty test set");
    for (const auto* part : {&data_.train_labeled, &data_.test_labeled})
      for (const auto& v : *part)
        if (!v.label) throw invalid_argument("session: unlabeled vector '" + v.user_id + "' in labeled set");
    for (auto& v : data_.pool_unlabeled) v.label.reset();
    std::unordered_set<std::string> ids;
    for (const auto* part : {&data_.train_labeled, &data_.test_labeled, &data_.pool_unlabeled})
      for (const auto& v : *part)
        if (!ids.insert(v.user_id).second)
          throw invalid_argument("session: duplicate instance id '" + v.user_id + "'");
    total_ = ids.size();
    refit();
  }

  const SessionConfig& config() const { return config_; }
  const SplitDataset& dataset() const { return data_; }
  const std::vector<FeatureVector>& train() const { return data_.train_labeled; }
  const std::vector<FeatureVector>& test() const { return data_.test_labeled; }
  const std::vector<FeatureVector>& pool() const { return data_.pool_unlabeled; }
  const std::vector<FeatureVector>& pending() const { return pending_; }
  const std::vector<CurvePoint>& history() const { return history_; }
  const std::vector<QueryRecord>& queries() const { return queries_; }
  const Model& model() const { return *model_; }
  std::size_t iteration() const { return iteration_; }
  StopReason stop_reason() const { return stop_; }
  bool stopped() const { return stop_ != StopReason::none; }
  bool early_stopped() const { return stop_ == StopReason::plateau; }

  std::size_t instance_count() const {
    return data_.train_labeled.size() + data_.test_labeled.size() + data_.pool_unlabeled.size() +
           pending_.size();
  }
  std::size_t expected_instance_count() const { return total_; }

  // Moves the next batch from the pool to pending and returns its ids.
  std::vector<std::string> select_batch() {
    if (!pending_.empty()) throw conflict("select_batch: a batch is already pending");
    if (data_.pool_unlabeled.empty()) throw invalid_argument("select_batch: pool is empty");
    auto& pool = data_.pool_unlabeled;
    const std::size_t k = std::min(config_.batch_size, pool.size());

    std::vector<std::size_t> chosen;
    if (config_.strategy == Strategy::random) {
      std::vector<std::size_t> idx(pool.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::mt19937_64 rng(derive_seed(config_.seed ^ 0x7a6d0ULL, iteration_));
      for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
      chosen.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      std::vector<ProbEstimate> probs;
      std::vector<std::string> ids;
      probs.reserve(pool.size());
      ids.reserve(pool.size());
      for (const auto& v : pool) {
        probs.push_back(model_->proba(v.values));
        ids.push_back(v.user_id);
      }
      chosen = top_k(config_.strategy, probs, ids, k);
    }

    std::vector<char> take(pool.size(), 0);
    QueryRecord rec{iteration_, {}};
    for (auto i : chosen) {
      take[i] = 1;
      rec.ids.push_back(pool[i].user_id);
      pending_.push_back(pool[i]);
    }
    std::vector<FeatureVector> rest;
    rest.reserve(pool.size() - k);
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!take[i]) rest.push_back(std::move(pool[i]));
    pool = std::move(rest);
    queries_.push_back(rec);
    return rec.ids;
  }

  // Labels must cover the pending batch exactly; labeled instances move to
  // the training set in batch order.
  void submit_labels(const std::map<std::string, Label>& labels) {
    if (pending_.empty()) throw conflict("submit_labels: no pending batch");
    std::vector<std::string> missing, extra;
    std::unordered_set<std::string_view> pending_ids;
    for (const auto& v : pending_) {
      pending_ids.insert(v.user_id);
      if (!labels.count(v.user_id)) missing.push_back(v.user_id);
    }
    for (const auto& [id, _] : labels)
      if (!pending_ids.count(id)) extra.push_back(id);
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "submit_labels: label set does not match pending batch";
      if (!missing.empty()) msg += "; missing: " + join(missing);
      if (!extra.empty()) msg += "; not pending: " + join(extra);
      throw invalid_argument(msg);
    }
    for (auto& v : pending_) {
      v.label = labels.at(v.user_id);
      data_.train_labeled.push_back(std::move(v));
    }
    pending_.clear();
  }

  // Retrains on the current labeled set, evaluates on the test set and
  // appends a curve point. Returns the test accuracy.
  double refit() {
    if (!pending_.empty()) throw conflict("refit: pending batch has not been labeled");
    if (model_) ++iteration_;
    model_.emplace(train_model(data_.train_labeled, config_.learner, derive_seed(config_.seed, iteration_)));
    const double acc = evaluate(*model_, data_.test_labeled);
    history_.push_back({iteration_, data_.train_labeled.size(), acc});
    update_stop();
    return acc;
  }

  nlohmann::json state_to_json() const;
  static Session from_state(const SplitDataset& base, const nlohmann::json& state);

 private:
  static std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
    return s;
  }

  void update_stop() {
    if (iteration_ >= config_.max_iterations) {
      stop_ = StopReason::max_iterations;
    } else if (data_.pool_unlabeled.empty() && pending_.empty()) {
      stop_ = StopReason::pool_exhausted;
    } else if (config_.patience > 0 && history_.size() > config_.patience) {
      const auto split = history_.end() - static_cast<std::ptrdiff_t>(config_.patience);
      auto acc_less = [](const CurvePoint& a, const CurvePoint& b) { return a.accuracy < b.accuracy; };
      const double before = std::max_element(history_.begin(), split, acc_less)->accuracy;
      const double recent = std::max_element(split, history_.end(), acc_less)->accuracy;
      if (recent - before < config_.min_delta) stop_ = StopReason::plateau;
    }
  }

  struct RestoreTag {};
  Session(RestoreTag, SessionConfig config) : config_(std::move(config)) {}

  SessionConfig config_;
  SplitDataset data_;
  std::vector<FeatureVector> pending_;
  std::vector<CurvePoint> history_;
  std::vector<QueryRecord> queries_;
  std::optional<Model> model_;
  std::size_t iteration_ = 0;
  std::size_t total_ = 0;
  StopReason stop_ = StopReason::none;
};

// Labels the pending batch (querying one first if needed) with a simulated
// oracle, then retrains. Returns the new test accuracy.
inline double al_step(Session& s, const Oracle& oracle) {
  if (s.stopped()) throw conflict("al_step: session is complete");
  if (oracle.is_interactive())
    throw invalid_argument("al_step: interactive oracles label through submit_labels");
  if (s.pending().empty()) s.select_batch();
  std::map<std::string, Label> labels;
  for (const auto& v : s.pending()) labels.emplace(v.user_id, oracle.label(v));
  s.submit_labels(labels);
  return s.refit();
}

inline void al_run(Session& s, const Oracle& oracle) {
  while (!s.stopped()) al_step(s, oracle);
}

// ---------------------------------------------------------------------------
// Learning-curve table: iteration,labeled_count,accuracy,strategy,learner,seed

inline void write_curve_header(std::ostream& out) {
  out << "iteration,labeled_count,accuracy,strategy,learner,seed\n";
}

inline void write_curve_rows(std::ostream& out, std::span<const CurvePoint> history, Strategy strategy,
                             LearnerKind learner, std::uint64_t seed) {
  for (const auto& p : history)
    out << p.iteration << ',' << p.labeled_count << ',' << format_double(p.accuracy) << ','
        << to_string(strategy) << ',' << to_string(learner) << ',' << seed << '\n';
}

// ---------------------------------------------------------------------------
// Session state persistence. Instances are stored by id; vectors come from
// the base dataset the session was created from.

inline nlohmann::json session_config_to_json(const SessionConfig& c) {
  return {{"learner", std::string(to_string(c.learner.kind))},
          {"forest", forest_params_to_json(c.learner.forest)},
          {"svm",
           {{"lambda", format_double(c.learner.svm.lambda)},
            {"epochs", c.learner.svm.epochs},
            {"calibration_fraction", format_double(c.learner.svm.calibration_fraction)}}},
          {"strategy", std::string(to_string(c.strategy))},
          {"batch_size", c.batch_size},
          {"max_iterations", c.max_iterations},
          {"min_delta", format_double(c.min_delta)},
          {"patience", c.patience},
          {"seed", c.seed}};
}

inline SessionConfig session_config_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    auto d = parse_double(v.get<std::string>());
    if (!d) throw format_error("session config: bad number");
    return *d;
  };
  SessionConfig c;
  auto kind = parse_learner(j.at("learner").get<std::string>());
  auto strat = parse_strategy(j.at("strategy").get<std::string>());
  if (!kind || !strat) throw format_error("session config: unknown learner or strategy");
  c.learner.kind = *kind;
  c.learner.forest = forest_params_from_json(j.at("forest"));
  c.learner.svm.lambda = num(j.at("svm").at("lambda"));
  c.learner.svm.epochs = j.at("svm").at("epochs").get<std::size_t>();
  c.learner.svm.calibration_fraction = num(j.at("svm").at("calibration_fraction"));
  c.strategy = *strat;
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.min_delta = num(j.at("min_delta"));
  c.patience = j.at("patience").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json Session::state_to_json() const {
  auto ids = [](const std::vector<FeatureVector>& vs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& v : vs) a.push_back(v.user_id);
    return a;
  };
  nlohmann::json train = nlohmann::json::array();
  for (const auto& v : data_.train_labeled) train.push_back({v.user_id, to_int(*v.label)});
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& p : history_) hist.push_back({p.iteration, p.labeled_count, format_double(p.accuracy)});
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : queries_) qs.push_back({{"iteration", q.iteration}, {"ids", q.ids}});
  return {{"config", session_config_to_json(config_)},
          {"train", std::move(train)},
          {"test", ids(data_.test_labeled)},
          {"pool", ids(data_.pool_unlabeled)},
          {"pending", ids(pending_)},
          {"history", std::move(hist)},
          {"queries", std::move(qs)},
          {"iteration", iteration_},
          {"stop", std::string(to_string(stop_))}};
}

// Rebuilds a session from a saved state. The model is retrained with the
// recorded iteration's seed, which reproduces it exactly.
inline Session Session::from_state(const SplitDataset& base, const nlohmann::json& state) {
  try {
    Session s(RestoreTag{}, session_config_from_json(state.at("config")));
    std::unordered_map<std::string_view, const FeatureVector*> by_id;
    for (const auto* part : {&base.train_labeled, &base.test_labeled, &base.pool_unlabeled})
      for (const auto& v : *part) by_id.emplace(v.user_id, &v);
    auto fetch = [&](const std::string& id) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw format_error("session state: unknown instance '" + id + "'");
      return *it->second;
    };
    s.data_.normalization = base.normalization;
    for (const auto& e : state.at("train")) {
      auto v = fetch(e.at(0).get<std::string>());
      v.label = static_cast<Label>(e.at(1).get<int>());
      s.data_.train_labeled.push_back(std::move(v));
    }
    for (const auto& id : state.at("test")) {
      auto v = fetch(id.get<std::string>());
      if (!v.label) throw format_error("session state: unlabeled test instance");
      s.data_.test_labeled.push_back(std::move(v));
    }
    for (const auto& id : state.at("pool")) {
      auto v = fetch(id.get<std::string>());
      v.label.reset();
      s.data_.pool_unlabeled.push_back(std::move(v));
    }
    for (const auto& id : state.at("pending")) {
      auto v = fetch(id.get<std::string>());
      v.label.reset();
      s.pending_.push_back(std::move(v));
    }
    for (const auto& p : state.at("history")) {
      auto acc = parse_double(p.at(2).get<std::string>());
      if (!acc) throw format_error("session state: bad accuracy");
      s.history_.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>(), *acc});
    }
    for (const auto& q : state.at("queries"))
      s.queries_.push_back({q.at("iteration").get<std::size_t>(), q.at("ids").get<std::vector<std::string>>()});
    s.iteration_ = state.at("iteration").get<std::size_t>();
    const auto stop = state.at("stop").get<std::string>();
    for (auto r : {StopReason::none, StopReason::max_iterations, StopReason::pool_exhausted, StopReason::plateau})
      if (to_string(r) == stop) s.stop_ = r;
    s.total_ = s.instance_count();
    s.model_.emplace(train_model(s.data_.train_labeled, s.config_.learner,
                                 derive_seed(s.config_.seed, s.iteration_)));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("session state: ") + e.what());
  }
}

}  // namespace trust
