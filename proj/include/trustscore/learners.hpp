// Learner-agnostic facade over the forest and the linear SVM, plus model
// snapshot files.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "forest.hpp"
#include "probability.hpp"
#include "svm.hpp"

namespace trust {

enum class LearnerKind { forest, svm };

inline std::string_view to_string(LearnerKind k) { return k == LearnerKind::forest ? "forest" : "svm"; }

inline std::optional<LearnerKind> parse_learner(std::string_view s) {
  if (s == "forest" || s == "rfc") return LearnerKind::forest;
  if (s == "svm") return LearnerKind::svm;
  return std::nullopt;
}

struct LearnerConfig {
  LearnerKind kind = LearnerKind::forest;
  ForestParams forest;
  SvmParams svm;
};

inline constexpr int kModelSnapshotVersion = 1;

class Model {
 public:
  explicit Model(ForestModel m) : impl_(std::move(m)) {}
  explicit Model(LinearModel m) : impl_(std::move(m)) {}

  LearnerKind kind() const {
    return std::holds_alternative<ForestModel>(impl_) ? LearnerKind::forest : LearnerKind::svm;
  }

  ProbEstimate proba(const FeatureRow& x) const {
    return std::visit(
        [&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ForestModel>)
            return forest_proba(m, x);
          else
            return svm_proba(m, x);
        },
        impl_);
  }

  Label predict(const FeatureRow& x) const {
    return std::visit(
        [&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ForestModel>)
            return forest_predict(m, x);
          else
            return svm_predict(m, x);
        },
        impl_);
  }

  const ForestModel* forest() const { return std::get_if<ForestModel>(&impl_); }
  const LinearModel* linear() const { return std::get_if<LinearModel>(&impl_); }

  bool operator==(const Model&) const = default;

 private:
  std::variant<ForestModel, LinearModel> impl_;
};

inline Model train_model(std::span<const FeatureVector> train, const LearnerConfig& cfg,
                         std::uint64_t seed) {
  if (cfg.kind == LearnerKind::forest) return Model(train_forest(train, cfg.forest, seed));
  return Model(train_svm(train, cfg.svm, seed));
}

// Accuracy of the model on labeled vectors.
inline double evaluate(const Model& model, std::span<const FeatureVector> labeled) {
  std::vector<Label> pred, truth;
  pred.reserve(labeled.size());
  truth.reserve(labeled.size());
  for (const auto& v : labeled) {
    if (!v.label) throw invalid_argument("evaluate: unlabeled vector '" + v.user_id + "'");
    pred.push_back(model.predict(v.values));
    truth.push_back(*v.label);
  }
  return accuracy(pred, truth);
}

inline nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j = {{"format", "trustscore-model"},
                      {"version", kModelSnapshotVersion},
                      {"kind", std::string(to_string(m.kind()))}};
  j["model"] = m.forest() ? forest_to_json(*m.forest()) : svm_to_json(*m.linear());
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "trustscore-model") throw format_error("not a model snapshot");
    const int v = j.at("version").get<int>();
    if (v != kModelSnapshotVersion)
      throw version_error("model snapshot version " + std::to_string(v) + " unsupported");
    auto kind = parse_learner(j.at("kind").get<std::string>());
    if (!kind) throw format_error("unknown model kind");
    if (*kind == LearnerKind::forest) return Model(forest_from_json(j.at("model")));
    return Model(svm_from_json(j.at("model")));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("model snapshot: ") + e.what());
  }
}

// Snapshot text is a pure function of the model, so equal models give equal
// bytes.
inline std::string model_snapshot(const Model& m) { return model_to_json(m).dump(); }

inline void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write model '" + path + "'");
  out << model_snapshot(m) << '\n';
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw not_found("cannot open model '" + path + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("model snapshot: ") + e.what());
  }
}

}  // namespace trust
