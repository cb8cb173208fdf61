// Random forest of Gini decision trees over feature rows.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "probability.hpp"

namespace trust {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 2;
  std::size_t feature_subsample = 5;  // ceil(sqrt(19))
  bool bootstrap = true;

  bool operator==(const ForestParams&) const = default;
};

// Flat node array; node 0 is the root. A leaf has feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t n_untrustworthy = 0;
  std::uint32_t n_trustworthy = 0;

  bool is_leaf() const { return feature < 0; }
  double trust_fraction() const {
    return static_cast<double>(n_trustworthy) /
           static_cast<double>(n_trustworthy + n_untrustworthy);
  }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(const FeatureRow& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                      : n.right);
    }
    return nodes[i];
  }
  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  ForestParams params;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  bool operator==(const ForestModel&) const = default;
};

namespace detail {

struct Sample {
  const FeatureRow* x;
  bool trust;
};

inline double gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0.0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
 public:
  TreeBuilder(const ForestParams& params, std::uint64_t tree_seed)
      : params_(params), seed_(tree_seed) {}

  DecisionTree build(std::vector<Sample> samples) {
    tree_.nodes.clear();
    grow(samples, 0, 1);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  // Each node draws its feature subset from its own stream keyed by its
  // heap position, so a deeper tree extends a shallower one on the same data.
  std::vector<std::size_t> candidate_features(std::uint64_t heap_pos) const {
    std::vector<std::size_t> feats(kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) feats[f] = f;
    const auto k = std::min(params_.feature_subsample, kFeatureCount);
    if (k < kFeatureCount) {
      SplitMix64 rng(derive_seed(seed_, heap_pos));
      for (std::size_t i = 0; i < k; ++i) {
        auto j = i + uniform_index(rng, kFeatureCount - i);
        std::swap(feats[i], feats[j]);
      }
      feats.resize(k);
    }
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  Split best_split(std::vector<Sample>& samples, std::uint64_t heap_pos) const {
    Split best;
    const std::size_t n = samples.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    if (n < 2 * min_leaf) return best;
    double total1 = 0.0;
    for (const auto& s : samples) total1 += s.trust ? 1.0 : 0.0;
    const double total0 = static_cast<double>(n) - total1;
    const double parent = gini(total0, total1);
    if (parent <= 0.0) return best;

    for (std::size_t f : candidate_features(heap_pos)) {
      std::sort(samples.begin(), samples.end(),
                [f](const Sample& a, const Sample& b) { return (*a.x)[f] < (*b.x)[f]; });
      double left0 = 0.0, left1 = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        (samples[i].trust ? left1 : left0) += 1.0;
        const double a = (*samples[i].x)[f];
        const double b = (*samples[i + 1].x)[f];
        const std::size_t n_left = i + 1;
        if (a == b || n_left < min_leaf || n - n_left < min_leaf) continue;
        const double right0 = total0 - left0, right1 = total1 - left1;
        const double nl = static_cast<double>(n_left), nr = static_cast<double>(n - n_left);
        const double child =
            (nl * gini(left0, left1) + nr * gini(right0, right1)) / static_cast<double>(n);
        const double gain = parent - child;
        if (gain > best.gain + 1e-12) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {static_cast<int>(f), mid, gain};
        }
      }
    }
    return best;
  }

  std::int32_t grow(std::vector<Sample>& samples, std::size_t depth, std::uint64_t heap_pos) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::uint32_t n1 = 0;
    for (const auto& s : samples) n1 += s.trust ? 1u : 0u;
    tree_.nodes[static_cast<std::size_t>(index)].n_trustworthy = n1;
    tree_.nodes[static_cast<std::size_t>(index)].n_untrustworthy =
        static_cast<std::uint32_t>(samples.size()) - n1;

    if (depth >= params_.max_depth) return index;
    Split s = best_split(samples, heap_pos);
    if (s.feature < 0) return index;

    std::vector<Sample> left, right;
    for (const auto& smp : samples)
      ((*smp.x)[static_cast<std::size_t>(s.feature)] <= s.threshold ? left : right).push_back(smp);
    samples.clear();
    samples.shrink_to_fit();

    const auto l = grow(left, depth + 1, 2 * heap_pos);
    const auto r = grow(right, depth + 1, 2 * heap_pos + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  ForestParams params_;
  std::uint64_t seed_;
  DecisionTree tree_;
};

}  // namespace detail

inline ForestModel train_forest(std::span<const FeatureVector> train, const ForestParams& params,
                                std::uint64_t seed) {
  detail::require_both_classes(train, "train_forest");
  if (train.size() < 2) throw invalid_argument("train_forest: need at least 2 examples");
  if (params.n_trees == 0) throw invalid_argument("train_forest: n_trees must be positive");
  if (params.feature_subsample == 0)
    throw invalid_argument("train_forest: feature_subsample must be positive");

  ForestModel model;
  model.params = params;
  model.seed = seed;
  model.trees.reserve(params.n_trees);
  const auto n = train.size();
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const auto tree_seed = derive_seed(seed, t);
    std::vector<detail::Sample> samples;
    samples.reserve(n);
    if (params.bootstrap) {
      std::mt19937_64 rng(derive_seed(tree_seed, 0xb007));
      for (std::size_t i = 0; i < n; ++i) {
        const auto& v = train[uniform_index(rng, n)];
        samples.push_back({&v.values, *v.label == Label::trustworthy});
      }
    } else {
      for (const auto& v : train) samples.push_back({&v.values, *v.label == Label::trustworthy});
    }
    model.trees.push_back(detail::TreeBuilder(params, tree_seed).build(std::move(samples)));
  }
  return model;
}

// Mean over trees of the trustworthy fraction in the reached leaf.
inline ProbEstimate forest_proba(const ForestModel& model, const FeatureRow& x) {
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.leaf_for(x).trust_fraction();
  return ProbEstimate(sum / static_cast<double>(model.trees.size()));
}

inline Label forest_predict(const ForestModel& model, const FeatureRow& x) {
  return forest_proba(model, x).p_trustworthy() > 0.5 ? Label::trustworthy : Label::untrustworthy;
}

inline nlohmann::json forest_params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"min_samples_leaf", p.min_samples_leaf},
          {"feature_subsample", p.feature_subsample},
          {"bootstrap", p.bootstrap}};
}

inline ForestParams forest_params_from_json(const nlohmann::json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  p.feature_subsample = j.at("feature_subsample").get<std::size_t>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  return p;
}

// Each node is [feature, threshold, left, right, n_untrustworthy, n_trustworthy]
// with the threshold in shortest round-trip text.
inline nlohmann::json forest_to_json(const ForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({n.feature, format_double(n.threshold), n.left, n.right, n.n_untrustworthy,
                       n.n_trustworthy});
    trees.push_back(std::move(nodes));
  }
  return {{"params", forest_params_to_json(m.params)},
          {"seed", m.seed},
          {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel m;
  m.params = forest_params_from_json(j.at("params"));
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    for (const auto& jn : jt) {
      TreeNode n;
      n.feature = jn.at(0).get<int>();
      auto th = parse_double(jn.at(1).get<std::string>());
      if (!th) throw format_error("forest snapshot: bad threshold");
      n.threshold = *th;
      n.left = jn.at(2).get<std::int32_t>();
      n.right = jn.at(3).get<std::int32_t>();
      n.n_untrustworthy = jn.at(4).get<std::uint32_t>();
      n.n_trustworthy = jn.at(5).get<std::uint32_t>();
      if (n.n_untrustworthy + n.n_trustworthy == 0) throw format_error("forest snapshot: empty node");
      t.nodes.push_back(n);
    }
    const auto size = static_cast<std::int32_t>(t.nodes.size());
    if (size == 0) throw format_error("forest snapshot: empty tree");
    for (const auto& n : t.nodes)
      if (!n.is_leaf() && (n.feature >= static_cast<int>(kFeatureCount) || n.left <= 0 ||
                           n.right <= 0 || n.left >= size || n.right >= size))
        throw format_error("forest snapshot: bad node reference");
    m.trees.push_back(std::move(t));
  }
  if (m.trees.empty()) throw format_error("forest snapshot: no trees");
  return m;
}

}  // namespace trust
