// Linear soft-margin SVM trained by stochastic subgradient descent on the
// regularized hinge loss, with sigmoid probability calibration.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "probability.hpp"

namespace trust {

struct SvmParams {
  double lambda = 1e-3;
  std::size_t epochs = 200;
  double calibration_fraction = 0.2;

  bool operator==(const SvmParams&) const = default;
};

struct Calibration {
  double a = -1.0;
  double b = 0.0;

  // 1 / (1 + exp(a*m + b)), evaluated without overflow.
  double probability(double margin) const {
    const double z = a * margin + b;
    if (z >= 0.0) {
      const double e = std::exp(-z);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
  }
  bool operator==(const Calibration&) const = default;
};

struct LinearModel {
  SvmParams params;
  std::uint64_t seed = 0;
  FeatureRow weights{};
  double bias = 0.0;
  Calibration calibration;

  double margin(const FeatureRow& x) const {
    double m = bias;
    for (std::size_t f = 0; f < kFeatureCount; ++f) m += weights[f] * x[f];
    return m;
  }
  bool operator==(const LinearModel&) const = default;
};

namespace detail {

struct Hyperplane {
  FeatureRow w{};
  double b = 0.0;
};

// Pegasos: step 1/(lambda t), seeded reshuffle each epoch, projection onto
// the ball of radius 1/sqrt(lambda). The bias rides along as a constant
// feature and is regularized with the weights.
inline Hyperplane fit_hinge(std::span<const FeatureVector* const> data, const SvmParams& p,
                            std::uint64_t seed) {
  Hyperplane h;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  const double radius = 1.0 / std::sqrt(p.lambda);
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    portable_shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      ++t;
      const auto& v = *data[i];
      const double y = *v.label == Label::trustworthy ? 1.0 : -1.0;
      const double eta = 1.0 / (p.lambda * static_cast<double>(t));
      double m = h.b;
      for (std::size_t f = 0; f < kFeatureCount; ++f) m += h.w[f] * v.values[f];
      const double shrink = 1.0 - eta * p.lambda;
      for (auto& w : h.w) w *= shrink;
      h.b *= shrink;
      if (y * m < 1.0) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) h.w[f] += eta * y * v.values[f];
        h.b += eta * y;
      }
      double norm2 = h.b * h.b;
      for (double w : h.w) norm2 += w * w;
      if (norm2 > radius * radius) {
        const double s = radius / std::sqrt(norm2);
        for (auto& w : h.w) w *= s;
        h.b *= s;
      }
    }
  }
  return h;
}

}  // namespace detail

// Maximum-likelihood sigmoid fit of P(trustworthy | margin) with smoothed
// targets, by Newton steps with backtracking line search.
inline Calibration fit_sigmoid(std::span<const double> margins, std::span<const Label> labels) {
  const std::size_t n = margins.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (auto l : labels) (l == Label::trustworthy ? prior1 : prior0) += 1.0;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == Label::trustworthy ? hi_target : lo_target;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10, kSigma = 1e-12, kEps = 1e-5;
  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = margins[i] * aa + bb;
      f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };
  double fval = objective(a, b);

  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = margins[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += margins[i] * margins[i] * d2;
      h22 += d2;
      h21 += margins[i] * d2;
      const double d1 = t[i] - p;
      g1 += margins[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return {a, b};
}

// Calibration is fitted on a stratified held-out fold (calibration_fraction
// of each class) using a model trained on the rest; the returned weights
// come from a refit on the full training set.
inline LinearModel train_svm(std::span<const FeatureVector> train, const SvmParams& params,
                             std::uint64_t seed) {
  detail::require_both_classes(train, "train_svm");
  if (!(params.lambda > 0.0)) throw invalid_argument("train_svm: lambda must be positive");
  if (params.epochs == 0) throw invalid_argument("train_svm: epochs must be positive");
  if (!(params.calibration_fraction >= 0.0 && params.calibration_fraction < 1.0))
    throw invalid_argument("train_svm: calibration_fraction must be in [0,1)");

  std::vector<const FeatureVector*> pos, neg;
  for (const auto& v : train) (*v.label == Label::trustworthy ? pos : neg).push_back(&v);
  std::mt19937_64 rng(derive_seed(seed, 0xca1));
  portable_shuffle(pos.begin(), pos.end(), rng);
  portable_shuffle(neg.begin(), neg.end(), rng);

  std::vector<const FeatureVector*> fit, held;
  for (auto* cls : {&pos, &neg}) {
    auto k = static_cast<std::size_t>(std::floor(params.calibration_fraction *
                                                 static_cast<double>(cls->size())));
    k = std::min(k, cls->size() - 1);
    held.insert(held.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(k));
    fit.insert(fit.end(), cls->begin() + static_cast<std::ptrdiff_t>(k), cls->end());
  }

  std::vector<const FeatureVector*> all;
  all.reserve(train.size());
  for (const auto& v : train) all.push_back(&v);

  LinearModel model;
  model.params = params;
  model.seed = seed;
  auto full = detail::fit_hinge(all, params, derive_seed(seed, 1));
  model.weights = full.w;
  model.bias = full.b;

  // Without a held-out fold the full model's own margins are used.
  const bool use_fold = !held.empty();
  detail::Hyperplane partial = use_fold ? detail::fit_hinge(fit, params, derive_seed(seed, 2)) : full;
  const auto& calib_set = use_fold ? held : all;
  std::vector<double> margins;
  std::vector<Label> labels;
  for (const auto* v : calib_set) {
    double m = partial.b;
    for (std::size_t f = 0; f < kFeatureCount; ++f) m += partial.w[f] * v->values[f];
    margins.push_back(m);
    labels.push_back(*v->label);
  }
  model.calibration = fit_sigmoid(margins, labels);
  return model;
}

inline ProbEstimate svm_proba(const LinearModel& model, const FeatureRow& x) {
  return ProbEstimate(model.calibration.probability(model.margin(x)));
}

inline Label svm_predict(const LinearModel& model, const FeatureRow& x) {
  return model.margin(x) >= 0.0 ? Label::trustworthy : Label::untrustworthy;
}

inline nlohmann::json svm_to_json(const LinearModel& m) {
  nlohmann::json w = nlohmann::json::array();
  for (double x : m.weights) w.push_back(format_double(x));
  return {{"params",
           {{"lambda", format_double(m.params.lambda)},
            {"epochs", m.params.epochs},
            {"calibration_fraction", format_double(m.params.calibration_fraction)}}},
          {"seed", m.seed},
          {"weights", std::move(w)},
          {"bias", format_double(m.bias)},
          {"calibration", {{"a", format_double(m.calibration.a)}, {"b", format_double(m.calibration.b)}}}};
}

inline LinearModel svm_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    auto d = parse_double(v.get<std::string>());
    if (!d) throw format_error("svm snapshot: bad number");
    return *d;
  };
  LinearModel m;
  const auto& p = j.at("params");
  m.params.lambda = num(p.at("lambda"));
  m.params.epochs = p.at("epochs").get<std::size_t>();
  m.params.calibration_fraction = num(p.at("calibration_fraction"));
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& w = j.at("weights");
  if (w.size() != kFeatureCount) throw format_error("svm snapshot: expected 19 weights");
  for (std::size_t f = 0; f < kFeatureCount; ++f) m.weights[f] = num(w[f]);
  m.bias = num(j.at("bias"));
  m.calibration.a = num(j.at("calibration").at("a"));
  m.calibration.b = num(j.at("calibration").at("b"));
  for (double x : m.weights)
    if (!std::isfinite(x)) throw format_error("svm snapshot: non-finite weight");
  return m;
}

}  // namespace trust
