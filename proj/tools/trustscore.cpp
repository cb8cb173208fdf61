// trustscore command-line tool: scoring, dataset building, simulated
// active-learning experiments and the annotation service.
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trustscore/active_learning.hpp"
#include "trustscore/data_model.hpp"
#include "trustscore/dataset.hpp"
#include "trustscore/reports.hpp"
#include "trustscore/scoring.hpp"
#include "trustscore/sentiment.hpp"
#include "trustscore/service.hpp"
#include "trustscore/service_http.hpp"

namespace {

using namespace trust;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw not_found("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error("cannot write '" + path + "'");
  return out;
}

// Loads and links a corpus; malformed lines are reported and counted.
Corpus read_corpus(const std::string& users_path, const std::string& tweets_path, std::size_t& bad_lines) {
  auto uin = open_in(users_path);
  auto tin = open_in(tweets_path);
  auto users = parse_users(uin);
  auto tweets = parse_tweets(tin);
  for (const auto& e : users.errors) std::cerr << users_path << ":" << e.line << ": " << e.message << '\n';
  for (const auto& e : tweets.errors) std::cerr << tweets_path << ":" << e.line << ": " << e.message << '\n';
  bad_lines += users.errors.size() + tweets.errors.size();
  return build_corpus(std::move(users.records), std::move(tweets.records));
}

Lexicon lexicon_from(const std::string& path) { return path.empty() ? default_lexicon() : load_lexicon(path); }

struct ScoreArgs {
  std::string users, tweets, out, lexicon;
  std::size_t min_tweets = 1;
};

int cmd_score(const ScoreArgs& a) {
  std::size_t bad = 0;
  const auto corpus = filter_eligible(read_corpus(a.users, a.tweets, bad), a.min_tweets);
  const auto lex = lexicon_from(a.lexicon);
  auto out = open_out(a.out);
  write_scorecard_header(out);
  for (const auto& u : corpus.users()) write_scorecard_row(out, u, score_user(u, corpus.tweets_of(u.user_id), lex));
  out.flush();
  if (!out) throw error("write failed for '" + a.out + "'");
  std::cerr << "scored " << corpus.users().size() << " users\n";
  return bad == 0 ? 0 : 1;
}

struct BuildArgs {
  std::string scorecards, labels, out;
  double clip_low = 1.0, clip_high = 99.0, test_fraction = 0.2;
  std::uint64_t seed = 0;
};

int cmd_build_dataset(const BuildArgs& a) {
  auto in = open_in(a.scorecards);
  const auto scored = read_scorecards(in);
  if (scored.empty()) throw invalid_argument("scorecard table '" + a.scorecards + "' has no rows");
  std::vector<FeatureVector> raw;
  raw.reserve(scored.size());
  for (const auto& s : scored) raw.push_back({s.user.user_id, feature_row(s.card, s.user), std::nullopt});
  auto [vectors, params] = normalize_vectors(std::move(raw), a.clip_low, a.clip_high);

  SplitDataset ds;
  if (a.labels.empty()) {
    ds.pool_unlabeled = std::move(vectors);
  } else {
    auto lin = open_in(a.labels);
    ds = split(std::move(vectors), read_labels(lin), a.test_fraction, a.seed);
  }
  ds.normalization = params;
  save_dataset(ds, a.out);
  std::cerr << "train " << ds.train_labeled.size() << ", test " << ds.test_labeled.size() << ", pool "
            << ds.pool_unlabeled.size() << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string dataset, learner = "forest", out, truth;
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;
  std::size_t batch_size = 100, max_iters = 100, patience = 0;
  double min_delta = 0.001, noise = 0.0;
  std::uint64_t oracle_seed = 0;
};

int cmd_al_experiment(const ExperimentArgs& a) {
  const auto kind = parse_learner(a.learner);
  if (!kind) throw invalid_argument("unknown learner '" + a.learner + "'");
  std::vector<Strategy> strategies;
  for (const auto& s : a.strategies.empty() ? std::vector<std::string>{"entropy"} : a.strategies) {
    auto st = parse_strategy(s);
    if (!st) throw invalid_argument("unknown strategy '" + s + "'");
    strategies.push_back(*st);
  }
  const auto seeds = a.seeds.empty() ? std::vector<std::uint64_t>{0} : a.seeds;

  const auto base = load_dataset(a.dataset);
  std::optional<Oracle> oracle;
  if (!a.truth.empty()) {
    auto in = open_in(a.truth);
    oracle = Oracle::table(read_labels(in));
  } else {
    oracle = Oracle::simulated(default_label_rule(a.noise, a.oracle_seed));
  }

  std::ostringstream table;
  write_curve_header(table);
  for (auto strategy : strategies) {
    for (auto seed : seeds) {
      SessionConfig cfg;
      cfg.learner.kind = *kind;
      cfg.strategy = strategy;
      cfg.batch_size = a.batch_size;
      cfg.max_iterations = a.max_iters;
      cfg.patience = a.patience;
      cfg.min_delta = a.min_delta;
      cfg.seed = seed;
      Session s(base, cfg);
      al_run(s, *oracle);
      write_curve_rows(table, s.history(), strategy, *kind, seed);
      std::cerr << to_string(strategy) << " seed " << seed << ": final accuracy "
                << format_double(s.history().back().accuracy) << " after " << s.iteration()
                << " iterations (" << to_string(s.stop_reason()) << ")\n";
    }
  }
  auto out = open_out(a.out);
  out << table.str();
  out.flush();
  if (!out) throw error("write failed for '" + a.out + "'");
  return 0;
}

struct ServeArgs {
  std::string listen = "127.0.0.1:8080", dataset, data_dir, scorecards, users, tweets, lexicon, ui_dir;
};

httplib::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& a) {
  if (!std::filesystem::exists(a.dataset)) throw not_found("dataset '" + a.dataset + "' does not exist");
  auto ws = std::make_shared<Workspace>(std::filesystem::path(a.dataset).stem().string(), load_dataset(a.dataset));
  if (!a.scorecards.empty()) {
    auto in = open_in(a.scorecards);
    for (auto& s : read_scorecards(in)) ws->add_user(std::move(s.user), std::move(s.card));
  }
  if (!a.users.empty() || !a.tweets.empty()) {
    if (a.users.empty() || a.tweets.empty()) throw invalid_argument("--users and --tweets go together");
    std::size_t bad = 0;
    ws->add_corpus(read_corpus(a.users, a.tweets, bad), lexicon_from(a.lexicon));
    if (bad) throw format_error("corpus has " + std::to_string(bad) + " malformed lines");
  }
  Service svc(ws, a.data_dir);
  const auto [host, port] = parse_listen(a.listen);

  httplib::Server server;
  mount_routes(server, svc, a.ui_dir);
  if (!server.bind_to_port(host, port)) throw error("cannot listen on " + a.listen);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving dataset '" << ws->dataset_name() << "' on " << host << ":" << port << " ("
            << svc.session_count() << " restored sessions)\n";
  const bool ok = server.listen_after_bind();
  g_server = nullptr;
  return ok ? 0 : 1;
}

struct GenerateArgs {
  std::string users, tweets, labels;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  double noise = 0.0;
};

int cmd_generate(const GenerateArgs& a) {
  SyntheticParams p;
  p.rule = default_label_rule(a.noise, a.seed);
  const auto syn = generate_synthetic(a.count, a.seed, p);
  auto uo = open_out(a.users);
  auto to = open_out(a.tweets);
  std::vector<std::pair<std::string, Label>> labels;
  for (const auto& u : syn.corpus.users()) {
    uo << encode_user(u).dump() << '\n';
    for (const auto& t : syn.corpus.tweets_of(u.user_id)) to << encode_tweet(t).dump() << '\n';
    labels.emplace_back(u.user_id, syn.labels.at(u.user_id));
  }
  if (!a.labels.empty()) {
    auto lo = open_out(a.labels);
    write_labels(lo, labels);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust scoring and active-learning workbench"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Score users of a tweet archive");
  sc->add_option("--users", score.users, "Users file (one JSON object per line)")->required()->check(CLI::ExistingFile);
  sc->add_option("--tweets", score.tweets, "Tweets file (one JSON object per line)")->required()->check(CLI::ExistingFile);
  sc->add_option("--out", score.out, "Scorecard table to write")->required();
  sc->add_option("--lexicon", score.lexicon, "Sentiment lexicon file")->check(CLI::ExistingFile);
  sc->add_option("--min-tweets", score.min_tweets, "Minimum archived tweets per user")->capture_default_str()
      ->check(CLI::PositiveNumber);

  BuildArgs build;
  auto* bd = app.add_subcommand("build-dataset", "Normalize scorecards and split into train/test/pool");
  bd->add_option("--scorecards", build.scorecards, "Scorecard table")->required()->check(CLI::ExistingFile);
  bd->add_option("--labels", build.labels, "user_id,label table")->check(CLI::ExistingFile);
  bd->add_option("--out", build.out, "Dataset file to write")->required();
  bd->add_option("--clip-low", build.clip_low, "Lower clip percentile")->capture_default_str()->check(CLI::Range(0.0, 100.0));
  bd->add_option("--clip-high", build.clip_high, "Upper clip percentile")->capture_default_str()->check(CLI::Range(0.0, 100.0));
  bd->add_option("--test-fraction", build.test_fraction, "Share of labeled users held out")->capture_default_str();
  bd->add_option("--seed", build.seed, "Split seed")->capture_default_str();

  ExperimentArgs exp;
  auto* ex = app.add_subcommand("al-experiment", "Run simulated active-learning sessions and write curves");
  ex->add_option("--dataset", exp.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  ex->add_option("--learner", exp.learner, "forest or svm")->capture_default_str();
  ex->add_option("--strategy", exp.strategies, "uncertainty, margin, entropy or random (repeatable)");
  ex->add_option("--seed", exp.seeds, "Session seed (repeatable)");
  ex->add_option("--batch-size", exp.batch_size, "Instances per query")->capture_default_str()->check(CLI::PositiveNumber);
  ex->add_option("--max-iters", exp.max_iters, "Label rounds per session")->capture_default_str()->check(CLI::PositiveNumber);
  ex->add_option("--patience", exp.patience, "Plateau window; 0 disables early stop")->capture_default_str();
  ex->add_option("--min-delta", exp.min_delta, "Plateau accuracy gain threshold")->capture_default_str();
  ex->add_option("--truth", exp.truth, "user_id,label table answering oracle queries")->check(CLI::ExistingFile);
  ex->add_option("--noise", exp.noise, "Label noise of the simulated oracle")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  ex->add_option("--oracle-seed", exp.oracle_seed, "Noise seed of the simulated oracle")->capture_default_str();
  ex->add_option("--out", exp.out, "Curve table to write")->required();

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Run the annotation service");
  sv->add_option("--listen", serve.listen, "host:port")->capture_default_str()->envname("TRUSTSCORE_LISTEN");
  sv->add_option("--dataset", serve.dataset, "Dataset file")->required()->envname("TRUSTSCORE_DATASET");
  sv->add_option("--data-dir", serve.data_dir, "Session persistence directory")->required()->envname("TRUSTSCORE_DATA_DIR");
  sv->add_option("--scorecards", serve.scorecards, "Scorecard table for display payloads")->check(CLI::ExistingFile);
  sv->add_option("--users", serve.users, "Users file for display payloads")->check(CLI::ExistingFile);
  sv->add_option("--tweets", serve.tweets, "Tweets file for display payloads")->check(CLI::ExistingFile);
  sv->add_option("--lexicon", serve.lexicon, "Sentiment lexicon file")->check(CLI::ExistingFile);
  sv->add_option("--ui-dir", serve.ui_dir, "Static UI bundle served under /ui")->check(CLI::ExistingDirectory);

  GenerateArgs gen;
  auto* gn = app.add_subcommand("generate", "Write a synthetic corpus with ground-truth labels");
  gn->add_option("--users", gen.users, "Users file to write")->required();
  gn->add_option("--tweets", gen.tweets, "Tweets file to write")->required();
  gn->add_option("--labels", gen.labels, "Labels table to write");
  gn->add_option("--count", gen.count, "Number of users")->capture_default_str()->check(CLI::PositiveNumber);
  gn->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gn->add_option("--noise", gen.noise, "Label noise")->capture_default_str()->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sc) return cmd_score(score);
    if (*bd) return cmd_build_dataset(build);
    if (*ex) return cmd_al_experiment(exp);
    if (*sv) return cmd_serve(serve);
    if (*gn) return cmd_generate(gen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
