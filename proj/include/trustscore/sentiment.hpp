// Lexicon polarity scoring and the per-user sentiment score.
#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "common.hpp"
#include "data_model.hpp"

namespace trust {

enum class Polarity { negative, neutral, positive };

inline std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
    case Polarity::positive: return "positive";
  }
  return "neutral";
}

class Lexicon {
 public:
  Lexicon() = default;

  // Throws invalid_argument on a weight outside [-1,1] or a token that is
  // both scored and a negator.
  Lexicon(std::unordered_map<std::string, double> entries,
          std::unordered_set<std::string> negators)
      : entries_(std::move(entries)), negators_(std::move(negators)) {
    for (const auto& [tok, w] : entries_) {
      if (!(w >= -1.0 && w <= 1.0))
        throw invalid_argument("lexicon weight out of [-1,1] for '" + tok + "'");
      if (negators_.count(tok))
        throw invalid_argument("token '" + tok + "' is both scored and a negator");
    }
  }

  const double* weight(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool is_negator(const std::string& token) const { return negators_.count(token) != 0; }

  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<std::string, double>& entries() const { return entries_; }
  const std::unordered_set<std::string>& negators() const { return negators_; }

 private:
  std::unordered_map<std::string, double> entries_;
  std::unordered_set<std::string> negators_;
};

// One entry per line: "<token> <weight>"; "!<token>" declares a negator.
// Blank lines and lines starting with "#" are skipped.
inline Lexicon read_lexicon(std::istream& in) {
  std::unordered_map<std::string, double> entries;
  std::unordered_set<std::string> negators;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok[0] == '!') {
      if (tok.size() < 2) throw format_error("lexicon line " + std::to_string(lineno) + ": empty negator");
      negators.insert(tok.substr(1));
      continue;
    }
    std::string wtext, extra;
    if (!(ls >> wtext) || (ls >> extra))
      throw format_error("lexicon line " + std::to_string(lineno) + ": expected '<token> <weight>'");
    auto w = parse_double(wtext);
    if (!w) throw format_error("lexicon line " + std::to_string(lineno) + ": bad weight '" + wtext + "'");
    entries[tok] = *w;
  }
  return Lexicon(std::move(entries), std::move(negators));
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open lexicon file '" + path + "'");
  return read_lexicon(in);
}

// Splits on ASCII non-alphanumerics and lowercases. Bytes >= 0x80 are kept
// as word characters so UTF-8 words stay whole.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Mean weight of matched tokens, a match directly after a negator counting
// with flipped sign; 0 when nothing matches.
inline double polarity(std::string_view text, const Lexicon& lex) {
  auto tokens = tokenize(text);
  double sum = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double* w = lex.weight(tokens[i]);
    if (!w) continue;
    bool negated = i > 0 && lex.is_negator(tokens[i - 1]);
    sum += negated ? -*w : *w;
    ++matched;
  }
  return matched == 0 ? 0.0 : sum / static_cast<double>(matched);
}

inline Polarity classify_polarity(double p) {
  if (p > 0.0) return Polarity::positive;
  if (p < 0.0) return Polarity::negative;
  return Polarity::neutral;
}

inline Polarity classify_tweet(std::string_view text, const Lexicon& lex) {
  return classify_polarity(polarity(text, lex));
}

struct SentimentCounts {
  std::int64_t positive = 0;
  std::int64_t neutral = 0;
  std::int64_t negative = 0;

  std::int64_t total() const { return positive + neutral + negative; }
  bool operator==(const SentimentCounts&) const = default;
};

inline SentimentCounts sentiment_counts(std::span<const TweetRecord> tweets,
                                        const Lexicon& lex) {
  SentimentCounts c;
  for (const auto& t : tweets) {
    switch (classify_tweet(t.text, lex)) {
      case Polarity::positive: ++c.positive; break;
      case Polarity::neutral: ++c.neutral; break;
      case Polarity::negative: ++c.negative; break;
    }
  }
  return c;
}

// Share of non-negative tweets. A user with no tweets scores 1.0.
inline double sentiment_score(const SentimentCounts& c) {
  const auto non_negative = c.neutral + c.positive;
  const auto total = non_negative + c.negative;
  if (total == 0) return 1.0;
  return static_cast<double>(non_negative) / static_cast<double>(total);
}

namespace detail {

struct LexiconSeed {
  const char* token;
  double weight;
};

// clang-format off
inline constexpr LexiconSeed kDefaultEntries[] = {
  // positive
  {"good", 0.7}, {"great", 0.8}, {"excellent", 1.0}, {"amazing", 0.9}, {"awesome", 0.9},
  {"wonderful", 0.9}, {"fantastic", 0.9}, {"best", 0.9}, {"better", 0.5}, {"love", 0.8},
  {"loved", 0.8}, {"loving", 0.7}, {"like", 0.3}, {"liked", 0.3}, {"happy", 0.8},
  {"glad", 0.6}, {"joy", 0.8}, {"proud", 0.7}, {"thank", 0.6}, {"thanks", 0.6},
  {"grateful", 0.7}, {"congratulations", 0.8}, {"congrats", 0.8}, {"win", 0.6}, {"winning", 0.6},
  {"success", 0.7}, {"successful", 0.7}, {"support", 0.4}, {"supporting", 0.4}, {"hope", 0.5},
  {"hopeful", 0.6}, {"positive", 0.6}, {"progress", 0.5}, {"improve", 0.5}, {"improved", 0.5},
  {"strong", 0.5}, {"strength", 0.5}, {"safe", 0.4}, {"fair", 0.4}, {"honest", 0.6},
  {"trust", 0.6}, {"trusted", 0.6}, {"reliable", 0.6}, {"kind", 0.6}, {"peace", 0.6},
  {"peaceful", 0.6}, {"free", 0.4}, {"freedom", 0.5}, {"brave", 0.6}, {"beautiful", 0.8},
  {"nice", 0.6}, {"pleased", 0.6}, {"delighted", 0.8}, {"excited", 0.7}, {"exciting", 0.7},
  {"celebrate", 0.7}, {"celebrating", 0.7}, {"together", 0.3}, {"unity", 0.5}, {"united", 0.4},
  {"healthy", 0.5}, {"benefit", 0.5}, {"benefits", 0.5}, {"opportunity", 0.5}, {"opportunities", 0.5},
  {"achieve", 0.5}, {"achievement", 0.6}, {"inspiring", 0.7}, {"inspired", 0.6}, {"welcome", 0.5},
  {"effective", 0.5}, {"agree", 0.4}, {"respect", 0.5}, {"honored", 0.7}, {"honoured", 0.7},
  {"fun", 0.6}, {"enjoy", 0.6}, {"enjoyed", 0.6}, {"perfect", 0.9}, {"brilliant", 0.9},
  {"impressive", 0.7}, {"outstanding", 0.9}, {"smart", 0.5}, {"wise", 0.5}, {"helpful", 0.6},
  {"help", 0.3}, {"helping", 0.4}, {"care", 0.4}, {"caring", 0.5}, {"secure", 0.4},
  {"recovery", 0.4}, {"growth", 0.4}, {"thriving", 0.7}, {"optimistic", 0.6}, {"friendly", 0.6},
  {"generous", 0.7}, {"courage", 0.6}, {"honesty", 0.6}, {"justice", 0.4}, {"victory", 0.7},
  // negative
  {"bad", -0.7}, {"worse", -0.6}, {"worst", -1.0}, {"terrible", -0.9}, {"horrible", -0.9},
  {"awful", -0.9}, {"hate", -0.9}, {"hated", -0.9}, {"hateful", -0.9}, {"angry", -0.7},
  {"anger", -0.7}, {"sad", -0.6}, {"fear", -0.6}, {"afraid", -0.6}, {"scared", -0.6},
  {"fake", -0.7}, {"lie", -0.7}, {"lies", -0.7}, {"liar", -0.9}, {"lying", -0.8},
  {"corrupt", -0.8}, {"corruption", -0.8}, {"fraud", -0.9}, {"scam", -0.9}, {"crime", -0.7},
  {"criminal", -0.8}, {"disaster", -0.9}, {"crisis", -0.6}, {"failure", -0.7}, {"failed", -0.6},
  {"fail", -0.6}, {"weak", -0.5}, {"wrong", -0.5}, {"stupid", -0.8}, {"idiot", -0.9},
  {"idiots", -0.9}, {"disgusting", -0.9}, {"disgrace", -0.8}, {"shame", -0.7}, {"shameful", -0.8},
  {"pathetic", -0.8}, {"loser", -0.8}, {"losers", -0.8}, {"lose", -0.4}, {"lost", -0.4},
  {"kill", -0.8}, {"killed", -0.8}, {"killing", -0.8}, {"attack", -0.6}, {"attacks", -0.6},
  {"violence", -0.8}, {"violent", -0.8}, {"threat", -0.6}, {"threats", -0.6}, {"danger", -0.6},
  {"dangerous", -0.7}, {"abuse", -0.9}, {"abusive", -0.9}, {"harass", -0.9}, {"harassment", -0.9},
  {"racist", -0.9}, {"evil", -0.9}, {"enemy", -0.7}, {"enemies", -0.7}, {"war", -0.6},
  {"destroy", -0.7}, {"destroyed", -0.7}, {"damage", -0.5}, {"broken", -0.5}, {"poor", -0.4},
  {"problem", -0.4}, {"problems", -0.4}, {"worry", -0.5}, {"worried", -0.5}, {"upset", -0.6},
  {"annoying", -0.6}, {"ugly", -0.7}, {"nasty", -0.8}, {"rude", -0.6}, {"unfair", -0.6},
  {"dishonest", -0.8}, {"cheat", -0.8}, {"cheating", -0.8}, {"rigged", -0.8}, {"hoax", -0.8},
  {"propaganda", -0.6}, {"ridiculous", -0.6}, {"useless", -0.7}, {"incompetent", -0.8}, {"dumb", -0.7},
  {"hurt", -0.6}, {"pain", -0.6}, {"suffer", -0.6}, {"suffering", -0.7}, {"dead", -0.6},
  {"death", -0.6}, {"terror", -0.9}, {"terrorist", -0.9}, {"chaos", -0.7}, {"mess", -0.5},
};

inline constexpr const char* kDefaultNegators[] = {
  "not", "no", "never", "nor", "cannot", "without", "hardly",
  "don", "doesn", "didn", "isn", "wasn", "aren", "weren", "won", "wouldn", "shouldn", "couldn",
};
// clang-format on

}  // namespace detail

// Built-in lexicon of about two hundred polar words.
inline const Lexicon& default_lexicon() {
  static const Lexicon lex = [] {
    std::unordered_map<std::string, double> entries;
    for (const auto& e : detail::kDefaultEntries) entries.emplace(e.token, e.weight);
    std::unordered_set<std::string> negators(std::begin(detail::kDefaultNegators),
                                             std::end(detail::kDefaultNegators));
    return Lexicon(std::move(entries), std::move(negators));
  }();
  return lex;
}

}  // namespace trust
