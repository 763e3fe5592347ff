#pragma once

// Sentence scores from per-token log-probabilities and minimal-pair suite
// accuracies. Log-probabilities are natural logs throughout.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asymkit/corpus.hpp"

namespace asymkit::scoring {

enum class Side { good, bad };

std::string_view side_name(Side side);

struct TokenLogProbs {
  std::string pair_id;
  Side side = Side::good;
  std::vector<double> logprobs;
};

/// Non-empty, every entry <= 0 and not NaN.
void check_logprobs(const TokenLogProbs& t);

double sentence_logprob(const TokenLogProbs& t);

struct PairScores {
  std::string pair_id;
  std::string paradigm;
  std::optional<TokenLogProbs> good;
  std::optional<TokenLogProbs> bad;
};

struct ParadigmAccuracy {
  double accuracy = 0.0;
  std::size_t n_pairs = 0;
};

struct SuiteAccuracy {
  std::string suite;
  double overall = 0.0;
  std::map<std::string, ParadigmAccuracy> per_paradigm;
  std::size_t n_pairs = 0;
};

/// 1 when good outscores bad, 0 when it loses, 0.5 on an exact tie.
double pair_score(const TokenLogProbs& good, const TokenLogProbs& bad);

/// Scores are accumulated as integer half-points so the result does not
/// depend on pair order.
SuiteAccuracy pair_accuracy(std::span<const PairScores> pairs, std::string_view suite = {});

/// Matches dump records to suite pairs. Throws ValidationError listing up to
/// ten offending ids when records are missing, unknown or duplicated.
std::vector<PairScores> join_dump(const corpus::Suite& suite,
                                  std::span<const TokenLogProbs> dump);

std::vector<TokenLogProbs> parse_dump(std::string_view text);
std::vector<TokenLogProbs> load_dump(const std::filesystem::path& path);
std::string serialize_dump(std::span<const TokenLogProbs> records);

}  // namespace asymkit::scoring
