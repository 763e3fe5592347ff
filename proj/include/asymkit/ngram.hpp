#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asymkit/scoring.hpp"

namespace asymkit::scoring {

/// Additively smoothed n-gram model over whitespace tokens.
///
/// The event set is the training vocabulary plus "<unk>" and the end
/// symbol "</s>"; contexts are padded with order-1 "<s>" symbols. For a
/// context c and event w:
///
///   P(w | c) = (count(c, w) + alpha) / (count(c) + alpha * V)
///
/// with V the number of events. Unseen contexts fall back to 1/V.
class NgramModel {
 public:
  static constexpr std::string_view kStart = "<s>";
  static constexpr std::string_view kEnd = "</s>";
  static constexpr std::string_view kUnknown = "<unk>";

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  /// Events in id order.
  const std::vector<std::string>& events() const { return events_; }
  std::size_t event_count() const { return events_.size(); }

  /// Event id for a token; unknown tokens map to <unk>.
  int event_id(std::string_view token) const;

  /// Probability of event `next` after `context` (last order-1 entries used;
  /// shorter contexts are left-padded with <s>).
  double probability(std::span<const std::string> context, std::string_view next) const;

  /// Full next-event distribution for a context, indexed by event id.
  std::vector<double> distribution(std::span<const std::string> context) const;

  friend NgramModel train_ngram(std::span<const std::string> corpus, int order, double alpha);

 private:
  static constexpr int kStartId = -1;

  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<int, std::uint64_t> next;
  };

  std::vector<int> context_key(std::span<const std::string> context) const;
  double probability_ids(const std::vector<int>& key, int next) const;

  int order_ = 1;
  double alpha_ = 1.0;
  std::vector<std::string> events_;
  std::map<std::string, int, std::less<>> ids_;
  std::map<std::vector<int>, ContextCounts> counts_;
};

std::vector<std::string> tokenize(std::string_view sentence);

/// Sentences are whitespace-tokenized. Throws ValidationError on an empty
/// corpus, order < 1 or alpha <= 0.
NgramModel train_ngram(std::span<const std::string> corpus, int order, double alpha = 1.0);

/// Per-token log-probabilities of `sentence` under left-to-right
/// conditioning. The end symbol is not scored.
TokenLogProbs ngram_logprobs(const NgramModel& model, std::string_view sentence,
                             std::string pair_id = {}, Side side = Side::good);

/// Dump records (good then bad) for every pair of a suite.
std::vector<TokenLogProbs> ngram_dump(const NgramModel& model, const corpus::Suite& suite);

}  // namespace asymkit::scoring
