#include "asymkit/ngram.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "asymkit/error.hpp"

namespace asymkit::scoring {

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
    if (j > i) out.emplace_back(sentence.substr(i, j - i));
    i = j;
  }
  return out;
}

int NgramModel::event_id(std::string_view token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return ids_.find(kUnknown)->second;
}

std::vector<int> NgramModel::context_key(std::span<const std::string> context) const {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::vector<int> key(width, kStartId);
  const std::size_t take = std::min(width, context.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto& tok = context[context.size() - take + i];
    key[width - take + i] = tok == kStart ? kStartId : event_id(tok);
  }
  return key;
}

double NgramModel::probability_ids(const std::vector<int>& key, int next) const {
  const double v = static_cast<double>(events_.size());
  auto it = counts_.find(key);
  if (it == counts_.end()) return 1.0 / v;
  const auto& cc = it->second;
  auto n = cc.next.find(next);
  const double c = n == cc.next.end() ? 0.0 : static_cast<double>(n->second);
  return (c + alpha_) / (static_cast<double>(cc.total) + alpha_ * v);
}

double NgramModel::probability(std::span<const std::string> context, std::string_view next) const {
  return probability_ids(context_key(context), event_id(next));
}

std::vector<double> NgramModel::distribution(std::span<const std::string> context) const {
  const auto key = context_key(context);
  std::vector<double> out(events_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = probability_ids(key, static_cast<int>(i));
  return out;
}

NgramModel train_ngram(std::span<const std::string> corpus, int order, double alpha) {
  if (order < 1) throw ValidationError("n-gram order must be >= 1, got " + std::to_string(order));
  if (!(alpha > 0.0)) throw ValidationError("smoothing alpha must be positive");
  if (corpus.empty()) throw ValidationError("n-gram training corpus is empty");

  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.size());
  std::set<std::string, std::less<>> vocab;
  for (const auto& s : corpus) {
    auto toks = tokenize(s);
    for (const auto& t : toks) {
      if (t == NgramModel::kStart)
        throw ValidationError("training corpus contains the reserved start symbol");
      if (t != NgramModel::kEnd && t != NgramModel::kUnknown) vocab.insert(t);
    }
    sentences.push_back(std::move(toks));
  }

  NgramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  for (const auto& w : vocab) m.events_.push_back(w);
  m.events_.emplace_back(NgramModel::kUnknown);
  m.events_.emplace_back(NgramModel::kEnd);
  for (std::size_t i = 0; i < m.events_.size(); ++i) m.ids_.emplace(m.events_[i], static_cast<int>(i));

  const int end_id = m.ids_.find(NgramModel::kEnd)->second;
  const auto width = static_cast<std::size_t>(order - 1);
  for (const auto& toks : sentences) {
    std::vector<int> ids(width, NgramModel::kStartId);
    for (const auto& t : toks) ids.push_back(m.event_id(t));
    ids.push_back(end_id);
    for (std::size_t pos = width; pos < ids.size(); ++pos) {
      std::vector<int> key(ids.begin() + static_cast<std::ptrdiff_t>(pos - width),
                           ids.begin() + static_cast<std::ptrdiff_t>(pos));
      auto& cc = m.counts_[key];
      ++cc.total;
      ++cc.next[ids[pos]];
    }
  }
  return m;
}

TokenLogProbs ngram_logprobs(const NgramModel& model, std::string_view sentence,
                             std::string pair_id, Side side) {
  const auto toks = tokenize(sentence);
  if (toks.empty()) throw ValidationError("cannot score an empty sentence");
  TokenLogProbs out{std::move(pair_id), side, {}};
  out.logprobs.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::span<const std::string> context(toks.data(), i);
    out.logprobs.push_back(std::log(model.probability(context, toks[i])));
  }
  return out;
}

std::vector<TokenLogProbs> ngram_dump(const NgramModel& model, const corpus::Suite& suite) {
  std::vector<TokenLogProbs> out;
  out.reserve(2 * suite.size());
  for (const auto& p : suite) {
    out.push_back(ngram_logprobs(model, p.good, p.id, Side::good));
    out.push_back(ngram_logprobs(model, p.bad, p.id, Side::bad));
  }
  return out;
}

}  // namespace asymkit::scoring
