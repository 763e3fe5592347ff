#include "asymkit/scoring.hpp"

#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "asymkit/error.hpp"
#include "asymkit/io.hpp"

namespace asymkit::scoring {

namespace {

using json = nlohmann::json;

std::string offender_list(const std::vector<std::string>& ids, std::size_t total) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (total > 10) out += ", ... (" + std::to_string(total) + " total)";
  return out;
}

}  // namespace

std::string_view side_name(Side side) { return side == Side::good ? "good" : "bad"; }

void check_logprobs(const TokenLogProbs& t) {
  if (t.logprobs.empty())
    throw ValidationError("pair '" + t.pair_id + "' (" + std::string(side_name(t.side)) +
                          "): empty log-probability sequence");
  for (double v : t.logprobs) {
    if (std::isnan(v) || v > 0.0)
      throw ValidationError("pair '" + t.pair_id + "' (" + std::string(side_name(t.side)) +
                            "): log-probability " + io::format_double(v) + " is not <= 0");
  }
}

double sentence_logprob(const TokenLogProbs& t) {
  check_logprobs(t);
  double sum = 0.0;
  for (double v : t.logprobs) sum += v;
  return sum;
}

double pair_score(const TokenLogProbs& good, const TokenLogProbs& bad) {
  const double g = sentence_logprob(good);
  const double b = sentence_logprob(bad);
  if (g > b) return 1.0;
  if (g < b) return 0.0;
  return 0.5;
}

SuiteAccuracy pair_accuracy(std::span<const PairScores> pairs, std::string_view suite) {
  if (pairs.empty()) throw ValidationError("cannot score an empty suite");
  struct Tally {
    std::uint64_t half_points = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Tally> by_paradigm;
  Tally total;
  for (const auto& p : pairs) {
    if (!p.good) throw ValidationError("pair '" + p.pair_id + "' is missing its good side");
    if (!p.bad) throw ValidationError("pair '" + p.pair_id + "' is missing its bad side");
    const auto half = static_cast<std::uint64_t>(2.0 * pair_score(*p.good, *p.bad));
    auto& t = by_paradigm[p.paradigm];
    t.half_points += half;
    ++t.n;
    total.half_points += half;
    ++total.n;
  }
  SuiteAccuracy acc;
  acc.suite = std::string(suite);
  acc.n_pairs = total.n;
  acc.overall = static_cast<double>(total.half_points) / (2.0 * static_cast<double>(total.n));
  for (const auto& [label, t] : by_paradigm) {
    acc.per_paradigm[label] = ParadigmAccuracy{
        static_cast<double>(t.half_points) / (2.0 * static_cast<double>(t.n)), t.n};
  }
  return acc;
}

std::vector<PairScores> join_dump(const corpus::Suite& suite,
                                  std::span<const TokenLogProbs> dump) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<PairScores> out;
  out.reserve(suite.size());
  for (const auto& p : suite) {
    index.emplace(p.id, out.size());
    out.push_back(PairScores{p.id, p.paradigm, std::nullopt, std::nullopt});
  }

  std::vector<std::string> offenders;
  std::size_t n_offenders = 0;
  auto offend = [&](std::string what) {
    ++n_offenders;
    if (offenders.size() < 10) offenders.push_back(std::move(what));
  };

  for (const auto& rec : dump) {
    auto it = index.find(rec.pair_id);
    if (it == index.end()) {
      offend(rec.pair_id + " (not in suite)");
      continue;
    }
    auto& slot = rec.side == Side::good ? out[it->second].good : out[it->second].bad;
    if (slot) {
      offend(rec.pair_id + " (duplicate " + std::string(side_name(rec.side)) + ")");
      continue;
    }
    slot = rec;
  }
  for (const auto& p : out) {
    if (!p.good) offend(p.pair_id + " (missing good)");
    if (!p.bad) offend(p.pair_id + " (missing bad)");
  }
  if (n_offenders)
    throw ValidationError("suite and dump ids do not match: " + offender_list(offenders, n_offenders));
  return out;
}

std::vector<TokenLogProbs> parse_dump(std::string_view text) {
  std::vector<TokenLogProbs> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    try {
      const json rec = json::parse(line);
      TokenLogProbs t;
      t.pair_id = rec.at("pair_id").get<std::string>();
      const auto side = rec.at("side").get<std::string>();
      if (side == "good") {
        t.side = Side::good;
      } else if (side == "bad") {
        t.side = Side::bad;
      } else {
        throw ValidationError("side must be \"good\" or \"bad\", got \"" + side + "\"");
      }
      const auto& lp = rec.at("logprobs");
      if (!lp.is_array()) throw ValidationError("logprobs is not an array");
      t.logprobs.reserve(lp.size());
      for (const auto& v : lp) {
        if (!v.is_number()) throw ValidationError("logprobs entry is not a number");
        t.logprobs.push_back(v.get<double>());
      }
      check_logprobs(t);
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

std::vector<TokenLogProbs> load_dump(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  try {
    return parse_dump(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_dump(std::span<const TokenLogProbs> records) {
  std::string out;
  for (const auto& t : records) {
    json rec = {{"pair_id", t.pair_id}, {"side", side_name(t.side)}, {"logprobs", t.logprobs}};
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace asymkit::scoring
