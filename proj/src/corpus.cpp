#include "asymkit/corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

#include "asymkit/error.hpp"
#include "asymkit/io.hpp"
#include "asymkit/rng.hpp"

namespace asymkit::corpus {

namespace {

using json = nlohmann::json;

constexpr std::string_view kOpeners = "([{";
constexpr std::string_view kClosers = ")]}";

std::string numbered(std::string_view prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return std::string(prefix) + "-" + buf;
}

std::string spaced(const std::string& symbols) {
  std::string out;
  out.reserve(symbols.size() * 2);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(symbols[i]);
  }
  return out;
}

void check_k(int k) {
  if (k < 1 || k > 3) throw ValidationError("Dyck alphabet size must be 1, 2 or 3, got " + std::to_string(k));
}

}  // namespace

ArithmeticSpec ArithmeticSpec::defaults(ArithmeticTask task) {
  ArithmeticSpec spec;
  spec.subtask = task;
  if (task == ArithmeticTask::multiplication) {
    spec.operand_hi = 100;
    spec.operator_glyph = "×";
  }
  return spec;
}

std::string_view task_name(ArithmeticTask task) {
  return task == ArithmeticTask::addition ? "addition" : "multiplication";
}

ArithmeticTask parse_task(std::string_view name) {
  if (name == "addition" || name == "add") return ArithmeticTask::addition;
  if (name == "multiplication" || name == "mul") return ArithmeticTask::multiplication;
  throw ValidationError("unknown arithmetic subtask '" + std::string(name) + "'");
}

std::string format_statement(std::int64_t x, std::string_view glyph, std::int64_t y,
                             std::int64_t z) {
  return std::to_string(x) + " " + std::string(glyph) + " " + std::to_string(y) + " = " +
         std::to_string(z);
}

Suite gen_arithmetic(const ArithmeticSpec& spec) {
  if (spec.count <= 0) throw ValidationError("count must be positive");
  if (spec.error_set.empty()) throw ValidationError("error_set must not be empty");
  if (std::find(spec.error_set.begin(), spec.error_set.end(), 0) != spec.error_set.end())
    throw ValidationError("error_set must not contain 0");
  if (spec.operand_lo > spec.operand_hi) throw ValidationError("operand_lo exceeds operand_hi");
  if (spec.operand_lo < 0) throw ValidationError("operands must be nonnegative");
  if (spec.operator_glyph.empty()) throw ValidationError("operator_glyph must not be empty");

  const bool add = spec.subtask == ArithmeticTask::addition;
  const auto max_error = *std::max_element(spec.error_set.begin(), spec.error_set.end());
  const std::int64_t z_max =
      add ? 2 * spec.operand_hi : spec.operand_hi * spec.operand_hi;
  // With only negative errors some results admit no nonnegative corruption;
  // those operand draws are redrawn, which needs at least one reachable z.
  if (max_error < 0 && z_max + max_error < 0)
    throw ValidationError("error_set admits no nonnegative corrupted result");

  const std::string prefix = add ? "add" : "mul";
  Rng rng(spec.seed);
  Suite out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    std::int64_t x, y, z, e;
    for (;;) {
      x = rng.between(spec.operand_lo, spec.operand_hi);
      y = rng.between(spec.operand_lo, spec.operand_hi);
      z = add ? x + y : x * y;
      if (z + max_error >= 0) break;
    }
    do {
      e = spec.error_set[rng.below(spec.error_set.size())];
    } while (z + e < 0);
    out.push_back(MinimalPair{
        .id = numbered(prefix, i),
        .good = format_statement(x, spec.operator_glyph, y, z),
        .bad = format_statement(x, spec.operator_glyph, y, z + e),
        .paradigm = std::string(task_name(spec.subtask)),
        .suite = "arithmetic",
        .field = std::nullopt,
    });
  }
  return out;
}

namespace {

std::string sample_balanced(int k, int length, Rng& rng) {
  std::string s;
  s.reserve(static_cast<std::size_t>(length));
  std::vector<int> stack;
  std::uint64_t opens_left = static_cast<std::uint64_t>(length / 2);
  for (int pos = 0; pos < length; ++pos) {
    const auto depth = static_cast<std::uint64_t>(stack.size());
    bool open;
    if (opens_left == 0) {
      open = false;
    } else if (depth == 0) {
      open = true;
    } else {
      open = rng.below(opens_left + depth) < opens_left;
    }
    if (open) {
      const int type = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      stack.push_back(type);
      s.push_back(kOpeners[static_cast<std::size_t>(type)]);
      --opens_left;
    } else {
      s.push_back(kClosers[static_cast<std::size_t>(stack.back())]);
      stack.pop_back();
    }
  }
  return s;
}

bool breaks_when_swapped(std::string s, std::size_t i, int k) {
  if (s[i] == s[i + 1]) return false;
  std::swap(s[i], s[i + 1]);
  return !validate_dyck(s, k);
}

}  // namespace

std::string sample_balanced(int k, int length, std::uint64_t seed) {
  check_k(k);
  if (length < 0 || length % 2 != 0) throw ValidationError("length must be even and nonnegative");
  Rng rng(seed);
  return sample_balanced(k, length, rng);
}

Suite gen_dyck(const DyckSpec& spec) {
  check_k(spec.k);
  if (spec.length <= 0 || spec.length % 2 != 0)
    throw ValidationError("Dyck length must be even and positive, got " + std::to_string(spec.length));
  if (spec.count <= 0) throw ValidationError("count must be positive");

  const auto n = static_cast<std::size_t>(spec.length);
  // Swaps start in the second half; length 2 has only the swap at 0.
  const std::size_t lo = std::min(n / 2, n - 2);
  const std::size_t span = n - 1 - lo;
  const std::string label = "dyck" + std::to_string(spec.k);

  Rng rng(spec.seed);
  Suite out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    std::string good;
    for (;;) {
      good = sample_balanced(spec.k, spec.length, rng);
      bool any = false;
      for (std::size_t j = lo; j + 1 < n && !any; ++j) any = breaks_when_swapped(good, j, spec.k);
      if (any) break;
    }
    std::size_t at;
    do {
      at = lo + static_cast<std::size_t>(rng.below(span));
    } while (!breaks_when_swapped(good, at, spec.k));
    std::string bad = good;
    std::swap(bad[at], bad[at + 1]);
    out.push_back(MinimalPair{
        .id = numbered(label, i),
        .good = spaced(good),
        .bad = spaced(bad),
        .paradigm = label,
        .suite = "dyck-" + std::to_string(spec.k),
        .field = std::nullopt,
    });
  }
  return out;
}

bool validate_dyck(std::string_view symbols, int k) {
  check_k(k);
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> stack;
  for (std::size_t pos = 0; pos < symbols.size(); ++pos) {
    const char c = symbols[pos];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    const auto o = kOpeners.find(c);
    if (o != std::string_view::npos && o < kk) {
      stack.push_back(o);
      continue;
    }
    const auto cl = kClosers.find(c);
    if (cl != std::string_view::npos && cl < kk) {
      if (stack.empty() || stack.back() != cl) return false;
      stack.pop_back();
      continue;
    }
    throw ValidationError("symbol '" + std::string(1, c) + "' at offset " + std::to_string(pos) +
                          " is not in the Dyck-" + std::to_string(k) + " alphabet");
  }
  return stack.empty();
}

namespace {

struct Noun {
  std::string_view singular, plural;
};
struct Verb {
  std::string_view singular, plural;
};

constexpr std::array<Noun, 8> kNouns = {{{"dog", "dogs"},
                                         {"cat", "cats"},
                                         {"girl", "girls"},
                                         {"boy", "boys"},
                                         {"teacher", "teachers"},
                                         {"bird", "birds"},
                                         {"farmer", "farmers"},
                                         {"child", "children"}}};
constexpr std::array<Verb, 6> kVerbs = {{{"runs", "run"},
                                         {"sleeps", "sleep"},
                                         {"sings", "sing"},
                                         {"waits", "wait"},
                                         {"laughs", "laugh"},
                                         {"walks", "walk"}}};
constexpr std::array<std::string_view, 6> kAdjectives = {"big", "small", "old", "young", "happy", "quiet"};
constexpr std::array<std::string_view, 5> kTails = {"quickly", "slowly", "often", "today", "in the park"};

template <typename T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& items) {
  return items[rng.below(N)];
}

// "the [adj] noun verb [tail]"; returns both agreement variants.
std::pair<std::string, std::string> agreement_sentence(Rng& rng) {
  const bool plural = rng.below(2) == 1;
  std::string subject = "the";
  if (rng.below(2) == 1) subject += " " + std::string(pick(rng, kAdjectives));
  const Noun& noun = pick(rng, kNouns);
  subject += " " + std::string(plural ? noun.plural : noun.singular);
  const Verb& verb = pick(rng, kVerbs);
  std::string tail;
  if (rng.below(2) == 1) tail = " " + std::string(pick(rng, kTails));
  std::string good = subject + " " + std::string(plural ? verb.plural : verb.singular) + tail;
  std::string bad = subject + " " + std::string(plural ? verb.singular : verb.plural) + tail;
  return {std::move(good), std::move(bad)};
}

}  // namespace

std::vector<std::string> gen_agreement_corpus(int n_sentences, std::uint64_t seed) {
  if (n_sentences <= 0) throw ValidationError("corpus size must be positive");
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n_sentences));
  for (int i = 0; i < n_sentences; ++i) out.push_back(agreement_sentence(rng).first);
  return out;
}

Suite gen_agreement(const AgreementSpec& spec) {
  if (spec.count <= 0) throw ValidationError("count must be positive");
  Rng rng(spec.seed);
  Suite out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    auto [good, bad] = agreement_sentence(rng);
    out.push_back(MinimalPair{
        .id = numbered("agr", i),
        .good = std::move(good),
        .bad = std::move(bad),
        .paradigm = "subject_verb_agreement",
        .suite = "agreement",
        .field = std::string("morphology"),
    });
  }
  return out;
}

void check_suite(const Suite& suite) {
  std::unordered_set<std::string> seen;
  for (const auto& p : suite) {
    if (p.good == p.bad) throw ValidationError("pair '" + p.id + "' has identical good and bad strings");
    if (!seen.insert(p.id).second) throw ValidationError("duplicate pair id '" + p.id + "'");
  }
}

Suite parse_suite(std::string_view text, std::string_view suite_label) {
  Suite out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const auto where = "line " + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) throw ValidationError(where + "record is not a JSON object");
    auto get = [&](const char* key) -> std::string {
      auto it = rec.find(key);
      if (it == rec.end()) throw ValidationError(where + "missing key '" + key + "'");
      if (!it->is_string()) throw ValidationError(where + "key '" + key + "' is not a string");
      return it->get<std::string>();
    };
    MinimalPair p{.id = get("id"),
                  .good = get("good"),
                  .bad = get("bad"),
                  .paradigm = get("paradigm"),
                  .suite = std::string(suite_label),
                  .field = std::nullopt};
    if (rec.contains("field")) p.field = get("field");
    if (p.good == p.bad) throw ValidationError(where + "good and bad strings are identical for id '" + p.id + "'");
    if (!seen.insert(p.id).second) throw ValidationError(where + "duplicate id '" + p.id + "'");
    out.push_back(std::move(p));
  }
  return out;
}

Suite load_suite(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  try {
    return parse_suite(text, path.stem().string());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_suite(const Suite& suite) {
  std::string out;
  for (const auto& p : suite) {
    json rec = {{"id", p.id}, {"good", p.good}, {"bad", p.bad}, {"paradigm", p.paradigm}};
    if (p.field) rec["field"] = *p.field;
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace asymkit::corpus
