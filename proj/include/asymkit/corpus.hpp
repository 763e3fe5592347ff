#pragma once

// Minimal-pair benchmarks: generators for the arithmetic, Dyck and toy
// agreement suites, plus the JSONL reader/writer for external suites.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asymkit::corpus {

/// One acceptable string and one unacceptable variant of it.
struct MinimalPair {
  std::string id;
  std::string good;
  std::string bad;
  std::string paradigm;
  std::string suite;
  std::optional<std::string> field;  // e.g. "syntax" for BLiMP splits

  bool operator==(const MinimalPair&) const = default;
};

using Suite = std::vector<MinimalPair>;

enum class ArithmeticTask { addition, multiplication };

struct ArithmeticSpec {
  ArithmeticTask subtask = ArithmeticTask::addition;
  std::int64_t operand_lo = 0;
  std::int64_t operand_hi = 1000;
  std::vector<std::int64_t> error_set = {-10, -2, -1, 1, 2, 10};
  int count = 2048;
  std::uint64_t seed = 0;
  std::string operator_glyph = "+";

  /// Default bounds and glyph for a subtask: [0, 1000] with "+" for
  /// addition, [0, 100] with "×" for multiplication.
  static ArithmeticSpec defaults(ArithmeticTask task);
};

struct DyckSpec {
  int k = 3;
  int length = 32;
  int count = 1024;
  std::uint64_t seed = 0;
};

/// Settings for the toy subject-verb agreement grammar used to exercise the
/// n-gram scorer end to end.
struct AgreementSpec {
  int count = 500;
  std::uint64_t seed = 0;
};

std::string_view task_name(ArithmeticTask task);
ArithmeticTask parse_task(std::string_view name);

std::string format_statement(std::int64_t x, std::string_view glyph, std::int64_t y,
                             std::int64_t z);

Suite gen_arithmetic(const ArithmeticSpec& spec);

/// Random balanced string of `length` symbols, returned as symbol chars.
std::string sample_balanced(int k, int length, std::uint64_t seed);

Suite gen_dyck(const DyckSpec& spec);

/// Dyck-k membership by stack discipline. Whitespace is ignored; any other
/// symbol outside the 2k brackets raises ValidationError.
bool validate_dyck(std::string_view symbols, int k);

/// Grammatical sentences from the toy agreement grammar (training corpus).
std::vector<std::string> gen_agreement_corpus(int n_sentences, std::uint64_t seed);

/// Minimal pairs from the same grammar where the bad side breaks
/// subject-verb number agreement.
Suite gen_agreement(const AgreementSpec& spec);

/// Reads a line-delimited JSON suite. The suite label is the file stem.
Suite load_suite(const std::filesystem::path& path);

/// Parses suite records from text; `suite_label` fills MinimalPair::suite.
Suite parse_suite(std::string_view text, std::string_view suite_label);

/// One JSON object per line, keys in sorted order, trailing newline.
std::string serialize_suite(const Suite& suite);

/// Throws ValidationError on good == bad or duplicate ids.
void check_suite(const Suite& suite);

}  // namespace asymkit::corpus
