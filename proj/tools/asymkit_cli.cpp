// Command-line front end. Everything goes through the C interface.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asymkit/asymkit.h"

namespace {

using json = nlohmann::json;

int exit_code(ak_status s) {
  switch (s) {
    case AK_OK: return 0;
    case AK_ERR_IO: return 2;
    default: return 1;
  }
}

// Runs one command; prints the report (or the error) and returns the exit code.
int call(ak_status (*fn)(const char*, char**), const json& request, const std::string& name,
         void (*summary)(const json&)) {
  char* out = nullptr;
  const ak_status s = fn(request.dump().c_str(), &out);
  if (s != AK_OK) {
    std::cerr << "asymkit " << name << ": error: " << ak_last_error() << "\n";
    return exit_code(s);
  }
  const json report = json::parse(out);
  ak_string_free(out);
  summary(report);
  return 0;
}

void print_gen(const json& r) {
  std::cout << "wrote " << r["n_pairs"].get<std::size_t>() << " pairs (config " << r["config_hash"].get<std::string>()
            << ")\nmanifest: " << r["manifest"].get<std::string>() << "\n";
  if (r.contains("training_corpus")) std::cout << "training corpus: " << r["training_corpus"].get<std::string>() << "\n";
}

void print_score(const json& r) {
  std::printf("suite %s: %.4f over %zu pairs\n", r["suite"].get<std::string>().c_str(), r["overall"].get<double>(),
              r["n_pairs"].get<std::size_t>());
  for (const auto& [name, p] : r["per_paradigm"].items())
    std::printf("  %-32s %.4f  (%zu)\n", name.c_str(), p["accuracy"].get<double>(), p["n_pairs"].get<std::size_t>());
}

void print_brainscore(const json& r) {
  std::cout << "config " << r["config_hash"].get<std::string>() << "\n";
  for (const auto& c : r["checkpoints"])
    std::printf("  tokens %-14lld asymmetry %+.6f\n", static_cast<long long>(c["tokens"].get<std::int64_t>()),
                c["asymmetry"]["value"].get<double>());
  std::cout << "asymmetry table: " << r["asymmetry_csv"].get<std::string>() << "\n";
}

void print_transition(const json& r) {
  for (const auto& w : r["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  std::cout << "reference " << r["reference"].get<std::string>() << " (config " << r["config_hash"].get<std::string>()
            << ")\n";
  for (const auto& d : r["distances"])
    std::printf("  %-32s %.6f\n", d["label"].get<std::string>().c_str(), d["distance"].get<double>());
}

void print_synth(const json& r) {
  std::cout << "experiment: " << r["experiment"].get<std::string>() << " (config "
            << r["config_hash"].get<std::string>() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-pair benchmarks, brain encoding scores and training-dynamics transitions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ak_version()));

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a minimal-pair suite");
  gen->require_subcommand(1);
  std::string out;
  std::uint64_t seed = 0;
  int count = -1;

  auto* dyck = gen->add_subcommand("dyck", "Dyck-k bracket pairs");
  int k = 3, length = 32;
  dyck->add_option("--k", k, "Bracket types")->capture_default_str();
  dyck->add_option("--length", length, "Symbols per string")->capture_default_str();
  dyck->add_option("--count", count, "Number of pairs (default 1024)");
  dyck->add_option("--seed", seed, "Random seed")->capture_default_str();
  dyck->add_option("--out", out, "Output JSONL path")->required();

  auto* arith = gen->add_subcommand("arith", "Arithmetic statement pairs");
  std::string subtask = "addition", glyph;
  std::optional<std::int64_t> lo, hi;
  std::vector<std::int64_t> errors;
  arith->add_option("--subtask", subtask, "addition or multiplication")->capture_default_str();
  arith->add_option("--count", count, "Number of pairs (default 2048)");
  arith->add_option("--seed", seed, "Random seed")->capture_default_str();
  arith->add_option("--lo", lo, "Smallest operand");
  arith->add_option("--hi", hi, "Largest operand");
  arith->add_option("--errors", errors, "Error offsets added to the true result")->delimiter(',');
  arith->add_option("--glyph", glyph, "Operator symbol");
  arith->add_option("--out", out, "Output JSONL path")->required();

  auto* agr = gen->add_subcommand("agreement", "Toy subject-verb agreement pairs");
  int training = 0;
  agr->add_option("--count", count, "Number of pairs (default 500)");
  agr->add_option("--seed", seed, "Random seed")->capture_default_str();
  agr->add_option("--training-sentences", training, "Also write a training corpus of this size");
  agr->add_option("--out", out, "Output JSONL path")->required();

  // score
  auto* score = app.add_subcommand("score", "Minimal-pair accuracy of a suite");
  std::string suite, dump, ngram_corpus, write_dump, score_out;
  int order = 3;
  double alpha = 0.1;
  score->add_option("--suite", suite, "Suite JSONL")->required()->check(CLI::ExistingFile);
  auto* dump_opt = score->add_option("--dump", dump, "Per-token log-prob dump (JSONL)");
  auto* corpus_opt = score->add_option("--ngram-corpus", ngram_corpus, "Train an n-gram scorer on this text file");
  dump_opt->excludes(corpus_opt);
  score->add_option("--order", order, "n-gram order")->capture_default_str();
  score->add_option("--alpha", alpha, "Additive smoothing")->capture_default_str();
  score->add_option("--write-dump", write_dump, "Save the n-gram log-prob dump");
  score->add_option("--out", score_out, "JSON report path");

  // brainscore
  auto* brain = app.add_subcommand("brainscore", "Encoding-model brain scores and hemispheric asymmetry");
  std::string config, bs_out, sign;
  std::optional<double> fraction, cutoff;
  std::optional<int> workers;
  bool whole_brain = false;
  brain->add_option("config", config, "Experiment JSON")->required();
  brain->add_option("--out", bs_out, "Output directory (overrides the config)");
  auto* frac_opt = brain->add_option("--reliability-fraction", fraction, "Keep this top fraction of voxels by ISC");
  brain->add_flag("--whole-brain", whole_brain, "Skip the reliability mask")->excludes(frac_opt);
  brain->add_option("--sign", sign, "left_minus_right or right_minus_left");
  brain->add_option("--cutoff", cutoff, "High-pass cutoff in seconds");
  brain->add_option("--workers", workers, "Checkpoints processed in parallel");

  // transition
  auto* trans = app.add_subcommand("transition", "Sigmoid fits and transition distances of trajectories");
  std::vector<std::string> trajectories;
  std::string reference = "asymmetry", tr_out;
  bool scale_only = false;
  trans->add_option("trajectories", trajectories, "Trajectory CSV files")->required();
  trans->add_option("--reference", reference, "Label of the reference curve")->capture_default_str();
  trans->add_flag("--scale-only", scale_only, "Align curves by scale only (no offset)");
  trans->add_option("--out", tr_out, "Output directory")->required();

  // synth
  auto* syn = app.add_subcommand("synth", "Write a synthetic dataset with a planted asymmetry");
  int subjects = 4, runs = 9, scans = 200, voxels = 200, features = 20, checkpoints = 1;
  double tr = 2.0, snr_left = 1.0, snr_right = 0.5, noise = 1.0;
  std::string syn_out;
  syn->add_option("--subjects", subjects)->capture_default_str();
  syn->add_option("--runs", runs)->capture_default_str();
  syn->add_option("--scans", scans)->capture_default_str();
  syn->add_option("--voxels", voxels)->capture_default_str();
  syn->add_option("--features", features)->capture_default_str();
  syn->add_option("--tr", tr, "Repetition time in seconds")->capture_default_str();
  syn->add_option("--snr-left", snr_left)->capture_default_str();
  syn->add_option("--snr-right", snr_right)->capture_default_str();
  syn->add_option("--noise", noise, "Noise standard deviation")->capture_default_str();
  syn->add_option("--checkpoints", checkpoints, "Feature sets of rising quality")->capture_default_str();
  syn->add_option("--seed", seed)->capture_default_str();
  syn->add_option("--out", syn_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (dyck->parsed()) {
    json r = {{"kind", "dyck"}, {"k", k}, {"length", length}, {"seed", seed}, {"out", out}};
    if (count >= 0) r["count"] = count;
    return call(ak_run_gen, r, "gen", print_gen);
  }
  if (arith->parsed()) {
    json r = {{"kind", "arithmetic"}, {"subtask", subtask}, {"seed", seed}, {"out", out}};
    if (count >= 0) r["count"] = count;
    if (lo) r["operand_lo"] = *lo;
    if (hi) r["operand_hi"] = *hi;
    if (!errors.empty()) r["error_set"] = errors;
    if (!glyph.empty()) r["glyph"] = glyph;
    return call(ak_run_gen, r, "gen", print_gen);
  }
  if (agr->parsed()) {
    json r = {{"kind", "agreement"}, {"seed", seed}, {"training_sentences", training}, {"out", out}};
    if (count >= 0) r["count"] = count;
    return call(ak_run_gen, r, "gen", print_gen);
  }
  if (score->parsed()) {
    json r = {{"suite", suite}, {"order", order}, {"alpha", alpha}, {"out", score_out}};
    if (!dump.empty()) r["dump"] = dump;
    if (!ngram_corpus.empty()) r["ngram_corpus"] = ngram_corpus;
    if (!write_dump.empty()) r["write_dump"] = write_dump;
    return call(ak_run_score, r, "score", print_score);
  }
  if (brain->parsed()) {
    json r = {{"config", config}, {"whole_brain", whole_brain}};
    if (!bs_out.empty()) r["output_dir"] = bs_out;
    if (fraction) r["reliability_fraction"] = *fraction;
    if (!sign.empty()) r["sign"] = sign;
    if (cutoff) r["cutoff_seconds"] = *cutoff;
    if (workers) r["workers"] = *workers;
    return call(ak_run_brainscore, r, "brainscore", print_brainscore);
  }
  if (trans->parsed()) {
    const json r = {{"trajectories", trajectories}, {"reference", reference}, {"scale_only", scale_only},
                    {"out_dir", tr_out}};
    return call(ak_run_transition, r, "transition", print_transition);
  }
  if (syn->parsed()) {
    const json r = {{"subjects", subjects}, {"runs", runs},           {"scans", scans},
                    {"voxels", voxels},     {"features", features},   {"tr", tr},
                    {"snr_left", snr_left}, {"snr_right", snr_right}, {"noise_sd", noise},
                    {"seed", seed},         {"checkpoints", checkpoints}, {"out_dir", syn_out}};
    return call(ak_run_synth, r, "synth", print_synth);
  }
  return 1;
}
