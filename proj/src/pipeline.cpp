#include "asymkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include <json.hpp>

#include "asymkit/error.hpp"
#include "asymkit/io.hpp"
#include "asymkit/ngram.hpp"
#include "asymkit/rng.hpp"
#include "asymkit/svg.hpp"

namespace asymkit::pipeline {

namespace {

using json = nlohmann::json;
using encoding::Matrix;

constexpr const char* kManifestSchema = "asymkit.manifest/1";
constexpr const char* kScoreSchema = "asymkit.score/1";
constexpr const char* kExperimentSchema = "asymkit.experiment/1";
constexpr const char* kBrainscoreSchema = "asymkit.brainscore/1";
constexpr const char* kReliabilitySchema = "asymkit.reliability/1";
constexpr const char* kFitsSchema = "asymkit.fits/1";
constexpr const char* kPlantedSchema = "asymkit.planted/1";

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string hash_of(const json& j) { return io::fnv1a_hex(j.dump()); }

// Re-raises an error with a location prefix, keeping its category.
template <typename F>
auto in_stage(const std::string& where, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError(where + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
}

std::string_view sign_name(encoding::AsymmetrySign s) {
  return s == encoding::AsymmetrySign::left_minus_right ? "left_minus_right" : "right_minus_left";
}

encoding::AsymmetrySign parse_sign(std::string_view s) {
  if (s == "left_minus_right") return encoding::AsymmetrySign::left_minus_right;
  if (s == "right_minus_left") return encoding::AsymmetrySign::right_minus_left;
  throw ValidationError("asymmetry_sign must be left_minus_right or right_minus_left, got '" + std::string(s) + "'");
}

std::vector<std::string> read_lines(const fs::path& path) {
  const std::string text = io::read_text(path);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(std::move(line));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// gen

GenReport run_gen(const GenRequest& req) {
  corpus::Suite suite;
  json spec;
  switch (req.kind) {
    case GenKind::arithmetic: {
      const auto& a = req.arithmetic;
      suite = corpus::gen_arithmetic(a);
      spec = {{"generator", "arithmetic"}, {"subtask", corpus::task_name(a.subtask)}, {"operand_lo", a.operand_lo},
              {"operand_hi", a.operand_hi}, {"error_set", a.error_set}, {"count", a.count},
              {"seed", a.seed},         {"operator_glyph", a.operator_glyph}};
      break;
    }
    case GenKind::dyck: {
      const auto& d = req.dyck;
      suite = corpus::gen_dyck(d);
      spec = {{"generator", "dyck"}, {"k", d.k}, {"length", d.length}, {"count", d.count}, {"seed", d.seed}};
      break;
    }
    case GenKind::agreement: {
      const auto& g = req.agreement;
      suite = corpus::gen_agreement(g);
      spec = {{"generator", "agreement"}, {"count", g.count}, {"seed", g.seed},
              {"training_sentences", req.training_sentences}};
      break;
    }
  }
  if (req.out.empty()) throw ValidationError("no output path given");

  GenReport report;
  report.n_pairs = suite.size();
  report.config_hash = hash_of(spec);
  const std::string text = corpus::serialize_suite(suite);
  io::write_atomic(req.out, text);

  json manifest = {{"schema", kManifestSchema},
                   {"config_hash", report.config_hash},
                   {"spec", spec},
                   {"suite_file", req.out.filename().string()},
                   {"suite_fnv1a", io::fnv1a_hex(text)},
                   {"n_pairs", suite.size()}};
  if (req.kind == GenKind::agreement && req.training_sentences > 0) {
    const auto sentences =
        corpus::gen_agreement_corpus(req.training_sentences, mix_seed(req.agreement.seed, 1));
    std::string corpus_text;
    for (const auto& s : sentences) corpus_text += s + "\n";
    fs::path corpus_path = req.out;
    corpus_path.replace_extension(".train.txt");
    io::write_atomic(corpus_path, corpus_text);
    manifest["training_corpus"] = corpus_path.filename().string();
    report.training_corpus = corpus_path;
  }
  report.manifest = req.out;
  report.manifest += ".manifest.json";
  io::write_atomic(report.manifest, manifest.dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------
// score

scoring::SuiteAccuracy run_score(const ScoreRequest& req) {
  const corpus::Suite suite = corpus::load_suite(req.suite);
  json config = {{"suite", req.suite.generic_string()}};
  std::vector<scoring::TokenLogProbs> dump;
  if (req.dump) {
    config["dump"] = req.dump->generic_string();
    dump = scoring::load_dump(*req.dump);
  } else if (req.ngram_corpus) {
    config["ngram"] = {{"corpus", req.ngram_corpus->generic_string()},
                       {"order", req.ngram_order},
                       {"alpha", req.ngram_alpha}};
    const auto sentences = read_lines(*req.ngram_corpus);
    const auto model = scoring::train_ngram(sentences, req.ngram_order, req.ngram_alpha);
    dump = scoring::ngram_dump(model, suite);
    if (req.write_dump) io::write_atomic(*req.write_dump, scoring::serialize_dump(dump));
  } else {
    throw ValidationError("score needs a log-prob dump or an n-gram training corpus");
  }

  const auto pairs = scoring::join_dump(suite, dump);
  const std::string label = suite.empty() ? req.suite.stem().string() : suite.front().suite;
  scoring::SuiteAccuracy acc = scoring::pair_accuracy(pairs, label);

  json per = json::object();
  for (const auto& [p, a] : acc.per_paradigm) per[p] = {{"accuracy", a.accuracy}, {"n_pairs", a.n_pairs}};
  const json report = {{"schema", kScoreSchema}, {"config_hash", hash_of(config)}, {"suite", acc.suite},
                       {"n_pairs", acc.n_pairs},  {"overall", acc.overall},        {"per_paradigm", per}};
  if (!req.out.empty()) io::write_atomic(req.out, report.dump(2) + "\n");
  return acc;
}

// ---------------------------------------------------------------------------
// brainscore

ExperimentConfig load_experiment(const fs::path& path, const BrainscoreOverrides& ov) {
  const fs::path base = path.parent_path();
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }

  auto resolve = [&](const std::string& p) {
    fs::path r = fs::path(p).is_absolute() ? fs::path(p) : base / p;
    return r.lexically_normal();
  };
  auto must_exist = [](const fs::path& p) {
    if (!fs::exists(p)) throw IoError("referenced file does not exist: " + p.string());
  };

  ExperimentConfig c;
  try {
    if (j.contains("schema") && j["schema"] != kExperimentSchema)
      throw ValidationError("unsupported schema " + j["schema"].dump());
    for (const auto& subj : j.at("subjects")) {
      std::vector<fs::path> runs;
      for (const auto& r : subj) {
        runs.push_back(resolve(r.get<std::string>()));
        must_exist(runs.back());
      }
      c.subjects.push_back(std::move(runs));
    }
    for (const auto& cp : j.at("checkpoints")) {
      ExperimentConfig::Checkpoint ck;
      ck.tokens = cp.at("tokens").get<std::int64_t>();
      for (const auto& layer : cp.at("layers")) {
        std::vector<fs::path> runs;
        for (const auto& r : layer) {
          runs.push_back(resolve(r.get<std::string>()));
          must_exist(runs.back());
        }
        ck.layers.push_back(std::move(runs));
      }
      c.checkpoints.push_back(std::move(ck));
    }
    const json enc = j.value("encoding", json::object());
    if (enc.contains("lambda_grid")) c.lambda_grid = enc["lambda_grid"].get<std::vector<double>>();
    c.cutoff_seconds = enc.value("cutoff_seconds", c.cutoff_seconds);
    c.hrf = enc.value("hrf", c.hrf);
    if (enc.contains("reliability_fraction")) {
      if (enc["reliability_fraction"].is_null()) {
        c.reliability_fraction.reset();
      } else {
        c.reliability_fraction = enc["reliability_fraction"].get<double>();
      }
    }
    c.region_mask = resolve(enc.at("region_mask").get<std::string>());
    must_exist(c.region_mask);
    if (enc.contains("asymmetry_sign")) c.sign = parse_sign(enc["asymmetry_sign"].get<std::string>());
    c.workers = j.value("workers", 1);
    c.output_dir = resolve(j.value("output_dir", std::string("out")));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }

  if (ov.output_dir) c.output_dir = *ov.output_dir;
  if (ov.reliability_fraction) c.reliability_fraction = *ov.reliability_fraction;
  if (ov.whole_brain) c.reliability_fraction.reset();
  if (ov.sign) c.sign = *ov.sign;
  if (ov.cutoff_seconds) c.cutoff_seconds = *ov.cutoff_seconds;
  if (ov.workers) c.workers = *ov.workers;

  if (c.subjects.empty()) throw ValidationError("experiment lists no subjects");
  if (c.checkpoints.empty()) throw ValidationError("experiment lists no checkpoints");
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    if (c.checkpoints[i].tokens <= 0) throw ValidationError("checkpoint tokens must be positive");
    if (i > 0 && c.checkpoints[i].tokens <= c.checkpoints[i - 1].tokens)
      throw ValidationError("checkpoint tokens must be strictly increasing");
    if (c.checkpoints[i].layers.empty())
      throw ValidationError("checkpoint " + std::to_string(c.checkpoints[i].tokens) + " lists no layers");
  }
  if (c.hrf != "double_gamma" && c.hrf != "none") throw ValidationError("hrf must be double_gamma or none");
  if (c.reliability_fraction && !(*c.reliability_fraction > 0.0 && *c.reliability_fraction <= 1.0))
    throw ValidationError("reliability_fraction must lie in (0, 1]");
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
  return c;
}

std::string experiment_json(const ExperimentConfig& c) {
  json subjects = json::array();
  for (const auto& s : c.subjects) {
    json runs = json::array();
    for (const auto& r : s) runs.push_back(r.generic_string());
    subjects.push_back(runs);
  }
  json checkpoints = json::array();
  for (const auto& ck : c.checkpoints) {
    json layers = json::array();
    for (const auto& l : ck.layers) {
      json runs = json::array();
      for (const auto& r : l) runs.push_back(r.generic_string());
      layers.push_back(runs);
    }
    checkpoints.push_back({{"tokens", ck.tokens}, {"layers", layers}});
  }
  // Worker count and output location do not change any emitted number.
  const json j = {
      {"schema", kExperimentSchema},
      {"subjects", subjects},
      {"checkpoints", checkpoints},
      {"encoding",
       {{"lambda_grid", c.lambda_grid},
        {"cutoff_seconds", c.cutoff_seconds},
        {"hrf", c.hrf},
        {"reliability_fraction", c.reliability_fraction ? json(*c.reliability_fraction) : json(nullptr)},
        {"region_mask", c.region_mask.generic_string()},
        {"asymmetry_sign", sign_name(c.sign)}}},
  };
  return j.dump();
}

BrainscoreReport run_brainscore(const ExperimentConfig& c) {
  BrainscoreReport report;
  report.config_hash = io::fnv1a_hex(experiment_json(c));
  const std::string hash_comment = "config_hash=" + report.config_hash;

  const auto mask = in_stage("stage mask", [&] {
    auto m = io::read_mask(c.region_mask);
    encoding::check_mask(m);
    return m;
  });

  // Subjects: load, preprocess, reliability, average.
  std::vector<std::vector<encoding::BoldRun>> subjects = in_stage("stage load_bold", [&] {
    std::vector<std::vector<encoding::BoldRun>> out;
    for (const auto& runs : c.subjects) {
      std::vector<encoding::BoldRun> s;
      for (const auto& p : runs) s.push_back(io::read_bold(p));
      if (s.size() != c.subjects.front().size()) throw ValidationError("subjects differ in run count");
      out.push_back(std::move(s));
    }
    for (const auto& s : out)
      for (std::size_t r = 0; r < s.size(); ++r) {
        if (s[r].data.cols() != static_cast<Eigen::Index>(mask.labels.size()))
          throw ValidationError("BOLD run has " + std::to_string(s[r].data.cols()) + " voxels, mask has " +
                                std::to_string(mask.labels.size()));
        if (s[r].data.rows() != out.front()[r].data.rows())
          throw ValidationError("subjects differ in scan count for run " + std::to_string(r));
        if (s[r].tr_seconds != out.front()[r].tr_seconds) throw ValidationError("runs differ in TR");
      }
    return out;
  });
  in_stage("stage preprocess", [&] {
    for (auto& s : subjects)
      for (auto& r : s) r = encoding::preprocess_run(r, c.cutoff_seconds).run;
  });

  std::optional<std::vector<std::size_t>> subset;
  if (c.reliability_fraction) {
    in_stage("stage reliability", [&] {
      const auto n_vox = static_cast<Eigen::Index>(mask.labels.size());
      encoding::Vector isc = encoding::Vector::Zero(n_vox);
      const bool have_isc = subjects.size() >= 2;
      if (have_isc) {
        isc = encoding::isc_reliability(subjects);
      } else if (*c.reliability_fraction < 1.0) {
        throw ValidationError("a reliability mask below 1.0 needs at least 2 subjects");
      }
      subset = encoding::top_fraction_mask(isc, *c.reliability_fraction);
      json rel = {{"schema", kReliabilitySchema},
                  {"config_hash", report.config_hash},
                  {"fraction", *c.reliability_fraction},
                  {"selected", *subset}};
      if (have_isc) {
        json values = json::array();
        for (Eigen::Index v = 0; v < isc.size(); ++v) values.push_back(number_or_null(isc(v)));
        rel["isc"] = values;
      }
      io::write_atomic(c.output_dir / "reliability.json", rel.dump() + "\n");
    });
  }

  const std::vector<encoding::BoldRun> bold = in_stage("stage average", [&] {
    return encoding::average_subjects(subjects);
  });
  std::vector<Matrix> bold_data;
  for (const auto& r : bold) bold_data.push_back(r.data);
  const double tr = bold.front().tr_seconds;
  const std::vector<double> kernel = c.hrf == "none" ? std::vector<double>{1.0} : encoding::canonical_hrf(tr);

  // Checkpoints are independent; workers pull them by index.
  std::vector<CheckpointResult> results(c.checkpoints.size());
  std::vector<std::exception_ptr> failures(c.checkpoints.size());
  auto process = [&](std::size_t i) {
    const auto& ck = c.checkpoints[i];
    const std::string where = "checkpoint " + std::to_string(ck.tokens);
    std::vector<encoding::Vector> per_layer;
    json layer_folds = json::array();
    for (std::size_t l = 0; l < ck.layers.size(); ++l) {
      const auto& runs = ck.layers[l];
      const std::vector<Matrix> designs = in_stage(where + ": stage design (layer " + std::to_string(l) + ")", [&] {
        if (runs.size() != bold.size())
          throw ValidationError(std::to_string(runs.size()) + " feature runs for " + std::to_string(bold.size()) +
                                " BOLD runs");
        std::vector<Matrix> out;
        for (std::size_t r = 0; r < runs.size(); ++r) {
          const auto f = io::read_features(runs[r]);
          const Matrix d = encoding::build_design(f, bold[r].data.rows(), tr, kernel, true);
          out.push_back(encoding::highpass_standardize(d, tr, c.cutoff_seconds));
        }
        return out;
      });
      const auto cv = in_stage(where + ": stage ridge (layer " + std::to_string(l) + ")",
                               [&] { return encoding::ridge_cv(designs, bold_data, c.lambda_grid); });
      json folds = json::array();
      for (const auto& f : cv.folds)
        folds.push_back({{"held_out_run", f.held_out_run}, {"lambda", f.lambda}, {"inner_score", f.inner_score}});
      layer_folds.push_back(folds);
      per_layer.push_back(cv.scores);
    }
    CheckpointResult res;
    res.tokens = ck.tokens;
    res.map = in_stage(where + ": stage best_layer", [&] { return encoding::best_layer_map(per_layer, ck.tokens); });
    res.asymmetry = in_stage(where + ": stage asymmetry",
                             [&] { return encoding::region_asymmetry(res.map.scores, mask, subset, c.sign); });

    json scores = json::array();
    for (Eigen::Index v = 0; v < res.map.scores.size(); ++v) scores.push_back(number_or_null(res.map.scores(v)));
    const json out = {{"schema", kBrainscoreSchema},
                      {"config_hash", report.config_hash},
                      {"checkpoint_tokens", ck.tokens},
                      {"scores", scores},
                      {"layer_of_max", res.map.layer_of_max},
                      {"folds", layer_folds},
                      {"asymmetry",
                       {{"sign", sign_name(c.sign)},
                        {"value", res.asymmetry.value},
                        {"left_mean", res.asymmetry.left_mean},
                        {"right_mean", res.asymmetry.right_mean},
                        {"n_left", res.asymmetry.n_left},
                        {"n_right", res.asymmetry.n_right}}}};
    in_stage(where + ": stage write", [&] {
      io::write_atomic(c.output_dir / ("brainscore_" + std::to_string(ck.tokens) + ".json"), out.dump() + "\n");
    });
    results[i] = std::move(res);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      try {
        process(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(c.workers), results.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  transition::Trajectory traj{{}, "asymmetry"};
  std::string detail = "# " + hash_comment + "\ntokens,asymmetry,left_mean,right_mean,n_left,n_right,sign\n";
  for (const auto& r : results) {
    traj.points.push_back({static_cast<double>(r.tokens), r.asymmetry.value});
    detail += std::to_string(r.tokens) + "," + io::format_double(r.asymmetry.value) + "," +
              io::format_double(r.asymmetry.left_mean) + "," + io::format_double(r.asymmetry.right_mean) + "," +
              std::to_string(r.asymmetry.n_left) + "," + std::to_string(r.asymmetry.n_right) + "," +
              std::string(sign_name(c.sign)) + "\n";
  }
  report.asymmetry_csv = c.output_dir / "asymmetry.csv";
  in_stage("stage write", [&] {
    io::write_atomic(report.asymmetry_csv, io::serialize_trajectories({traj}, hash_comment));
    io::write_atomic(c.output_dir / "asymmetry_detail.csv", detail);
  });
  report.checkpoints = std::move(results);
  return report;
}

// ---------------------------------------------------------------------------
// transition

TransitionReport run_transition(const TransitionRequest& req) {
  if (req.trajectories.empty()) throw ValidationError("no trajectory files given");
  json config = {{"reference_label", req.reference_label}, {"scale_only", req.scale_only}};
  std::vector<transition::Trajectory> curves;
  for (const auto& p : req.trajectories) {
    config["trajectories"].push_back(p.generic_string());
    for (auto& t : io::read_trajectories(p)) {
      for (const auto& existing : curves)
        if (existing.label == t.label) throw ValidationError("trajectory label '" + t.label + "' appears twice");
      curves.push_back(std::move(t));
    }
  }
  if (curves.empty()) throw ValidationError("trajectory files contain no rows");

  TransitionReport report;
  report.config_hash = hash_of(config);
  const std::string hash_comment = "config_hash=" + report.config_hash;

  std::size_t ref = curves.size();
  for (std::size_t i = 0; i < curves.size(); ++i)
    if (curves[i].label == req.reference_label) ref = i;
  if (ref == curves.size()) {
    if (req.reference_label != "asymmetry")
      throw ValidationError("reference trajectory '" + req.reference_label + "' not found");
    ref = 0;
  }
  report.reference = curves[ref].label;

  for (const auto& t : curves) report.fits.push_back(transition::fit_sigmoid(t));
  const auto& ref_fit = report.fits[ref];
  if (ref_fit.degenerate)
    throw ValidationError("reference trajectory '" + report.reference + "' has no transition (flat curve)");

  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (i == ref) continue;
    const auto& f = report.fits[i];
    if (f.degenerate) {
      report.warnings.push_back("'" + f.label + "' is flat; no transition, left out of the distance table");
      continue;
    }
    report.distances.emplace_back(f.label, transition::transition_distance(f, ref_fit));
  }
  std::stable_sort(report.distances.begin(), report.distances.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });

  // Display alignment onto the reference curve.
  json alignments = json::array();
  std::vector<svg::Series> overlay;
  auto to_series = [](const transition::Trajectory& t) {
    svg::Series s{t.label, {}};
    auto pts = t.points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.tokens < b.tokens; });
    for (const auto& p : pts) s.points.emplace_back(std::log10(p.tokens), p.value);
    return s;
  };
  overlay.push_back(to_series(curves[ref]));
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (i == ref) continue;
    try {
      const auto a = transition::align_curve(curves[i], curves[ref], req.scale_only);
      alignments.push_back(
          {{"label", curves[i].label}, {"scale", a.scale}, {"offset", a.offset}, {"objective", a.objective}});
      overlay.push_back(to_series(a.aligned));
    } catch (const ValidationError& e) {
      report.warnings.push_back("'" + curves[i].label + "' not aligned: " + e.what());
    }
  }

  json fits = json::array();
  for (const auto& f : report.fits) {
    fits.push_back({{"label", f.label},
                    {"y_min", f.y_min},
                    {"y_max", f.y_max},
                    {"x0", number_or_null(f.x0)},
                    {"beta", f.beta},
                    {"mse", f.mse},
                    {"degenerate", f.degenerate}});
  }
  const json fits_doc = {{"schema", kFitsSchema},    {"config_hash", report.config_hash},
                         {"reference", report.reference}, {"x_axis", "log10(tokens)"},
                         {"fits", fits},          {"alignments", alignments}};

  std::string dist = "# " + hash_comment + "\nlabel,distance,x0,beta\n";
  for (const auto& [label, d] : report.distances) {
    const auto it = std::find_if(report.fits.begin(), report.fits.end(), [&](const auto& f) { return f.label == label; });
    dist += label + "," + io::format_double(d) + "," + io::format_double(it->x0) + "," + io::format_double(it->beta) + "\n";
  }

  std::vector<const transition::SigmoidFit*> live;
  for (const auto& f : report.fits)
    if (!f.degenerate) live.push_back(&f);
  std::string matrix = "# " + hash_comment + "\nlabel";
  for (const auto* f : live) matrix += "," + f->label;
  matrix += "\n";
  for (const auto* a : live) {
    matrix += a->label;
    for (const auto* b : live) matrix += "," + io::format_double(transition::transition_distance(*a, *b));
    matrix += "\n";
  }

  std::vector<svg::Series> plane;
  for (const auto* f : live) plane.push_back({f->label, {{f->x0, f->beta}}});

  const std::string comment = "<!-- " + hash_comment + " -->\n";
  io::write_atomic(req.out_dir / "fits.json", fits_doc.dump(2) + "\n");
  io::write_atomic(req.out_dir / "distances.csv", dist);
  io::write_atomic(req.out_dir / "distance_matrix.csv", matrix);
  io::write_atomic(req.out_dir / "overlay.svg",
                   comment + svg::plot(overlay, "Trajectories aligned to " + report.reference, "log10(tokens)", "value"));
  io::write_atomic(req.out_dir / "plane.svg",
                   comment + svg::plot(plane, "Sigmoid transitions", "x0 (log10 tokens)", "beta", svg::Style::markers));
  return report;
}

// ---------------------------------------------------------------------------
// synth

SynthReport run_synth(const SynthRequest& req) {
  const auto& s = req.spec;
  if (req.checkpoints < 1) throw ValidationError("checkpoints must be >= 1");
  if (req.out_dir.empty()) throw ValidationError("no output directory given");
  const synth::SynthData data = synth::make_synthetic(s);

  const json spec = {{"n_subjects", s.n_subjects}, {"n_runs", s.n_runs},       {"n_scans", s.n_scans},
                     {"n_voxels", s.n_voxels},     {"n_features", s.n_features}, {"tr_seconds", s.tr_seconds},
                     {"snr_left", s.snr_left},     {"snr_right", s.snr_right}, {"noise_sd", s.noise_sd},
                     {"seed", s.seed},             {"checkpoints", req.checkpoints}};
  SynthReport report;
  report.config_hash = hash_of(spec);

  auto run_name = [](int r) { return "run-" + std::to_string(r); };
  json subjects = json::array();
  for (int sub = 0; sub < s.n_subjects; ++sub) {
    json runs = json::array();
    for (int r = 0; r < s.n_runs; ++r) {
      const fs::path rel = fs::path("bold") / ("sub-" + std::to_string(sub) + "_" + run_name(r) + ".f32");
      io::write_bold(req.out_dir / rel, data.subjects[static_cast<std::size_t>(sub)][static_cast<std::size_t>(r)]);
      runs.push_back(rel.generic_string());
    }
    subjects.push_back(runs);
  }

  // Checkpoint c sees the planted features mixed with independent noise;
  // the mixing weight follows a sigmoid in log10 tokens centred on 1e10.
  json checkpoints = json::array();
  for (int c = 0; c < req.checkpoints; ++c) {
    const double log_tokens =
        req.checkpoints == 1 ? 10.0 : 8.0 + 4.0 * static_cast<double>(c) / static_cast<double>(req.checkpoints - 1);
    const auto tokens = static_cast<std::int64_t>(std::llround(std::pow(10.0, log_tokens)));
    const double quality = req.checkpoints == 1 ? 1.0 : 1.0 / (1.0 + std::exp(-3.0 * (log_tokens - 10.0)));
    json runs = json::array();
    for (int r = 0; r < s.n_runs; ++r) {
      encoding::FeatureMatrix f = data.features[static_cast<std::size_t>(r)];
      f.checkpoint_tokens = tokens;
      if (quality < 1.0) {
        Rng rng(mix_seed(s.seed, 5000 + 1000 * static_cast<std::uint64_t>(c) + static_cast<std::uint64_t>(r)));
        const double keep = std::sqrt(1.0 - quality * quality);
        for (Eigen::Index e = 0; e < f.values.rows(); ++e)
          for (Eigen::Index d = 0; d < f.values.cols(); ++d)
            f.values(e, d) = quality * f.values(e, d) + keep * rng.normal();
      }
      const fs::path rel = fs::path("features") / ("ckpt-" + std::to_string(c)) / ("layer-0_" + run_name(r) + ".f32");
      io::write_features(req.out_dir / rel, f);
      runs.push_back(rel.generic_string());
    }
    checkpoints.push_back({{"tokens", tokens}, {"layers", json::array({runs})}});
  }

  io::write_mask(req.out_dir / "mask.json", data.mask);
  const json experiment = {{"schema", kExperimentSchema},
                           {"output_dir", "out"},
                           {"subjects", subjects},
                           {"checkpoints", checkpoints},
                           {"encoding",
                            {{"region_mask", "mask.json"},
                             {"reliability_fraction", nullptr},
                             {"cutoff_seconds", 128.0},
                             {"hrf", "double_gamma"},
                             {"asymmetry_sign", "left_minus_right"}}},
                           {"workers", 1}};
  report.experiment = req.out_dir / "experiment.json";
  io::write_atomic(report.experiment, experiment.dump(2) + "\n");
  const json planted = {{"schema", kPlantedSchema},
                        {"config_hash", report.config_hash},
                        {"spec", spec},
                        {"snr_left", data.planted.snr_left},
                        {"snr_right", data.planted.snr_right},
                        {"sign", data.planted.sign},
                        {"seed_streams", {{"weights", 0}, {"run_events", "1 + run"}, {"subject_noise", "1000 + subject"}}}};
  io::write_atomic(req.out_dir / "planted.json", planted.dump(2) + "\n");
  return report;
}

}  // namespace asymkit::pipeline
