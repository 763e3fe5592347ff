#include "asymkit/asymkit.h"

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "asymkit/corpus.hpp"
#include "asymkit/error.hpp"
#include "asymkit/io.hpp"
#include "asymkit/ngram.hpp"
#include "asymkit/pipeline.hpp"
#include "asymkit/ridge.hpp"
#include "asymkit/transition.hpp"

struct ak_suite {
  asymkit::corpus::Suite pairs;
};

struct ak_ngram {
  asymkit::scoring::NgramModel model;
};

namespace {

using json = nlohmann::json;
namespace ak = asymkit;
namespace pl = asymkit::pipeline;

thread_local std::string last_error;

template <typename F>
ak_status guard(F&& fn) {
  try {
    fn();
    last_error.clear();
    return AK_OK;
  } catch (const ak::IoError& e) {
    last_error = e.what();
    return AK_ERR_IO;
  } catch (const ak::ValidationError& e) {
    last_error = e.what();
    return AK_ERR_VALIDATION;
  } catch (const json::exception& e) {
    last_error = std::string("bad request: ") + e.what();
    return AK_ERR_VALIDATION;
  } catch (const std::exception& e) {
    last_error = e.what();
    return AK_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return AK_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw ak::ValidationError(std::string(what) + " is null");
}

char* to_c_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void emit(const json& report, char** out) {
  if (out != nullptr) *out = to_c_string(report.dump());
}

json parse_request(const char* text) {
  require(text, "request");
  json j = json::parse(text);
  if (!j.is_object()) throw ak::ValidationError("request must be a JSON object");
  return j;
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

ak::encoding::AsymmetrySign parse_sign(const std::string& s) {
  if (s == "left_minus_right") return ak::encoding::AsymmetrySign::left_minus_right;
  if (s == "right_minus_left") return ak::encoding::AsymmetrySign::right_minus_left;
  throw ak::ValidationError("sign must be left_minus_right or right_minus_left");
}

json asymmetry_json(const ak::encoding::Asymmetry& a) {
  return {{"value", a.value}, {"left_mean", a.left_mean}, {"right_mean", a.right_mean},
          {"n_left", a.n_left}, {"n_right", a.n_right}};
}

}  // namespace

extern "C" {

const char* ak_last_error(void) { return last_error.c_str(); }

const char* ak_version(void) { return "0.1.0"; }

void ak_string_free(char* s) { delete[] s; }

ak_status ak_suite_gen_arithmetic(const char* subtask, int count, uint64_t seed, ak_suite** out) {
  return guard([&] {
    require(subtask, "subtask");
    require(out, "out");
    auto spec = ak::corpus::ArithmeticSpec::defaults(ak::corpus::parse_task(subtask));
    spec.count = count;
    spec.seed = seed;
    *out = new ak_suite{ak::corpus::gen_arithmetic(spec)};
  });
}

ak_status ak_suite_gen_dyck(int k, int length, int count, uint64_t seed, ak_suite** out) {
  return guard([&] {
    require(out, "out");
    *out = new ak_suite{ak::corpus::gen_dyck({k, length, count, seed})};
  });
}

ak_status ak_suite_gen_agreement(int count, uint64_t seed, ak_suite** out) {
  return guard([&] {
    require(out, "out");
    *out = new ak_suite{ak::corpus::gen_agreement({count, seed})};
  });
}

ak_status ak_suite_load(const char* path, ak_suite** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new ak_suite{ak::corpus::load_suite(path)};
  });
}

ak_status ak_suite_save(const ak_suite* suite, const char* path) {
  return guard([&] {
    require(suite, "suite");
    require(path, "path");
    ak::io::write_atomic(path, ak::corpus::serialize_suite(suite->pairs));
  });
}

size_t ak_suite_size(const ak_suite* suite) { return suite == nullptr ? 0 : suite->pairs.size(); }

ak_status ak_suite_pair(const ak_suite* suite, size_t index, ak_pair_view* out) {
  return guard([&] {
    require(suite, "suite");
    require(out, "out");
    if (index >= suite->pairs.size())
      throw ak::ValidationError("pair index " + std::to_string(index) + " out of range");
    const auto& p = suite->pairs[index];
    *out = {p.id.c_str(), p.good.c_str(), p.bad.c_str(), p.paradigm.c_str(), p.suite.c_str()};
  });
}

void ak_suite_free(ak_suite* suite) { delete suite; }

ak_status ak_validate_dyck(const char* symbols, int k, int* is_valid) {
  return guard([&] {
    require(symbols, "symbols");
    require(is_valid, "is_valid");
    *is_valid = ak::corpus::validate_dyck(symbols, k) ? 1 : 0;
  });
}

ak_status ak_ngram_train(const char* const* sentences, size_t n_sentences, int order, double alpha,
                         ak_ngram** out) {
  return guard([&] {
    require(out, "out");
    if (n_sentences > 0) require(sentences, "sentences");
    std::vector<std::string> corpus;
    corpus.reserve(n_sentences);
    for (size_t i = 0; i < n_sentences; ++i) {
      require(sentences[i], "sentence");
      corpus.emplace_back(sentences[i]);
    }
    *out = new ak_ngram{ak::scoring::train_ngram(corpus, order, alpha)};
  });
}

ak_status ak_ngram_sentence_logprob(const ak_ngram* model, const char* sentence, double* out) {
  return guard([&] {
    require(model, "model");
    require(sentence, "sentence");
    require(out, "out");
    *out = ak::scoring::sentence_logprob(ak::scoring::ngram_logprobs(model->model, sentence));
  });
}

ak_status ak_ngram_suite_accuracy(const ak_ngram* model, const ak_suite* suite, double* accuracy) {
  return guard([&] {
    require(model, "model");
    require(suite, "suite");
    require(accuracy, "accuracy");
    const auto dump = ak::scoring::ngram_dump(model->model, suite->pairs);
    const auto pairs = ak::scoring::join_dump(suite->pairs, dump);
    *accuracy = ak::scoring::pair_accuracy(pairs).overall;
  });
}

void ak_ngram_free(ak_ngram* model) { delete model; }

ak_status ak_fit_sigmoid(const double* tokens, const double* values, size_t n, ak_sigmoid* out) {
  return guard([&] {
    require(out, "out");
    if (n > 0) {
      require(tokens, "tokens");
      require(values, "values");
    }
    ak::transition::Trajectory t;
    for (size_t i = 0; i < n; ++i) t.points.push_back({tokens[i], values[i]});
    const auto f = ak::transition::fit_sigmoid(t);
    *out = {f.y_min, f.y_max, f.x0, f.beta, f.mse, f.degenerate ? 1 : 0};
  });
}

ak_status ak_transition_distance(const ak_sigmoid* a, const ak_sigmoid* b, double* out) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    auto conv = [](const ak_sigmoid& s) {
      ak::transition::SigmoidFit f;
      f.y_min = s.y_min;
      f.y_max = s.y_max;
      f.x0 = s.x0;
      f.beta = s.beta;
      f.mse = s.mse;
      f.degenerate = s.degenerate != 0;
      return f;
    };
    *out = ak::transition::transition_distance(conv(*a), conv(*b));
  });
}

ak_status ak_ridge_fit(const double* x, size_t n, size_t p, const double* y, size_t t, double lambda,
                       double* weights) {
  return guard([&] {
    require(x, "x");
    require(y, "y");
    require(weights, "weights");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto ni = static_cast<Eigen::Index>(n), pi = static_cast<Eigen::Index>(p),
               ti = static_cast<Eigen::Index>(t);
    const ak::ridge::Matrix xm = Eigen::Map<const RowMajor>(x, ni, pi);
    const ak::ridge::Matrix ym = Eigen::Map<const RowMajor>(y, ni, ti);
    Eigen::Map<RowMajor>(weights, pi, ti) = ak::ridge::fit(xm, ym, lambda);
  });
}

ak_status ak_run_gen(const char* request_json, char** report_json) {
  return guard([&] {
    const json j = parse_request(request_json);
    pl::GenRequest req;
    const auto kind = j.at("kind").get<std::string>();
    const auto seed = j.value("seed", std::uint64_t{0});
    if (kind == "arithmetic") {
      req.kind = pl::GenKind::arithmetic;
      req.arithmetic =
          ak::corpus::ArithmeticSpec::defaults(ak::corpus::parse_task(j.value("subtask", std::string("addition"))));
      auto& a = req.arithmetic;
      a.seed = seed;
      a.count = j.value("count", a.count);
      a.operand_lo = j.value("operand_lo", a.operand_lo);
      a.operand_hi = j.value("operand_hi", a.operand_hi);
      if (j.contains("error_set")) a.error_set = j["error_set"].get<std::vector<std::int64_t>>();
      a.operator_glyph = j.value("glyph", a.operator_glyph);
    } else if (kind == "dyck") {
      req.kind = pl::GenKind::dyck;
      req.dyck.seed = seed;
      req.dyck.k = j.value("k", req.dyck.k);
      req.dyck.length = j.value("length", req.dyck.length);
      req.dyck.count = j.value("count", req.dyck.count);
    } else if (kind == "agreement") {
      req.kind = pl::GenKind::agreement;
      req.agreement.seed = seed;
      req.agreement.count = j.value("count", req.agreement.count);
      req.training_sentences = j.value("training_sentences", 0);
    } else {
      throw ak::ValidationError("unknown generator '" + kind + "'");
    }
    req.out = j.at("out").get<std::string>();
    const auto r = pl::run_gen(req);
    json report = {{"n_pairs", r.n_pairs}, {"config_hash", r.config_hash}, {"manifest", r.manifest.string()}};
    if (r.training_corpus) report["training_corpus"] = r.training_corpus->string();
    emit(report, report_json);
  });
}

ak_status ak_run_score(const char* request_json, char** report_json) {
  return guard([&] {
    const json j = parse_request(request_json);
    pl::ScoreRequest req;
    req.suite = j.at("suite").get<std::string>();
    if (auto d = opt<std::string>(j, "dump")) req.dump = *d;
    if (auto c = opt<std::string>(j, "ngram_corpus")) req.ngram_corpus = *c;
    if (auto w = opt<std::string>(j, "write_dump")) req.write_dump = *w;
    req.ngram_order = j.value("order", req.ngram_order);
    req.ngram_alpha = j.value("alpha", req.ngram_alpha);
    req.out = j.value("out", std::string());
    const auto acc = pl::run_score(req);
    json per = json::object();
    for (const auto& [p, a] : acc.per_paradigm) per[p] = {{"accuracy", a.accuracy}, {"n_pairs", a.n_pairs}};
    emit({{"suite", acc.suite}, {"overall", acc.overall}, {"n_pairs", acc.n_pairs}, {"per_paradigm", per}},
         report_json);
  });
}

ak_status ak_run_brainscore(const char* request_json, char** report_json) {
  return guard([&] {
    const json j = parse_request(request_json);
    pl::BrainscoreOverrides ov;
    if (auto o = opt<std::string>(j, "output_dir")) ov.output_dir = *o;
    ov.reliability_fraction = opt<double>(j, "reliability_fraction");
    ov.whole_brain = j.value("whole_brain", false);
    if (auto s = opt<std::string>(j, "sign")) ov.sign = parse_sign(*s);
    ov.cutoff_seconds = opt<double>(j, "cutoff_seconds");
    ov.workers = opt<int>(j, "workers");
    const auto config = pl::load_experiment(j.at("config").get<std::string>(), ov);
    const auto r = pl::run_brainscore(config);
    json cps = json::array();
    for (const auto& c : r.checkpoints) cps.push_back({{"tokens", c.tokens}, {"asymmetry", asymmetry_json(c.asymmetry)}});
    emit({{"config_hash", r.config_hash},
          {"output_dir", config.output_dir.string()},
          {"asymmetry_csv", r.asymmetry_csv.string()},
          {"checkpoints", cps}},
         report_json);
  });
}

ak_status ak_run_transition(const char* request_json, char** report_json) {
  return guard([&] {
    const json j = parse_request(request_json);
    pl::TransitionRequest req;
    for (const auto& p : j.at("trajectories")) req.trajectories.emplace_back(p.get<std::string>());
    req.reference_label = j.value("reference", req.reference_label);
    req.scale_only = j.value("scale_only", false);
    req.out_dir = j.at("out_dir").get<std::string>();
    const auto r = pl::run_transition(req);
    json fits = json::array();
    for (const auto& f : r.fits) {
      fits.push_back({{"label", f.label},
                      {"x0", std::isfinite(f.x0) ? json(f.x0) : json(nullptr)},
                      {"beta", f.beta},
                      {"degenerate", f.degenerate}});
    }
    json dist = json::array();
    for (const auto& [label, d] : r.distances) dist.push_back({{"label", label}, {"distance", d}});
    emit({{"config_hash", r.config_hash},
          {"reference", r.reference},
          {"fits", fits},
          {"distances", dist},
          {"warnings", r.warnings}},
         report_json);
  });
}

ak_status ak_run_synth(const char* request_json, char** report_json) {
  return guard([&] {
    const json j = parse_request(request_json);
    pl::SynthRequest req;
    auto& s = req.spec;
    s.n_subjects = j.value("subjects", s.n_subjects);
    s.n_runs = j.value("runs", s.n_runs);
    s.n_scans = j.value("scans", s.n_scans);
    s.n_voxels = j.value("voxels", s.n_voxels);
    s.n_features = j.value("features", s.n_features);
    s.tr_seconds = j.value("tr", s.tr_seconds);
    s.snr_left = j.value("snr_left", s.snr_left);
    s.snr_right = j.value("snr_right", s.snr_right);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.seed = j.value("seed", s.seed);
    req.checkpoints = j.value("checkpoints", req.checkpoints);
    req.out_dir = j.at("out_dir").get<std::string>();
    const auto r = pl::run_synth(req);
    emit({{"config_hash", r.config_hash}, {"experiment", r.experiment.string()}}, report_json);
  });
}

}  // extern "C"
