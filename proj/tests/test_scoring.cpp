#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "asymkit/corpus.hpp"
#include "asymkit/error.hpp"
#include "asymkit/ngram.hpp"
#include "asymkit/rng.hpp"
#include "asymkit/scoring.hpp"
#include "test_util.hpp"

using namespace asymkit;
using namespace asymkit::scoring;
using doctest::Approx;

namespace {

TokenLogProbs lp(std::string id, Side side, std::vector<double> v) { return {std::move(id), side, std::move(v)}; }

PairScores pair(std::string id, std::string paradigm, double good, double bad) {
  return {id, std::move(paradigm), lp(id, Side::good, {good}), lp(id, Side::bad, {bad})};
}

std::vector<PairScores> swapped(std::vector<PairScores> pairs) {
  for (auto& p : pairs) std::swap(p.good, p.bad);
  return pairs;
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("sentence_logprob is a plain sum") {
  CHECK(sentence_logprob(lp("a", Side::good, {-1.0, -2.0})) == -3.0);
  CHECK(sentence_logprob(lp("a", Side::good, {0.0})) == 0.0);
  CHECK(sentence_logprob(lp("a", Side::good, std::vector<double>(100, -0.5))) == Approx(-50.0).epsilon(1e-15));
}

TEST_CASE("check_logprobs rejects invalid sequences") {
  CHECK_THROWS_AS(check_logprobs(lp("a", Side::good, {})), ValidationError);
  CHECK_THROWS_AS(check_logprobs(lp("a", Side::good, {-1.0, 0.5})), ValidationError);
  CHECK_THROWS_AS(check_logprobs(lp("a", Side::good, {NAN})), ValidationError);
  CHECK_NOTHROW(check_logprobs(lp("a", Side::good, {0.0, -3.0})));
}

TEST_CASE("pair scores and ties") {
  CHECK(pair_score(lp("a", Side::good, {-3.0}), lp("a", Side::bad, {-4.0})) == 1.0);
  CHECK(pair_score(lp("a", Side::good, {-4.0}), lp("a", Side::bad, {-3.0})) == 0.0);
  CHECK(pair_score(lp("a", Side::good, {-1.0, -2.0}), lp("a", Side::bad, {-3.0})) == 0.5);
  const std::vector<PairScores> one_tie = {pair("t", "p", -2.0, -2.0)};
  CHECK(pair_accuracy(one_tie).overall == 0.5);
}

TEST_CASE("pair_accuracy overall and per paradigm") {
  const std::vector<PairScores> pairs = {pair("1", "a", -1, -2), pair("2", "a", -1, -2), pair("3", "b", -1, -2),
                                         pair("4", "b", -3, -2)};
  const auto acc = pair_accuracy(pairs, "toy");
  CHECK(acc.overall == 0.75);
  CHECK(acc.n_pairs == 4);
  CHECK(acc.suite == "toy");
  CHECK(acc.per_paradigm.at("a").accuracy == 1.0);
  CHECK(acc.per_paradigm.at("b").accuracy == 0.5);
  CHECK(acc.per_paradigm.at("b").n_pairs == 2);
}

TEST_CASE("pair_accuracy errors") {
  CHECK_THROWS_AS(pair_accuracy(std::vector<PairScores>{}), ValidationError);
  std::vector<PairScores> missing = {pair("x", "p", -1, -2)};
  missing[0].bad.reset();
  try {
    pair_accuracy(missing);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
}

TEST_CASE("property: overall is the count-weighted mean of paradigms; swap gives 1 - acc") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PairScores> pairs;
    const auto n = 1 + rng.below(60);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double g = -static_cast<double>(rng.below(4));
      const double b = -static_cast<double>(rng.below(4));
      pairs.push_back(pair(std::to_string(i), "p" + std::to_string(rng.below(5)), g, b));
    }
    const auto acc = pair_accuracy(pairs);
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& [name, pa] : acc.per_paradigm) {
      weighted += pa.accuracy * static_cast<double>(pa.n_pairs);
      total += pa.n_pairs;
    }
    CHECK(total == n);
    CHECK(std::abs(weighted / static_cast<double>(total) - acc.overall) < 1e-12);
    CHECK(pair_accuracy(swapped(pairs)).overall == Approx(1.0 - acc.overall).epsilon(1e-15));
  }
}

TEST_CASE("property: per-token shifts preserve winners at equal length") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng.below(10);
    std::vector<double> g(len), b(len);
    for (auto& v : g) v = -5.0 * rng.uniform();
    for (auto& v : b) v = -5.0 * rng.uniform();
    const double shift = -3.0 * rng.uniform();
    auto g2 = g, b2 = b;
    for (auto& v : g2) v += shift;
    for (auto& v : b2) v += shift;
    CHECK(pair_score(lp("a", Side::good, g), lp("a", Side::bad, b)) ==
          pair_score(lp("a", Side::good, g2), lp("a", Side::bad, b2)));
  }
}

TEST_CASE("join_dump matches records and lists offenders") {
  const corpus::Suite suite = {{"a", "x y", "y x", "p", "s", {}}, {"b", "x x", "y y", "p", "s", {}}};
  const std::vector<TokenLogProbs> dump = {lp("a", Side::good, {-1}), lp("a", Side::bad, {-2}),
                                           lp("b", Side::bad, {-1}), lp("b", Side::good, {-3})};
  const auto pairs = join_dump(suite, dump);
  REQUIRE(pairs.size() == 2);
  CHECK(pair_accuracy(pairs).overall == 0.5);

  std::vector<TokenLogProbs> bad_dump = dump;
  bad_dump.push_back(lp("zzz", Side::good, {-1}));
  bad_dump.pop_back();
  bad_dump.erase(bad_dump.begin());
  bad_dump.push_back(lp("zzz", Side::good, {-1}));
  try {
    join_dump(suite, bad_dump);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("zzz") != std::string::npos);
    CHECK(msg.find("a") != std::string::npos);
  }

  std::vector<TokenLogProbs> many;
  for (int i = 0; i < 25; ++i) many.push_back(lp("ghost" + std::to_string(i), Side::good, {-1}));
  try {
    join_dump(suite, many);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ghost9") != std::string::npos);
    CHECK(msg.find("ghost10") == std::string::npos);
  }
}

TEST_CASE("dump round trip") {
  const std::vector<TokenLogProbs> dump = {lp("a", Side::good, {-1.25, -0.1}), lp("a", Side::bad, {-7.0})};
  const auto text = serialize_dump(dump);
  const auto back = parse_dump(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].pair_id == "a");
  CHECK(back[0].side == Side::good);
  CHECK(back[0].logprobs == dump[0].logprobs);
  CHECK(back[1].side == Side::bad);
  CHECK_THROWS_AS(parse_dump(R"({"pair_id":"a","side":"meh","logprobs":[-1]})"), ValidationError);
  CHECK_THROWS_AS(parse_dump(R"({"pair_id":"a","side":"good","logprobs":[0.5]})"), ValidationError);
}

}  // TEST_SUITE

TEST_SUITE("ngram") {

TEST_CASE("closed-form bigram probability") {
  const std::vector<std::string> corpus = {"a b", "a b"};
  for (const double alpha : {0.1, 1.0, 2.5}) {
    const auto m = train_ngram(corpus, 2, alpha);
    const double v = static_cast<double>(m.event_count());
    CHECK(v == 4.0);  // a, b, <unk>, </s>
    const std::vector<std::string> ctx = {"a"};
    CHECK(m.probability(ctx, "b") == Approx((2 + alpha) / (2 + alpha * v)).epsilon(1e-15));
  }
}

TEST_CASE("unseen context is uniform") {
  const std::vector<std::string> corpus = {"a b", "b c"};
  const auto m = train_ngram(corpus, 3, 0.5);
  const std::vector<std::string> ctx = {"c", "a"};
  for (const auto p : m.distribution(ctx)) CHECK(p == Approx(1.0 / static_cast<double>(m.event_count())));
}

TEST_CASE("distributions sum to one for random contexts") {
  const auto corpus = corpus::gen_agreement_corpus(300, 1);
  const auto m = train_ngram(corpus, 3, 0.1);
  Rng rng(8);
  std::vector<std::string> pool = m.events();
  pool.push_back("<s>");
  pool.push_back("never-seen");
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> ctx;
    const auto len = rng.below(4);
    for (std::uint64_t j = 0; j < len; ++j) ctx.push_back(pool[rng.below(pool.size())]);
    double sum = 0.0;
    for (const auto p : m.distribution(ctx)) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("unigram scoring equals the sum of unigram logs") {
  const std::vector<std::string> corpus = {"a b a", "c a"};
  const auto m = train_ngram(corpus, 1, 1.0);
  // counts: a 3, b 1, c 1, </s> 2 -> total 7, V = 5
  auto p = [](double c) { return std::log((c + 1.0) / (7.0 + 5.0)); };
  const auto t = ngram_logprobs(m, "a b a");
  REQUIRE(t.logprobs.size() == 3);
  CHECK(sentence_logprob(t) == Approx(p(3) + p(1) + p(3)).epsilon(1e-14));
  CHECK(sentence_logprob(ngram_logprobs(m, "zz")) == Approx(p(0)).epsilon(1e-14));
}

TEST_CASE("all log-probs are non-positive") {
  const auto corpus = corpus::gen_agreement_corpus(100, 3);
  const auto m = train_ngram(corpus, 2, 0.01);
  for (const auto& p : corpus::gen_agreement({50, 9})) {
    for (const auto v : ngram_logprobs(m, p.good).logprobs) CHECK(v <= 0.0);
    for (const auto v : ngram_logprobs(m, p.bad).logprobs) CHECK(v <= 0.0);
  }
}

TEST_CASE("enumerating every length-2 sequence sums to one") {
  const std::vector<std::string> corpus = {"x y z", "z y", "x x"};
  for (const int order : {1, 2, 3}) {
    const auto m = train_ngram(corpus, order, 0.3);
    double total = 0.0;
    for (const auto& a : m.events())
      for (const auto& b : m.events()) total += std::exp(sentence_logprob(ngram_logprobs(m, a + " " + b)));
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("train_ngram validation") {
  const std::vector<std::string> ok = {"a"};
  CHECK_THROWS_AS(train_ngram(ok, 0, 1.0), ValidationError);
  CHECK_THROWS_AS(train_ngram(ok, 2, 0.0), ValidationError);
  CHECK_THROWS_AS(train_ngram(std::vector<std::string>{}, 2, 1.0), ValidationError);
  CHECK_THROWS_AS(train_ngram(std::vector<std::string>{"<s> a"}, 2, 1.0), ValidationError);
  const auto m = train_ngram(ok, 2, 1.0);
  CHECK_THROWS_AS(ngram_logprobs(m, "   "), ValidationError);
}

TEST_CASE("trigram scorer separates agreement pairs") {
  const auto corpus = corpus::gen_agreement_corpus(2000, 11);
  const auto m = train_ngram(corpus, 3, 0.1);
  const auto suite = corpus::gen_agreement({500, 12});
  const auto acc = pair_accuracy(join_dump(suite, ngram_dump(m, suite)));
  CHECK(acc.overall >= 0.9);
}

}  // TEST_SUITE
