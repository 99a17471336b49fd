#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "modbridge/core/json.hpp"
#include "modbridge/core/validate.hpp"
#include "modbridge/error.hpp"
#include "modbridge/util/digest.hpp"
#include "modbridge/util/media.hpp"
#include "modbridge/util/parallel.hpp"
#include "modbridge/util/rng.hpp"
#include "modbridge/util/text.hpp"
#include "support/tempdir.hpp"

using namespace mb;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mb::Error");
  return ErrorCode::precondition_failed;
}

Sample tri_sample() {
  Sample s;
  s.id = "s1";
  s.payloads.emplace(ModalityKind::text, ModalityPayload::from_text("a dog barks"));
  s.payloads.emplace(ModalityKind::image,
                     ModalityPayload::from_blob(ModalityKind::image, {"img/a.png", "image/png", 4}));
  s.payloads.emplace(ModalityKind::audio,
                     ModalityPayload::from_blob(ModalityKind::audio, {"aud/a.wav", "audio/wav", 3}));
  s.labels = std::vector<std::string>{"dog"};
  return s;
}

}  // namespace

TEST_CASE("payload factories pair kind and content") {
  auto t = ModalityPayload::from_text("hi");
  CHECK(t.is_text());
  CHECK(t.text() == "hi");
  CHECK(code_of([&] { (void)t.blob(); }) == ErrorCode::precondition_failed);
  CHECK(code_of([] { ModalityPayload::from_blob(ModalityKind::text, {"x", "text/plain", 1}); }) ==
        ErrorCode::invariant_violation);
  auto b = ModalityPayload::from_blob(ModalityKind::image, {"x.png", "image/png", 1});
  CHECK(b.kind() == ModalityKind::image);
  CHECK(b.blob().path == "x.png");
}

TEST_CASE("sample without and observed order") {
  const Sample s = tri_sample();
  const Sample m = s.without(ModalityKind::image);
  CHECK_FALSE(m.has(ModalityKind::image));
  CHECK(s.has(ModalityKind::image));
  const auto obs = s.observed();
  REQUIRE(obs.size() == 3);
  CHECK(obs[0].kind() == ModalityKind::image);
  CHECK(obs[1].kind() == ModalityKind::text);
  CHECK(obs[2].kind() == ModalityKind::audio);
}

TEST_CASE("factual groundedness matches a brute-force ceiling table") {
  for (std::uint32_t n = 1; n <= 10; ++n)
    for (std::uint32_t h = 0; h <= n; ++h) {
      const int expected = h == 0 ? 5 : std::max(0, 5 - static_cast<int>(std::ceil(5.0 * h / n)));
      CHECK(factual_groundedness_score(h, n) == expected);
      CHECK((factual_groundedness_score(h, n) == 5) == (h == 0));
    }
  CHECK(factual_groundedness_score(1, 10) == 4);
  CHECK(factual_groundedness_score(3, 4) == 1);
  CHECK(factual_groundedness_score(4, 4) == 0);
}

TEST_CASE("judge report recomputes overall and validates") {
  JudgeReport::Criteria c;
  for (auto n : criterion_names(ModalityKind::text)) c.emplace_back(std::string(n), 3.0);
  c[0].second = 5.0;
  auto r = JudgeReport::make(ModalityKind::text, c, 1, 4);
  CHECK(r.overall_score() == doctest::Approx(20.0 / 6.0));
  CHECK(r.criterion("semantic_alignment") == 5.0);

  auto bad = c;
  bad[2].second = 5.5;
  CHECK(code_of([&] { JudgeReport::make(ModalityKind::text, bad, 0, 1); }) == ErrorCode::invariant_violation);
  bad = c;
  bad[1].first = "groundedness";
  CHECK(code_of([&] { JudgeReport::make(ModalityKind::text, bad, 0, 1); }) == ErrorCode::invariant_violation);
  CHECK(code_of([&] { JudgeReport::make(ModalityKind::text, c, 5, 4); }) == ErrorCode::invariant_violation);
  CHECK(code_of([&] { JudgeReport::make(ModalityKind::text, c, 0, 4, 2); }) == ErrorCode::invariant_violation);
}

TEST_CASE("variant spec ids and invariants") {
  VariantSpec v{"sd3.5", Ranker::judge, Miner::strong_lmm, ModalityKind::image};
  CHECK(v.id() == "sd3.5+judge+strong_lmm");
  v.validate(ModalityKind::image);
  CHECK(code_of([&] { v.validate(ModalityKind::audio); }) == ErrorCode::invariant_violation);
  VariantSpec bad{"sd3.5", Ranker::none, Miner::local_lmm, ModalityKind::image};
  CHECK(code_of([&] { bad.validate(ModalityKind::image); }) == ErrorCode::invariant_violation);
}

TEST_CASE("pipeline config validation and ids") {
  PipelineConfig c;
  c.validate();
  CHECK(c.pipeline_id() == "afm2");
  c.enable_miner = false;
  CHECK(c.pipeline_id() == "afm2-no-miner");
  c.threshold = 6.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invariant_violation);
  PipelineConfig p2;
  p2.paradigm = Paradigm::p2;
  CHECK(code_of([&] { p2.validate(); }) == ErrorCode::invariant_violation);
  p2.variant = VariantSpec{"sd3.5", Ranker::none, Miner::none, ModalityKind::image};
  CHECK(code_of([&] { p2.validate(); }) == ErrorCode::invariant_violation);
  p2.variant->ranker = Ranker::embedding;
  p2.validate();
  CHECK(p2.pipeline_id() == "sd3.5+embedding+none");
  p2.params.candidate_count = 0;
  CHECK(code_of([&] { p2.validate(); }) == ErrorCode::invalid_params);
}

TEST_CASE("refinement trace state machine checks") {
  auto cand = [](std::uint32_t ord) {
    return Candidate{ModalityPayload::from_text("c" + std::to_string(ord)), "p", "g", ord, ord};
  };
  RoundRecord r1;
  r1.round_index = 1;
  r1.candidates = {cand(0), cand(1)};
  r1.candidate_scores = {3.0, 4.0};
  r1.best_index = 1;
  r1.best_score = 4.0;
  r1.decision = Decision::refine;
  RoundRecord r2 = r1;
  r2.round_index = 2;
  r2.candidates = {cand(2), cand(3)};
  r2.best_score = 4.6;
  r2.decision = Decision::accept;
  RefinementTrace t{{r1, r2}, cand(3), true};
  t.validate(4.5, 5);
  CHECK(code_of([&] { t.validate(4.5, 1); }) == ErrorCode::invariant_violation);
  CHECK(code_of([&] { t.validate(4.7, 5); }) == ErrorCode::invariant_violation);

  r2.best_score = 3.5;
  r2.decision = Decision::force_accept;
  RefinementTrace forced{{r1, r2}, cand(1), true};
  forced.validate(4.5, 2);
  forced.final_candidate = cand(3);
  CHECK(code_of([&] { forced.validate(4.5, 2); }) == ErrorCode::invariant_violation);
}

TEST_CASE("json round trips for core types") {
  const Sample s = tri_sample();
  CHECK(from_json<Sample>(to_json(s)) == s);

  MissingMask m{ModalityKind::audio, 0.3, 9, 10, {"a", "b", "c"}};
  CHECK(from_json<MissingMask>(to_json(m)) == m);

  GenerationParams p;
  p.candidate_count = 15;
  p.image.width = 64;
  p.seed = 42;
  CHECK(from_json<GenerationParams>(to_json(p)) == p);

  PipelineConfig c;
  c.paradigm = Paradigm::p3;
  c.variant = VariantSpec{"flux.1-dev", Ranker::judge, Miner::local_lmm, ModalityKind::image};
  c.granularity = Granularity::object_color;
  c.routing.judge = "j";
  c.max_rounds = 3;
  CHECK(from_json<PipelineConfig>(to_json(c)) == c);

  JudgeReport::Criteria crit;
  for (auto n : criterion_names(ModalityKind::audio)) crit.emplace_back(std::string(n), 4.0);
  auto rep = JudgeReport::make(ModalityKind::audio, crit, 1, 5, 2, {{"semantic_alignment", "ok"}});
  CHECK(from_json<JudgeReport>(to_json(rep)) == rep);

  RoundRecord rr;
  rr.candidates = {Candidate{ModalityPayload::from_text("x"), "p", "g", 0, 7}};
  rr.candidate_scores = {4.7};
  rr.best_score = 4.7;
  rr.prompts = {"p"};
  rr.feedbacks = {"f"};
  rr.decision = Decision::accept;
  RefinementTrace t{{rr}, rr.candidates[0], true};
  CHECK(from_json<RefinementTrace>(to_json(t)) == t);
}

TEST_CASE("json decoders reject unknown fields and wrong types") {
  json j = to_json(tri_sample());
  j["extra"] = 1;
  CHECK(code_of([&] { from_json<Sample>(j); }) == ErrorCode::schema_mismatch);
  json g = to_json(GenerationParams{});
  g["candidate_count"] = "five";
  CHECK(code_of([&] { from_json<GenerationParams>(g); }) == ErrorCode::schema_mismatch);
  json b = to_json(BlobRef{"a.png", "image/png", 3});
  b["byte_length"] = -1;
  CHECK(code_of([&] { from_json<BlobRef>(b); }) == ErrorCode::schema_mismatch);
}

TEST_CASE("sample validation against a data root") {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "img");
  std::ofstream(dir / "img/a.png", std::ios::binary) << "abcd";
  Sample s;
  s.id = "ok";
  s.payloads.emplace(ModalityKind::image, ModalityPayload::from_blob(ModalityKind::image, {"img/a.png", "image/png", 4}));
  CHECK(&validate_sample(s, dir.path()) == &s);

  Sample wrong_len = s;
  wrong_len.payloads.at(ModalityKind::image) =
      ModalityPayload::from_blob(ModalityKind::image, {"img/a.png", "image/png", 5});
  CHECK(code_of([&] { validate_sample(wrong_len, dir.path()); }) == ErrorCode::missing_blob);

  Sample missing = s;
  missing.payloads.at(ModalityKind::image) =
      ModalityPayload::from_blob(ModalityKind::image, {"img/b.png", "image/png", 4});
  CHECK(code_of([&] { validate_sample(missing, dir.path()); }) == ErrorCode::missing_blob);

  Sample escape = s;
  escape.payloads.at(ModalityKind::image) =
      ModalityPayload::from_blob(ModalityKind::image, {"../a.png", "image/png", 4});
  CHECK(code_of([&] { validate_sample(escape, dir.path()); }) == ErrorCode::path_escape);
  CHECK(code_of([] { check_relative_path("/etc/passwd"); }) == ErrorCode::path_escape);
  CHECK(code_of([] { check_relative_path("a/../../b"); }) == ErrorCode::path_escape);

  Sample empty;
  empty.id = "e";
  CHECK(code_of([&] { validate_sample(empty, dir.path()); }) == ErrorCode::empty_payloads);
  Sample noid = s;
  noid.id = "";
  CHECK(code_of([&] { validate_sample(noid, dir.path()); }) == ErrorCode::validation_error);
}

TEST_CASE("digests and base64") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(digest_parts({"ab", "c"}) != digest_parts({"a", "bc"}));
  CHECK(leading_u64(sha256("abc")) == 0xba7816bf8f01cfeaULL);
  for (std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"}) CHECK(base64_decode(base64_encode(s)) == s);
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(code_of([] { base64_decode("@@@"); }) == ErrorCode::invalid_params);
}

TEST_CASE("rng is reproducible and bounded") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.below(7);
    CHECK(v < 7);
    seen.insert(v);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(seen.size() == 7);
  double sum = 0.0, sq = 0.0;
  Rng g(3);
  for (int i = 0; i < 20000; ++i) {
    const double x = g.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("png and wav codecs") {
  const auto png = encode_png_solid(33, 17, Rgb{1, 2, 3});
  const auto info = read_png_info(png);
  CHECK(info.width == 33);
  CHECK(info.height == 17);
  CHECK(code_of([] { read_png_info("not a png at all, no"); }) == ErrorCode::validation_error);

  std::vector<double> samples = {0.0, 0.5, -0.5, 0.999, -1.0};
  const auto wav = encode_wav_mono16(samples, 8000);
  const auto pcm = decode_wav(wav);
  CHECK(pcm.sample_rate_hz == 8000);
  REQUIRE(pcm.samples.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) CHECK(pcm.samples[i] == doctest::Approx(samples[i]).epsilon(1e-3));
}

TEST_CASE("text helpers") {
  CHECK(trim("  a b \n") == "a b");
  CHECK(collapse_whitespace(" a \n\t b  ") == "a b");
  CHECK(to_lower("AbC") == "abc");
  CHECK(starts_with_ci("The Sound of rain", "the sound of"));
  CHECK_FALSE(starts_with_ci("the", "the sound"));
}

TEST_CASE("parallel_for runs every index and reports the lowest failure") {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  for (int width : {1, 3}) {
    try {
      parallel_for(20, width, [](std::size_t i) {
        if (i == 7 || i == 13) fail(ErrorCode::timeout, std::to_string(i));
      });
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
  }
}
