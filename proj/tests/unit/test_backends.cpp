#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "modbridge/backends/mock.hpp"
#include "modbridge/backends/registry.hpp"
#include "modbridge/backends/remote_chat.hpp"
#include "modbridge/backends/sidecar.hpp"
#include "modbridge/error.hpp"
#include "modbridge/util/digest.hpp"
#include "modbridge/util/media.hpp"
#include "support/fake_server.hpp"
#include "support/scripted.hpp"
#include "support/tempdir.hpp"

using namespace mb;
using mb::testing::FakeServer;
using mb::testing::ScriptedBackend;

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

BackendDescriptor mock_desc(const std::string& id, Role role) {
  return ScriptedBackend::descriptor_for(id, role);
}

BackendDescriptor remote_desc(Transport t, Role role, const std::string& endpoint, int retries = 2) {
  BackendDescriptor d;
  d.backend_id = "remote-" + std::string(to_string(role));
  d.model_name = "model-x";
  d.role = role;
  d.transport = t;
  d.endpoint = endpoint;
  d.max_retries = retries;
  d.timeout_seconds = 5;
  return d;
}

struct SleepLog {
  std::vector<double> delays;
  Sleeper sleeper() {
    return [this](double s) { delays.push_back(s); };
  }
};

json ok_reply(const json& request, json outputs) {
  return {{"request_id", request.at("request_id")}, {"status", "ok"}, {"outputs", std::move(outputs)}, {"error", nullptr}};
}

}  // namespace

TEST_CASE("descriptor invariants and json") {
  auto d = remote_desc(Transport::sidecar, Role::image_gen, "");
  CHECK(code_of([&] { d.validate(); }) == ErrorCode::invalid_params);
  d.endpoint = "http://localhost:1";
  d.validate();
  d.max_retries = -1;
  CHECK(code_of([&] { d.validate(); }) == ErrorCode::invalid_params);
  d.max_retries = 3;
  CHECK(from_json<BackendDescriptor>(to_json(d)) == d);
  json j = to_json(d);
  j["colour"] = "red";
  CHECK(code_of([&] { from_json<BackendDescriptor>(j); }) == ErrorCode::schema_mismatch);
  BackendDescriptor named;
  named.backend_id = "gpt-4o.judge";
  CHECK(named.api_key_env() == "MB_API_KEY_GPT_4O_JUDGE");
}

TEST_CASE("blob store addressing, overlays and persistence") {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "data");
  std::ofstream(dir / "data/x.bin", std::ios::binary) << "xyz";
  BlobStore root(dir / "data", dir / "out");
  const BlobRef ref = root.put("hello", "image/png");
  CHECK(ref.path == "blobs/" + sha256_hex("hello") + ".png");
  CHECK(ref.byte_length == 5);
  CHECK(root.read(ref) == "hello");
  CHECK(root.read({"x.bin", "application/octet-stream", 3}) == "xyz");
  CHECK(code_of([&] { root.read({"x.bin", "application/octet-stream", 4}); }) == ErrorCode::missing_blob);
  CHECK(code_of([&] { root.read({"nope.bin", "application/octet-stream", 1}); }) == ErrorCode::missing_blob);
  CHECK(code_of([&] { root.read({"../x.bin", "application/octet-stream", 3}); }) == ErrorCode::path_escape);

  BlobStore scratch(root);
  const BlobRef child = scratch.put("child", "audio/wav");
  CHECK(scratch.read(ref) == "hello");
  CHECK(code_of([&] { root.read(child); }) == ErrorCode::missing_blob);
  scratch.persist(child);
  CHECK(std::filesystem::exists(dir / "out" / child.path));
  CHECK(root.read(child) == "child");
}

TEST_CASE("backoff delays grow, cap and jitter within half") {
  RetryBackoff b{1.0, 2.0, 10.0};
  for (int a = 0; a < 8; ++a) {
    const double base = std::min(std::pow(2.0, a), 10.0);
    const double d = backoff_delay(b, a, 99);
    CHECK(d >= 0.5 * base);
    CHECK(d <= base);
    CHECK(d == backoff_delay(b, a, 99));
  }
  CHECK(backoff_delay({1.0, 10.0, 1000.0}, 5, 1) <= 60.0);
}

TEST_CASE("with_retries retries transient errors only") {
  SleepLog log;
  int calls = 0;
  CHECK(code_of([&] {
          with_retries(2, RetryBackoff{}, log.sleeper(), 1, [&]() -> int {
            ++calls;
            throw TransientError(ErrorCode::rate_limited, "busy");
          });
        }) == ErrorCode::rate_limited);
  CHECK(calls == 3);
  CHECK(log.delays.size() == 2);

  calls = 0;
  CHECK(code_of([&] {
          with_retries(5, RetryBackoff{}, log.sleeper(), 1, [&]() -> int {
            ++calls;
            fail(ErrorCode::invalid_params, "bad");
          });
        }) == ErrorCode::invalid_params);
  CHECK(calls == 1);

  calls = 0;
  const int v = with_retries(3, RetryBackoff{}, log.sleeper(), 1, [&] {
    if (++calls < 3) throw TransientError(ErrorCode::timeout, "slow");
    return 7;
  });
  CHECK(v == 7);
}

TEST_CASE("backend role and attachment preconditions") {
  BlobStore store("");
  MockBackend judge(mock_desc("j", Role::judge));
  CHECK(code_of([&] { judge.generate_image("p", {}, 1, 0, store); }) == ErrorCode::precondition_failed);
  CHECK(code_of([&] { judge.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::precondition_failed);

  auto d = mock_desc("t", Role::text_gen);
  d.attachment_kinds = {ModalityKind::text, ModalityKind::image};
  MockBackend text_only(d);
  const BlobRef wav = store.put(encode_wav_mono16({0.0, 0.1}, 16000), "audio/wav");
  CHECK(code_of([&] {
          text_only.complete_text("p", {ModalityPayload::from_blob(ModalityKind::audio, wav)}, {}, 0, store);
        }) == ErrorCode::unsupported_attachment);
}

TEST_CASE("mock text is a pure function of backend, prompt, seed and attachments") {
  BlobStore store("");
  MockBackend a(mock_desc("a", Role::miner)), a2(mock_desc("a", Role::miner)), b(mock_desc("b", Role::miner));
  const auto r = a.complete_text("abc", {}, {}, 1, store);
  CHECK(r == a2.complete_text("abc", {}, {}, 1, store));
  CHECK(r != a.complete_text("abc", {}, {}, 2, store));
  CHECK(r != b.complete_text("abc", {}, {}, 1, store));
  CHECK(r != a.complete_text("abc", {ModalityPayload::from_text("a kettle whistles")}, {}, 1, store));
}

TEST_CASE("mock images are seeded per ordinal and reproducible") {
  BlobStore s1(""), s2("");
  MockBackend gen(mock_desc("g", Role::image_gen));
  ImageParams p;
  p.width = 16;
  p.height = 8;
  const auto c1 = gen.generate_image("a red kettle", p, 3, 7, s1);
  const auto c2 = gen.generate_image("a red kettle", p, 3, 7, s2);
  REQUIRE(c1.size() == 3);
  std::set<std::string> distinct;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c1[i].ordinal == i);
    CHECK(c1[i].seed_used == 7 + i);
    CHECK(c1[i].generator_id == "g");
    CHECK(s1.read(c1[i].payload.blob()) == s2.read(c2[i].payload.blob()));
    const auto info = read_png_info(s1.read(c1[i].payload.blob()));
    CHECK(info.width == 16);
    CHECK(info.height == 8);
    distinct.insert(s1.read(c1[i].payload.blob()));
  }
  CHECK(distinct.size() == 3);
  CHECK(code_of([&] { gen.generate_image("p", p, 0, 0, s1); }) == ErrorCode::invalid_params);
}

TEST_CASE("mock audio length follows duration and rate") {
  BlobStore store("");
  MockBackend gen(mock_desc("g", Role::audio_gen));
  AudioParams p;
  const auto c = gen.generate_audio("the sound of rain", p, 1, 3, store);
  const auto pcm = decode_wav(store.read(c[0].payload.blob()));
  CHECK(pcm.sample_rate_hz == 16000);
  CHECK(pcm.samples.size() == 160000);
  CHECK(store.read(gen.generate_audio("the sound of rain", p, 1, 3, store)[0].payload.blob()) ==
        store.read(c[0].payload.blob()));
  p.duration_seconds = 0;
  CHECK(code_of([&] { gen.generate_audio("x", p, 1, 0, store); }) == ErrorCode::invalid_params);
}

TEST_CASE("mock embeddings are unit vectors keyed by content") {
  BlobStore store("");
  MockBackend emb(mock_desc("e", Role::embedder));
  const auto v1 = emb.embed(ModalityPayload::from_text("x"), store);
  const auto v2 = emb.embed(ModalityPayload::from_text("x"), store);
  CHECK(v1 == v2);
  CHECK(v1.dimension() == 64);
  double norm = 0;
  for (double x : v1.values()) norm += x * x;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
  CHECK_FALSE(v1 == emb.embed(ModalityPayload::from_text("y"), store));
  CHECK(code_of([] { EmbeddingVector::normalized({0.0, 0.0}); }) == ErrorCode::invariant_violation);
}

TEST_CASE("mock judge follows the documented parity rule") {
  BlobStore store("");
  MockBackend j(mock_desc("j", Role::judge));
  const auto ref = ModalityPayload::from_text("a dog barks in a park");
  int even = 0, odd = 0;
  for (int i = 0; i < 40; ++i) {
    const std::string text = "candidate number " + std::to_string(i);
    const auto rep = judge(j, ModalityPayload::from_text(text), {ref}, "verify-text",
                           {{"generated_text", text}, {"ground_truth_modality", "text"}}, {}, 0, store);
    const bool parity = mock_candidate_parity_even(text);
    CHECK((rep.hallucinated() == 0) == parity);
    CHECK(rep.total_assertions() >= 4);
    CHECK(rep.total_assertions() <= 10);
    CHECK(rep.criterion("factual_groundedness") ==
          factual_groundedness_score(rep.hallucinated(), rep.total_assertions()));
    (parity ? even : odd) += 1;
  }
  CHECK(even > 0);
  CHECK(odd > 0);
}

TEST_CASE("judge re-asks twice on malformed output") {
  BlobStore store("");
  int n = 0;
  ScriptedBackend flaky("j", Role::judge, [&](const std::string&, auto&, auto) {
    return ++n < 3 ? std::string("not json") : testing::judge_reply(ModalityKind::text, 4.0);
  });
  const auto ref = ModalityPayload::from_text("r");
  const Bindings b{{"generated_text", "c"}, {"ground_truth_modality", "text"}};
  const auto rep = judge(flaky, ModalityPayload::from_text("c"), {ref}, "verify-text", b, {}, 0, store);
  CHECK(rep.overall_score() == 4.0);
  CHECK(flaky.calls() == 3);
  CHECK(flaky.prompts()[1].find("Reminder") != std::string::npos);

  ScriptedBackend broken("j", Role::judge, [](auto&, auto&, auto) { return std::string("{\"x\":1}"); });
  CHECK(code_of([&] { judge(broken, ModalityPayload::from_text("c"), {ref}, "verify-text", b, {}, 0, store); }) ==
        ErrorCode::malformed_judgment);
  CHECK(broken.calls() == 3);
  CHECK(code_of([&] { judge(broken, ModalityPayload::from_text("c"), {}, "verify-text", b, {}, 0, store); }) ==
        ErrorCode::precondition_failed);
}

TEST_CASE("generate_text seeds each ordinal") {
  BlobStore store("");
  ScriptedBackend gen("t", Role::text_gen, [](auto&, auto&, std::uint64_t seed) { return "s" + std::to_string(seed); });
  const auto c = generate_text(gen, "p", {}, {}, 3, 10, store);
  REQUIRE(c.size() == 3);
  CHECK(c[2].payload.text() == "s12");
  CHECK(c[2].ordinal == 2);
  CHECK(code_of([&] { generate_text(gen, "p", {}, {}, 0, 0, store); }) == ErrorCode::invalid_params);
}

TEST_CASE("registry builds backends by transport") {
  BackendSet set({mock_desc("m", Role::judge), remote_desc(Transport::sidecar, Role::image_gen, "http://127.0.0.1:9")});
  CHECK(set.has("m"));
  CHECK(dynamic_cast<MockBackend*>(&set.get("m")) != nullptr);
  CHECK(dynamic_cast<SidecarBackend*>(&set.get("remote-image_gen")) != nullptr);
  CHECK(code_of([&] { set.get("other"); }) == ErrorCode::fatal_config_error);
  CHECK(code_of([&] { set.get(""); }) == ErrorCode::fatal_config_error);
}

TEST_CASE("remote chat request carries multimodal parts") {
  BlobStore store("");
  RemoteChatBackend b(remote_desc(Transport::remote_chat, Role::judge, "http://127.0.0.1:9/v1"));
  const BlobRef png = store.put(encode_png_solid(2, 2, Rgb{0, 0, 0}), "image/png");
  const BlobRef wav = store.put(encode_wav_mono16({0.1}, 16000), "audio/wav");
  const json req = b.chat_request("hi",
                                  {ModalityPayload::from_blob(ModalityKind::image, png),
                                   ModalityPayload::from_blob(ModalityKind::audio, wav), ModalityPayload::from_text("t")},
                                  {}, 5, store);
  const auto& parts = req.at("messages").at(0).at("content");
  REQUIRE(parts.size() == 4);
  CHECK(parts[0].at("text") == "hi");
  CHECK(parts[1].at("image_url").at("url").get<std::string>().rfind("data:image/png;base64,", 0) == 0);
  CHECK(parts[2].at("input_audio").at("format") == "wav");
  CHECK(parts[3].at("text") == "t");
  CHECK(req.at("model") == "model-x");
  CHECK(req.at("seed") == 5);
}

TEST_CASE("remote chat over HTTP: success, rate limits and bad replies") {
  FakeServer srv;
  std::atomic<int> hits{0};
  std::string mode = "ok";
  std::string auth;
  std::mutex mu;
  srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    std::lock_guard lock(mu);
    auth = req.get_header_value("Authorization");
    if (mode == "429") {
      res.status = 429;
      return;
    }
    if (mode == "garbage") {
      res.set_content("<html>", "text/html");
      return;
    }
    json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  srv.start();

  SleepLog log;
  BlobStore store("");
  auto d = remote_desc(Transport::remote_chat, Role::judge, srv.url("/v1"));
  d.backend_id = "fake-judge";
  ::setenv("MB_API_KEY_FAKE_JUDGE", "sekret", 1);
  RemoteChatBackend b(d, log.sleeper());
  CHECK(b.complete_text("ping", {}, {}, 0, store) == "pong");
  CHECK(auth == "Bearer sekret");
  ::unsetenv("MB_API_KEY_FAKE_JUDGE");

  mode = "429";
  hits = 0;
  CHECK(code_of([&] { b.complete_text("ping", {}, {}, 0, store); }) == ErrorCode::rate_limited);
  CHECK(hits == 3);
  CHECK(log.delays.size() == 2);

  mode = "garbage";
  CHECK(code_of([&] { b.complete_text("ping", {}, {}, 0, store); }) == ErrorCode::transport_error);
}

TEST_CASE("unreachable endpoints surface as transport errors") {
  SleepLog log;
  BlobStore store("");
  FakeServer probe;
  probe.start();
  const std::string dead = probe.url();
  probe.stop();
  RemoteChatBackend b(remote_desc(Transport::remote_chat, Role::judge, dead, 1), log.sleeper());
  const auto code = code_of([&] { b.complete_text("x", {}, {}, 0, store); });
  CHECK((code == ErrorCode::transport_error || code == ErrorCode::timeout));
  CHECK(log.delays.size() == 1);
}

TEST_CASE("sidecar envelope ids are content digests") {
  const json e1 = SidecarClient::make_envelope("embed", "m", {{"a", 1}}, json::array());
  const json e2 = SidecarClient::make_envelope("embed", "m", {{"a", 1}}, json::array());
  const json e3 = SidecarClient::make_envelope("embed", "m", {{"a", 2}}, json::array());
  CHECK(e1 == e2);
  CHECK(e1.at("request_id") != e3.at("request_id"));
  json rest = e1;
  rest.erase("request_id");
  CHECK(e1.at("request_id") == sha256_hex(rest.dump()));
  BlobStore store("");
  const BlobRef ref = store.put("abc", "image/png");
  const json in = SidecarClient::encode_input(ModalityPayload::from_blob(ModalityKind::image, ref), store);
  CHECK(in.at("data_b64") == base64_encode("abc"));
  CHECK(in.at("kind") == "image");
}

TEST_CASE("sidecar backend against a fake service") {
  FakeServer srv;
  std::mutex mu;
  std::vector<json> seen;
  std::vector<std::string> idempotency;
  std::string mode = "ok";
  auto record = [&](const httplib::Request& req) {
    std::lock_guard lock(mu);
    seen.push_back(json::parse(req.body));
    idempotency.push_back(req.get_header_value("Idempotency-Key"));
    return seen.back();
  };
  srv.server().Post("/v1/generate/image", [&](const httplib::Request& req, httplib::Response& res) {
    const json env = record(req);
    const auto& p = env.at("params");
    json outputs = json::array();
    for (int i = 0; i < p.at("count").get<int>(); ++i)
      outputs.push_back({{"kind", "image"},
                         {"media_type", "image/png"},
                         {"data_b64", base64_encode(encode_png_solid(p.at("width"), p.at("height"), Rgb{1, 2, static_cast<std::uint8_t>(i)}))}});
    res.set_content(ok_reply(env, outputs).dump(), "application/json");
  });
  srv.server().Post("/v1/generate/audio", [&](const httplib::Request& req, httplib::Response& res) {
    const json env = record(req);
    // One sample short of the requested length.
    std::vector<double> samples(static_cast<std::size_t>(env.at("params").at("duration_seconds").get<double>() * 100) - 1);
    json outputs = json::array({{{"kind", "audio"}, {"media_type", "audio/wav"}, {"data_b64", base64_encode(encode_wav_mono16(samples, 100))}}});
    res.set_content(ok_reply(env, outputs).dump(), "application/json");
  });
  srv.server().Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
    const json env = record(req);
    if (mode == "no-echo") {
      res.set_content(json{{"request_id", "other"}, {"status", "ok"}, {"outputs", json::array()}}.dump(), "application/json");
      return;
    }
    if (mode == "error") {
      res.set_content(json{{"request_id", env.at("request_id")}, {"status", "error"}, {"error", {{"code", "oom"}}}}.dump(),
                      "application/json");
      return;
    }
    if (mode == "400") {
      res.status = 400;
      return;
    }
    if (mode == "415") {
      res.status = 415;
      return;
    }
    if (mode == "503") {
      res.status = 503;
      return;
    }
    const int dim = mode == "short" ? 3 : 4;
    res.set_content(ok_reply(env, json::array({{{"vector", std::vector<double>(dim, 2.0)}, {"dimension", dim}}})).dump(),
                    "application/json");
  });
  srv.server().Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    const json env = record(req);
    res.set_content(ok_reply(env, json::array({{{"text", "done " + env.at("params").at("prompt").get<std::string>()}}})).dump(),
                    "application/json");
  });
  srv.server().Get("/v1/health", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok","loaded_models":[],"stub_mode":true})", "application/json");
  });
  srv.start();

  SleepLog log;
  BlobStore store("");

  SidecarBackend img(remote_desc(Transport::sidecar, Role::image_gen, srv.url()), log.sleeper());
  ImageParams ip;
  ip.width = 8;
  ip.height = 4;
  const auto cands = img.generate_image("a lighthouse", ip, 2, 11, store);
  REQUIRE(cands.size() == 2);
  CHECK(cands[1].seed_used == 12);
  {
    const auto& p = seen.back().at("params");
    CHECK(p.at("steps") == 50);
    CHECK(p.at("guidance_scale") == 4.5);
    CHECK(p.at("seed") == 11);
    CHECK(p.at("count") == 2);
    CHECK(seen.back().at("op") == "generate_image");
    CHECK(idempotency.back() == seen.back().at("request_id"));
  }

  SidecarBackend aud(remote_desc(Transport::sidecar, Role::audio_gen, srv.url()), log.sleeper());
  AudioParams ap;
  ap.duration_seconds = 1;
  ap.sample_rate_hz = 100;
  CHECK(code_of([&] { aud.generate_audio("the sound of rain", ap, 1, 0, store); }) == ErrorCode::transport_error);

  auto ed = remote_desc(Transport::sidecar, Role::embedder, srv.url(), 1);
  ed.embedding_dim = 4;
  SidecarBackend emb(ed, log.sleeper());
  const auto v = emb.embed(ModalityPayload::from_text("x"), store);
  CHECK(v.values()[0] == doctest::Approx(0.5));
  mode = "short";
  CHECK(code_of([&] { emb.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::transport_error);
  mode = "no-echo";
  CHECK(code_of([&] { emb.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::transport_error);
  mode = "error";
  CHECK(code_of([&] { emb.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::transport_error);
  mode = "400";
  CHECK(code_of([&] { emb.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::invalid_params);
  mode = "415";
  CHECK(code_of([&] { emb.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::unsupported_modality);
  mode = "503";
  const auto before = seen.size();
  CHECK(code_of([&] { emb.embed(ModalityPayload::from_text("x"), store); }) == ErrorCode::transport_error);
  CHECK(seen.size() - before == 2);
  CHECK(idempotency[before] == idempotency[before + 1]);

  SidecarBackend txt(remote_desc(Transport::sidecar, Role::reasoner, srv.url()), log.sleeper());
  CHECK(txt.complete_text("q", {ModalityPayload::from_text("ctx")}, {}, 3, store) == "done q");
  CHECK(seen.back().at("inputs").at(0).at("text") == "ctx");
  CHECK(txt.client().health().at("stub_mode") == true);
}
