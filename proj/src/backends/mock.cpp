#include "modbridge/backends/mock.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>

#include "modbridge/core/json.hpp"
#include "modbridge/error.hpp"
#include "modbridge/util/digest.hpp"
#include "modbridge/util/media.hpp"
#include "modbridge/util/rng.hpp"
#include "modbridge/util/text.hpp"

namespace mb {

namespace {

constexpr std::string_view kNouns[] = {
    "lantern", "river",  "meadow", "harbor", "violin", "sparrow", "engine", "bridge",
    "orchard", "market", "drum",   "tower",  "forest", "kettle", "ferry",  "garden"};
constexpr std::string_view kPhrases[] = {
    "under soft morning light",       "with a quiet breeze in the background",
    "framed by long evening shadows", "surrounded by gentle ambient echoes",
    "in muted earthy colors",         "seen from a low wide angle",
    "with crisp natural detail",      "beneath a pale overcast sky",
    "lit by warm golden highlights",  "set against a calm open horizon"};
constexpr std::string_view kVerbs[] = {"rests", "moves", "glows", "turns", "waits", "sways"};

template <std::size_t N>
std::string_view pick(const std::string_view (&list)[N], std::uint64_t v) {
  return list[v % N];
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Words of the prompt that the template body does not contain, in order,
// without repeats. These come from the bindings.
std::vector<std::string> binding_words(const std::string& prompt, const std::string& template_id) {
  static std::mutex mu;
  static std::map<std::string, std::set<std::string>> body_words;
  const std::set<std::string>* known;
  {
    std::lock_guard lock(mu);
    auto it = body_words.find(template_id);
    if (it == body_words.end()) {
      auto words = words_of(get_template(template_id).body);
      it = body_words.emplace(template_id, std::set<std::string>(words.begin(), words.end())).first;
    }
    known = &it->second;
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& w : words_of(prompt))
    if (w.size() > 2 && !known->count(w) && seen.insert(w).second) out.push_back(std::move(w));
  return out;
}

std::string between(const std::string& s, std::string_view open, std::string_view close) {
  const auto a = s.find(open);
  if (a == std::string::npos) return {};
  const auto start = a + open.size();
  const auto b = s.find(close, start);
  return s.substr(start, b == std::string::npos ? std::string::npos : b - start);
}

class Stream {
 public:
  explicit Stream(const Digest& d) : rng_(leading_u64(d)) {}
  std::uint64_t next() { return rng_.next(); }

 private:
  Rng rng_;
};

// Up to `n` subject words: binding words first (rotated), nouns otherwise.
std::vector<std::string> subjects(const std::vector<std::string>& words, Stream& s, std::size_t n) {
  std::vector<std::string> out;
  if (!words.empty()) {
    const std::size_t offset = s.next() % words.size();
    for (std::size_t i = 0; i < std::min(n, words.size()); ++i)
      out.push_back(words[(offset + i) % words.size()]);
  }
  while (out.size() < n) out.emplace_back(pick(kNouns, s.next()));
  return out;
}

std::string pad_to(std::string text, std::size_t min_chars, Stream& s) {
  while (text.size() < min_chars) {
    text += ", ";
    text += pick(kPhrases, s.next());
  }
  return text;
}

std::string media_prompt(ModalityKind kind, const std::vector<std::string>& words, Stream& s) {
  const auto subj = subjects(words, s, 3);
  std::string p = kind == ModalityKind::audio ? "the sound of a " : "a detailed view of a ";
  p += subj[0] + " that " + std::string(pick(kVerbs, s.next())) + " near the " + subj[1] + " and " +
       subj[2];
  return pad_to(std::move(p), kMockMinPromptChars, s);
}

std::string text_sentence(const std::vector<std::string>& words, Stream& s) {
  const auto subj = subjects(words, s, 3);
  return "A " + subj[0] + " " + std::string(pick(kVerbs, s.next())) + " beside the " + subj[1] + " " +
         std::string(pick(kPhrases, s.next())) + ".";
}

std::string candidates_reply(ModalityKind target, const std::string& prompt,
                             const std::vector<std::string>& words, Stream& s) {
  static const std::regex count_re(R"(generate a series of (\d+) distinct)");
  std::smatch m;
  int count = 5;
  if (std::regex_search(prompt, m, count_re)) count = std::max(1, std::stoi(m[1].str()));
  json list = json::array();
  for (int i = 0; i < count; ++i) {
    if (target == ModalityKind::text)
      list.push_back({{"text", text_sentence(words, s)}});
    else
      list.push_back({{"prompts", media_prompt(target, words, s)}});
  }
  return json{{"candidates", list}}.dump(2);
}

std::string judge_reply(ModalityKind kind, const std::string& candidate, const std::string& reference) {
  const Digest d = digest_parts({candidate, reference});
  const auto& names = criterion_names(kind);
  const std::uint32_t n = 4 + d[6] % 7;
  const std::uint32_t h = mock_candidate_parity_even(candidate) ? 0 : 1 + d[7] % 3;
  json report = json::object();
  json justifications = json::object();
  double sum = 0.0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string name(names[i]);
    const double score =
        name == "factual_groundedness" ? factual_groundedness_score(h, n) : 3.0 + d[i] % 3;
    report[name] = score;
    sum += score;
    justifications[name] = "Mock assessment " + to_hex(d).substr(2 * i, 8) + " for " + name + ".";
  }
  report["overall_score"] = sum / 6.0;
  report["total_assertions"] = n;
  if (kind == ModalityKind::image) {
    json elements = json::array();
    for (std::uint32_t i = 0; i < h; ++i) elements.push_back("unsupported element " + std::to_string(i + 1));
    report["hallucinated_elements"] = elements;
  } else {
    report["hallucinated_assertions"] = h;
  }
  if (kind == ModalityKind::audio) report["noise_segments"] = d[8] % 3;
  report["justifications"] = justifications;
  return "Evaluation follows.\n```json\n" + report.dump(2) + "\n```\n";
}

std::string rules_reply() {
  // Bare object body, the way reasoners often answer this template.
  return R"("image": [
    "Which object is most prominent in the image?",
    "What colours cover most of the image?",
    "Where does the scene appear to take place?"
],
"text": [
    "Which entities does the text mention?",
    "What action or event does the text describe?",
    "What mood does the text convey?"
],
"audio": [
    "What kind of sound is heard?",
    "How many sound sources can be distinguished?",
    "Is there background noise, and what is it?"
])";
}

}  // namespace

bool mock_candidate_parity_even(std::string_view candidate_bytes) {
  return std::popcount(leading_u64(sha256(candidate_bytes))) % 2 == 0;
}

std::string MockBackend::do_complete_text(const std::string& prompt,
                                          const std::vector<ModalityPayload>& attachments,
                                          const TextParams&, std::uint64_t seed, const BlobStore& store) {
  std::vector<std::string> bytes;
  std::string attachment_digests;
  for (const auto& a : attachments) {
    bytes.push_back(store.payload_bytes(a));
    attachment_digests += sha256_hex(bytes.back());
  }
  Stream s(digest_parts({id(), prompt, std::to_string(seed), attachment_digests}));
  std::vector<std::string> attached_words;
  for (std::size_t i = 0; i < attachments.size(); ++i)
    if (attachments[i].is_text())
      for (auto& w : words_of(bytes[i]))
        if (w.size() > 3) attached_words.push_back(std::move(w));

  const auto tid = identify(prompt);
  const std::string t = tid.value_or("");
  if (t == "mining-rules") return rules_reply();
  if (t == "mining-knowledge") {
    const std::string kind = attachments.empty() ? "input" : std::string(to_string(attachments[0].kind()));
    const auto subj = subjects(attached_words, s, 2);
    return "[ANSWER]: The " + kind + " features a " + subj[0] + " and a " + subj[1] + " " +
           std::string(pick(kPhrases, s.next())) + ".";
  }
  if (t == "knowledge-summary") {
    std::istringstream in(between(prompt, "QA PAIRS:\n\n", "\n\nYour answer should be"));
    std::string line, answers;
    while (std::getline(in, line))
      if (line.rfind("A: ", 0) == 0) answers += (answers.empty() ? "" : " ") + line.substr(3);
    if (answers.empty()) answers = text_sentence({}, s);
    return "[ANSWER]: " + answers;
  }
  if (t == "gen-text") return candidates_reply(ModalityKind::text, prompt, binding_words(prompt, t), s);
  if (t == "gen-image") return candidates_reply(ModalityKind::image, prompt, binding_words(prompt, t), s);
  if (t == "gen-audio") return candidates_reply(ModalityKind::audio, prompt, binding_words(prompt, t), s);
  if (t == "verify-text" || t == "verify-image" || t == "verify-audio") {
    if (bytes.size() < 2) return "The candidate cannot be verified without a reference.";
    const ModalityKind kind = t == "verify-text"    ? ModalityKind::text
                              : t == "verify-image" ? ModalityKind::image
                                                    : ModalityKind::audio;
    return judge_reply(kind, bytes[0], bytes[1]);
  }
  if (t == "refine-image") {
    const std::string original = between(prompt, "Original Prompt: \"", "\"\n\nFeedback:");
    return "Refined Prompt: " + pad_to(original + ", " + std::string(pick(kPhrases, s.next())),
                                       kMockMinPromptChars, s);
  }
  if (t == "refine-audio") {
    std::string original = between(prompt, "Original Audio Prompt:\n\"", "\"\n\nText Information");
    if (!starts_with_ci(original, "the sound of")) original = "the sound of " + original;
    return pad_to(original + ", " + std::string(pick(kPhrases, s.next())), kMockMinPromptChars, s);
  }
  if (t == "refine-text") {
    std::string original = trim(between(prompt, "1. Original Text: ", "\n\n2. Image Information"));
    while (!original.empty() && (original.back() == '.' || original.back() == ' ')) original.pop_back();
    return original + ", " + std::string(pick(kPhrases, s.next())) + ".";
  }
  if (t == "p2-judge-ranking") {
    const Digest d = digest_parts({prompt, bytes.empty() ? std::string() : bytes[0]});
    const double acc = (d[0] % 11) / 2.0, rel = (d[1] % 11) / 2.0;
    std::ostringstream out;
    out << "Scores:\n- Matching Accuracy: " << acc << "\n- Semantic Relevance: " << rel
        << "\n- Final Score: " << (acc + rel) / 2.0 << "\n";
    return out.str();
  }
  if (t == "p3-text-miner" || t == "p3-image-miner") {
    auto words = binding_words(prompt, t);
    words.insert(words.end(), attached_words.begin(), attached_words.end());
    json prompts = json::array();
    for (int i = 0; i < 5; ++i) prompts.push_back(media_prompt(ModalityKind::image, words, s));
    return json{{"prompts", prompts}}.dump(2);
  }
  // Anything else, including caption requests: one descriptive sentence.
  return text_sentence(attached_words, s);
}

std::vector<Backend::Media> MockBackend::do_generate_image(const std::string& prompt,
                                                           const ImageParams& params, int count,
                                                           std::uint64_t base_seed) {
  std::vector<Media> out;
  for (int i = 0; i < count; ++i) {
    const Digest d = digest_parts({prompt, std::to_string(base_seed + static_cast<std::uint64_t>(i))});
    out.push_back({encode_png_solid(params.width, params.height, Rgb{d[0], d[1], d[2]}), "image/png"});
  }
  return out;
}

std::vector<Backend::Media> MockBackend::do_generate_audio(const std::string& prompt,
                                                           const AudioParams& params, int count,
                                                           std::uint64_t base_seed) {
  const auto n = static_cast<std::size_t>(std::llround(params.duration_seconds * params.sample_rate_hz));
  std::vector<Media> out;
  for (int i = 0; i < count; ++i) {
    const Digest d = digest_parts({prompt, std::to_string(base_seed + static_cast<std::uint64_t>(i))});
    Rng rng(leading_u64(d));
    const double freq = 110.0 + static_cast<double>(rng.below(771));
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    std::vector<double> samples(n);
    const double step = 2.0 * M_PI * freq / params.sample_rate_hz;
    for (std::size_t k = 0; k < n; ++k) samples[k] = 0.5 * std::sin(phase + step * static_cast<double>(k));
    out.push_back({encode_wav_mono16(samples, params.sample_rate_hz), "audio/wav"});
  }
  return out;
}

std::vector<double> MockBackend::do_embed(const ModalityPayload& payload, const BlobStore& store) {
  const Digest d = digest_parts({to_string(payload.kind()), store.payload_bytes(payload)});
  Rng rng(leading_u64(d));
  std::vector<double> v(static_cast<std::size_t>(descriptor().embedding_dim));
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace mb
