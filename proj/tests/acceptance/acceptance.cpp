// Prints one PASS/FAIL line per acceptance criterion. Exit status is the
// number of failures. Usage: acceptance <path to the modbridge CLI>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "modbridge/agents/afm2.hpp"
#include "modbridge/metrics/native.hpp"
#include "modbridge/paradigms/variants.hpp"
#include "support/mock_env.hpp"
#include "support/oracles.hpp"
#include "support/scripted.hpp"
#include "support/tempdir.hpp"

using namespace mb;
namespace fs = std::filesystem;
namespace t = mb::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later ones only bump the count.
struct Checker {
  Outcome out;
  int failures = 0;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) out.detail = what;
    out.pass = false;
  }
  Outcome done(const std::string& summary) {
    if (out.pass)
      out.detail = summary;
    else if (failures > 1)
      out.detail += " (+" + std::to_string(failures - 1) + " more)";
    return out;
  }
};

using Seconds = std::chrono::duration<double>;

double elapsed(std::chrono::steady_clock::time_point since) {
  return Seconds(std::chrono::steady_clock::now() - since).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << v;
  return s.str();
}

// Runs a shell command, returning its exit status and stdout.
std::pair<int, std::string> run_command(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {status, out};
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  return out;
}

// ---------------------------------------------------------------------------

Outcome variant_enumeration(const std::string& cli) {
  Checker c;
  const std::vector<std::string> generators = {"SD3.5",           "FLUX.1 dev", "Qwen2.5-VL-7B",
                                               "Qwen2.5-Omni-7B", "AudioLDM 2", "SA 1.0"};
  std::map<std::string, std::set<std::string>> expected;
  for (const auto& g : generators) {
    expected["p1"].insert(g);
    for (const char* ranker : {"+IB", "+MJ"}) {
      expected["p2"].insert(g + ranker);
      for (const char* miner : {"M+", "4o+"}) expected["p3"].insert(miner + g + ranker);
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const auto [status, out] = run_command(shell_quote(cli) + " variants");
  const double secs = elapsed(start);
  c.check(status == 0, "variants exited with status " + std::to_string(status));

  std::map<std::string, std::set<std::string>> listed;
  std::set<std::string> ids;
  std::size_t lines = 0;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    ++lines;
    std::istringstream fields(line);
    std::string paradigm, name, id;
    std::getline(fields, paradigm, '\t');
    std::getline(fields, name, '\t');
    std::getline(fields, id, '\t');
    c.check(listed[paradigm].insert(name).second, "duplicate name " + name);
    c.check(ids.insert(id).second, "duplicate id " + id);
  }
  c.check(lines == 42, "listed " + std::to_string(lines) + " variants");
  c.check(listed["p1"].size() == 6 && listed["p2"].size() == 12 && listed["p3"].size() == 24,
          "partition (" + std::to_string(listed["p1"].size()) + ", " + std::to_string(listed["p2"].size()) + ", " +
              std::to_string(listed["p3"].size()) + ")");
  c.check(listed == expected, "display names differ from the roster");
  c.check(secs < 1.0, "took " + fmt(secs) + " s");

  // The library agrees with the CLI.
  const auto all = enumerate_variants();
  c.check(all.size() == 42, "enumerate_variants returned " + std::to_string(all.size()));
  return c.done("42 unique, partition (6, 12, 24), roster names match, " + fmt(secs) + " s");
}

Outcome groundedness_oracle() {
  Checker c;
  int cases = 0;
  for (std::uint32_t n = 1; n <= 10; ++n)
    for (std::uint32_t h = 0; h <= n; ++h) {
      ++cases;
      const int got = factual_groundedness_score(h, n);
      c.check(got == t::oracle_groundedness(h, n),
              "H=" + std::to_string(h) + " N=" + std::to_string(n) + " gave " + std::to_string(got));
      c.check((got == 5) == (h == 0), "score 5 iff H=0 broken at H=" + std::to_string(h) + " N=" + std::to_string(n));
    }
  return c.done(std::to_string(cases) + " (H, N) cells match exactly");
}

Outcome penalty_arithmetic() {
  Checker c;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> overall_d(0.0, 5.0), lambda_d(0.0, 1.0), cap_d(0.05, 5.0);
  std::uniform_int_distribution<std::uint32_t> h_d(0, 12);
  t::MockStack m;
  const Sample s = m.sample();
  const std::vector<ModalityPayload> refs = {*s.find(ModalityKind::image), *s.find(ModalityKind::audio)};
  const Candidate cand{ModalityPayload::from_text("candidate"), "p", "txt", 0, 0};
  constexpr double kTol = 1e-9;

  for (int i = 0; i < 10000; ++i) {
    const double overall = overall_d(rng), lambda = lambda_d(rng), cap = cap_d(rng);
    const std::uint32_t h = h_d(rng);
    const double expected = overall - std::min(static_cast<double>(h) * lambda, cap);
    const double got = penalized_score(overall, h, lambda, cap);
    c.check(std::abs(got - expected) <= kTol, "triple " + std::to_string(i) + " off by " + fmt(got - expected, 12));
    c.check(got <= overall + kTol, "penalized above overall at triple " + std::to_string(i));
    c.check(overall - got <= cap + kTol, "gap above cap at triple " + std::to_string(i));

    // Two references through the judge path: mean of the per-reference
    // penalized scores, clamped to the score range.
    const double overall2 = overall_d(rng);
    const std::uint32_t h2 = h_d(rng);
    auto calls = std::make_shared<std::atomic<int>>(0);
    t::ScriptedBackend judge("j", Role::judge, [=](const std::string&, const auto&, auto) {
      return (*calls)++ == 0 ? t::judge_reply(ModalityKind::text, overall, h, 12)
                             : t::judge_reply(ModalityKind::text, overall2, h2, 12);
    });
    const auto scored = score_candidate(cand, refs, judge, lambda, cap, {}, 1, m.store);
    // Replies carry decimal text, so compare against the parsed overall.
    const double p1 = scored.reports[0].overall_score() - std::min(h * lambda, cap);
    const double p2 = scored.reports[1].overall_score() - std::min(h2 * lambda, cap);
    const double mean = std::clamp((p1 + p2) / 2.0, 0.0, 5.0);
    c.check(std::abs(scored.score - mean) <= kTol, "two-reference mean off at triple " + std::to_string(i));
    c.check(std::abs(scored.reports[0].overall_score() - overall) <= 1e-6, "judge reply lost precision");
  }
  return c.done("10000 random triples within 1e-9, two-reference mean holds");
}

// One afm2 run against a judge that replays `script` in call order.
Afm2Result scripted_afm2(const std::vector<double>& script, int n, int rounds, double threshold, RuleCache& cache) {
  t::MockStack m;
  auto next = std::make_shared<std::atomic<std::size_t>>(0);
  m.add(std::make_shared<t::ScriptedBackend>("sj", Role::judge, [script, next](const std::string&, const auto&, auto) {
    const std::size_t k = (*next)++;
    return t::judge_reply(ModalityKind::image, script.at(k));
  }));
  m.routing.judge = "sj";
  PipelineConfig config;
  config.paradigm = Paradigm::afm2;
  config.params = t::small_params(n, 11);
  config.max_rounds = rounds;
  config.threshold = threshold;
  config.fan_out = 1;
  const Sample s = m.sample().without(ModalityKind::image).without(ModalityKind::audio);
  return run_afm2(s, ModalityKind::image, config, AgentEnv{m.env(1), &cache, "toy", "household scenes"});
}

Outcome refinement_state_machine() {
  Checker c;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> rounds_d(1, 6), n_d(1, 4), half_d(0, 10);
  const std::array<double, 4> thresholds = {3.5, 4.0, 4.5, 5.0};
  RuleCache cache;
  int early = 0, forced = 0;

  for (int run = 0; run < 1000; ++run) {
    const int rounds = rounds_d(rng), n = n_d(rng);
    const double tau = thresholds[static_cast<std::size_t>(rng() % thresholds.size())];
    std::vector<double> script(static_cast<std::size_t>(rounds * n));
    for (auto& v : script) v = 0.5 * half_d(rng);

    // Expected outcome from the script alone.
    int accept_round = -1;
    std::size_t best_round = 0, best_j = 0;
    double global = -1.0;
    for (int r = 0; r < rounds && accept_round < 0; ++r) {
      std::size_t arg = 0;
      for (int j = 1; j < n; ++j)
        if (script[static_cast<std::size_t>(r * n + j)] > script[static_cast<std::size_t>(r * n) + arg])
          arg = static_cast<std::size_t>(j);
      const double best = script[static_cast<std::size_t>(r * n) + arg];
      if (best > global) {
        global = best;
        best_round = static_cast<std::size_t>(r);
        best_j = arg;
      }
      if (best >= tau) {
        accept_round = r;
        best_round = static_cast<std::size_t>(r);
        best_j = arg;
      }
    }

    const std::string tag = "script " + std::to_string(run);
    Afm2Result res = [&] {
      try {
        return scripted_afm2(script, n, rounds, tau, cache);
      } catch (const std::exception& e) {
        c.check(false, tag + " threw " + e.what());
        throw;
      }
    }();
    const auto& tr = res.trace;
    c.check(static_cast<int>(tr.rounds.size()) <= rounds, tag + ": trace longer than R");
    if (accept_round >= 0) {
      ++early;
      c.check(static_cast<int>(tr.rounds.size()) == accept_round + 1, tag + ": did not stop at the first accept");
      c.check(tr.rounds.back().decision == Decision::accept, tag + ": last decision not accept");
    } else {
      ++forced;
      c.check(static_cast<int>(tr.rounds.size()) == rounds, tag + ": stopped before R");
      c.check(tr.rounds.back().decision == Decision::force_accept, tag + ": last decision not force_accept");
    }
    for (std::size_t r = 0; r + 1 < tr.rounds.size(); ++r)
      c.check(tr.rounds[r].decision == Decision::refine, tag + ": non-final round did not refine");
    c.check(best_round < tr.rounds.size() && best_j < tr.rounds[best_round].candidates.size() &&
                res.final_candidate == tr.rounds[best_round].candidates[best_j],
            tag + ": returned the wrong candidate");
    for (std::size_t r = 0; r < tr.rounds.size(); ++r)
      for (int j = 0; j < n; ++j)
        c.check(tr.rounds[r].candidate_scores.at(static_cast<std::size_t>(j)) ==
                    script[r * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)],
                tag + ": recorded scores differ from the script");
  }
  return c.done("1000 scripts (" + std::to_string(early) + " early exits, " + std::to_string(forced) +
                " force-accepts), all traces within R");
}

Outcome best_of_n_monotonicity() {
  Checker c;
  std::mt19937_64 rng(5);
  const std::vector<std::string> words = {"red",   "kettle", "street", "violin", "dog",   "quiet", "park",
                                          "night", "lamp",   "rain",   "bright", "wooden", "lake", "bicycle"};
  const VariantSpec variant = find_variant("SD3.5+MJ");
  constexpr int kMaxN = 25;
  for (int p = 0; p < 100; ++p) {
    std::string prompt = "A";
    const int len = 4 + static_cast<int>(rng() % 8);
    for (int w = 0; w < len; ++w) prompt += " " + words[rng() % words.size()];
    t::MockStack m;
    const Sample s = m.sample("p" + std::to_string(p), prompt + ".").without(ModalityKind::image);
    const std::uint64_t seed = rng() % 1000;
    const auto full = run_paradigm2(s, ModalityKind::image, variant, t::small_params(kMaxN, seed), m.env());
    double prev = -1.0;
    for (int n = 1; n <= kMaxN; ++n) {
      const auto r = run_paradigm2(s, ModalityKind::image, variant, t::small_params(n, seed), m.env());
      const auto& scores = r.outcome->scores;
      const double best = scores[r.outcome->best_index];
      const std::string tag = "prompt " + std::to_string(p) + " N=" + std::to_string(n);
      c.check(best >= prev, tag + ": best fell from " + fmt(prev) + " to " + fmt(best));
      c.check(std::equal(scores.begin(), scores.end(), full.outcome->scores.begin()),
              tag + ": candidates are not a prefix of the N=25 batch");
      prev = best;
    }
  }
  return c.done("100 prompts, best score non-decreasing for N = 1..25");
}

Outcome metric_oracles() {
  Checker c;
  const auto seqs = t::all_sequences(4);
  std::size_t pairs = 0;
  for (const auto& h : seqs)
    for (const auto& r : seqs) {
      ++pairs;
      const double got = mer(h, r);
      c.check(got == t::oracle_mer(h, r), "mer differs from the exhaustive alignment on a pair of lengths " +
                                              std::to_string(h.size()) + "/" + std::to_string(r.size()));
    }

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> mix(0.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t len = 64 + rng() % 2000;
    std::vector<double> ref(len), est(len);
    const double a = mix(rng);
    for (std::size_t k = 0; k < len; ++k) {
      ref[k] = g(rng);
      est[k] = a * ref[k] + g(rng) * mix(rng);
    }
    const double base = si_snr(est, ref);
    for (double alpha : {0.1, 2.0, 10.0}) {
      std::vector<double> scaled(est);
      for (double& x : scaled) x *= alpha;
      const double d = std::abs(si_snr(scaled, ref) - base);
      worst = std::max(worst, d);
      c.check(d < 1e-6, "si_snr moved by " + fmt(d, 9) + " dB at alpha " + fmt(alpha, 1));
    }
  }

  std::uniform_int_distribution<int> len_d(0, 12), sym_d(0, 5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> a(static_cast<std::size_t>(len_d(rng))), b(static_cast<std::size_t>(len_d(rng)));
    for (auto& x : a) x = std::string(1, static_cast<char>('a' + sym_d(rng)));
    for (auto& x : b) x = std::string(1, static_cast<char>('a' + sym_d(rng)));
    c.check(mer(a, b) == mer(b, a), "mer asymmetric on pair " + std::to_string(i));
  }
  return c.done(std::to_string(pairs) + " exhaustive pairs exact, si_snr max drift " + fmt(worst, 12) +
                " dB, 1000 symmetric pairs");
}

struct DemoRuns {
  t::TempDir dir;
  double first_secs = 0.0, second_secs = 0.0;
  int first_status = -1, second_status = -1;
  fs::path first() const { return dir / "one"; }
  fs::path second() const { return dir / "two"; }
};

void run_demo_twice(const std::string& cli, DemoRuns& d) {
  const auto go = [&](const fs::path& out, double& secs, int& status) {
    const auto start = std::chrono::steady_clock::now();
    status = run_command(shell_quote(cli) + " mock-demo --seed 7 --parallel 1 --out " + shell_quote(out)).first;
    secs = elapsed(start);
  };
  go(d.first(), d.first_secs, d.first_status);
  go(d.second(), d.second_secs, d.second_status);
}

Outcome mock_demo_determinism(const DemoRuns& d) {
  Checker c;
  c.check(d.first_status == 0 && d.second_status == 0, "mock-demo exited with a non-zero status");
  c.check(d.first_secs < 60.0 && d.second_secs < 60.0,
          "mock-demo took " + fmt(d.first_secs) + " s and " + fmt(d.second_secs) + " s");
  const auto a = tree_contents(d.first()), b = tree_contents(d.second());
  c.check(!a.empty(), "mock-demo wrote nothing");
  c.check(a == b, "outputs of the two runs differ");

  std::set<std::string> paradigms, kinds, rates;
  std::size_t results = 0, records = 0, errors = 0;
  for (const auto& [path, content] : a) {
    if (fs::path(path).filename() != "results.jsonl") continue;
    ++results;
    std::istringstream in(content);
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      paradigms.insert(j.at("paradigm").get<std::string>());
      kinds.insert(j.at("target_kind").get<std::string>());
      rates.insert(fmt(j.at("missing_rate").get<double>(), 1));
      if (j.at("record") != "sample") continue;
      ++records;
      if (!j.at("error").is_null()) ++errors;
    }
  }
  const std::size_t toy = std::count_if(a.begin(), a.end(), [](const auto& kv) {
    return kv.first.rfind("toy/images/", 0) == 0;
  });
  c.check(toy == 20, "toy dataset has " + std::to_string(toy) + " images");
  c.check(paradigms == std::set<std::string>{"p1", "p2", "p3", "afm2"}, "paradigm set incomplete");
  c.check(kinds.size() == 3, "target kinds incomplete");
  c.check(rates == std::set<std::string>{"0.3", "0.5", "0.7"}, "rate set incomplete");
  c.check(errors == 0, std::to_string(errors) + " sample errors in the demo");
  return c.done(std::to_string(results) + " runs, " + std::to_string(records) + " records, " +
                std::to_string(a.size()) + " files identical; " + fmt(d.first_secs, 1) + " s and " +
                fmt(d.second_secs, 1) + " s");
}

Outcome ablation_schema(const DemoRuns& d) {
  Checker c;
  std::map<std::string, int> traces;
  const fs::path runs = d.first() / "runs";
  if (!fs::exists(runs)) {
    c.check(false, "no demo runs to inspect");
    return c.done("");
  }
  for (const auto& run : fs::directory_iterator(runs)) {
    const std::string name = run.path().filename().string();
    if (name.rfind("afm2", 0) != 0) continue;
    const bool no_miner = name.find("no-miner") != std::string::npos;
    const bool no_verifier = name.find("no-verifier") != std::string::npos;
    const std::string variant = no_miner ? "no-miner" : no_verifier ? "no-verifier" : "full";
    for (const auto& f : fs::directory_iterator(run.path() / "traces")) {
      const json j = json::parse(read_file(f.path()));
      const std::string tag = name + "/" + f.path().filename().string();
      ++traces[variant];
      c.check(j.contains("mining") && j.contains("trace"), tag + ": missing mining or trace field");
      if (!j.contains("trace")) continue;
      const json& tr = j.at("trace");
      const auto& rounds = tr.at("rounds");
      c.check(!rounds.empty(), tag + ": empty trace");
      if (no_miner) {
        c.check(j.at("mining").is_null(), tag + ": mining stage present with the miner disabled");
        c.check(tr.at("verified") == true, tag + ": verifier flag off");
      } else {
        c.check(j.at("mining").is_object() && !j.at("mining").at("summaries").empty(), tag + ": no mining stage");
      }
      if (no_verifier) {
        c.check(rounds.size() == 1, tag + ": more than one round without the verifier");
        c.check(rounds.at(0).at("decision") == "accept", tag + ": single round did not accept");
        c.check(tr.at("verified") == false, tag + ": trace claims verification");
      } else {
        const auto last = rounds.back().at("decision").get<std::string>();
        c.check(last == "accept" || last == "force_accept", tag + ": trace does not terminate");
        for (std::size_t r = 0; r + 1 < rounds.size(); ++r)
          c.check(rounds[r].at("decision") == "refine", tag + ": non-final round did not refine");
      }
    }
  }
  c.check(traces["full"] > 0 && traces["no-miner"] > 0 && traces["no-verifier"] > 0, "an afm2 variant is missing");
  return c.done("traces checked: full " + std::to_string(traces["full"]) + ", no-miner " +
                std::to_string(traces["no-miner"]) + ", no-verifier " + std::to_string(traces["no-verifier"]));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <modbridge CLI>\n";
    return 2;
  }
  const std::string cli = argv[1];
  DemoRuns demo;
  bool demo_ran = false;
  const auto demo_once = [&]() -> const DemoRuns& {
    if (!demo_ran) run_demo_twice(cli, demo);
    demo_ran = true;
    return demo;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"variant-enumeration", [&] { return variant_enumeration(cli); }},
      {"groundedness-oracle", groundedness_oracle},
      {"penalty-arithmetic", penalty_arithmetic},
      {"refinement-state-machine", refinement_state_machine},
      {"best-of-n-monotonicity", best_of_n_monotonicity},
      {"metric-oracles", metric_oracles},
      {"mock-demo-determinism", [&] { return mock_demo_determinism(demo_once()); }},
      {"ablation-trace-schema", [&] { return ablation_schema(demo_once()); }},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed;
}
