// psaa: command-line front end for the toolkit.
//
// Reports are `key=value` lines followed by a one-line summary. Keys that
// start with `timing.` carry wall-clock measurements; every other line is a
// pure function of the flags.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "psaa/harness.hpp"
#include "psaa/hash.hpp"
#include "psaa/kex.hpp"
#include "psaa/protocol.hpp"
#include "psaa/recon.hpp"
#include "psaa/simnet.hpp"
#include "psaa/symwrap.hpp"
#include "psaa/wire.hpp"

using namespace psaa;

namespace {

struct Flags {
  std::string profile = "robust";
  std::optional<std::string> config;
  std::uint64_t seed = 1;
  std::optional<std::size_t> trials;
  std::optional<std::string> output;
  std::optional<std::string> scenario;
  std::size_t stride = 1;
  bool timing = false;
};

class Report {
 public:
  template <class T>
  Report& kv(const std::string& key, const T& value) {
    os_ << key << '=' << value << '\n';
    return *this;
  }
  Report& line(const std::string& s) {
    os_ << s << '\n';
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string frac(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

ring::RingParams profile_of(const Flags& f) { return ring::resolve_profile(f.profile, f.config); }

simnet::Transcript run(simnet::Scenario sc, const Flags& f) {
  sc.profile = f.profile;
  sc.profile_config = f.config;
  return simnet::run_scenario(sc, f.seed);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// ---- verbs ----

int cmd_init(const Flags& f, Report& r) {
  Rng rng(f.seed);
  const auto params = profile_of(f);
  auto [sys, ncc] = protocol::system_init(params, rng);
  r.kv("profile", params.profile_name)
      .kv("n", params.n)
      .kv("q", params.q)
      .kv("beta", params.beta)
      .kv("coeff_bits", params.coeff_bits())
      .kv("freshness_window_ms", sys.freshness_window.count())
      .kv("a_digest", hash_fields({sys.a.to_bytes()}).hex())
      .line("initialized system parameters for profile " + params.profile_name);
  return 0;
}

simnet::Scenario users_scenario(std::size_t users) {
  simnet::Scenario sc = simnet::honest_auth_scenario(0);
  for (std::size_t i = 0; i < users; ++i) {
    const std::string name = "user-" + std::to_string(i);
    sc.parties.push_back({.name = name, .role = simnet::Role::kUser, .password = "pw-" + std::to_string(i)});
    sc.script.push_back({.op = "register_user", .party = name, .expect = "accept"});
    sc.script.push_back({.op = "login", .party = name, .expect = "accept"});
  }
  return sc;
}

std::size_t count(const simnet::Transcript& t, std::string_view op, std::string_view outcome) {
  std::size_t n = 0;
  for (const auto& o : t.ops) n += o.op == op && o.outcome == outcome;
  return n;
}

int cmd_register(const Flags& f, Report& r, std::string& artifact) {
  const std::size_t n = f.trials.value_or(10);
  const auto t = run(users_scenario(n), f);
  artifact = t.to_jsonl(f.timing);
  const std::size_t reg = count(t, "register_user", "accept"), login = count(t, "login", "accept");
  r.kv("profile", f.profile).kv("users", n).kv("registered", reg).kv("logged_in", login);
  r.line(frac(std::min(reg, login), n) + " registered");
  return reg == n && login == n ? 0 : 1;
}

struct OpStats {
  std::size_t count = 0, accepted = 0, agreed = 0, max_tx = 0;
  std::uint64_t max_delay = 0;
  double sum = 0, sum_sq = 0;
};

OpStats op_stats(const simnet::Transcript& t, std::string_view op) {
  OpStats s;
  for (const auto& o : t.ops) {
    if (o.op != op) continue;
    ++s.count;
    s.accepted += o.outcome == "accept";
    s.agreed += o.outcome == "accept" && o.keys_match;
    s.max_tx = std::max(s.max_tx, o.transmissions);
    s.max_delay = std::max(s.max_delay, o.link_delay_ms);
    s.sum += o.compute_ms();
    s.sum_sq += o.compute_ms() * o.compute_ms();
  }
  return s;
}

void timing_lines(Report& r, const OpStats& s) {
  if (!s.count) return;
  const double mean = s.sum / s.count;
  const double sd = std::sqrt(std::max(0.0, s.sum_sq / s.count - mean * mean));
  r.kv("timing.compute_ms_mean", fixed(mean, 3)).kv("timing.compute_ms_std", fixed(sd, 3));
}

int cmd_auth(const Flags& f, Report& r, std::string& artifact) {
  if (f.scenario) {
    auto sc = simnet::load_scenario(*f.scenario);
    if (f.config) sc.profile_config = f.config;
    const auto t = simnet::run_scenario(sc, f.seed);
    artifact = t.to_jsonl(f.timing);
    std::size_t met = 0;
    for (const auto& o : t.ops) met += o.met;
    r.kv("scenario", *f.scenario).kv("profile", sc.profile).kv("ops", t.ops.size()).kv("expectations_met", met);
    for (const auto& o : t.ops) {
      if (o.met) continue;
      r.line("unmet: op " + std::to_string(o.index) + " " + o.op + " " + o.party + " outcome=" + o.outcome +
             (o.check.empty() ? "" : " check=" + o.check));
    }
    r.line(frac(met, t.ops.size()) + " expectations met");
    return t.ok ? 0 : 1;
  }
  const std::size_t n = f.trials.value_or(100);
  const auto t = run(simnet::honest_auth_scenario(n), f);
  artifact = t.to_jsonl(f.timing);
  const auto s = op_stats(t, "auth");
  const auto sizes = wire::size_report(profile_of(f));
  r.kv("profile", f.profile)
      .kv("trials", n)
      .kv("accepted", s.accepted)
      .kv("transmissions", s.max_tx)
      .kv("link_delay_ms", fixed(static_cast<double>(s.max_delay), 3))
      .kv("bits_user", sizes.user_sent)
      .kv("bits_satellite", sizes.satellite_sent)
      .kv("bits_total", sizes.total);
  timing_lines(r, s);
  r.line(frac(s.agreed, n) + " key agreement");
  return s.agreed == n ? 0 : 1;
}

int cmd_handover(const Flags& f, Report& r, std::string& artifact) {
  const std::size_t n = f.trials.value_or(100);
  simnet::Scenario sc = users_scenario(0);
  sc.parties.push_back({.name = "alice", .role = simnet::Role::kUser, .password = "alice-pw"});
  sc.script.push_back({.op = "register_user", .party = "alice", .expect = "accept"});
  for (std::size_t i = 0; i < n; ++i) {
    sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "accept"});
    sc.script.push_back({.op = "handover", .party = "alice", .via = "SAT-1", .target = "SAT-2", .expect = "accept"});
    sc.script.push_back({.op = "advance", .amount = protocol::Duration{1000}});
  }
  const auto t = run(sc, f);
  artifact = t.to_jsonl(f.timing);
  const auto s = op_stats(t, "handover");
  r.kv("profile", f.profile)
      .kv("trials", n)
      .kv("transmissions", s.max_tx)
      .kv("link_delay_ms", fixed(static_cast<double>(s.max_delay), 3))
      .kv("bits_handover", wire::size_report(profile_of(f)).handover_total);
  timing_lines(r, s);
  r.line(frac(s.accepted, n) + " handover accepted");
  return s.accepted == n ? 0 : 1;
}

int cmd_update(const Flags& f, Report& r) {
  const std::size_t n = f.trials.value_or(100);
  const auto m = harness::update_matrix(profile_of(f), n, f.seed);
  r.kv("profile", f.profile)
      .kv("trials", n)
      .kv("new_factors_accepted", m.new_factors_accept.passed)
      .kv("old_factors_rejected", m.old_factors_reject.passed)
      .kv("secrets_invariant", m.secrets_invariant.passed)
      .kv("failed_update_leaves_device", m.wrong_old_untouched.passed);
  const bool ok = m.new_factors_accept.all() && m.old_factors_reject.all() && m.secrets_invariant.all() &&
                  m.wrong_old_untouched.all();
  const std::size_t worst = std::min({m.new_factors_accept.passed, m.old_factors_reject.passed,
                                      m.secrets_invariant.passed, m.wrong_old_untouched.passed});
  r.line(frac(worst, n) + " update matrix");
  return ok ? 0 : 1;
}

int cmd_attack(const Flags& f, Report& r) {
  simnet::AttackOptions o;
  o.profile = f.profile;
  o.profile_config = f.config;
  o.seed = f.seed;
  o.trials = f.trials.value_or(100);
  o.sweep_stride = f.stride;
  const auto report = simnet::attack_suite(o);
  std::size_t ok = 0, rows = 0;
  for (const auto& a : report.results) {
    const char* tag = a.informational ? "INFO" : (a.passed() ? "PASS" : "FAIL");
    r.line(std::string(tag) + " " + a.name + ": " +
           (a.control ? "accepted " + frac(a.trials - a.rejected, a.trials) : "rejected " + frac(a.rejected, a.trials)) +
           (a.detail.empty() ? "" : " (" + a.detail + ")"));
    if (a.informational) continue;
    ++rows;
    ok += a.passed();
  }
  r.line(frac(ok, rows) + " attack rows passed");
  return report.all_passed() ? 0 : 1;
}

int cmd_sizes(const Flags& f, Report& r) {
  const auto s = wire::size_report(profile_of(f));
  r.kv("profile", s.profile)
      .kv("te", s.widths.ring_element)
      .kv("signal", s.widths.signal)
      .kv("AccessRequest", s.access_request)
      .kv("AccessResponseUser", s.access_response_user)
      .kv("AccessForwardTcs", s.access_forward_tcs)
      .kv("total", s.total)
      .kv("user_sent", s.user_sent)
      .kv("satellite_sent", s.satellite_sent)
      .kv("tcs_sent", s.tcs_sent)
      .kv("prenegotiation_total", s.prenegotiation_total)
      .kv("handover_total", s.handover_total)
      .line("authentication bits " + std::to_string(s.access_request) + "/" + std::to_string(s.access_response_user) +
            "/" + std::to_string(s.access_forward_tcs) + "/" + std::to_string(s.total));
  return 0;
}

double time_us(std::size_t iters, const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < iters; ++i) body();
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count() / iters;
}

int cmd_bench(const Flags& f, Report& r) {
  const auto params = profile_of(f);
  const auto ring = ring::Ring::create(params);
  const std::size_t iters = f.trials.value_or(1000);
  Rng rng(f.seed);
  const auto a = ring::sample_uniform(ring, rng), b = ring::sample_uniform(ring, rng);
  std::vector<std::uint8_t> msg(64);
  rng.fill(msg);
  Digest key;
  const auto frame = std::vector<std::uint8_t>((wire::size_report(params).access_forward_tcs + 10) / 8, 0x5a);
  const auto sealed = symwrap::seal(symwrap::Cipher::kAes256Gcm, key, frame, msg, rng);
  volatile std::size_t sink = 0;
  r.kv("profile", params.profile_name).kv("iterations", iters);
  r.kv("timing.hash_us", fixed(time_us(iters * 10, [&] { sink = sink + hash_fields({msg}).bytes()[0]; }), 3));
  r.kv("timing.sampling_us", fixed(time_us(iters, [&] { sink = sink + ring::sample_gaussian(ring, rng)[0]; }), 3));
  r.kv("timing.ring_mul_us", fixed(time_us(iters, [&] { sink = sink + ring::mul(a, b)[0]; }), 3));
  r.kv("timing.ring_add_us", fixed(time_us(iters, [&] { sink = sink + ring::add(a, b)[0]; }), 3));
  r.kv("timing.cha_us", fixed(time_us(iters, [&] { sink = sink + recon::cha_vec(a).bits.bytes()[0]; }), 3));
  r.kv("timing.mod2_us", fixed(time_us(iters, [&] {
         sink = sink + recon::reconcile(a, recon::cha_vec(b)).bits.bytes()[0];
       }), 3));
  r.kv("timing.wrap_us", fixed(time_us(iters, [&] {
         sink = sink + symwrap::seal(symwrap::Cipher::kAes256Gcm, key, frame, msg, rng).size();
       }), 3));
  r.kv("timing.unwrap_us", fixed(time_us(iters, [&] {
         sink = sink + symwrap::open(symwrap::Cipher::kAes256Gcm, key, sealed, msg)->size();
       }), 3));
  r.line("benchmarked hash, sampling, ring mul/add, Cha and symmetric wrap over " + std::to_string(iters) +
         " iterations");
  return 0;
}

int cmd_recon_rate(const Flags& f, Report& r) {
  const auto params = profile_of(f);
  const std::size_t exchanges = f.trials.value_or(100);
  const auto budget = kex::noise_budget(params);
  const auto est = kex::measure_disagreement(params, exchanges, f.seed);
  const bool consistent = est.ci_low <= budget.predicted_disagreement && budget.predicted_disagreement <= est.ci_high;
  r.kv("profile", params.profile_name)
      .kv("exchanges", est.exchanges)
      .kv("coefficients", est.coefficients)
      .kv("disagreements", est.disagreements)
      .kv("rate", fixed(est.rate, 6))
      .kv("ci95_low", fixed(est.ci_low, 6))
      .kv("ci95_high", fixed(est.ci_high, 6))
      .kv("exchanges_fully_agreeing", est.exchanges_fully_agreeing)
      .kv("predicted", fixed(budget.predicted_disagreement, 6))
      .kv("difference_stddev", fixed(budget.difference_stddev, 1))
      .kv("reconciliation_bound", fixed(budget.reconciliation_bound, 1))
      .kv("consistent", consistent ? "yes" : "no")
      .line("disagreement " + fixed(est.rate, 4) + " [" + fixed(est.ci_low, 4) + ", " + fixed(est.ci_high, 4) +
            "] over " + std::to_string(est.coefficients) + " coefficients, predicted " +
            fixed(budget.predicted_disagreement, 4));
  return 0;
}

int cmd_validate(const Flags& f, Report& r) {
  std::map<std::string, ring::RingParams> profiles;
  if (f.config) {
    profiles = ring::load_profiles(*f.config);
  } else {
    profiles.emplace(f.profile, ring::resolve_profile(f.profile));
  }
  for (const auto& [name, p] : profiles) {
    p.validate();
    const auto b = kex::noise_budget(p);
    const bool reliable = b.predicted_disagreement < 1e-9;
    r.kv(name + ".n", p.n)
        .kv(name + ".q", p.q)
        .kv(name + ".beta", p.beta)
        .kv(name + ".coeff_bits", p.coeff_bits())
        .kv(name + ".bound_violation_probability", b.bound_violation_probability)
        .kv(name + ".predicted_disagreement", fixed(b.predicted_disagreement, 6))
        .kv(name + ".reconciliation", reliable ? "reliable" : "unreliable");
  }
  r.line(std::to_string(profiles.size()) + " profile(s) valid");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psaa: lattice-based satellite access authentication toolkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Flags f;
  app.add_option("--profile", f.profile, "ring profile: paper, robust or a section of --config");
  app.add_option("--config", f.config, "profile file with [name] sections of n, q, beta")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "root seed");
  app.add_option("--trials", f.trials, "trial count");
  app.add_option("--output", f.output, "also write the report (or transcript) here");
  app.add_flag("--timing", f.timing, "include compute times in transcripts");

  std::map<std::string, CLI::App*> verbs;
  for (const auto* v : {"init", "register", "auth", "handover", "update", "attack", "sizes", "bench", "recon-rate",
                        "validate-params"}) {
    verbs[v] = app.add_subcommand(v);
  }
  verbs["init"]->description("generate public parameters");
  verbs["register"]->description("register and log in --trials users");
  verbs["auth"]->description("run --trials honest authentications, or a --scenario file");
  verbs["auth"]->add_option("--scenario", f.scenario, "JSON scenario file")->check(CLI::ExistingFile);
  verbs["handover"]->description("run --trials authentication + handover rounds");
  verbs["update"]->description("credential update login matrix over --trials users");
  verbs["attack"]->description("attack suite with honest controls");
  verbs["attack"]->add_option("--stride", f.stride, "tamper sweep stride")->check(CLI::PositiveNumber);
  verbs["sizes"]->description("message sizes in bits");
  verbs["bench"]->description("primitive timings");
  verbs["recon-rate"]->description("measured vs predicted reconciliation disagreement");
  verbs["validate-params"]->description("check ring profiles");

  const std::string usage = app.help();
  if (argc > 1 && argv[1][0] != '-' && !verbs.contains(argv[1])) {
    std::cerr << "error: unknown verb: " << argv[1] << "\n\n" << usage;
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << usage;
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  Report r;
  std::string artifact;
  int status = 1;
  try {
    if (verb == "init") status = cmd_init(f, r);
    else if (verb == "register") status = cmd_register(f, r, artifact);
    else if (verb == "auth") status = cmd_auth(f, r, artifact);
    else if (verb == "handover") status = cmd_handover(f, r, artifact);
    else if (verb == "update") status = cmd_update(f, r);
    else if (verb == "attack") status = cmd_attack(f, r);
    else if (verb == "sizes") status = cmd_sizes(f, r);
    else if (verb == "bench") status = cmd_bench(f, r);
    else if (verb == "recon-rate") status = cmd_recon_rate(f, r);
    else if (verb == "validate-params") status = cmd_validate(f, r);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const std::string text = r.str();
  std::cout << text;
  if (f.output) write_file(*f.output, artifact.empty() ? text : artifact);
  return status;
}
