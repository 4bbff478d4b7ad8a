#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psaa/simnet.hpp"

namespace psaa::simnet {

using nlohmann::json;

namespace {

Role role_from(const std::string& s) {
  if (s == "tcs") return Role::kTcs;
  if (s == "satellite") return Role::kSatellite;
  if (s == "user") return Role::kUser;
  throw std::invalid_argument("unknown role: " + s);
}

Action action_from(const std::string& s) {
  for (auto a : {Action::kPassthrough, Action::kEavesdrop, Action::kReplay, Action::kTamper, Action::kDrop,
                 Action::kInject}) {
    if (action_name(a) == s) return a;
  }
  throw std::invalid_argument("unknown adversary action: " + s);
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Duration ms(const json& j, const char* key, Duration fallback) {
  return j.contains(key) ? Duration{j.at(key).get<std::int64_t>()} : fallback;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  Scenario sc;
  try {
    const json j = json::parse(json_text);
    sc.profile = j.value("profile", sc.profile);
    read_opt(j, "profile_config", sc.profile_config);
    sc.latency = ms(j, "latency_ms", sc.latency);
    sc.freshness_window = ms(j, "freshness_ms", sc.freshness_window);
    if (j.contains("cipher")) sc.cipher = symwrap::cipher_from_name(j.at("cipher").get<std::string>());

    for (const auto& p : j.at("parties")) {
      PartySpec spec;
      spec.name = p.at("name").get<std::string>();
      spec.role = role_from(p.at("role").get<std::string>());
      spec.rogue = p.value("rogue", false);
      spec.impersonates = p.value("impersonates", std::string{});
      spec.password = p.value("password", spec.password);
      spec.bio_seed = p.value("bio_seed", std::uint64_t{0});
      sc.parties.push_back(std::move(spec));
    }
    for (const auto& l : j.value("links", json::array())) {
      sc.links.push_back({l.at("a").get<std::string>(), l.at("b").get<std::string>(), ms(l, "latency_ms", sc.latency),
                          l.value("secure", false)});
    }
    for (const auto& r : j.value("policy", json::array())) {
      AdversaryRule rule;
      const json match = r.value("match", json::object());
      if (match.contains("kind")) rule.kind = protocol::kind_from_name(match.at("kind").get<std::string>());
      read_opt(match, "from", rule.from);
      read_opt(match, "to", rule.to);
      read_opt(match, "occurrence", rule.occurrence);
      rule.action = action_from(r.at("action").get<std::string>());
      rule.delay = ms(r, "delay_ms", rule.delay);
      rule.bit_positions = r.value("bits", std::vector<std::size_t>{});
      if (r.contains("frame")) rule.frame = from_hex(r.at("frame").get<std::string>());
      sc.policy.push_back(std::move(rule));
    }
    for (const auto& s : j.at("script")) {
      ScriptStep step;
      step.op = s.at("op").get<std::string>();
      step.party = s.value("party", std::string{});
      step.via = s.value("via", std::string{});
      step.target = s.value("target", std::string{});
      step.amount = ms(s, "ms", Duration{0});
      read_opt(s, "password", step.password);
      read_opt(s, "new_password", step.new_password);
      step.bio_flips = s.value("bio_flips", std::size_t{0});
      read_opt(s, "new_bio_seed", step.new_bio_seed);
      read_opt(s, "capture", step.capture);
      if (s.contains("kind")) step.kind = protocol::kind_from_name(s.at("kind").get<std::string>());
      if (s.contains("frame")) step.frame = from_hex(s.at("frame").get<std::string>());
      read_opt(s, "expect", step.expect);
      sc.script.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string Transcript::to_jsonl(bool include_timing) const {
  std::ostringstream os;
  for (const auto& e : events) {
    json j{{"record", "event"}, {"t_ms", e.t_ms}, {"op", e.op}, {"type", e.type}};
    if (!e.from.empty()) j["from"] = e.from;
    if (!e.to.empty()) j["to"] = e.to;
    if (!e.kind.empty()) j["kind"] = e.kind;
    if (e.bits) j["bits"] = e.bits;
    if (e.secure) j["secure"] = true;
    if (!e.check.empty()) j["check"] = e.check;
    if (!e.reason.empty()) j["reason"] = e.reason;
    os << j.dump() << '\n';
  }
  for (const auto& r : ops) {
    json j{{"record", "op"},         {"index", r.index},       {"op", r.op},
           {"party", r.party},       {"outcome", r.outcome},   {"met", r.met},
           {"transmissions", r.transmissions}, {"link_delay_ms", r.link_delay_ms}};
    if (r.op == "auth") j["keys_match"] = r.keys_match;
    if (r.expect) j["expect"] = *r.expect;
    if (!r.check.empty()) j["check"] = r.check;
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (include_timing) {
      j["user_compute_ms"] = r.user_compute_ms;
      j["satellite_compute_ms"] = r.satellite_compute_ms;
      j["tcs_compute_ms"] = r.tcs_compute_ms;
    }
    os << j.dump() << '\n';
  }
  json summary{{"record", "summary"},
               {"ok", ok},
               {"bits_sent", bits_sent},
               {"wrap_overhead_bits", wrap_overhead_bits},
               {"adversary_captures", adversary_log.size()}};
  os << summary.dump() << '\n';
  return os.str();
}

}  // namespace psaa::simnet
