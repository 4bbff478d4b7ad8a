#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "psaa/simnet.hpp"

using namespace psaa;
using namespace psaa::simnet;

namespace {

std::size_t count_events(const Transcript& t, std::string_view type, std::string_view kind = {},
                         std::string_view reason = {}) {
  std::size_t n = 0;
  for (const auto& e : t.events) {
    if (e.type == type && (kind.empty() || e.kind == kind) && (reason.empty() || e.reason == reason)) ++n;
  }
  return n;
}

const OpResult& first_op(const Transcript& t, std::string_view op) {
  for (const auto& r : t.ops)
    if (r.op == op) return r;
  throw std::logic_error("op missing");
}

Scenario alice_scenario() {
  Scenario sc = honest_auth_scenario(0);
  sc.parties.push_back({.name = "alice", .role = Role::kUser, .password = "alice-pw"});
  sc.script.push_back({.op = "register_user", .party = "alice", .expect = "accept"});
  sc.script.push_back({.op = "login", .party = "alice", .expect = "accept"});
  return sc;
}

}  // namespace

TEST_CASE("same seed gives an identical transcript") {
  const Scenario sc = honest_auth_scenario(3);
  const auto a = run_scenario(sc, 11).to_jsonl();
  const auto b = run_scenario(sc, 11).to_jsonl();
  CHECK(a == b);
  CHECK(a.find("compute_ms") == std::string::npos);
}

TEST_CASE("honest authentication uses two transmissions and 20 ms of link delay") {
  const auto t = run_scenario(honest_auth_scenario(5), 3);
  CHECK(t.ok);
  std::size_t auths = 0;
  for (const auto& r : t.ops) {
    if (r.op != "auth") continue;
    ++auths;
    CHECK(r.outcome == "accept");
    CHECK(r.keys_match);
    CHECK(r.transmissions == 2);
    CHECK(r.link_delay_ms == 20);
  }
  CHECK(auths == 5);
}

TEST_CASE("measured bits match the size model") {
  const auto t = run_scenario(honest_auth_scenario(1), 5);
  const auto sizes = wire::size_report(ring::RingParams::robust());
  std::size_t request = 0, to_user = 0, to_tcs = 0;
  for (const auto& e : t.events) {
    if (e.type != "send" || e.op != t.ops.back().index) continue;
    if (e.kind == "AccessRequest") request = e.bits;
    if (e.kind == "AccessResponseUser") to_user = e.bits;
    if (e.kind == "AccessForwardTcs") to_tcs = e.bits;
  }
  CHECK(request == sizes.access_request);
  CHECK(to_user == sizes.access_response_user);
  CHECK(to_tcs == sizes.access_forward_tcs);
}

TEST_CASE("delayed replay of an access request is rejected as stale") {
  Scenario sc = alice_scenario();
  sc.policy.push_back({.kind = protocol::MessageKind::kAccessRequest, .action = Action::kReplay,
                       .delay = Duration{500}});
  for (int i = 0; i < 100; ++i) {
    sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "accept"});
    sc.script.push_back({.op = "advance", .amount = Duration{1000}});
  }
  const auto t = run_scenario(sc, 9);
  CHECK(t.ok);
  CHECK(count_events(t, "replay", "AccessRequest") == 100);
  CHECK(count_events(t, "reject", "AccessRequest", "stale timestamp") == 100);
}

TEST_CASE("replay inside the freshness window is not detected") {
  Scenario sc = alice_scenario();
  sc.policy.push_back({.kind = protocol::MessageKind::kAccessRequest, .occurrence = 0, .action = Action::kReplay,
                       .delay = Duration{50}});
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1"});
  const auto t = run_scenario(sc, 9);
  CHECK(count_events(t, "reject", "AccessRequest") == 0);
}

TEST_CASE("secure channels never reach the adversary") {
  Scenario sc = alice_scenario();
  sc.policy.push_back({.action = Action::kEavesdrop});
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "accept"});
  const auto t = run_scenario(sc, 4);
  CHECK(t.ok);
  REQUIRE_FALSE(t.adversary_log.empty());
  std::set<std::string> kinds;
  for (const auto& c : t.adversary_log) {
    kinds.insert(std::string(protocol::kind_name(c.kind)));
    CHECK_FALSE((c.from == "alice" && c.to == "TCS"));
    CHECK_FALSE((c.from == "TCS" && c.to == "alice"));
  }
  CHECK_FALSE(kinds.contains("RegRequest"));
  CHECK_FALSE(kinds.contains("RegResponse"));
  CHECK(kinds.contains("AccessRequest"));
  for (const auto& c : t.adversary_log) {
    if (c.kind == protocol::MessageKind::kAccessForwardTcs) CHECK(c.wrapped);
  }
}

TEST_CASE("tampered access response is rejected by the user") {
  Scenario sc = alice_scenario();
  sc.policy.push_back({.kind = protocol::MessageKind::kAccessResponseUser, .action = Action::kTamper,
                       .bit_positions = {3}});
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "reject"});
  const auto t = run_scenario(sc, 4);
  CHECK(t.ok);
  CHECK(first_op(t, "auth").check == "a5");
}

TEST_CASE("dropped forward leaves the authentication incomplete") {
  Scenario sc = alice_scenario();
  sc.policy.push_back({.kind = protocol::MessageKind::kAccessForwardTcs, .action = Action::kDrop});
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1"});
  const auto t = run_scenario(sc, 4);
  CHECK(first_op(t, "auth").outcome == "incomplete");
}

TEST_CASE("captured frame can be re-injected later and is rejected") {
  Scenario sc = alice_scenario();
  sc.policy.push_back({.kind = protocol::MessageKind::kAccessRequest, .action = Action::kEavesdrop});
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "accept"});
  sc.script.push_back({.op = "advance", .amount = Duration{5000}});
  sc.script.push_back({.op = "inject", .party = "alice", .target = "SAT-1", .capture = 0,
                       .kind = protocol::MessageKind::kAccessRequest, .expect = "reject"});
  const auto t = run_scenario(sc, 4);
  CHECK(t.ok);
  CHECK(count_events(t, "reject", "AccessRequest", "stale timestamp") == 1);
}

TEST_CASE("handover through the current satellite reaches the next one") {
  Scenario sc = alice_scenario();
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "accept"});
  sc.script.push_back({.op = "handover", .party = "alice", .via = "SAT-1", .target = "SAT-2", .expect = "accept"});
  const auto t = run_scenario(sc, 4);
  CHECK(t.ok);
  CHECK(count_events(t, "relay", "HandoverRequest") == 1);
}

TEST_CASE("update then login matrix in a scenario") {
  Scenario sc = alice_scenario();
  sc.script.push_back({.op = "update", .party = "alice", .new_password = "fresh-pw", .new_bio_seed = 77,
                       .expect = "accept"});
  sc.script.push_back({.op = "login", .party = "alice", .expect = "accept"});
  sc.script.push_back({.op = "login", .party = "alice", .password = "alice-pw", .expect = "reject"});
  sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1", .expect = "accept"});
  CHECK(run_scenario(sc, 8).ok);
}

TEST_CASE("scenario JSON parses into the same run as the builder") {
  const std::string text = R"({
    "profile": "robust",
    "parties": [
      {"name": "TCS", "role": "tcs"},
      {"name": "SAT-1", "role": "satellite"},
      {"name": "alice", "role": "user", "password": "alice-pw"}
    ],
    "policy": [{"match": {"kind": "AccessRequest"}, "action": "replay", "delay_ms": 500}],
    "script": [
      {"op": "register_station", "party": "TCS"},
      {"op": "register_station", "party": "SAT-1"},
      {"op": "preneg", "party": "SAT-1", "expect": "accept"},
      {"op": "register_user", "party": "alice", "expect": "accept"},
      {"op": "auth", "party": "alice", "via": "SAT-1", "expect": "accept"}
    ]
  })";
  const Scenario sc = parse_scenario(text);
  CHECK(sc.parties.size() == 3);
  REQUIRE(sc.policy.size() == 1);
  CHECK(sc.policy[0].action == Action::kReplay);
  CHECK(sc.policy[0].delay == Duration{500});
  const auto t = run_scenario(sc, 2);
  CHECK(t.ok);
  CHECK(count_events(t, "reject", "AccessRequest", "stale timestamp") == 1);

  CHECK_THROWS_AS(parse_scenario("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario(R"({"parties": [{"name": "x", "role": "ghost"}], "script": []})"),
                  std::invalid_argument);
}

TEST_CASE("unknown parties in a script are rejected") {
  Scenario sc = honest_auth_scenario(0);
  sc.script.push_back({.op = "auth", .party = "nobody", .via = "SAT-1"});
  CHECK_THROWS_AS(run_scenario(sc, 1), std::invalid_argument);
}

TEST_CASE("attack suite at reduced scale") {
  AttackOptions o;
  o.trials = 10;
  o.sweep_stride = 97;
  const auto report = attack_suite(o);
  for (const auto& r : report.results) {
    INFO(r.name << " " << r.rejected << "/" << r.trials << " " << r.detail);
    if (!r.informational) CHECK(r.passed());
  }
  CHECK(report.all_passed());
}
