#pragma once

// Deterministic in-process network: parties exchange encoded frames over
// links with virtual latency, an adversary interposes on non-secure links,
// and every send, delivery and verdict lands in a transcript.
//
// Scripts run one operation at a time; after each operation the event loop
// drains before the next starts. Events are ordered by (arrival time,
// receiver declaration order, send sequence).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psaa/messages.hpp"
#include "psaa/protocol.hpp"
#include "psaa/ring.hpp"
#include "psaa/symwrap.hpp"
#include "psaa/wire.hpp"

namespace psaa::simnet {

using protocol::Duration;

enum class Role { kTcs, kSatellite, kUser };

struct PartySpec {
  std::string name;
  Role role = Role::kUser;
  /// Satellite: never registered with the NCC, answers with a guessed HPU.
  /// User: holds the TID of `impersonates` but guesses p and pu.
  bool rogue = false;
  std::string impersonates;
  std::string password = "password";
  std::uint64_t bio_seed = 0;  // 0: derived from the name
};

struct LinkSpec {
  std::string a, b;
  Duration latency{10};
  bool secure = false;
};

enum class Action { kPassthrough, kEavesdrop, kReplay, kTamper, kDrop, kInject };

std::string action_name(Action a);

struct AdversaryRule {
  std::optional<protocol::MessageKind> kind;
  std::optional<std::string> from, to;
  /// Apply to the n-th matching message only (0-based); all when unset.
  std::optional<std::size_t> occurrence;
  Action action = Action::kPassthrough;
  Duration delay{1000};                 // replay
  std::vector<std::size_t> bit_positions;  // tamper, frame bit indices
  std::vector<std::uint8_t> frame;         // inject: substituted frame
};

struct ScriptStep {
  std::string op;  // register_station | register_user | preneg | login | auth | handover | update | advance | inject
  std::string party;
  std::string via;     // auth/handover: serving satellite
  std::string target;  // handover: N-SAT; inject: receiver
  Duration amount{0};  // advance
  std::optional<std::string> password;      // login/update: factor actually entered
  std::optional<std::string> new_password;  // update
  std::size_t bio_flips = 0;                // login/auth: biometric noise
  std::optional<std::uint64_t> new_bio_seed;  // update
  /// inject: index into the adversary log, counted among captures of `kind`
  /// when that is set.
  std::optional<std::size_t> capture;
  std::optional<protocol::MessageKind> kind;  // inject: capture filter, or kind of a raw frame
  std::vector<std::uint8_t> frame;
  std::optional<std::string> expect;  // "accept" | "reject"
};

struct Scenario {
  std::string profile = "robust";
  std::optional<std::string> profile_config;
  Duration latency{10};
  Duration freshness_window = protocol::kDefaultFreshnessWindow;
  symwrap::Cipher cipher = symwrap::Cipher::kAes256Gcm;
  std::vector<PartySpec> parties;
  std::vector<LinkSpec> links;  // overrides of the implicit topology
  std::vector<AdversaryRule> policy;
  std::vector<ScriptStep> script;
};

/// Throws std::invalid_argument on malformed input.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

struct Event {
  std::uint64_t t_ms = 0;
  std::string type;  // op | send | receive | reject | accept | key | drop | tamper | replay | inject | relay
  std::size_t op = 0;
  std::string from, to, kind;
  std::size_t bits = 0;
  bool secure = false;
  std::string check, reason;
};

struct OpResult {
  std::size_t index = 0;
  std::string op, party;
  std::string outcome;  // accept | reject | incomplete
  std::string check, reason;
  std::optional<std::string> expect;
  bool met = true;
  std::size_t transmissions = 0;  // longest send chain ending in a verdict
  std::uint64_t link_delay_ms = 0;
  bool keys_match = false;
  // Wall time, excluded from serialized transcripts unless asked for.
  double user_compute_ms = 0, satellite_compute_ms = 0, tcs_compute_ms = 0;
  double compute_ms() const { return user_compute_ms + satellite_compute_ms + tcs_compute_ms; }
};

struct Capture {
  std::string from, to;
  protocol::MessageKind kind;
  std::vector<std::uint8_t> frame;
  bool wrapped = false;
};

struct Transcript {
  std::vector<Event> events;
  std::vector<OpResult> ops;
  std::map<std::string, std::size_t> bits_sent;  // payload bits per party
  std::size_t wrap_overhead_bits = 0;
  std::vector<Capture> adversary_log;
  bool ok = true;  // every expectation met

  /// One JSON object per line: events, then op results, then a summary.
  std::string to_jsonl(bool include_timing = false) const;
};

/// Throws std::invalid_argument for unknown parties or roles.
Transcript run_scenario(const Scenario& scenario, std::uint64_t seed);

/// Parties: TCS, SAT-1, SAT-2 and `users` users. Stations register and
/// SAT-1/SAT-2 pre-negotiate; each user registers then authenticates
/// through SAT-1.
Scenario honest_auth_scenario(std::size_t users, const std::string& profile = "robust");

struct AttackResult {
  std::string name;
  bool control = false;  // honest control: success means acceptance
  std::size_t trials = 0;
  std::size_t rejected = 0;
  std::string detail;
  /// Reported only; excluded from all_passed.
  bool informational = false;
  bool passed() const { return control ? rejected == 0 : rejected == trials; }
};

struct AttackOptions {
  std::string profile = "robust";
  std::optional<std::string> profile_config;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  /// Tamper sweeps visit every stride-th bit of each swept message.
  std::size_t sweep_stride = 1;
};

struct AttackReport {
  std::vector<AttackResult> results;
  bool all_passed() const;
};

AttackReport attack_suite(const AttackOptions& options);

struct TimingStats {
  double mean_ms = 0, stddev_ms = 0;
};

struct DelayReport {
  std::string profile;
  std::size_t trials = 0;
  std::size_t key_agreements = 0;
  TimingStats user, satellite, tcs, total;
  std::uint64_t link_ms = 0;
  std::size_t transmissions = 0;
  wire::SizeReport sizes;
  std::size_t measured_user_bits = 0, measured_satellite_bits = 0;
};

DelayReport delay_overhead_report(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed);

}  // namespace psaa::simnet
