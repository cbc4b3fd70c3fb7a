#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mec/gavid.hpp"

namespace mec {

/// Deterministic seedable generator (splitmix64); kept self-contained so
/// transcripts are byte-identical across platforms.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t bound) { return bound ? next() % bound : 0; }
};

/// Matches messages on any combination of sender, receiver and kind.
struct MsgPattern {
    std::optional<int> from;
    std::optional<int> to;
    std::optional<MsgKind> kind;

    bool matches(const ProtocolMessage& m) const;
};

/// One adversary script entry, executed in order.  Delay and drop install
/// persistent rules; inject enqueues a raw message from a corrupt sender;
/// deliver forces the oldest matching pending message next.
struct Directive {
    enum Kind { Deliver, Delay, Drop, Inject } kind = Deliver;
    MsgPattern pattern;
    std::size_t steps = 0;      // Delay
    ProtocolMessage message;    // Inject
};

/// Closed library of Byzantine behaviors, sufficient for the proof cases:
/// crash (finite send budget), mute, dealer equivocation over a node
/// partition, and fragment corruption on outgoing messages.
struct Behavior {
    enum Kind { Honest, Crash, Mute, Equivocate, CorruptFragment } kind = Honest;
    std::size_t send_budget = 0;  // Crash: outgoing messages before dying
    NodeMask group_a = 0;         // Equivocate: receivers of the first commitment
    NodeMask targets = ~NodeMask{0};  // CorruptFragment: receivers affected
};

struct Scenario {
    GavidConfig config;
    int dealer = 0;
    std::vector<std::uint64_t> file;
    NodeMask corrupt = 0;  // must lie inside some fail-prone set
    std::map<int, Behavior> behaviors;
    std::vector<Directive> script;
    std::uint64_t seed = 0;
    bool fairness = true;
    std::vector<int> retrievers;  // start Retrieve once dispersal quiesces
    std::size_t step_cap = 1000000;
    std::size_t fair_bound = 64;  // oldest-first fallback for fairness
};

struct TranscriptEvent {
    std::size_t step = 0;
    int from = -1;
    int to = -1;
    MsgKind kind = MsgKind::Send;
    std::string d_prefix;  // first 8 hex chars of the commitment
    bool dropped = false;
};

struct Metrics {
    std::map<std::string, std::size_t> sent_by_kind;
    std::size_t total_bytes = 0;
    std::vector<std::size_t> stored_bytes_per_server;
    std::size_t steps = 0;
};

struct RunResult {
    std::vector<TranscriptEvent> transcript;
    Metrics metrics;
    std::vector<std::optional<ServerOutput>> outputs;  // per server
    std::vector<std::optional<std::vector<std::uint64_t>>> retrieved;  // per retriever
    std::vector<Bytes> honest_ready_commitments;       // distinct, honest senders only
    NodeMask honest_stored = 0;
    bool step_cap_hit = false;
};

/// JSON-lines transcript, one event per line.
std::string transcript_text(const RunResult& result, const Universe& universe);

/// Executes the scenario to quiescence (or the step cap).  Deterministic for
/// a fixed (scenario, seed).
RunResult run(const Scenario& scenario);

/// Asserts the protocol properties on one finished execution; returns the
/// violated property names (empty when clean).
std::vector<std::string> check_execution(const Scenario& scenario, const RunResult& result);

struct SweepReport {
    std::size_t executions = 0;
    std::size_t terminations = 0;  // executions where every honest server stored
    std::vector<std::pair<std::uint64_t, std::string>> violations;  // seed, property
};

/// Runs the scenario once per seed in [seed_from, seed_to) and aggregates
/// the per-execution property checks.
SweepReport sweep(const Scenario& base, std::uint64_t seed_from, std::uint64_t seed_to);

}  // namespace mec
