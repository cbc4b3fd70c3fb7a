#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mec/codes.hpp"
#include "mec/quorum.hpp"
#include "mec/sha256.hpp"

namespace mec {

/// Canonical fragment byte encoding, the hashing pre-image:
/// "MEC1" | node index (1-based, 4B big-endian) | symbol count (4B BE) |
/// symbols (8B BE each); an absent fragment encodes count 0xFFFFFFFF.
Bytes canonical_fragment_bytes(int node, const Fragment& frag);

/// Per-node digests of the canonical fragment bytes at encode time.
struct VerificationVector {
    std::vector<Digest> digests;

    /// Concatenation of the digests in node-index order.
    Bytes serialize() const;
};

VerificationVector verification_vector(const FragmentVector& fragments);

// --- Merkle tree (GAVID-H) ------------------------------------------------

struct MerkleContext {
    std::size_t leaf_count = 0;  // before padding
    std::size_t height = 0;      // ceil(log2 n)
    std::vector<std::vector<Digest>> levels;  // levels[0] = padded leaves

    const Digest& root() const { return levels.back().front(); }
    /// Sibling digests along the path from leaf `index` (0-based) to the root.
    std::vector<Digest> fingerprint(std::size_t index) const;
};

/// Leaves are padded to the next power of two with the all-zero digest;
/// an internal label is the hash of the concatenated child labels.
MerkleContext merkle_build(const std::vector<Digest>& leaf_hashes);

/// Recomputes the root from H(leaf_bytes) along the fingerprint, with the
/// left/right order at each level given by the bits of `index`.
bool merkle_verify(std::size_t index, const Bytes& leaf_bytes, const std::vector<Digest>& fp,
                   const Digest& root);

// --- protocol messages and state ------------------------------------------

enum class MsgKind { Send, Echo, Ready, Retrieve, FragmentReply };

const char* msg_kind_name(MsgKind k);

enum class CommitmentVariant { VectorD, MerkleRoot };

/// Typed GAVID message.  `commitment` is the serialized verification vector
/// or the Merkle root; RETRIEVE carries neither commitment nor fragment.
/// In the Merkle variant, messages carry the fragment owner's fingerprint.
struct ProtocolMessage {
    MsgKind kind = MsgKind::Send;
    int sender = -1;
    int receiver = -1;
    Bytes commitment;
    std::optional<Fragment> fragment;
    std::vector<Digest> fingerprint;

    std::size_t wire_bytes() const;
};

struct GavidConfig {
    QuorumContext ctx;
    LinearCode code;
    CommitmentVariant variant = CommitmentVariant::VectorD;

    std::size_t n() const { return ctx.universe.size(); }
};

/// Validates the quorum system and that the code is complete for the kernel
/// system, then assembles the config.
GavidConfig make_gavid_config(QuorumContext ctx, LinearCode code,
                              CommitmentVariant variant = CommitmentVariant::VectorD);

struct ServerOutput {
    enum Kind { Stored, Aborted, Delivered } kind;
    std::optional<std::vector<std::uint64_t>> file;  // Delivered only
};

struct StoredValue {
    Bytes commitment;
    Fragment fragment;
    std::vector<Digest> fingerprint;  // Merkle variant only
};

/// Per-server protocol state; commitment-keyed maps follow Algorithm 3.
struct ServerState {
    int self = -1;
    std::map<Bytes, NodeMask> echoes;                     // E[D]
    std::map<Bytes, NodeMask> readies;                    // R[D]
    std::map<Bytes, std::map<int, Fragment>> fragments;   // A[D]
    std::set<Bytes> ready_sent;                           // at most one READY per D
    std::map<Bytes, Fragment> own_fragment;               // validated or re-encoded
    std::map<Bytes, std::vector<Digest>> own_fingerprint; // Merkle variant
    bool stored = false;
    std::optional<StoredValue> stored_value;
    std::optional<ServerOutput> output;  // at most one ever
    bool terminated = false;
};

ServerState make_server(int self);

struct StepResult {
    std::vector<ProtocolMessage> outbox;
    std::vector<ServerOutput> outputs;
};

/// Dealer entry point: encodes the file, builds the commitment and emits one
/// SEND per node (self-delivery included).
std::vector<ProtocolMessage> disperse_init(const GavidConfig& config, int dealer,
                                           const std::vector<std::uint64_t>& f);

/// Dispersal handler for SEND / ECHO / READY.  The caller must deliver at
/// most one message per (sender, kind), as the protocol acts on the first
/// delivery only.
StepResult handle_message(const GavidConfig& config, ServerState& state,
                          const ProtocolMessage& msg);

/// Reliable-broadcast variant: identical transitions, but the reliable-set
/// step decodes and outputs the message instead of storing.
StepResult broadcast_deliver(const GavidConfig& config, ServerState& state,
                             const ProtocolMessage& msg);

/// Server-side answer to a retrieval request; replies only once stored.
std::optional<ProtocolMessage> handle_retrieve(const GavidConfig& config,
                                               const ServerState& state,
                                               const ProtocolMessage& msg);

struct RetrieverState {
    int self = -1;
    std::map<Bytes, NodeMask> valid_senders;             // R[D] of Algorithm 4
    std::map<Bytes, std::map<int, Fragment>> fragments;  // A[D]
    std::optional<std::vector<std::uint64_t>> output;
};

RetrieverState make_retriever(int self);

std::vector<ProtocolMessage> retrieve_init(const GavidConfig& config, int retriever);

/// Collects hash-valid fragments per commitment; decodes and outputs once a
/// kernel of senders agrees on one commitment.
std::optional<std::vector<std::uint64_t>> handle_fragment(const GavidConfig& config,
                                                          RetrieverState& state,
                                                          const ProtocolMessage& msg);

/// Bytes a stored server persists: canonical fragment bytes plus the
/// commitment (n digests, or root + fingerprint in the Merkle variant).
std::size_t stored_bytes(const GavidConfig& config, const ServerState& state);

/// Tracks first deliveries per (sender, kind); shared by tests and simnet.
class DeliveryFilter {
public:
    /// True exactly once per (sender, kind); SEND/ECHO/READY/FRAGMENT only.
    bool accept(const ProtocolMessage& msg);

private:
    std::set<std::pair<int, int>> seen_;
};

}  // namespace mec
