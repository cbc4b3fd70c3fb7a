#include "mec/gavid.hpp"

#include <algorithm>
#include <stdexcept>

namespace mec {

namespace {

void push_be32(Bytes& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void push_be64(Bytes& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

Digest digest_at(const Bytes& commitment, std::size_t node) {
    Digest d;
    std::copy_n(commitment.begin() + static_cast<long>(node * 32), 32, d.begin());
    return d;
}

/// Fragment is structurally sound for its owner and matches the commitment.
bool fragment_valid(const GavidConfig& config, const Bytes& commitment, int owner,
                    const Fragment& frag, const std::vector<Digest>& fp) {
    const std::size_t expected = config.code.symbols_of(owner);
    if (frag.has_value() && frag->size() != expected) return false;
    if (frag.has_value()) {
        for (std::uint64_t s : *frag) {
            if (s >= config.code.field().q) return false;
        }
    }
    const Bytes bytes = canonical_fragment_bytes(owner, frag);
    if (config.variant == CommitmentVariant::VectorD) {
        if (commitment.size() != config.n() * 32) return false;
        return sha256(bytes) == digest_at(commitment, static_cast<std::size_t>(owner));
    }
    if (commitment.size() != 32) return false;
    Digest root;
    std::copy_n(commitment.begin(), 32, root.begin());
    return merkle_verify(static_cast<std::size_t>(owner), bytes, fp, root);
}

std::vector<Digest> leaf_hashes(const FragmentVector& fragments) {
    std::vector<Digest> out;
    out.reserve(fragments.entries.size());
    for (std::size_t i = 0; i < fragments.entries.size(); ++i) {
        out.push_back(sha256(canonical_fragment_bytes(static_cast<int>(i), fragments.entries[i])));
    }
    return out;
}

Bytes commitment_of(const GavidConfig& config, const FragmentVector& fragments) {
    if (config.variant == CommitmentVariant::VectorD) {
        return verification_vector(fragments).serialize();
    }
    const MerkleContext tree = merkle_build(leaf_hashes(fragments));
    return Bytes(tree.root().begin(), tree.root().end());
}

/// Whether a re-encoded fragment vector matches the commitment on all nodes.
bool matches_commitment(const GavidConfig& config, const Bytes& commitment,
                        const FragmentVector& fragments) {
    return commitment_of(config, fragments) == commitment;
}

void emit_output(ServerState& state, StepResult& result, ServerOutput out) {
    state.output = out;
    state.terminated = true;
    result.outputs.push_back(std::move(out));
}

/// Decode-from-accepted, re-encode, verify against the commitment.  On
/// success broadcasts READY with the server's recomputed fragment; a
/// mismatch exposes a faulty dealer and aborts.
void try_ready(const GavidConfig& config, ServerState& state, const Bytes& commitment,
               StepResult& result) {
    const std::size_t n = config.n();
    const NodeMask accepted = state.echoes[commitment] | state.readies[commitment];
    FragmentVector input;
    input.entries.resize(n);
    const auto& pool = state.fragments[commitment];
    for (std::size_t l = 0; l < n; ++l) {
        if (!(accepted >> l & 1)) continue;
        auto it = pool.find(static_cast<int>(l));
        if (it != pool.end()) input.entries[l] = it->second;
    }

    const auto decoded = decode(config.code, input);
    if (!decoded) {
        // No file is consistent with the accepted fragments: dealer fault.
        emit_output(state, result, {ServerOutput::Aborted, std::nullopt});
        return;
    }
    const FragmentVector reencoded = encode(config.code, *decoded);
    if (!matches_commitment(config, commitment, reencoded)) {
        emit_output(state, result, {ServerOutput::Aborted, std::nullopt});
        return;
    }

    state.ready_sent.insert(commitment);
    state.own_fragment[commitment] = reencoded.entries[static_cast<std::size_t>(state.self)];
    if (config.variant == CommitmentVariant::MerkleRoot) {
        const MerkleContext tree = merkle_build(leaf_hashes(reencoded));
        state.own_fingerprint[commitment] = tree.fingerprint(static_cast<std::size_t>(state.self));
    }
    for (std::size_t j = 0; j < n; ++j) {
        ProtocolMessage ready;
        ready.kind = MsgKind::Ready;
        ready.sender = state.self;
        ready.receiver = static_cast<int>(j);
        ready.commitment = commitment;
        ready.fragment = state.own_fragment[commitment];
        ready.fingerprint = state.own_fingerprint.count(commitment)
                                ? state.own_fingerprint[commitment]
                                : std::vector<Digest>{};
        result.outbox.push_back(std::move(ready));
    }
}

StepResult handle_dispersal(const GavidConfig& config, ServerState& state,
                            const ProtocolMessage& msg, bool deliver_mode) {
    StepResult result;
    if (state.terminated) return result;
    const std::size_t n = config.n();

    switch (msg.kind) {
        case MsgKind::Send: {
            if (!msg.fragment.has_value()) break;
            if (!fragment_valid(config, msg.commitment, state.self, *msg.fragment, msg.fingerprint)) {
                break;
            }
            state.own_fragment[msg.commitment] = *msg.fragment;
            if (config.variant == CommitmentVariant::MerkleRoot) {
                state.own_fingerprint[msg.commitment] = msg.fingerprint;
            }
            for (std::size_t j = 0; j < n; ++j) {
                ProtocolMessage echo;
                echo.kind = MsgKind::Echo;
                echo.sender = state.self;
                echo.receiver = static_cast<int>(j);
                echo.commitment = msg.commitment;
                echo.fragment = *msg.fragment;
                echo.fingerprint = msg.fingerprint;
                result.outbox.push_back(std::move(echo));
            }
            break;
        }
        case MsgKind::Echo: {
            if (!msg.fragment.has_value()) break;
            if (!fragment_valid(config, msg.commitment, msg.sender, *msg.fragment, msg.fingerprint)) {
                break;
            }
            const Bytes& c = msg.commitment;
            if (state.echoes[c] >> msg.sender & 1) break;  // one echo per (sender, D)
            state.fragments[c][msg.sender] = *msg.fragment;
            state.echoes[c] |= NodeMask{1} << msg.sender;
            if (!state.ready_sent.count(c) && contains_member(config.ctx.quorums, state.echoes[c])) {
                try_ready(config, state, c, result);
            }
            break;
        }
        case MsgKind::Ready: {
            if (!msg.fragment.has_value()) break;
            if (!fragment_valid(config, msg.commitment, msg.sender, *msg.fragment, msg.fingerprint)) {
                break;
            }
            const Bytes& c = msg.commitment;
            if (state.readies[c] >> msg.sender & 1) break;  // one ready per (sender, D)
            state.fragments[c][msg.sender] = *msg.fragment;
            state.readies[c] |= NodeMask{1} << msg.sender;
            if (!state.ready_sent.count(c) && contains_member(config.ctx.kernels, state.readies[c])) {
                try_ready(config, state, c, result);
            } else if (!state.stored && contains_member(config.ctx.reliable, state.readies[c])) {
                auto own = state.own_fragment.find(c);
                if (own == state.own_fragment.end()) {
                    throw std::logic_error("reliable set reached before READY was sent");
                }
                if (deliver_mode) {
                    // Reliable broadcast: decode the ready-senders' fragments
                    // and deliver instead of storing.
                    FragmentVector input;
                    input.entries.resize(n);
                    for (std::size_t l = 0; l < n; ++l) {
                        if (!(state.readies[c] >> l & 1)) continue;
                        auto it = state.fragments[c].find(static_cast<int>(l));
                        if (it != state.fragments[c].end()) input.entries[l] = it->second;
                    }
                    auto file = decode(config.code, input);
                    if (!file) throw std::logic_error("kernel of valid fragments failed to decode");
                    state.stored = true;
                    emit_output(state, result, {ServerOutput::Delivered, std::move(file)});
                } else {
                    state.stored = true;
                    state.stored_value = StoredValue{
                        c, own->second,
                        state.own_fingerprint.count(c) ? state.own_fingerprint[c]
                                                       : std::vector<Digest>{}};
                    emit_output(state, result, {ServerOutput::Stored, std::nullopt});
                }
            }
            break;
        }
        case MsgKind::Retrieve:
        case MsgKind::FragmentReply:
            break;  // retrieval traffic is handled by the retrieval entry points
    }
    return result;
}

}  // namespace

Bytes canonical_fragment_bytes(int node, const Fragment& frag) {
    Bytes out = {'M', 'E', 'C', '1'};
    push_be32(out, static_cast<std::uint32_t>(node + 1));
    if (!frag.has_value()) {
        push_be32(out, 0xFFFFFFFFu);
        return out;
    }
    push_be32(out, static_cast<std::uint32_t>(frag->size()));
    for (std::uint64_t s : *frag) push_be64(out, s);
    return out;
}

Bytes VerificationVector::serialize() const {
    Bytes out;
    out.reserve(digests.size() * 32);
    for (const Digest& d : digests) out.insert(out.end(), d.begin(), d.end());
    return out;
}

VerificationVector verification_vector(const FragmentVector& fragments) {
    return {leaf_hashes(fragments)};
}

std::vector<Digest> MerkleContext::fingerprint(std::size_t index) const {
    std::vector<Digest> fp;
    fp.reserve(height);
    for (std::size_t level = 0; level < height; ++level) {
        fp.push_back(levels[level][(index >> level) ^ 1]);
    }
    return fp;
}

MerkleContext merkle_build(const std::vector<Digest>& leaf_hashes) {
    if (leaf_hashes.empty()) throw std::invalid_argument("merkle tree needs at least one leaf");
    MerkleContext ctx;
    ctx.leaf_count = leaf_hashes.size();
    std::size_t padded = 1;
    while (padded < leaf_hashes.size()) {
        padded <<= 1;
        ++ctx.height;
    }
    std::vector<Digest> level = leaf_hashes;
    level.resize(padded, Digest{});  // all-zero padding digests
    ctx.levels.push_back(level);
    while (level.size() > 1) {
        std::vector<Digest> next(level.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i) {
            Bytes concat(level[2 * i].begin(), level[2 * i].end());
            concat.insert(concat.end(), level[2 * i + 1].begin(), level[2 * i + 1].end());
            next[i] = sha256(concat);
        }
        ctx.levels.push_back(next);
        level = std::move(next);
    }
    return ctx;
}

bool merkle_verify(std::size_t index, const Bytes& leaf_bytes, const std::vector<Digest>& fp,
                   const Digest& root) {
    Digest h = sha256(leaf_bytes);
    for (std::size_t level = 0; level < fp.size(); ++level) {
        Bytes concat;
        concat.reserve(64);
        if (index >> level & 1) {
            concat.assign(fp[level].begin(), fp[level].end());
            concat.insert(concat.end(), h.begin(), h.end());
        } else {
            concat.assign(h.begin(), h.end());
            concat.insert(concat.end(), fp[level].begin(), fp[level].end());
        }
        h = sha256(concat);
    }
    return h == root;
}

const char* msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::Send: return "send";
        case MsgKind::Echo: return "echo";
        case MsgKind::Ready: return "ready";
        case MsgKind::Retrieve: return "retrieve";
        case MsgKind::FragmentReply: return "fragment";
    }
    return "?";
}

std::size_t ProtocolMessage::wire_bytes() const {
    std::size_t bytes = 1 + commitment.size() + 32 * fingerprint.size();
    if (fragment.has_value()) bytes += canonical_fragment_bytes(0, *fragment).size();
    return bytes;
}

GavidConfig make_gavid_config(QuorumContext ctx, LinearCode code, CommitmentVariant variant) {
    if (ctx.universe.size() != code.node_count() || ctx.universe != code.universe()) {
        throw std::invalid_argument("quorum context and code use different universes");
    }
    const QuorumCheck check = check_quorum_system({ctx.universe, ctx.quorums, ctx.fail_prone, {}, {}});
    if (!check.ok) throw std::invalid_argument("invalid quorum system: " + check.violations.front());
    AccessStructure kernels_structure{ctx.universe, ctx.kernels};
    if (!is_complete(code, kernels_structure)) {
        throw std::invalid_argument("code is not complete for the kernel system");
    }
    return {std::move(ctx), std::move(code), variant};
}

ServerState make_server(int self) {
    ServerState s;
    s.self = self;
    return s;
}

std::vector<ProtocolMessage> disperse_init(const GavidConfig& config, int dealer,
                                           const std::vector<std::uint64_t>& f) {
    const FragmentVector fragments = encode(config.code, f);
    const Bytes commitment = commitment_of(config, fragments);
    MerkleContext tree;
    if (config.variant == CommitmentVariant::MerkleRoot) {
        tree = merkle_build(leaf_hashes(fragments));
    }
    std::vector<ProtocolMessage> out;
    out.reserve(config.n());
    for (std::size_t j = 0; j < config.n(); ++j) {
        ProtocolMessage send;
        send.kind = MsgKind::Send;
        send.sender = dealer;
        send.receiver = static_cast<int>(j);
        send.commitment = commitment;
        send.fragment = fragments.entries[j];
        if (config.variant == CommitmentVariant::MerkleRoot) send.fingerprint = tree.fingerprint(j);
        out.push_back(std::move(send));
    }
    return out;
}

StepResult handle_message(const GavidConfig& config, ServerState& state,
                          const ProtocolMessage& msg) {
    return handle_dispersal(config, state, msg, /*deliver_mode=*/false);
}

StepResult broadcast_deliver(const GavidConfig& config, ServerState& state,
                             const ProtocolMessage& msg) {
    return handle_dispersal(config, state, msg, /*deliver_mode=*/true);
}

std::optional<ProtocolMessage> handle_retrieve(const GavidConfig& config, const ServerState& state,
                                               const ProtocolMessage& msg) {
    (void)config;
    if (!state.stored || !state.stored_value.has_value()) return std::nullopt;
    ProtocolMessage reply;
    reply.kind = MsgKind::FragmentReply;
    reply.sender = state.self;
    reply.receiver = msg.sender;
    reply.commitment = state.stored_value->commitment;
    reply.fragment = state.stored_value->fragment;
    reply.fingerprint = state.stored_value->fingerprint;
    return reply;
}

RetrieverState make_retriever(int self) {
    RetrieverState s;
    s.self = self;
    return s;
}

std::vector<ProtocolMessage> retrieve_init(const GavidConfig& config, int retriever) {
    std::vector<ProtocolMessage> out;
    out.reserve(config.n());
    for (std::size_t j = 0; j < config.n(); ++j) {
        ProtocolMessage m;
        m.kind = MsgKind::Retrieve;
        m.sender = retriever;
        m.receiver = static_cast<int>(j);
        out.push_back(std::move(m));
    }
    return out;
}

std::optional<std::vector<std::uint64_t>> handle_fragment(const GavidConfig& config,
                                                          RetrieverState& state,
                                                          const ProtocolMessage& msg) {
    if (state.output.has_value()) return std::nullopt;  // outputs at most once
    if (msg.kind != MsgKind::FragmentReply || !msg.fragment.has_value()) return std::nullopt;
    if (!fragment_valid(config, msg.commitment, msg.sender, *msg.fragment, msg.fingerprint)) {
        return std::nullopt;
    }
    const Bytes& c = msg.commitment;
    if (state.valid_senders[c] >> msg.sender & 1) return std::nullopt;
    state.fragments[c][msg.sender] = *msg.fragment;
    state.valid_senders[c] |= NodeMask{1} << msg.sender;
    if (!contains_member(config.ctx.kernels, state.valid_senders[c])) return std::nullopt;

    FragmentVector input;
    input.entries.resize(config.n());
    for (auto& [node, frag] : state.fragments[c]) {
        input.entries[static_cast<std::size_t>(node)] = frag;
    }
    auto file = decode(config.code, input);
    if (!file) throw std::logic_error("kernel of valid fragments failed to decode");
    state.output = file;
    return file;
}

std::size_t stored_bytes(const GavidConfig& config, const ServerState& state) {
    if (!state.stored || !state.stored_value.has_value()) return 0;
    const std::size_t frag_bytes =
        canonical_fragment_bytes(state.self, state.stored_value->fragment).size();
    if (config.variant == CommitmentVariant::VectorD) {
        return frag_bytes + config.n() * 32;
    }
    return frag_bytes + (state.stored_value->fingerprint.size() + 1) * 32;
}

bool DeliveryFilter::accept(const ProtocolMessage& msg) {
    if (msg.kind == MsgKind::Retrieve) return true;
    return seen_.insert({msg.sender, static_cast<int>(msg.kind)}).second;
}

}  // namespace mec
