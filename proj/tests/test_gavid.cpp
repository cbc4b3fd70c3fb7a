#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>

#include "mec/construct.hpp"
#include "mec/gavid.hpp"
#include "test_util.hpp"

using namespace mec;

namespace {

GavidConfig threshold_config(int n, int f, CommitmentVariant variant = CommitmentVariant::VectorD) {
    QuorumContext ctx = threshold_quorum_context(n, f);
    LinearCode code = build_lp_code(AccessStructure{ctx.universe, ctx.kernels});
    return make_gavid_config(std::move(ctx), std::move(code), variant);
}

// Drives all servers with FIFO delivery until no messages remain.
struct FifoHarness {
    const GavidConfig& config;
    std::vector<ServerState> servers;
    std::vector<DeliveryFilter> filters;
    std::deque<ProtocolMessage> queue;
    std::size_t echo_count = 0;
    std::size_t ready_count = 0;
    std::size_t send_count = 0;

    explicit FifoHarness(const GavidConfig& c) : config(c) {
        for (std::size_t i = 0; i < c.n(); ++i) {
            servers.push_back(make_server(static_cast<int>(i)));
            filters.emplace_back();
        }
    }

    void push(std::vector<ProtocolMessage> msgs) {
        for (auto& m : msgs) {
            switch (m.kind) {
                case MsgKind::Send: ++send_count; break;
                case MsgKind::Echo: ++echo_count; break;
                case MsgKind::Ready: ++ready_count; break;
                default: break;
            }
            queue.push_back(std::move(m));
        }
    }

    void drain() {
        while (!queue.empty()) {
            ProtocolMessage m = std::move(queue.front());
            queue.pop_front();
            auto& filter = filters[static_cast<std::size_t>(m.receiver)];
            if (!filter.accept(m)) continue;
            push(handle_message(config, servers[static_cast<std::size_t>(m.receiver)], m).outbox);
        }
    }
};

}  // namespace

TEST_CASE("canonical fragment bytes") {
    const Fragment frag = std::vector<std::uint64_t>{3, 259};
    const Bytes b = canonical_fragment_bytes(0, frag);
    const Bytes expected = {'M', 'E', 'C', '1', 0, 0, 0, 1,  // node index 1
                            0,   0,   0,   2,                 // two symbols
                            0,   0,   0,   0, 0, 0, 0, 3,    // 3
                            0,   0,   0,   0, 0, 0, 1, 3};   // 259
    CHECK(b == expected);

    const Bytes absent = canonical_fragment_bytes(2, std::nullopt);
    const Bytes expected_absent = {'M', 'E', 'C', '1', 0, 0, 0, 3, 0xFF, 0xFF, 0xFF, 0xFF};
    CHECK(absent == expected_absent);
}

TEST_CASE("sha256 reference vectors") {
    CHECK(hex(sha256(std::string(""))) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hex(sha256(std::string("abc"))) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("verification vector is deterministic") {
    const GavidConfig config = threshold_config(4, 1);
    const std::vector<std::uint64_t> f = {1, 2};
    const FragmentVector frags = encode(config.code, f);
    const VerificationVector d1 = verification_vector(frags);
    const VerificationVector d2 = verification_vector(encode(config.code, f));
    CHECK(d1.serialize() == d2.serialize());
    CHECK(d1.serialize().size() == 4 * 32);
}

TEST_CASE("merkle build and verify") {
    // single leaf: root equals the leaf hash, fingerprint is empty
    const Bytes leaf = canonical_fragment_bytes(0, Fragment{std::vector<std::uint64_t>{5}});
    const MerkleContext one = merkle_build({sha256(leaf)});
    CHECK(one.height == 0);
    CHECK(one.fingerprint(0).empty());
    CHECK(merkle_verify(0, leaf, {}, one.root()));

    // four leaves: fingerprints of length 2, all verify, corruption rejected
    std::vector<Bytes> leaves;
    std::vector<Digest> hashes;
    for (int i = 0; i < 4; ++i) {
        leaves.push_back(canonical_fragment_bytes(i, Fragment{std::vector<std::uint64_t>{std::uint64_t(i)}}));
        hashes.push_back(sha256(leaves.back()));
    }
    const MerkleContext four = merkle_build(hashes);
    CHECK(four.height == 2);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto fp = four.fingerprint(i);
        CHECK(fp.size() == 2);
        CHECK(merkle_verify(i, leaves[i], fp, four.root()));
        Bytes corrupted = leaves[i];
        corrupted[4] ^= 0x01;
        CHECK(!merkle_verify(i, corrupted, fp, four.root()));
        CHECK(!merkle_verify(i ^ 1, leaves[i], fp, four.root()));
    }

    // five leaves pad to eight
    hashes.push_back(sha256(Bytes{9}));
    const MerkleContext five = merkle_build(hashes);
    CHECK(five.height == 3);
    CHECK(five.fingerprint(4).size() == 3);
}

TEST_CASE("disperse_init") {
    const GavidConfig config = threshold_config(4, 1);
    const std::vector<std::uint64_t> f = {1, 2};
    const auto sends = disperse_init(config, 0, f);
    CHECK(sends.size() == 4);
    for (const auto& m : sends) {
        CHECK(m.kind == MsgKind::Send);
        CHECK(m.sender == 0);
        CHECK(m.commitment == sends.front().commitment);
    }
    // deterministic commitment
    CHECK(disperse_init(config, 0, f).front().commitment == sends.front().commitment);
    CHECK_THROWS_AS(disperse_init(config, 0, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("honest dispersal stores everywhere with exact message counts") {
    const GavidConfig config = threshold_config(4, 1);
    FifoHarness h(config);
    h.push(disperse_init(config, 0, {1, 2}));
    h.drain();

    for (const auto& s : h.servers) {
        CHECK(s.stored);
        REQUIRE(s.output.has_value());
        CHECK(s.output->kind == ServerOutput::Stored);
    }
    CHECK(h.send_count == 4);
    CHECK(h.echo_count == 16);
    CHECK(h.ready_count == 16);
}

TEST_CASE("invalid fragments are ignored") {
    const GavidConfig config = threshold_config(4, 1);
    auto sends = disperse_init(config, 0, {1, 2});

    ServerState victim = make_server(1);
    ProtocolMessage bogus = sends[1];
    (*bogus.fragment)->front() = ((*bogus.fragment)->front() + 1) % config.code.field().q;
    const StepResult r = handle_message(config, victim, bogus);
    CHECK(r.outbox.empty());
    CHECK(r.outputs.empty());
    CHECK(victim.echoes.empty());

    // a hash-valid send triggers the echo broadcast
    const StepResult ok = handle_message(config, victim, sends[1]);
    CHECK(ok.outbox.size() == 4);
    CHECK(ok.outbox.front().kind == MsgKind::Echo);
}

TEST_CASE("node without columns participates with the absent fragment") {
    // 2-of-{a,b} plus a bystander node that the LP assigns zero fragments
    Universe u;
    for (const char* n : {"a", "b", "z"}) u.add(n);
    std::vector<NodeMask> quorums = {3};  // {a,b}
    QuorumContext ctx = make_quorum_context(u, quorums);
    // kernels: {a}, {b}; code must decode from either singleton
    LinearCode code = build_lp_code(AccessStructure{ctx.universe, ctx.kernels});
    CHECK(code.symbols_of(2) == 0);
    const GavidConfig config = make_gavid_config(std::move(ctx), std::move(code),
                                                 CommitmentVariant::VectorD);

    const auto sends = disperse_init(config, 0, std::vector<std::uint64_t>(config.code.dimension(), 1));
    CHECK(!sends[2].fragment->has_value());  // bottom marker for node z

    FifoHarness h(config);
    h.push(sends);
    h.drain();
    CHECK(h.servers[2].stored);  // the bystander still stores (commitment + bottom)
}

TEST_CASE("equivocating commitments never mix") {
    const GavidConfig config = threshold_config(4, 1);
    const auto sends_a = disperse_init(config, 0, {1, 2});
    const auto sends_b = disperse_init(config, 0, {2, 2});

    ServerState s1 = make_server(1);
    const auto echo_a = handle_message(config, s1, sends_a[1]);
    REQUIRE(echo_a.outbox.size() == 4);

    ServerState s2 = make_server(2);
    // s2 processes echoes for commitment A from servers 1,2,3 -> quorum
    for (int sender : {1, 2, 3}) {
        ProtocolMessage echo;
        echo.kind = MsgKind::Echo;
        echo.sender = sender;
        echo.receiver = 2;
        echo.commitment = sends_a[2].commitment;
        echo.fragment = *sends_a[sender].fragment;
        const auto out = handle_message(config, s2, echo);
        if (sender == 3) {
            CHECK(out.outbox.size() == 4);  // quorum formed, READY broadcast
            CHECK(out.outbox.front().kind == MsgKind::Ready);
            CHECK(out.outbox.front().commitment == sends_a[2].commitment);
        } else {
            CHECK(out.outbox.empty());
        }
    }
    // a later quorum for commitment B does not produce a second READY for A,
    // but can still legitimately produce one for B
    CHECK(s2.ready_sent.count(sends_a[2].commitment) == 1);
    CHECK(s2.ready_sent.count(sends_b[2].commitment) == 0);
}

TEST_CASE("store waits for a reliable set of readies") {
    const GavidConfig config = threshold_config(4, 1);
    const auto sends = disperse_init(config, 0, {1, 2});
    const Bytes c = sends.front().commitment;

    ServerState s3 = make_server(3);
    auto ready_from = [&](int sender) {
        ProtocolMessage m;
        m.kind = MsgKind::Ready;
        m.sender = sender;
        m.receiver = 3;
        m.commitment = c;
        m.fragment = *sends[sender].fragment;
        return m;
    };

    // two readies form a kernel: s3 recovers its fragment and broadcasts READY
    CHECK(handle_message(config, s3, ready_from(0)).outbox.empty());
    const auto second = handle_message(config, s3, ready_from(1));
    REQUIRE(second.outbox.size() == 4);
    CHECK(second.outbox.front().kind == MsgKind::Ready);
    CHECK(*second.outbox.front().fragment == *sends[3].fragment);  // recomputed own fragment
    CHECK(!s3.stored);

    // third distinct ready reaches a reliable set: store fires exactly once
    const auto third = handle_message(config, s3, ready_from(2));
    REQUIRE(third.outputs.size() == 1);
    CHECK(third.outputs.front().kind == ServerOutput::Stored);
    CHECK(s3.stored);
    CHECK(s3.stored_value->commitment == c);
}

TEST_CASE("retrieval") {
    const GavidConfig config = threshold_config(4, 1);
    FifoHarness h(config);
    h.push(disperse_init(config, 0, {4, 3}));
    h.drain();

    RetrieverState retriever = make_retriever(2);
    const auto requests = retrieve_init(config, 2);
    CHECK(requests.size() == 4);

    std::optional<std::vector<std::uint64_t>> output;
    int replies = 0;
    for (const auto& req : requests) {
        const auto reply = handle_retrieve(config, h.servers[static_cast<std::size_t>(req.receiver)], req);
        REQUIRE(reply.has_value());
        ++replies;
        if (auto out = handle_fragment(config, retriever, *reply)) output = out;
    }
    CHECK(replies == 4);
    REQUIRE(output.has_value());
    CHECK(*output == std::vector<std::uint64_t>{4, 3});
    CHECK(*retriever.output == std::vector<std::uint64_t>{4, 3});

    // servers that never stored do not reply
    ServerState fresh = make_server(1);
    CHECK(!handle_retrieve(config, fresh, requests[1]).has_value());
}

TEST_CASE("retrieval ignores garbage and recovers from a kernel") {
    const GavidConfig config = threshold_config(4, 1);
    FifoHarness h(config);
    h.push(disperse_init(config, 0, {4, 1}));
    h.drain();
    const Bytes c = h.servers[0].stored_value->commitment;

    RetrieverState retriever = make_retriever(0);
    ProtocolMessage garbage;
    garbage.kind = MsgKind::FragmentReply;
    garbage.sender = 3;
    garbage.receiver = 0;
    garbage.commitment = c;
    garbage.fragment = Fragment{std::vector<std::uint64_t>{9}};
    CHECK(!handle_fragment(config, retriever, garbage).has_value());
    CHECK((retriever.valid_senders.empty() || retriever.valid_senders.begin()->second == 0));

    // two honest fragments form a kernel and decode
    std::optional<std::vector<std::uint64_t>> output;
    for (int sender : {1, 2}) {
        ProtocolMessage req;
        req.sender = 0;
        req.kind = MsgKind::Retrieve;
        req.receiver = sender;
        const auto reply = handle_retrieve(config, h.servers[static_cast<std::size_t>(sender)], req);
        REQUIRE(reply.has_value());
        if (auto out = handle_fragment(config, retriever, *reply)) output = out;
    }
    REQUIRE(output.has_value());
    CHECK(*output == std::vector<std::uint64_t>{4, 1});
}

TEST_CASE("merkle variant dispersal and accounting") {
    for (int n : {4, 5, 8}) {
        const int f = n >= 7 ? 2 : 1;
        const GavidConfig config = threshold_config(n, f, CommitmentVariant::MerkleRoot);
        std::vector<std::uint64_t> file(config.code.dimension(), 3);
        FifoHarness h(config);
        h.push(disperse_init(config, 0, file));
        h.drain();

        std::size_t height = 0;
        while ((std::size_t{1} << height) < static_cast<std::size_t>(n)) ++height;
        for (const auto& s : h.servers) {
            REQUIRE(s.stored);
            const std::size_t frag_bytes =
                canonical_fragment_bytes(s.self, s.stored_value->fragment).size();
            CHECK(stored_bytes(config, s) == frag_bytes + (height + 1) * 32);
        }
    }
}

TEST_CASE("broadcast variant delivers instead of storing") {
    const GavidConfig config = threshold_config(4, 1);
    std::vector<ServerState> servers;
    std::vector<DeliveryFilter> filters(4);
    for (int i = 0; i < 4; ++i) servers.push_back(make_server(i));

    std::deque<ProtocolMessage> queue;
    for (auto& m : disperse_init(config, 0, {3, 2})) queue.push_back(m);
    std::vector<std::optional<std::vector<std::uint64_t>>> delivered(4);
    while (!queue.empty()) {
        ProtocolMessage m = std::move(queue.front());
        queue.pop_front();
        if (!filters[static_cast<std::size_t>(m.receiver)].accept(m)) continue;
        auto r = broadcast_deliver(config, servers[static_cast<std::size_t>(m.receiver)], m);
        for (auto& out : r.outputs) {
            REQUIRE(out.kind == ServerOutput::Delivered);
            delivered[static_cast<std::size_t>(m.receiver)] = out.file;
        }
        for (auto& next : r.outbox) queue.push_back(std::move(next));
    }
    for (const auto& d : delivered) {
        REQUIRE(d.has_value());
        CHECK(*d == std::vector<std::uint64_t>{3, 2});
    }
}

TEST_CASE("delivery filter deduplicates per sender and kind") {
    DeliveryFilter filter;
    ProtocolMessage echo;
    echo.kind = MsgKind::Echo;
    echo.sender = 1;
    echo.receiver = 2;
    CHECK(filter.accept(echo));
    CHECK(!filter.accept(echo));
    ProtocolMessage ready = echo;
    ready.kind = MsgKind::Ready;
    CHECK(filter.accept(ready));  // different kind from the same sender passes
}
