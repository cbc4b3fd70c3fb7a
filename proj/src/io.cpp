#include "mec/io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mec/gavid.hpp"
#include "mec/ratlp.hpp"
#include "mec/sha256.hpp"

namespace mec {

namespace {

Universe universe_from_names(const std::vector<std::string>& names) {
    Universe u;
    for (const auto& n : names) {
        if (u.index_of(n) >= 0) throw std::invalid_argument("duplicate node name: " + n);
        u.add(n);
    }
    return u;
}

NodeMask mask_from_names(const Universe& u, const Json& names) {
    NodeMask m = 0;
    for (const auto& n : names) m |= NodeMask{1} << u.require(n.get<std::string>());
    return m;
}

std::vector<std::string> mask_to_names(const Universe& u, NodeMask m) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (m >> i & 1) out.push_back(u.name(static_cast<int>(i)));
    }
    return out;
}

MsgKind kind_from_string(const std::string& s) {
    if (s == "send") return MsgKind::Send;
    if (s == "echo") return MsgKind::Echo;
    if (s == "ready") return MsgKind::Ready;
    if (s == "retrieve") return MsgKind::Retrieve;
    if (s == "fragment") return MsgKind::FragmentReply;
    throw std::invalid_argument("unknown message kind: " + s);
}

Bytes bytes_from_hex(const std::string& hex_text) {
    if (hex_text.size() % 2 != 0) throw std::invalid_argument("odd hex string length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("invalid hex digit");
    };
    Bytes out;
    out.reserve(hex_text.size() / 2);
    for (std::size_t i = 0; i < hex_text.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>(nibble(hex_text[i]) * 16 + nibble(hex_text[i + 1])));
    }
    return out;
}

}  // namespace

Json code_to_json(const LinearCode& code) {
    Json j;
    j["q"] = code.field().q;
    j["k"] = code.dimension();
    j["m"] = code.length();
    Json columns = Json::object();
    for (std::size_t i = 0; i < code.node_count(); ++i) {
        columns[code.universe().name(static_cast<int>(i))] = code.symbols_of(static_cast<int>(i));
    }
    j["columns_per_node"] = columns;
    Json gen = Json::array();
    for (std::size_t r = 0; r < code.generator().rows(); ++r) gen.push_back(code.generator().row(r));
    j["generator"] = gen;
    Json labeling = Json::array();
    for (int node : code.labeling()) labeling.push_back(code.universe().name(node));
    j["labeling"] = labeling;
    return j;
}

LinearCode code_from_json(const Json& j) {
    const FieldSpec q(j.at("q").get<std::uint64_t>());
    std::vector<std::vector<std::uint64_t>> rows;
    for (const auto& row : j.at("generator")) rows.push_back(row.get<std::vector<std::uint64_t>>());
    const FieldMatrix g = FieldMatrix::from_rows(rows, q);

    // columns_per_node preserves the node order of the build (ordered_json).
    Universe u;
    for (auto it = j.at("columns_per_node").begin(); it != j.at("columns_per_node").end(); ++it) {
        u.add(it.key());
    }
    std::vector<int> labeling;
    for (const auto& name : j.at("labeling")) labeling.push_back(u.require(name.get<std::string>()));
    LinearCode code(g, labeling, u);
    if (code.dimension() != j.at("k").get<std::size_t>() ||
        code.length() != j.at("m").get<std::size_t>()) {
        throw std::invalid_argument("manifest k/m do not match the generator");
    }
    return code;
}

std::string code_hash(const LinearCode& code) {
    return hex(sha256(code_to_json(code).dump()));
}

Json fragment_to_json(const LinearCode& code, int node, const Fragment& frag) {
    Json j;
    j["code_hash"] = code_hash(code);
    j["node"] = code.universe().name(node);
    if (frag.has_value()) {
        j["symbols"] = *frag;
    } else {
        j["symbols"] = nullptr;
    }
    return j;
}

Fragment fragment_from_json(const Json& j, const LinearCode& code, int node) {
    if (j.at("code_hash").get<std::string>() != code_hash(code)) {
        throw std::invalid_argument("fragment file belongs to a different code");
    }
    if (j.at("node").get<std::string>() != code.universe().name(node)) {
        throw std::invalid_argument("fragment file names a different node");
    }
    if (j.at("symbols").is_null()) return std::nullopt;
    return j.at("symbols").get<std::vector<std::uint64_t>>();
}

Json report_to_json(const ParametersReport& report) {
    Json j;
    j["method"] = report.method;
    j["k"] = report.k.str();
    j["m"] = report.m.str();
    Json per_node = Json::object();
    for (const auto& [name, count] : report.per_node) per_node[name] = count.str();
    j["per_node"] = per_node;
    j["beta"] = rational_to_string(report.beta);
    j["q"] = report.q;
    return j;
}

QuorumContext quorum_context_from_json(const Json& j) {
    if (j.contains("threshold")) {
        const auto& t = j.at("threshold");
        return threshold_quorum_context(t.at("n").get<int>(), t.at("f").get<int>());
    }
    Universe u = universe_from_names(j.at("universe").get<std::vector<std::string>>());
    std::vector<NodeMask> quorums;
    for (const auto& q : j.at("quorums")) quorums.push_back(mask_from_names(u, q));
    return make_quorum_context(std::move(u), std::move(quorums));
}

Json quorum_context_to_json(const QuorumContext& ctx) {
    Json j;
    j["universe"] = ctx.universe.names();
    auto antichain = [&](const std::vector<NodeMask>& sets) {
        Json out = Json::array();
        for (NodeMask s : sets) out.push_back(mask_to_names(ctx.universe, s));
        return out;
    };
    j["quorums"] = antichain(ctx.quorums);
    j["fail_prone"] = antichain(ctx.fail_prone);
    j["kernels"] = antichain(ctx.kernels);
    j["reliable"] = antichain(ctx.reliable);
    return j;
}

std::size_t bits_per_symbol(FieldSpec q) {
    std::size_t b = 0;
    std::uint64_t v = q.q;
    while (v > 1) {
        v >>= 1;
        ++b;
    }
    return b;
}

std::vector<std::uint64_t> pack_bytes(const Bytes& data, FieldSpec q) {
    const std::size_t b = bits_per_symbol(q);
    std::vector<std::uint64_t> symbols;
    std::uint64_t acc = 0;
    std::size_t bits = 0;
    for (std::uint8_t byte : data) {
        for (int i = 0; i < 8; ++i) {
            acc |= std::uint64_t((byte >> i) & 1) << bits;
            if (++bits == b) {
                symbols.push_back(acc);
                acc = 0;
                bits = 0;
            }
        }
    }
    if (bits > 0) symbols.push_back(acc);
    return symbols;
}

Bytes unpack_symbols(const std::vector<std::uint64_t>& symbols, FieldSpec q,
                     std::size_t byte_count) {
    const std::size_t b = bits_per_symbol(q);
    Bytes out(byte_count, 0);
    std::size_t bit_pos = 0;
    for (std::uint64_t s : symbols) {
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t byte = bit_pos / 8;
            if (byte >= byte_count) return out;
            out[byte] |= static_cast<std::uint8_t>(((s >> i) & 1) << (bit_pos % 8));
            ++bit_pos;
        }
    }
    return out;
}

Scenario scenario_from_json(const Json& j, const std::string& base_dir) {
    Json quorum_json;
    if (j.at("quorum").is_string()) {
        const std::filesystem::path p =
            std::filesystem::path(base_dir) / j.at("quorum").get<std::string>();
        quorum_json = read_json_file(p.string());
    } else {
        quorum_json = j.at("quorum");
    }
    QuorumContext ctx = quorum_context_from_json(quorum_json);

    const CommitmentVariant variant =
        j.value("variant", std::string("vector")) == "merkle" ? CommitmentVariant::MerkleRoot
                                                              : CommitmentVariant::VectorD;
    LinearCode code = build_lp_code(AccessStructure{ctx.universe, ctx.kernels});

    Scenario sc{make_gavid_config(std::move(ctx), std::move(code), variant)};
    const Universe& u = sc.config.ctx.universe;
    sc.dealer = u.require(j.at("dealer").get<std::string>());

    const Json& file = j.at("file");
    const std::size_t k = sc.config.code.dimension();
    if (file.contains("symbols")) {
        sc.file = file.at("symbols").get<std::vector<std::uint64_t>>();
        if (sc.file.size() != k) throw std::invalid_argument("file must have exactly k symbols");
        for (auto& s : sc.file) s %= sc.config.code.field().q;
    } else if (file.contains("hex")) {
        sc.file = pack_bytes(bytes_from_hex(file.at("hex").get<std::string>()), sc.config.code.field());
        sc.file.resize(k, 0);
    } else if (file.contains("random")) {
        SplitMix64 rng(file.at("random").at("seed").get<std::uint64_t>());
        sc.file.resize(k);
        for (auto& s : sc.file) s = rng.next() % sc.config.code.field().q;
    } else {
        throw std::invalid_argument("file needs symbols, hex or random");
    }

    if (j.contains("corrupt")) sc.corrupt = mask_from_names(u, j.at("corrupt"));

    if (j.contains("behaviors")) {
        for (auto it = j.at("behaviors").begin(); it != j.at("behaviors").end(); ++it) {
            const int node = u.require(it.key());
            const Json& b = it.value();
            Behavior behavior;
            const std::string kind = b.at("kind").get<std::string>();
            if (kind == "crash") {
                behavior.kind = Behavior::Crash;
                behavior.send_budget = b.value("after", 0);
            } else if (kind == "mute") {
                behavior.kind = Behavior::Mute;
            } else if (kind == "equivocate") {
                behavior.kind = Behavior::Equivocate;
                behavior.group_a = mask_from_names(u, b.at("group"));
            } else if (kind == "corrupt-fragment") {
                behavior.kind = Behavior::CorruptFragment;
                if (b.contains("targets")) behavior.targets = mask_from_names(u, b.at("targets"));
            } else {
                throw std::invalid_argument("unknown behavior kind: " + kind);
            }
            sc.behaviors[node] = behavior;
        }
    }

    auto pattern_from = [&](const Json& p) {
        MsgPattern out;
        if (p.contains("from")) out.from = u.require(p.at("from").get<std::string>());
        if (p.contains("to")) out.to = u.require(p.at("to").get<std::string>());
        if (p.contains("kind")) out.kind = kind_from_string(p.at("kind").get<std::string>());
        return out;
    };

    if (j.contains("script")) {
        for (const auto& d : j.at("script")) {
            Directive dir;
            if (d.contains("deliver")) {
                dir.kind = Directive::Deliver;
                dir.pattern = pattern_from(d.at("deliver"));
            } else if (d.contains("delay")) {
                dir.kind = Directive::Delay;
                dir.pattern = pattern_from(d.at("delay").at("pattern"));
                dir.steps = d.at("delay").at("steps").get<std::size_t>();
            } else if (d.contains("drop")) {
                dir.kind = Directive::Drop;
                dir.pattern = pattern_from(d.at("drop").at("pattern"));
            } else if (d.contains("inject")) {
                const Json& m = d.at("inject");
                dir.kind = Directive::Inject;
                dir.message.kind = kind_from_string(m.at("kind").get<std::string>());
                dir.message.sender = u.require(m.at("from").get<std::string>());
                dir.message.receiver = u.require(m.at("to").get<std::string>());
                if (m.contains("commitment_hex")) {
                    dir.message.commitment = bytes_from_hex(m.at("commitment_hex").get<std::string>());
                }
                if (m.contains("symbols")) {
                    dir.message.fragment = m.at("symbols").is_null()
                                               ? Fragment{}
                                               : Fragment{m.at("symbols").get<std::vector<std::uint64_t>>()};
                }
            } else {
                throw std::invalid_argument("unknown script directive");
            }
            sc.script.push_back(std::move(dir));
        }
    }

    if (j.contains("retrieve")) {
        for (const auto& r : j.at("retrieve")) sc.retrievers.push_back(u.require(r.get<std::string>()));
    }
    sc.seed = j.value("seed", std::uint64_t{0});
    sc.fairness = j.value("fairness", true);
    return sc;
}

Bytes read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<long>(data.size()));
}

std::string read_file_text(const std::string& path) {
    const Bytes b = read_file_bytes(path);
    return std::string(b.begin(), b.end());
}

void write_file_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

Json read_json_file(const std::string& path) { return Json::parse(read_file_text(path)); }

std::string sha256_hex_of_file(const std::string& path) {
    return hex(sha256(read_file_bytes(path)));
}

}  // namespace mec
