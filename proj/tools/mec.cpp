#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mec/construct.hpp"
#include "mec/gavid.hpp"
#include "mec/io.hpp"
#include "mec/ratlp.hpp"
#include "mec/simnet.hpp"

namespace fs = std::filesystem;
using namespace mec;

namespace {

constexpr const char* kToolVersion = "mec 1.0.0";

// Exit codes: 0 ok, 2 usage/precondition, 3 insufficient decode, 4 internal.
constexpr int kExitOk = 0;
constexpr int kExitPrecondition = 2;
constexpr int kExitInsufficient = 3;
constexpr int kExitInternal = 4;

AccessTree load_tree(const std::string& path) { return parse_tree(read_file_text(path)); }

Json provenance(const std::vector<std::pair<std::string, std::string>>& inputs) {
    Json p;
    p["tool_version"] = kToolVersion;
    Json files = Json::object();
    for (const auto& [name, path] : inputs) files[name] = sha256_hex_of_file(path);
    p["inputs"] = files;
    return p;
}

void print_report(const ParametersReport& report) {
    std::cout << "method=" << report.method << " k=" << report.k.str() << " m=" << report.m.str()
              << " beta=" << rational_to_string(report.beta) << " q=" << report.q << "\n";
    for (const auto& [name, count] : report.per_node) {
        std::cout << "node " << name << ": " << count.str() << "\n";
    }
}

LinearCode load_code(const std::string& manifest_path) {
    const Json j = read_json_file(manifest_path);
    return code_from_json(j.contains("code") ? j.at("code") : j);
}

std::vector<std::string> split_names(const std::string& list) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : list) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int cmd_params(const std::string& tree_path, const std::string& method) {
    const AccessTree tree = load_tree(tree_path);
    print_report(parameters_report(tree, method));
    return kExitOk;
}

int cmd_build(const std::string& tree_path, const std::string& method, const std::string& out_path) {
    const AccessTree tree = load_tree(tree_path);
    const ParametersReport report = parameters_report(tree, method);

    LinearCode code = [&] {
        if (method == "lp") return build_lp_code(enumerate_minimal(tree));
        if (method == "uniform") return build_partitioned_code(tree, PartitionedMethod::Uniform);
        if (method == "optimal") return build_partitioned_code(tree, PartitionedMethod::Optimal);
        if (method == "kronecker") return kronecker_to_code(build_kronecker(tree));
        throw std::invalid_argument("unknown method '" + method + "'");
    }();

    Json manifest;
    manifest["code"] = code_to_json(code);
    manifest["report"] = report_to_json(report);
    manifest["provenance"] = provenance({{"tree", tree_path}});
    write_file_text(out_path, manifest.dump(2) + "\n");
    std::cout << "wrote " << out_path << " (k=" << code.dimension() << " m=" << code.length()
              << " q=" << code.field().q << ")\n";
    return kExitOk;
}

int cmd_check(const std::string& manifest_path, const std::string& tree_path) {
    const LinearCode code = load_code(manifest_path);
    const AccessTree tree = load_tree(tree_path);
    const AccessStructure minimal = enumerate_minimal(tree);

    std::size_t verified = 0;
    for (NodeMask s : minimal.sets) {
        // translate the tree's node mask into the code's universe by name
        NodeMask code_mask = 0;
        for (std::size_t i = 0; i < minimal.universe.size(); ++i) {
            if (!(s >> i & 1)) continue;
            const int idx = code.universe().index_of(minimal.universe.name(static_cast<int>(i)));
            if (idx < 0) {
                std::cout << "incomplete: node " << minimal.universe.name(static_cast<int>(i))
                          << " missing from the code\n";
                return kExitPrecondition;
            }
            code_mask |= NodeMask{1} << idx;
        }
        if (!is_sufficient(code, code_mask)) {
            std::cout << "incomplete: access set " << minimal.universe.set_to_string(s)
                      << " cannot decode\n";
            return kExitPrecondition;
        }
        ++verified;
    }
    std::cout << "complete: " << verified << " access sets verified\n";
    return kExitOk;
}

int cmd_encode(const std::string& manifest_path, const std::string& file_path,
               const std::string& out_dir) {
    const LinearCode code = load_code(manifest_path);
    const Bytes data = read_file_bytes(file_path);
    const std::size_t k = code.dimension();

    std::vector<std::uint64_t> symbols = pack_bytes(data, code.field());
    const std::size_t blocks = symbols.empty() ? 1 : (symbols.size() + k - 1) / k;
    const std::size_t pad_symbols = blocks * k - symbols.size();
    symbols.resize(blocks * k, 0);

    fs::create_directories(out_dir);
    std::vector<std::vector<std::uint64_t>> per_node(code.node_count());
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::vector<std::uint64_t> block(symbols.begin() + static_cast<long>(b * k),
                                               symbols.begin() + static_cast<long>((b + 1) * k));
        const FragmentVector fv = encode(code, block);
        for (std::size_t i = 0; i < code.node_count(); ++i) {
            if (!fv.entries[i].has_value()) continue;
            per_node[i].insert(per_node[i].end(), fv.entries[i]->begin(), fv.entries[i]->end());
        }
    }
    for (std::size_t i = 0; i < code.node_count(); ++i) {
        const std::string name = code.universe().name(static_cast<int>(i));
        const Fragment frag = code.symbols_of(static_cast<int>(i)) == 0
                                  ? Fragment{}
                                  : Fragment{per_node[i]};
        const Json j = fragment_to_json(code, static_cast<int>(i), frag);
        write_file_text((fs::path(out_dir) / ("fragment-" + name + ".json")).string(),
                        j.dump(2) + "\n");
    }
    Json meta;
    meta["code_hash"] = code_hash(code);
    meta["file_bytes"] = data.size();
    meta["blocks"] = blocks;
    meta["pad_symbols"] = pad_symbols;
    meta["provenance"] = provenance({{"code", manifest_path}, {"file", file_path}});
    write_file_text((fs::path(out_dir) / "encoding.json").string(), meta.dump(2) + "\n");
    std::cout << "encoded " << data.size() << " bytes into " << blocks << " block(s) under "
              << out_dir << "\n";
    return kExitOk;
}

int cmd_decode(const std::string& manifest_path, const std::string& dir,
               const std::string& nodes_list, const std::string& out_path) {
    const LinearCode code = load_code(manifest_path);
    const Json meta = read_json_file((fs::path(dir) / "encoding.json").string());
    const std::size_t blocks = meta.at("blocks").get<std::size_t>();
    const std::size_t file_bytes = meta.at("file_bytes").get<std::size_t>();

    NodeMask selected = 0;
    if (nodes_list.empty()) {
        selected = code.universe().full_mask();
    } else {
        for (const auto& name : split_names(nodes_list)) {
            selected |= NodeMask{1} << code.universe().require(name);
        }
    }

    std::vector<std::vector<std::uint64_t>> per_node(code.node_count());
    for (std::size_t i = 0; i < code.node_count(); ++i) {
        if (!(selected >> i & 1) || code.symbols_of(static_cast<int>(i)) == 0) continue;
        const std::string name = code.universe().name(static_cast<int>(i));
        const Json j = read_json_file((fs::path(dir) / ("fragment-" + name + ".json")).string());
        const Fragment frag = fragment_from_json(j, code, static_cast<int>(i));
        if (frag.has_value()) per_node[i] = *frag;
    }

    std::vector<std::uint64_t> symbols;
    for (std::size_t b = 0; b < blocks; ++b) {
        FragmentVector fv;
        fv.entries.resize(code.node_count());
        for (std::size_t i = 0; i < code.node_count(); ++i) {
            const std::size_t mi = code.symbols_of(static_cast<int>(i));
            if (!(selected >> i & 1) || mi == 0) continue;
            if (per_node[i].size() != mi * blocks) {
                throw std::invalid_argument("fragment file of node " +
                                            code.universe().name(static_cast<int>(i)) +
                                            " has the wrong symbol count");
            }
            fv.entries[i] = std::vector<std::uint64_t>(
                per_node[i].begin() + static_cast<long>(b * mi),
                per_node[i].begin() + static_cast<long>((b + 1) * mi));
        }
        const auto block = decode(code, fv);
        if (!block) {
            std::cout << "insufficient\n";
            return kExitInsufficient;
        }
        symbols.insert(symbols.end(), block->begin(), block->end());
    }
    write_file_bytes(out_path, unpack_symbols(symbols, code.field(), file_bytes));
    std::cout << "decoded " << file_bytes << " bytes to " << out_path << "\n";
    return kExitOk;
}

int cmd_basic_encode(const std::string& tree_path, const std::string& file_path,
                     const std::string& out_dir) {
    const AccessTree tree = load_tree(tree_path);
    const Bytes data = read_file_bytes(file_path);

    BitFile f;
    f.bits.reserve(data.size() * 8);
    for (std::uint8_t byte : data) {
        for (int i = 0; i < 8; ++i) f.bits.push_back((byte >> i) & 1);
    }
    const std::size_t align = basic_chunk_alignment(tree);
    const std::size_t pad_bits = (align - f.bits.size() % align) % align;
    f.bits.insert(f.bits.end(), pad_bits, 0);

    const ChunkAssignment chunks = basic_encode(tree, f);
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < tree.universe.size(); ++i) {
        Json j;
        j["node"] = tree.universe.name(static_cast<int>(i));
        Json lists = Json::array();
        for (const auto& chunk : chunks.per_node[i]) lists.push_back(chunk);
        j["chunks"] = lists;
        write_file_text(
            (fs::path(out_dir) / ("chunks-" + tree.universe.name(static_cast<int>(i)) + ".json"))
                .string(),
            j.dump(2) + "\n");
    }
    Json meta;
    meta["file_bytes"] = data.size();
    meta["pad_bits"] = pad_bits;
    meta["alignment"] = align;
    meta["provenance"] = provenance({{"tree", tree_path}, {"file", file_path}});
    write_file_text((fs::path(out_dir) / "encoding.json").string(), meta.dump(2) + "\n");
    std::cout << "encoded " << data.size() << " bytes (+" << pad_bits << " pad bits) under "
              << out_dir << "\n";
    return kExitOk;
}

int cmd_basic_decode(const std::string& tree_path, const std::string& dir,
                     const std::string& nodes_list, const std::string& out_path) {
    const AccessTree tree = load_tree(tree_path);
    const Json meta = read_json_file((fs::path(dir) / "encoding.json").string());
    const std::size_t file_bytes = meta.at("file_bytes").get<std::size_t>();

    NodeMask selected = 0;
    for (const auto& name : split_names(nodes_list)) {
        selected |= NodeMask{1} << tree.universe.require(name);
    }
    ChunkAssignment chunks;
    chunks.per_node.resize(tree.universe.size());
    for (std::size_t i = 0; i < tree.universe.size(); ++i) {
        if (!(selected >> i & 1)) continue;
        const std::string name = tree.universe.name(static_cast<int>(i));
        const Json j = read_json_file((fs::path(dir) / ("chunks-" + name + ".json")).string());
        for (const auto& chunk : j.at("chunks")) {
            chunks.per_node[i].push_back(chunk.get<BitChunk>());
        }
    }
    const auto bits = basic_decode(tree, chunks, selected);
    if (!bits) {
        std::cout << "insufficient\n";
        return kExitInsufficient;
    }
    Bytes out(file_bytes, 0);
    for (std::size_t i = 0; i < bits->bits.size() && i / 8 < file_bytes; ++i) {
        out[i / 8] |= static_cast<std::uint8_t>(bits->bits[i] << (i % 8));
    }
    write_file_bytes(out_path, out);
    std::cout << "decoded " << file_bytes << " bytes to " << out_path << "\n";
    return kExitOk;
}

int cmd_systems(const std::string& quorum_path) {
    const QuorumContext ctx = quorum_context_from_json(read_json_file(quorum_path));
    const QuorumCheck check = check_quorum_system(ctx);
    std::cout << (check.ok ? "valid quorum system" : "INVALID quorum system") << "\n";
    for (const auto& v : check.violations) std::cout << "  " << v << "\n";
    auto print = [&](const char* label, const std::vector<NodeMask>& sets) {
        std::cout << label << " (" << sets.size() << "):";
        for (NodeMask s : sets) std::cout << " " << ctx.universe.set_to_string(s);
        std::cout << "\n";
    };
    print("quorums", ctx.quorums);
    print("fail_prone", ctx.fail_prone);
    print("kernels", ctx.kernels);
    print("reliable", ctx.reliable);
    return check.ok ? kExitOk : kExitPrecondition;
}

int cmd_sim(const std::string& scenario_path, const std::string& transcript_path) {
    const Json j = read_json_file(scenario_path);
    const Scenario scenario =
        scenario_from_json(j, fs::path(scenario_path).parent_path().string());
    const RunResult result = run(scenario);

    const std::string transcript = transcript_text(result, scenario.config.ctx.universe);
    if (!transcript_path.empty()) {
        write_file_text(transcript_path, transcript);
    } else {
        std::cout << transcript;
    }

    std::size_t honest_total = 0;
    for (std::size_t i = 0; i < scenario.config.n(); ++i) {
        if (!(scenario.corrupt >> i & 1)) ++honest_total;
    }
    std::cout << "stored: " << popcount(result.honest_stored) << "/" << honest_total << "\n";
    for (const auto& [kind, count] : result.metrics.sent_by_kind) {
        std::cout << kind << ": " << count << "\n";
    }
    std::cout << "bytes: " << result.metrics.total_bytes << "\n";
    std::cout << "steps: " << result.metrics.steps << "\n";
    for (std::size_t i = 0; i < scenario.retrievers.size(); ++i) {
        std::cout << "retrieved[" << scenario.config.ctx.universe.name(scenario.retrievers[i])
                  << "]: " << (result.retrieved[i].has_value() ? "ok" : "none") << "\n";
    }
    const auto violations = check_execution(scenario, result);
    for (const auto& v : violations) std::cout << "VIOLATION: " << v << "\n";
    return violations.empty() ? kExitOk : kExitInternal;
}

int cmd_sweep(const std::string& scenario_path, std::uint64_t from, std::uint64_t count) {
    const Json j = read_json_file(scenario_path);
    const Scenario base = scenario_from_json(j, fs::path(scenario_path).parent_path().string());
    const SweepReport report = sweep(base, from, from + count);
    std::cout << "executions: " << report.executions << "\n";
    std::cout << "terminations: " << report.terminations << "\n";
    std::cout << "violations: " << report.violations.size() << "\n";
    for (const auto& [seed, what] : report.violations) {
        std::cout << "  seed " << seed << ": " << what << "\n";
    }
    return report.violations.empty() ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monotone erasure codes and generalized verifiable information dispersal"};
    app.require_subcommand(1);

    std::string tree_path, method, out_path, manifest_path, file_path, dir, nodes, quorum_path;
    std::string scenario_path, transcript_path;
    std::uint64_t seed_from = 0, seed_count = 100;

    auto* params = app.add_subcommand("params", "derive code parameters for an access tree");
    params->add_option("--tree", tree_path, "access tree file")->required();
    params->add_option("--method", method, "uniform|optimal|lp|kronecker")->required();

    auto* build = app.add_subcommand("build", "build a code manifest");
    build->add_option("--tree", tree_path)->required();
    build->add_option("--method", method, "uniform|optimal|lp|kronecker")->required();
    build->add_option("--out", out_path)->required();

    auto* check = app.add_subcommand("check", "verify completeness of a manifest against a tree");
    check->add_option("--manifest", manifest_path)->required();
    check->add_option("--tree", tree_path)->required();

    auto* encode_cmd = app.add_subcommand("encode", "encode a file into per-node fragments");
    encode_cmd->add_option("--code", manifest_path)->required();
    encode_cmd->add_option("--file", file_path)->required();
    encode_cmd->add_option("--out-dir", dir)->required();

    auto* decode_cmd = app.add_subcommand("decode", "decode a file from fragments");
    decode_cmd->add_option("--code", manifest_path)->required();
    decode_cmd->add_option("--fragments", dir)->required();
    decode_cmd->add_option("--nodes", nodes, "comma-separated node names (default: all)");
    decode_cmd->add_option("--out", out_path)->required();

    auto* basic_enc = app.add_subcommand("basic-encode", "bit-chunking encode for AND/OR trees");
    basic_enc->add_option("--tree", tree_path)->required();
    basic_enc->add_option("--file", file_path)->required();
    basic_enc->add_option("--out-dir", dir)->required();

    auto* basic_dec = app.add_subcommand("basic-decode", "bit-chunking decode");
    basic_dec->add_option("--tree", tree_path)->required();
    basic_dec->add_option("--dir", dir)->required();
    basic_dec->add_option("--nodes", nodes)->required();
    basic_dec->add_option("--out", out_path)->required();

    auto* systems = app.add_subcommand("systems", "derive kernels and reliable sets");
    systems->add_option("--quorum", quorum_path)->required();

    auto* sim = app.add_subcommand("sim", "run a dispersal scenario");
    sim->add_option("--scenario", scenario_path)->required();
    sim->add_option("--transcript", transcript_path, "write the transcript here instead of stdout");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario across many seeds");
    sweep_cmd->add_option("--scenario", scenario_path)->required();
    sweep_cmd->add_option("--from", seed_from);
    sweep_cmd->add_option("--seeds", seed_count);

    try {
        app.parse(argc, argv);
        if (params->parsed()) return cmd_params(tree_path, method);
        if (build->parsed()) return cmd_build(tree_path, method, out_path);
        if (check->parsed()) return cmd_check(manifest_path, tree_path);
        if (encode_cmd->parsed()) return cmd_encode(manifest_path, file_path, dir);
        if (decode_cmd->parsed()) return cmd_decode(manifest_path, dir, nodes, out_path);
        if (basic_enc->parsed()) return cmd_basic_encode(tree_path, file_path, dir);
        if (basic_dec->parsed()) return cmd_basic_decode(tree_path, dir, nodes, out_path);
        if (systems->parsed()) return cmd_systems(quorum_path);
        if (sim->parsed()) return cmd_sim(scenario_path, transcript_path);
        if (sweep_cmd->parsed()) return cmd_sweep(scenario_path, seed_from, seed_count);
        return kExitPrecondition;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitPrecondition;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    }
}
