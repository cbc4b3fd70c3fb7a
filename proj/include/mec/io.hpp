#pragma once

#include <string>

#include "json.hpp"
#include "mec/codes.hpp"
#include "mec/construct.hpp"
#include "mec/quorum.hpp"
#include "mec/simnet.hpp"

namespace mec {

using Json = nlohmann::ordered_json;  // field order preserved, deterministic dumps

// --- code manifest ---------------------------------------------------------

/// {q, k, m, columns_per_node, generator, labeling}; labeling lists the node
/// name of every generator column.
Json code_to_json(const LinearCode& code);
LinearCode code_from_json(const Json& j);

/// Digest of the compact manifest serialization; binds fragment files to the
/// code they came from.
std::string code_hash(const LinearCode& code);

// --- fragment files --------------------------------------------------------

/// {code_hash, node, symbols}; an absent fragment serializes as null symbols.
Json fragment_to_json(const LinearCode& code, int node, const Fragment& frag);
Fragment fragment_from_json(const Json& j, const LinearCode& code, int node);

// --- parameters report -----------------------------------------------------

Json report_to_json(const ParametersReport& report);

// --- quorum context ---------------------------------------------------------

/// {"universe":[...], "quorums":[[...]]} or {"threshold":{"n":N,"f":F}}.
QuorumContext quorum_context_from_json(const Json& j);
Json quorum_context_to_json(const QuorumContext& ctx);

// --- scenarios ---------------------------------------------------------------

/// Scenario format: {quorum, dealer, file, corrupt, behaviors, script, seed,
/// fairness, variant, retrieve}.  `quorum` may be inline or a file path
/// resolved relative to `base_dir`.
Scenario scenario_from_json(const Json& j, const std::string& base_dir);

// --- file/symbol packing -----------------------------------------------------

/// Little-endian packing of a byte stream into floor(log2 q)-bit symbols.
std::size_t bits_per_symbol(FieldSpec q);
std::vector<std::uint64_t> pack_bytes(const Bytes& data, FieldSpec q);
Bytes unpack_symbols(const std::vector<std::uint64_t>& symbols, FieldSpec q,
                     std::size_t byte_count);

// --- helpers -----------------------------------------------------------------

Bytes read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const Bytes& data);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);
Json read_json_file(const std::string& path);
std::string sha256_hex_of_file(const std::string& path);

}  // namespace mec
