#pragma once

// JSON documents for matrices and protocol parameters, and the CSV number format.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "repeaterlab/protocols.hpp"

namespace repeaterlab {

using Json = nlohmann::json;

enum class ProtocolKind { MultiHerald, Shs, Dhs };

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_kind_from_string(const std::string& name);

/// Parameters of one protocol chain. Serialises as
/// {"protocol": "multiherald", "round_probs": [...], "tau": 1} or
/// {"protocol": "shs"|"dhs", "left_probs": [...], "right_probs": [...], "swap_prob": 1, "tau": 1}.
struct ProtocolParams {
    ProtocolKind kind = ProtocolKind::MultiHerald;
    MultiHeraldParams multi;
    TwoLinkParams two_link;
    double tau = 1.0;

    bool operator==(const ProtocolParams&) const = default;
};

Json to_json(const ProtocolParams& params);
ProtocolParams protocol_params_from_json(const Json& doc);
ProtocolChain<double> build_chain(const ProtocolParams& params);

/// {"n": int, "rows": [[...], ...]}
Json to_json(const StochasticMatrix<double>& matrix);
StochasticMatrix<double> stochastic_matrix_from_json(const Json& doc);

/// 17 significant digits, '.' decimal point, shortest exponent form; throws
/// NonFiniteValue for NaN or infinities.
std::string format_number(double value);

std::string csv_line(const std::vector<std::string>& cells);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

} // namespace repeaterlab
