#include "repeaterlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace repeaterlab {

namespace {

Json require(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw Error(ErrorCode::InvalidSpec, std::string("missing field '") + key + "'");
    }
    return doc.at(key);
}

std::vector<double> number_list(const Json& value, const char* key) {
    if (!value.is_array()) throw Error(ErrorCode::InvalidSpec, std::string(key) + " must be a list");
    std::vector<double> out;
    for (const auto& v : value) {
        if (!v.is_number()) throw Error(ErrorCode::InvalidSpec, std::string(key) + " must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

double number(const Json& value, const char* key) {
    if (!value.is_number()) throw Error(ErrorCode::InvalidSpec, std::string(key) + " must be a number");
    return value.get<double>();
}

} // namespace

std::string to_string(ProtocolKind kind) {
    switch (kind) {
    case ProtocolKind::MultiHerald: return "multiherald";
    case ProtocolKind::Shs: return "shs";
    case ProtocolKind::Dhs: return "dhs";
    }
    return "unknown";
}

ProtocolKind protocol_kind_from_string(const std::string& name) {
    if (name == "multiherald") return ProtocolKind::MultiHerald;
    if (name == "shs") return ProtocolKind::Shs;
    if (name == "dhs") return ProtocolKind::Dhs;
    throw Error(ErrorCode::InvalidSpec, "unknown protocol '" + name + "'");
}

Json to_json(const ProtocolParams& params) {
    Json doc;
    doc["protocol"] = to_string(params.kind);
    if (params.kind == ProtocolKind::MultiHerald) {
        doc["round_probs"] = params.multi.round_probs;
    } else {
        doc["left_probs"] = params.two_link.left_probs;
        doc["right_probs"] = params.two_link.right_probs;
        doc["swap_prob"] = params.two_link.swap_prob;
    }
    doc["tau"] = params.tau;
    return doc;
}

ProtocolParams protocol_params_from_json(const Json& doc) {
    ProtocolParams out;
    const Json protocol = require(doc, "protocol");
    if (!protocol.is_string()) throw Error(ErrorCode::InvalidSpec, "protocol must be a string");
    out.kind = protocol_kind_from_string(protocol.get<std::string>());
    if (out.kind == ProtocolKind::MultiHerald) {
        out.multi.round_probs = number_list(require(doc, "round_probs"), "round_probs");
    } else {
        out.two_link.left_probs = number_list(require(doc, "left_probs"), "left_probs");
        out.two_link.right_probs = number_list(require(doc, "right_probs"), "right_probs");
        if (doc.contains("swap_prob")) out.two_link.swap_prob = number(doc.at("swap_prob"), "swap_prob");
    }
    if (doc.contains("tau")) out.tau = number(doc.at("tau"), "tau");
    return out;
}

ProtocolChain<double> build_chain(const ProtocolParams& params) {
    switch (params.kind) {
    case ProtocolKind::MultiHerald: return build_multiheralded(params.multi, params.tau);
    case ProtocolKind::Shs: return build_two_link_single_heralded(params.two_link, params.tau);
    case ProtocolKind::Dhs: return build_two_link_double_heralded(params.two_link, params.tau);
    }
    throw Error(ErrorCode::InvalidSpec, "unknown protocol");
}

Json to_json(const StochasticMatrix<double>& matrix) {
    return Json{{"n", matrix.size()}, {"rows", matrix.rows()}};
}

StochasticMatrix<double> stochastic_matrix_from_json(const Json& doc) {
    const Json n = require(doc, "n");
    const Json rows = require(doc, "rows");
    if (!n.is_number_integer() || !rows.is_array()) {
        throw Error(ErrorCode::InvalidSpec, "matrix document needs integer n and list rows");
    }
    std::vector<std::vector<double>> raw;
    for (const auto& row : rows) raw.push_back(number_list(row, "rows"));
    if (static_cast<std::int64_t>(raw.size()) != n.get<std::int64_t>()) {
        throw Error(ErrorCode::NonSquare, "n does not match the number of rows");
    }
    return StochasticMatrix<double>::validate(raw);
}

std::string format_number(double value) {
    if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteValue, "non-finite value in output");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + tmp.string());
        os << content;
        os.flush();
        if (!os) {
            os.close();
            std::filesystem::remove(tmp);
            throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::IoFailure, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace repeaterlab
