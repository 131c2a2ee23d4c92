#include "sclt/persist.hpp"

#include <sstream>

#include "sclt/testfn.hpp"

namespace sclt {

JsonlWriter::JsonlWriter(const std::string& path, const std::string& kind, const nlohmann::json& meta)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    require(static_cast<bool>(out_), ErrorCode::io_error, "cannot open " + path + " for writing");
    nlohmann::json h = {{"schema_version", kSchemaVersion}, {"kind", kind}};
    if (!meta.is_null()) h["meta"] = meta;
    out_ << h.dump() << '\n';
    out_.flush();
}

void JsonlWriter::write(const nlohmann::json& record) {
    out_ << record.dump() << '\n';
    out_.flush();
    require(static_cast<bool>(out_), ErrorCode::io_error, "write failed on " + path_);
    ++count_;
}

JsonlContents load_jsonl(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    JsonlContents c;
    size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        const size_t nl = text.find('\n', pos);
        const bool complete_line = nl != std::string::npos;
        const std::string line = text.substr(pos, complete_line ? nl - pos : std::string::npos);
        pos = complete_line ? nl + 1 : text.size();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            if (!complete_line) {
                c.truncated = true;
                break;
            }
            throw Error(ErrorCode::schema_mismatch, "malformed record in " + path);
        }
        if (first) {
            require(j.is_object() && j.contains("schema_version"), ErrorCode::schema_mismatch,
                    path + " has no schema header");
            require(j["schema_version"] == kSchemaVersion, ErrorCode::schema_mismatch,
                    path + " has schema version " + j["schema_version"].dump());
            require(expected_kind.empty() || j.value("kind", "") == expected_kind, ErrorCode::schema_mismatch,
                    path + " holds '" + j.value("kind", "") + "' records, expected '" + expected_kind + "'");
            c.header = j;
            first = false;
            continue;
        }
        c.records.push_back(std::move(j));
    }
    require(!first, ErrorCode::schema_mismatch, path + " is empty");
    c.last_complete = static_cast<long>(c.records.size()) - 1;
    return c;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot open " + path + " for writing");
    auto line = [&](const std::vector<std::string>& v) {
        for (size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << csv_escape(v[i]);
        out << "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
}

nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx complex_from_json(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    if (j.is_string()) {
        return parse_complex(j.get<std::string>());
    }
    throw Error(ErrorCode::schema_mismatch, "expected a complex number, got " + j.dump());
}

}  // namespace sclt
