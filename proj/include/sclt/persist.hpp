#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sclt/common.hpp"

namespace sclt {

inline constexpr int kSchemaVersion = 1;

// JSON-lines file whose first record is {"schema_version", "kind"}.
class JsonlWriter {
public:
    JsonlWriter(const std::string& path, const std::string& kind, const nlohmann::json& meta = {});
    void write(const nlohmann::json& record);
    long records() const { return count_; }

private:
    std::ofstream out_;
    std::string path_;
    long count_ = 0;
};

struct JsonlContents {
    nlohmann::json header;
    std::vector<nlohmann::json> records;
    long last_complete = -1;  // index of the last fully parsed record
    bool truncated = false;   // trailing partial line found
};

// Throws schema_mismatch on a missing/foreign header or a different schema
// version, io_error when the file cannot be read.
JsonlContents load_jsonl(const std::string& path, const std::string& expected_kind = "");

// RFC-4180 CSV (CRLF line ends, quoted when needed).
std::string csv_escape(const std::string& field);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

}  // namespace sclt
