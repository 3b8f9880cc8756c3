#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dsrc/core/errors.hpp"

namespace dsrc {

/// Shortest-exact decimal text for a double ('.' decimal point, round-trips
/// bit-exactly). %.17g is deterministic for a fixed libc.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// RFC-style field quoting: quote only when the field contains a comma,
/// quote, or newline; embedded quotes doubled.
inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// Comma-separated writer. First line is a `# config_hash=... seed=...`
/// stamp, second the header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash,
              std::uint64_t seed, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        out_ << "# config_hash=" << config_hash << " seed=" << seed << "\n";
        write_fields(header);
    }

    void row(const std::vector<std::string>& fields) { write_fields(fields); }

private:
    void write_fields(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_quote(fields[i]);
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

} // namespace dsrc
