#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace rmglab {

/// RFC 4180 field quoting: fields containing commas, quotes, or line breaks are
/// wrapped in double quotes with embedded quotes doubled.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// One CSV record with RFC 4180 CRLF line ending.
inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t j = 0; j < fields.size(); ++j) {
        if (j) out += ',';
        out += csv_escape(fields[j]);
    }
    out += "\r\n";
    return out;
}

/// Shortest decimal form that parses back to the same double.
inline std::string csv_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    double parsed = 0;
    std::sscanf(buf, "%lf", &parsed);
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
        std::sscanf(shorter, "%lf", &parsed);
        if (parsed == x) return shorter;
    }
    return buf;
}

} // namespace rmglab
