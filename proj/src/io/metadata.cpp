// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <sstream>

#include "tessera/core/error.hpp"
#include "tessera/io/io.hpp"

namespace tessera::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::int64_t to_int(std::string_view key, std::string_view v) {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw IoError("metadata key '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
    return out;
}

ValueType to_vtype(std::string_view v) {
    auto vt = parse_value_type(v);
    if (!vt) throw IoError("unknown value type '" + std::string(v) + "' in metadata");
    return *vt;
}

} // namespace

std::string sidecar_path(const std::string& data_path) { return data_path + ".mtd"; }

std::string format_metadata(const Metadata& md) {
    std::ostringstream out;
    out << "rows: " << md.rows << '\n' << "cols: " << md.cols << '\n';
    out << "value_type: " << (md.frame ? "FRAME" : std::string(to_string(md.vtype))) << '\n';
    if (!md.schema.empty()) {
        out << "schema: ";
        for (std::size_t i = 0; i < md.schema.size(); ++i) out << (i ? "," : "") << to_string(md.schema[i]);
        out << '\n';
    }
    out << "format: " << (md.format == Format::Csv ? "csv" : "binary") << '\n';
    out << "header: " << (md.header ? "true" : "false") << '\n';
    out << "delimiter: " << (md.delimiter == '\t' ? std::string("\\t") : std::string(1, md.delimiter)) << '\n';
    if (md.nnz) out << "nnz: " << *md.nnz << '\n';
    return out.str();
}

Metadata parse_metadata(std::string_view text) {
    Metadata md;
    bool have_rows = false, have_cols = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw IoError("metadata line " + std::to_string(line_no) + " is not 'key: value'");
        const std::string_view key = trim(line.substr(0, colon));
        const std::string_view val = trim(line.substr(colon + 1));
        if (key == "rows") {
            md.rows = to_int(key, val);
            have_rows = true;
        } else if (key == "cols") {
            md.cols = to_int(key, val);
            have_cols = true;
        } else if (key == "value_type") {
            if (val == "FRAME" || val == "MIXED" || val == "UNKNOWN") {
                md.frame = true;
                md.vtype = ValueType::STRING;
            } else {
                md.vtype = to_vtype(val);
                md.frame = md.vtype == ValueType::STRING;
            }
        } else if (key == "schema") {
            md.schema.clear();
            std::string_view rest = val;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                md.schema.push_back(to_vtype(trim(rest.substr(0, comma))));
                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            }
            md.frame = true;
        } else if (key == "format") {
            if (val == "csv") md.format = Format::Csv;
            else if (val == "binary") md.format = Format::Binary;
            else throw IoError("unknown format '" + std::string(val) + "' in metadata");
        } else if (key == "header") {
            md.header = val == "true" || val == "TRUE" || val == "1";
        } else if (key == "delimiter") {
            if (val == "\\t") md.delimiter = '\t';
            else if (val.size() == 1) md.delimiter = val[0];
            else throw IoError("delimiter must be a single character");
        } else if (key == "nnz") {
            md.nnz = to_int(key, val);
        } else {
            throw IoError("unknown metadata key '" + std::string(key) + "'");
        }
    }
    if (!have_rows || !have_cols) throw IoError("metadata must define rows and cols");
    if (md.rows <= 0 || md.cols <= 0) throw IoError("metadata dims must be positive");
    if (!md.schema.empty() && static_cast<std::int64_t>(md.schema.size()) != md.cols)
        throw IoError("metadata schema has " + std::to_string(md.schema.size()) + " types for " +
                      std::to_string(md.cols) + " columns");
    return md;
}

Metadata read_metadata(const std::string& data_path) {
    const std::string side = sidecar_path(data_path);
    std::ifstream in(side, std::ios::binary);
    if (!in) throw IoError("missing metadata file " + side);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_metadata(ss.str());
}

void write_metadata(const std::string& data_path, const Metadata& md) {
    write_file(sidecar_path(data_path), format_metadata(md));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path);
}

Dataset read(const std::string& path) {
    const Metadata md = read_metadata(path);
    if (md.format == Format::Binary) return share(read_binary(path));
    if (md.frame) return std::make_shared<const DataTensorBlock>(read_csv_frame(path, md));
    return share(read_csv_matrix(path, md));
}

} // namespace tessera::io
