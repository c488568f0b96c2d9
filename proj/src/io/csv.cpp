// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <limits>

#include "tessera/core/error.hpp"
#include "tessera/core/parallel.hpp"
#include "tessera/io/io.hpp"

namespace tessera::io {

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool parse_field(std::string_view s, double& out) {
    if (s.empty() || s == "NA") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (s.front() == '+') s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_field(std::string_view s, float& out) {
    double d = 0.0;
    if (!parse_field(s, d)) return false;
    out = static_cast<float>(d);
    return true;
}

template <class I> bool parse_int(std::string_view s, I& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

bool parse_field(std::string_view s, std::int64_t& out) { return parse_int(s, out); }
bool parse_field(std::string_view s, std::int32_t& out) { return parse_int(s, out); }

bool parse_field(std::string_view s, std::uint8_t& out) {
    if (s == "TRUE" || s == "true" || s == "T" || s == "1") {
        out = 1;
        return true;
    }
    if (s == "FALSE" || s == "false" || s == "F" || s == "0") {
        out = 0;
        return true;
    }
    return false;
}

bool parse_field(std::string_view s, std::string& out) {
    out.assign(s);
    return true;
}

[[noreturn]] void bad_cell(std::string_view s, std::int64_t row, std::int64_t col, ValueType vt) {
    throw IoError("unparseable " + std::string(to_string(vt)) + " cell '" + std::string(s) + "' at row " +
                  std::to_string(row + 1) + ", column " + std::to_string(col + 1));
}

// Destination for parsed cells: either one row-major block or per-column cells.
struct Sink {
    std::vector<Cells>* columns = nullptr; // frame
    Cells* matrix = nullptr;               // row-major
    std::int64_t cols = 0;

    void put(std::int64_t row, std::int64_t col, std::string_view field) const {
        Cells& target = columns ? (*columns)[static_cast<std::size_t>(col)] : *matrix;
        const auto idx = static_cast<std::size_t>(columns ? row : row * cols + col);
        std::visit(
            [&](auto& vec) {
                if (!parse_field(field, vec[idx])) bad_cell(field, row, col, target.vtype());
            },
            target.storage());
    }
};

void split_fields(std::string_view line, char delim, std::int64_t row, std::int64_t cols, const Sink& sink) {
    std::int64_t col = 0;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (col >= cols)
            throw IoError("row " + std::to_string(row + 1) + " has more than " + std::to_string(cols) + " fields");
        sink.put(row, col++, line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (col != cols)
        throw IoError("row " + std::to_string(row + 1) + " has " + std::to_string(col) + " fields, expected " +
                      std::to_string(cols));
}

std::string_view body_of(std::string_view text, bool header) {
    if (!header) return text;
    const auto nl = text.find('\n');
    return nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
}

void row_count_error(std::int64_t declared, std::int64_t actual) {
    throw IoError("metadata declares " + std::to_string(declared) + " rows but the file has " + std::to_string(actual));
}

// Splits at line boundaries and parses chunks concurrently into disjoint rows.
void parse_parallel(std::string_view body, const Metadata& md, const Sink& sink) {
    const auto n = static_cast<std::int64_t>(body.size());
    const std::int64_t parts = std::max<std::int64_t>(1, std::min<std::int64_t>(num_threads(), n / 4096 + 1));
    std::vector<std::int64_t> bounds{0};
    for (std::int64_t p = 1; p < parts; ++p) {
        auto pos = body.find('\n', static_cast<std::size_t>(std::max(bounds.back(), n * p / parts)));
        bounds.push_back(pos == std::string_view::npos ? n : static_cast<std::int64_t>(pos) + 1);
    }
    bounds.push_back(n);

    const auto for_lines = [&](std::int64_t c, auto&& fn) {
        std::string_view chunk = body.substr(static_cast<std::size_t>(bounds[static_cast<std::size_t>(c)]),
                                             static_cast<std::size_t>(bounds[static_cast<std::size_t>(c + 1)] -
                                                                      bounds[static_cast<std::size_t>(c)]));
        while (!chunk.empty()) {
            const auto nl = chunk.find('\n');
            std::string_view line = strip_cr(chunk.substr(0, nl));
            chunk = nl == std::string_view::npos ? std::string_view{} : chunk.substr(nl + 1);
            if (!line.empty()) fn(line);
        }
    };

    const auto chunks = static_cast<std::int64_t>(bounds.size() - 1);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(chunks), 0);
    parallel_tasks(chunks, [&](std::int64_t c) { for_lines(c, [&](std::string_view) { ++counts[static_cast<std::size_t>(c)]; }); });
    std::vector<std::int64_t> first(static_cast<std::size_t>(chunks) + 1, 0);
    for (std::int64_t c = 0; c < chunks; ++c)
        first[static_cast<std::size_t>(c + 1)] = first[static_cast<std::size_t>(c)] + counts[static_cast<std::size_t>(c)];
    if (first.back() != md.rows) row_count_error(md.rows, first.back());
    parallel_tasks(chunks, [&](std::int64_t c) {
        std::int64_t row = first[static_cast<std::size_t>(c)];
        for_lines(c, [&](std::string_view line) { split_fields(line, md.delimiter, row++, md.cols, sink); });
    });
}

// RFC-4180 style records; used when the file contains quotes.
void parse_quoted(std::string_view body, const Metadata& md, const Sink& sink) {
    std::int64_t row = 0, col = 0;
    std::string field;
    bool in_quotes = false, any = false;
    const auto end_field = [&] {
        if (row >= md.rows) row_count_error(md.rows, row + 1);
        if (col >= md.cols)
            throw IoError("row " + std::to_string(row + 1) + " has more than " + std::to_string(md.cols) + " fields");
        sink.put(row, col++, field);
        field.clear();
    };
    const auto end_record = [&] {
        end_field();
        if (col != md.cols)
            throw IoError("row " + std::to_string(row + 1) + " has " + std::to_string(col) + " fields, expected " +
                          std::to_string(md.cols));
        ++row;
        col = 0;
        any = false;
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < body.size() && body[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == md.delimiter) {
            end_field();
            any = true;
        } else if (c == '\n') {
            if (any || !field.empty()) end_record();
        } else if (c != '\r') {
            field.push_back(c);
            any = true;
        }
    }
    if (in_quotes) throw IoError("unterminated quoted field at end of file");
    if (any || !field.empty()) end_record();
    if (row != md.rows) row_count_error(md.rows, row);
}

void parse_into(const std::string& path, const Metadata& md, const Sink& sink) {
    const std::string text = read_file(path);
    const std::string_view body = body_of(text, md.header);
    if (body.find('"') != std::string_view::npos)
        parse_quoted(body, md, sink);
    else
        parse_parallel(body, md, sink);
}

void append_cell(std::string& out, const Cells& cells, std::size_t i, char delim) {
    char buf[32];
    switch (cells.vtype()) {
    case ValueType::FP64: out += format_double(cells.get<double>()[i]); break;
    case ValueType::FP32: out += format_double(static_cast<double>(cells.get<float>()[i])); break;
    case ValueType::INT64: {
        auto r = std::to_chars(buf, buf + sizeof buf, cells.get<std::int64_t>()[i]);
        out.append(buf, r.ptr);
        break;
    }
    case ValueType::INT32: {
        auto r = std::to_chars(buf, buf + sizeof buf, cells.get<std::int32_t>()[i]);
        out.append(buf, r.ptr);
        break;
    }
    case ValueType::BOOLEAN: out += cells.get<std::uint8_t>()[i] ? "TRUE" : "FALSE"; break;
    case ValueType::STRING: {
        const std::string& s = cells.str(i);
        if (s.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string::npos) {
            out += s;
        } else {
            out.push_back('"');
            for (char c : s) {
                if (c == '"') out.push_back('"');
                out.push_back(c);
            }
            out.push_back('"');
        }
        break;
    }
    }
}

std::string header_line(std::int64_t cols, char delim) {
    std::string h;
    for (std::int64_t j = 0; j < cols; ++j) {
        if (j) h.push_back(delim);
        h += "C" + std::to_string(j + 1);
    }
    return h + "\n";
}

// Formats rows in parallel chunks and concatenates them in order.
template <class CellAt> std::string format_rows(std::int64_t rows, std::int64_t cols, char delim, CellAt&& cell_at) {
    constexpr std::int64_t kRowsPerChunk = 4096;
    const std::int64_t chunks = (rows + kRowsPerChunk - 1) / kRowsPerChunk;
    std::vector<std::string> parts(static_cast<std::size_t>(chunks));
    parallel_tasks(chunks, [&](std::int64_t c) {
        std::string& s = parts[static_cast<std::size_t>(c)];
        for (std::int64_t i = c * kRowsPerChunk; i < std::min(rows, (c + 1) * kRowsPerChunk); ++i) {
            for (std::int64_t j = 0; j < cols; ++j) {
                if (j) s.push_back(delim);
                cell_at(s, i, j);
            }
            s.push_back('\n');
        }
    });
    std::string out;
    for (auto& p : parts) out += p;
    return out;
}

} // namespace

BasicTensorBlock read_csv_matrix(const std::string& path, const Metadata& md) {
    if (md.frame) throw IoError(path + " describes a frame, not a matrix");
    Cells cells(md.vtype, static_cast<std::size_t>(md.rows * md.cols));
    parse_into(path, md, Sink{nullptr, &cells, md.cols});
    return BasicTensorBlock::from_cells({md.rows, md.cols}, std::move(cells));
}

DataTensorBlock read_csv_frame(const std::string& path, const Metadata& md) {
    std::vector<Cells> columns;
    for (std::int64_t j = 0; j < md.cols; ++j)
        columns.emplace_back(md.schema.empty() ? ValueType::STRING : md.schema[static_cast<std::size_t>(j)],
                             static_cast<std::size_t>(md.rows));
    parse_into(path, md, Sink{&columns, nullptr, md.cols});
    return DataTensorBlock::from_columns(md.rows, std::move(columns));
}

void write_csv(const BasicTensorBlock& x, const std::string& path, const CsvOptions& opts) {
    if (x.rank() != 2) throw IoError("CSV output needs a rank-2 block, got " + shape_string(x.dims()));
    if (x.rows() == 0 || x.cols() == 0) throw IoError("refusing to write empty block " + shape_string(x.dims()) + " to " + path);
    const Cells cells = x.to_dense_cells();
    const std::int64_t cols = x.cols();
    std::string out = opts.header ? header_line(cols, opts.delimiter) : std::string{};
    out += format_rows(x.rows(), cols, opts.delimiter, [&](std::string& s, std::int64_t i, std::int64_t j) {
        append_cell(s, cells, static_cast<std::size_t>(i * cols + j), opts.delimiter);
    });
    write_file(path, out);
    Metadata md;
    md.rows = x.rows();
    md.cols = cols;
    md.vtype = x.vtype();
    md.frame = x.vtype() == ValueType::STRING;
    md.header = opts.header;
    md.delimiter = opts.delimiter;
    md.nnz = x.nnz();
    write_metadata(path, md);
}

void write_csv(const DataTensorBlock& x, const std::string& path, const CsvOptions& opts) {
    if (x.rows() == 0 || x.cols() == 0) throw IoError("refusing to write empty frame to " + path);
    std::vector<Cells> columns;
    for (std::int64_t j = 0; j < x.cols(); ++j) columns.push_back(x.column(j));
    std::string out = opts.header ? header_line(x.cols(), opts.delimiter) : std::string{};
    out += format_rows(x.rows(), x.cols(), opts.delimiter, [&](std::string& s, std::int64_t i, std::int64_t j) {
        append_cell(s, columns[static_cast<std::size_t>(j)], static_cast<std::size_t>(i), opts.delimiter);
    });
    write_file(path, out);
    Metadata md;
    md.rows = x.rows();
    md.cols = x.cols();
    md.vtype = ValueType::STRING;
    md.frame = true;
    md.schema = x.schema();
    md.header = opts.header;
    md.delimiter = opts.delimiter;
    write_metadata(path, md);
}

} // namespace tessera::io
