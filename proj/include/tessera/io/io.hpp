// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats: delimited text with a `<data>.mtd` sidecar, and a
// self-describing little-endian binary block format.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tessera/core/data_tensor.hpp"
#include "tessera/core/tensor_block.hpp"

namespace tessera::io {

enum class Format { Csv, Binary };

struct Metadata {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    ValueType vtype = ValueType::FP64;
    /// Frames carry a per-column schema; plain matrices leave it empty.
    std::vector<ValueType> schema;
    bool frame = false;
    Format format = Format::Csv;
    bool header = false;
    char delimiter = ',';
    std::optional<std::int64_t> nnz;
};

std::string sidecar_path(const std::string& data_path);
std::string format_metadata(const Metadata& md);
Metadata parse_metadata(std::string_view text);
Metadata read_metadata(const std::string& data_path);
void write_metadata(const std::string& data_path, const Metadata& md);

using Dataset = std::variant<TensorPtr, FramePtr>;

/// Reads a file described by its sidecar.
Dataset read(const std::string& path);

BasicTensorBlock read_csv_matrix(const std::string& path, const Metadata& md);
/// Frame with the sidecar schema, or all-STRING columns when none is given.
DataTensorBlock read_csv_frame(const std::string& path, const Metadata& md);

struct CsvOptions {
    char delimiter = ',';
    bool header = false;
};

void write_csv(const BasicTensorBlock& x, const std::string& path, const CsvOptions& opts = {});
void write_csv(const DataTensorBlock& x, const std::string& path, const CsvOptions& opts = {});

std::string encode_binary(const BasicTensorBlock& x);
BasicTensorBlock decode_binary(std::string_view bytes);
void write_binary(const BasicTensorBlock& x, const std::string& path);
BasicTensorBlock read_binary(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace tessera::io
