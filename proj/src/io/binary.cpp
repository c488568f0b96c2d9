// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstring>

#include "tessera/core/error.hpp"
#include "tessera/io/io.hpp"

namespace tessera::io {

static_assert(std::endian::native == std::endian::little, "binary block codec assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'D', 'S', 'T', 'B'};
constexpr std::uint8_t kVersion = 1;

template <class T> void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_cell(std::string& out, const Cells& cells, std::size_t i) {
    switch (cells.vtype()) {
    case ValueType::FP32: put(out, cells.get<float>()[i]); break;
    case ValueType::FP64: put(out, cells.get<double>()[i]); break;
    case ValueType::INT32: put(out, cells.get<std::int32_t>()[i]); break;
    case ValueType::INT64: put(out, cells.get<std::int64_t>()[i]); break;
    case ValueType::BOOLEAN: put(out, cells.get<std::uint8_t>()[i]); break;
    case ValueType::STRING: {
        const std::string& s = cells.str(i);
        put<std::uint64_t>(out, s.size());
        out += s;
        break;
    }
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <class T> T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    void cell(Cells& cells) {
        std::visit(
            [&](auto& vec) {
                using V = typename std::decay_t<decltype(vec)>::value_type;
                if constexpr (std::is_same_v<V, std::string>)
                    vec.emplace_back(take(get<std::uint64_t>()));
                else
                    vec.push_back(get<V>());
            },
            cells.storage());
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("truncated binary block");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string encode_binary(const BasicTensorBlock& x) {
    std::string out(kMagic, 4);
    put<std::uint8_t>(out, kVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(x.vtype()));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(x.rank()));
    for (auto d : x.dims()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(x.layout()));
    if (!x.is_sparse()) {
        const Cells& cells = x.dense_cells();
        if (x.vtype() == ValueType::FP64) {
            const auto& v = cells.get<double>();
            out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
        } else {
            for (std::size_t i = 0; i < cells.size(); ++i) put_cell(out, cells, i);
        }
        return out;
    }
    put<std::uint64_t>(out, static_cast<std::uint64_t>(x.nnz()));
    const Cells& vals = x.sparse_values();
    const std::size_t rank = x.rank();
    std::vector<std::int64_t> stride(rank, 1);
    for (std::size_t d = rank - 1; d > 0; --d) stride[d - 1] = stride[d] * x.dims()[d];
    const auto coords = [&](std::int64_t lin) {
        for (std::size_t d = 0; d < rank; ++d) {
            put<std::uint64_t>(out, static_cast<std::uint64_t>(lin / stride[d]));
            lin %= stride[d];
        }
    };
    if (rank == 2) {
        auto rp = x.row_ptr();
        auto ci = x.col_idx();
        for (std::int64_t i = 0; i < x.rows(); ++i)
            for (auto p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i + 1)]; ++p) {
                coords(i * x.cols() + ci[static_cast<std::size_t>(p)]);
                put_cell(out, vals, static_cast<std::size_t>(p));
            }
    } else {
        auto idx = x.coo_index();
        for (std::size_t p = 0; p < idx.size(); ++p) {
            coords(idx[p]);
            put_cell(out, vals, p);
        }
    }
    return out;
}

BasicTensorBlock decode_binary(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(4) != std::string_view(kMagic, 4)) throw IoError("not a binary block (bad magic)");
    if (const auto v = r.get<std::uint8_t>(); v != kVersion)
        throw IoError("unsupported binary block version " + std::to_string(v));
    const auto vt_code = r.get<std::uint8_t>();
    if (vt_code > static_cast<std::uint8_t>(ValueType::STRING)) throw IoError("bad value type code in binary block");
    const auto vt = static_cast<ValueType>(vt_code);
    const auto rank = r.get<std::uint8_t>();
    Shape dims;
    for (int d = 0; d < rank; ++d) dims.push_back(static_cast<std::int64_t>(r.get<std::uint64_t>()));
    const auto layout = r.get<std::uint8_t>();
    if (layout > 1) throw IoError("bad layout code in binary block");
    Cells cells(vt, 0);
    if (layout == static_cast<std::uint8_t>(Layout::Dense)) {
        const auto n = static_cast<std::size_t>(shape_numel(dims));
        if (vt == ValueType::FP64) {
            auto raw = r.take(n * sizeof(double));
            std::vector<double> v(n);
            std::memcpy(v.data(), raw.data(), raw.size());
            cells = Cells(std::move(v));
        } else {
            cells.reserve(n);
            for (std::size_t i = 0; i < n; ++i) r.cell(cells);
        }
        if (!r.done()) throw IoError("trailing bytes after binary block");
        return BasicTensorBlock::from_cells(std::move(dims), std::move(cells), Layout::Dense);
    }
    const auto nnz = r.get<std::uint64_t>();
    std::vector<std::int64_t> index;
    index.reserve(nnz);
    for (std::uint64_t p = 0; p < nnz; ++p) {
        std::int64_t lin = 0;
        for (int d = 0; d < rank; ++d) {
            const auto c = static_cast<std::int64_t>(r.get<std::uint64_t>());
            if (c < 0 || c >= dims[static_cast<std::size_t>(d)]) throw IoError("coordinate out of range in binary block");
            lin = lin * dims[static_cast<std::size_t>(d)] + c;
        }
        index.push_back(lin);
        r.cell(cells);
    }
    if (!r.done()) throw IoError("trailing bytes after binary block");
    return BasicTensorBlock::from_coo(std::move(dims), std::move(index), std::move(cells));
}

void write_binary(const BasicTensorBlock& x, const std::string& path) {
    if (x.numel() == 0) throw IoError("refusing to write empty block " + shape_string(x.dims()) + " to " + path);
    write_file(path, encode_binary(x));
    Metadata md;
    md.rows = x.rows();
    md.cols = x.cols();
    md.vtype = x.vtype();
    md.format = Format::Binary;
    md.nnz = x.nnz();
    write_metadata(path, md);
}

BasicTensorBlock read_binary(const std::string& path) {
    try {
        return decode_binary(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

} // namespace tessera::io
