// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Matrix export formats.
///
/// Text: a header line `rows cols p`, then one line per row of
/// space-separated entries.
/// Binary: the 4 bytes `QFSM`, then rows, cols and p as little-endian u32,
/// then rows*cols little-endian u16 entries in row-major order.

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "qfs/errors.hpp"
#include "qfs/modmatrix.hpp"

namespace qfs {

inline constexpr std::array<char, 4> matrix_magic = {'Q', 'F', 'S', 'M'};

inline void write_matrix_text(std::ostream& out, const ModMatrix& m) {
    out << m.rows() << ' ' << m.cols() << ' ' << m.modulus() << '\n';
    std::string line;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        line.clear();
        const auto row = m.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) line += ' ';
            line += std::to_string(row[j]);
        }
        line += '\n';
        out << line;
    }
}

/// ParseError positions are the 0-based index of the offending value
/// (0..2 for the header, 3.. for entries).
[[nodiscard]] inline ModMatrix read_matrix_text(std::istream& in) {
    std::uint64_t rows = 0, cols = 0, p = 0;
    if (!(in >> rows)) throw ParseError("missing row count", 0);
    if (!(in >> cols)) throw ParseError("missing column count", 1);
    if (!(in >> p)) throw ParseError("missing modulus", 2);
    if (p < 2 || p > 65535) throw ParseError("modulus out of range", 2);
    ModMatrix m(rows, cols, p);
    std::size_t k = 3;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j, ++k) {
            std::uint64_t v = 0;
            if (!(in >> v)) throw ParseError("missing or malformed entry", k);
            if (v >= p) throw ParseError("entry not reduced mod p", k);
            m.set(i, j, v);
        }
    }
    std::string extra;
    if (in >> extra) throw ParseError("trailing data after matrix", k);
    return m;
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in, std::size_t at) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError("truncated binary matrix header", at);
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}

}  // namespace detail

inline void write_matrix_binary(std::ostream& out, const ModMatrix& m) {
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) throw DomainError("matrix too large for binary export");
    out.write(matrix_magic.data(), 4);
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.modulus()));
    std::string buf;
    buf.resize(m.cols() * 2);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            buf[2 * j] = static_cast<char>(row[j] & 0xff);
            buf[2 * j + 1] = static_cast<char>(row[j] >> 8);
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

/// ParseError positions are byte offsets.
[[nodiscard]] inline ModMatrix read_matrix_binary(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != matrix_magic) throw ParseError("bad binary matrix magic", 0);
    const std::uint32_t rows = detail::get_u32(in, 4);
    const std::uint32_t cols = detail::get_u32(in, 8);
    const std::uint32_t p = detail::get_u32(in, 12);
    if (p < 2 || p > 65535) throw ParseError("modulus out of range", 12);
    ModMatrix m(rows, cols, p);
    std::string buf(std::size_t{cols} * 2, '\0');
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t at = 16 + i * buf.size();
        if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) throw ParseError("truncated matrix data", at);
        auto row = m.row(i);
        for (std::size_t j = 0; j < cols; ++j) {
            const auto v = static_cast<std::uint16_t>(static_cast<unsigned char>(buf[2 * j]) |
                                                      (static_cast<unsigned char>(buf[2 * j + 1]) << 8));
            if (v >= p) throw ParseError("entry not reduced mod p", at + 2 * j);
            row[j] = v;
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after matrix", 16 + rows * buf.size());
    return m;
}

}  // namespace qfs
