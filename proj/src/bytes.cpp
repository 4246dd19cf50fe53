// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/bytes.hpp"

#include <fstream>
#include <iterator>
#include <limits>

namespace l2c {

void ByteWriter::put_string16(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max())
        throw ParameterError("name longer than 65535 bytes: " + std::string(s.substr(0, 32)));
    put(static_cast<std::uint16_t>(s.size()));
    put_bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string ByteReader::get_string16() {
    const auto n = get<std::uint16_t>();
    auto raw = get_bytes(n);
    return {reinterpret_cast<const char*>(raw.data()), raw.size()};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace l2c
