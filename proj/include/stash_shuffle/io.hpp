#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stash_shuffle/errors.hpp"
#include "stash_shuffle/record.hpp"

namespace stashshuffle {

// Item file: magic "SSHF", u32 version, u64 N, u32 P (little endian), then
// N fixed-size P-byte payloads.
inline constexpr std::array<std::uint8_t, 4> kItemFileMagic = {'S', 'S', 'H', 'F'};
inline constexpr std::uint32_t kItemFileVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        os.put(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& is) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const int c = is.get();
        if (c == EOF) throw IoError("unexpected end of file");
        value |= static_cast<T>(static_cast<std::uint8_t>(c)) << (8 * i);
    }
    return value;
}

}  // namespace detail

struct ItemFile {
    std::uint32_t payload_size = 0;
    std::vector<Payload> payloads;
};

inline void write_items(std::ostream& os, const std::vector<Payload>& payloads,
                        std::uint32_t payload_size) {
    os.write(reinterpret_cast<const char*>(kItemFileMagic.data()), kItemFileMagic.size());
    detail::put_le(os, kItemFileVersion);
    detail::put_le(os, static_cast<std::uint64_t>(payloads.size()));
    detail::put_le(os, payload_size);
    for (const Payload& p : payloads) {
        if (p.size() != payload_size) throw IoError("payload size mismatch while writing items");
        os.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size()));
    }
    if (!os) throw IoError("item write failed");
}

inline ItemFile read_items(std::istream& is) {
    std::array<std::uint8_t, 4> magic{};
    is.read(reinterpret_cast<char*>(magic.data()), magic.size());
    if (!is || magic != kItemFileMagic) throw IoError("not an item file (bad magic)");
    const std::uint32_t version = detail::get_le<std::uint32_t>(is);
    if (version != kItemFileVersion) throw IoError("unsupported item file version");
    const std::uint64_t n = detail::get_le<std::uint64_t>(is);
    ItemFile file;
    file.payload_size = detail::get_le<std::uint32_t>(is);
    file.payloads.resize(n);
    for (auto& p : file.payloads) {
        p.resize(file.payload_size);
        is.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(p.size()));
        if (!is) throw IoError("item file truncated");
    }
    return file;
}

/// Write through a temp file and rename, so readers never observe partial
/// output.
template <typename WriteFn>
void atomic_write(const std::filesystem::path& path, WriteFn&& fn) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        fn(os);
        os.flush();
        if (!os) throw IoError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

inline void write_item_file(const std::filesystem::path& path, const std::vector<Payload>& payloads,
                            std::uint32_t payload_size) {
    atomic_write(path, [&](std::ostream& os) { write_items(os, payloads, payload_size); });
}

inline ItemFile read_item_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_items(is);
}

}  // namespace stashshuffle
