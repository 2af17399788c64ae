#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jamsig {

// Little-endian primitives shared by the JSIQ / JSPC / JWGT containers.
// x86 is little-endian already; the swap path keeps the formats portable.

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw std::runtime_error("read_le: unexpected end of file");
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0) {
        throw std::runtime_error(what + ": bad magic");
    }
}

inline void write_json_block(std::ostream& os, const std::string& json) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(json.size()));
    os.write(json.data(), static_cast<std::streamsize>(json.size()));
}

inline std::string read_json_block(std::istream& is) {
    const auto len = read_le<std::uint32_t>(is);
    std::string json(len, '\0');
    is.read(json.data(), len);
    if (!is) throw std::runtime_error("read_json_block: truncated header");
    return json;
}

// Write-then-rename so readers never observe a half-written file and an
// interrupted run leaves no partial output at the final path.
class AtomicFileWriter {
public:
    explicit AtomicFileWriter(const std::filesystem::path& path)
        : final_path_(path), tmp_path_(path.string() + ".tmp"), os_(tmp_path_, std::ios::binary) {
        if (!os_) throw std::runtime_error("cannot open for writing: " + tmp_path_.string());
    }

    ~AtomicFileWriter() {
        if (!committed_) {
            os_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_path_, ec);
        }
    }

    std::ostream& stream() { return os_; }

    void commit() {
        os_.flush();
        if (!os_) throw std::runtime_error("write failed: " + tmp_path_.string());
        os_.close();
        std::filesystem::rename(tmp_path_, final_path_);
        committed_ = true;
    }

private:
    std::filesystem::path final_path_;
    std::filesystem::path tmp_path_;
    std::ofstream os_;
    bool committed_ = false;
};

}  // namespace jamsig
