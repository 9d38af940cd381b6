#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "omrkit/error.hpp"
#include "omrkit/mxl.hpp"

namespace omrkit::mxl {

namespace {

std::uint16_t u16(const std::string& s, std::size_t at) {
    return std::uint16_t(std::uint8_t(s[at])) | std::uint16_t(std::uint8_t(s[at + 1])) << 8;
}

std::uint32_t u32(const std::string& s, std::size_t at) {
    return std::uint32_t(std::uint8_t(s[at])) | std::uint32_t(std::uint8_t(s[at + 1])) << 8 |
           std::uint32_t(std::uint8_t(s[at + 2])) << 16 |
           std::uint32_t(std::uint8_t(s[at + 3])) << 24;
}

[[noreturn]] void bad(const std::string& msg) {
    throw Error(ErrorCode::IoError, "mxl container: " + msg);
}

struct ZipEntry {
    std::string name;
    std::uint16_t method;
    std::uint32_t compressed_size;
    std::uint32_t uncompressed_size;
    std::uint32_t local_offset;
};

std::vector<ZipEntry> read_central_directory(const std::string& bytes) {
    // End-of-central-directory record: scan backwards over a possible comment.
    if (bytes.size() < 22)
        bad("too small");
    std::size_t scan_from = bytes.size() >= 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
    std::size_t eocd = std::string::npos;
    for (std::size_t i = bytes.size() - 22; ; --i) {
        if (bytes.compare(i, 4, "PK\x05\x06") == 0) {
            eocd = i;
            break;
        }
        if (i == scan_from)
            break;
    }
    if (eocd == std::string::npos)
        bad("no end-of-central-directory record");
    std::uint16_t count = u16(bytes, eocd + 10);
    std::uint32_t cd_offset = u32(bytes, eocd + 16);

    std::vector<ZipEntry> entries;
    std::size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (pos + 46 > bytes.size() || bytes.compare(pos, 4, "PK\x01\x02") != 0)
            bad("corrupt central directory");
        ZipEntry e;
        e.method = u16(bytes, pos + 10);
        e.compressed_size = u32(bytes, pos + 20);
        e.uncompressed_size = u32(bytes, pos + 24);
        std::uint16_t name_len = u16(bytes, pos + 28);
        std::uint16_t extra_len = u16(bytes, pos + 30);
        std::uint16_t comment_len = u16(bytes, pos + 32);
        e.local_offset = u32(bytes, pos + 42);
        if (pos + 46 + name_len > bytes.size())
            bad("truncated entry name");
        e.name = bytes.substr(pos + 46, name_len);
        entries.push_back(std::move(e));
        pos += 46u + name_len + extra_len + comment_len;
    }
    return entries;
}

std::string read_entry(const std::string& bytes, const ZipEntry& e) {
    std::size_t pos = e.local_offset;
    if (pos + 30 > bytes.size() || bytes.compare(pos, 4, "PK\x03\x04") != 0)
        bad("corrupt local header for " + e.name);
    std::uint16_t name_len = u16(bytes, pos + 26);
    std::uint16_t extra_len = u16(bytes, pos + 28);
    std::size_t data = pos + 30 + name_len + extra_len;
    if (data + e.compressed_size > bytes.size())
        bad("truncated data for " + e.name);

    if (e.method == 0) { // stored
        return bytes.substr(data, e.compressed_size);
    }
    if (e.method != 8)
        bad("unsupported compression method for " + e.name);

    std::string out(e.uncompressed_size, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) // raw deflate
        bad("zlib init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data() + data));
    zs.avail_in = e.compressed_size;
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = uInt(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END)
        bad("inflate failed for " + e.name);
    out.resize(out.size() - zs.avail_out);
    return out;
}

bool is_xml_name(const std::string& name) {
    auto ends_with = [&](const char* suffix) {
        std::size_t n = std::strlen(suffix);
        return name.size() >= n && name.compare(name.size() - n, n, suffix) == 0;
    };
    return ends_with(".xml") || ends_with(".musicxml");
}

// container.xml names the score via <rootfile full-path="...">.
std::string rootfile_path(const std::string& container_xml) {
    const std::string needle = "full-path=";
    std::size_t at = container_xml.find(needle);
    if (at == std::string::npos)
        return "";
    at += needle.size();
    if (at >= container_xml.size())
        return "";
    char quote = container_xml[at];
    if (quote != '"' && quote != '\'')
        return "";
    std::size_t end = container_xml.find(quote, at + 1);
    if (end == std::string::npos)
        return "";
    return container_xml.substr(at + 1, end - at - 1);
}

} // namespace

bool looks_like_zip(const std::string& bytes) {
    return bytes.size() >= 4 && bytes.compare(0, 4, "PK\x03\x04") == 0;
}

std::string mxl_main_document(const std::string& bytes) {
    auto entries = read_central_directory(bytes);

    std::string wanted;
    for (const auto& e : entries)
        if (e.name == "META-INF/container.xml") {
            wanted = rootfile_path(read_entry(bytes, e));
            break;
        }
    if (!wanted.empty()) {
        for (const auto& e : entries)
            if (e.name == wanted)
                return read_entry(bytes, e);
        bad("container.xml points at a missing member: " + wanted);
    }
    for (const auto& e : entries)
        if (is_xml_name(e.name) && e.name.rfind("META-INF/", 0) != 0)
            return read_entry(bytes, e);
    throw Error(ErrorCode::NotMusicXml, "mxl container holds no MusicXML document");
}

} // namespace omrkit::mxl
