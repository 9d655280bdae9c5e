#include "cbp/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace cbp::io {

namespace {

void put_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32_le(std::ostream& out, float v) {
    put_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

float get_f32_le(std::istream& in) { return std::bit_cast<float>(get_u32_le(in)); }

}  // namespace

void write_grid(const std::filesystem::path& path, const Grid& grid) {
    if (grid.n == 0 || grid.h == 0 || grid.w == 0 || grid.c == 0)
        throw std::invalid_argument("write_grid: empty grid");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_grid: cannot open " + path.string());
    out.write(kMagic, 4);
    put_u32_le(out, kVersion);
    put_u32_le(out, static_cast<std::uint32_t>(grid.n));
    put_u32_le(out, static_cast<std::uint32_t>(grid.h));
    put_u32_le(out, static_cast<std::uint32_t>(grid.w));
    put_u32_le(out, static_cast<std::uint32_t>(grid.c));
    for (double v : grid.data) put_f32_le(out, static_cast<float>(v));
    if (!out) throw IoError("write_grid: write failed for " + path.string());
}

Grid read_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_grid: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("read_grid: bad magic in " + path.string());
    if (get_u32_le(in) != kVersion)
        throw FormatError("read_grid: unsupported version in " + path.string());
    const std::uint32_t n = get_u32_le(in);
    const std::uint32_t h = get_u32_le(in);
    const std::uint32_t w = get_u32_le(in);
    const std::uint32_t c = get_u32_le(in);
    if (!in) throw FormatError("read_grid: truncated header in " + path.string());
    if (n == 0 || h == 0 || w == 0 || c == 0)
        throw FormatError("read_grid: zero header field in " + path.string());

    Grid grid(n, h, w, c);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const float v = get_f32_le(in);
        if (!in) throw FormatError("read_grid: truncated payload in " + path.string());
        grid.data[i] = static_cast<double>(v);
    }
    // Exactly n*h*w*c floats, nothing more.
    in.peek();
    if (!in.eof()) throw FormatError("read_grid: trailing bytes in " + path.string());
    if (!grid.finite()) throw FormatError("read_grid: non-finite payload in " + path.string());
    return grid;
}

std::uint32_t LabelTable::max_class() const {
    std::uint32_t m = 0;
    for (const auto& [idx, cls] : rows) m = std::max(m, cls);
    return m;
}

LabelTable read_labels(const std::filesystem::path& path, std::size_t expected_n) {
    std::ifstream in(path);
    if (!in) throw IoError("read_labels: cannot open " + path.string());
    LabelTable table;
    std::unordered_set<std::uint32_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("read_labels: missing comma at line " + std::to_string(lineno));
        std::uint32_t idx = 0, cls = 0;
        auto r1 = std::from_chars(line.data(), line.data() + comma, idx);
        auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), cls);
        if (r1.ec != std::errc{} || r1.ptr != line.data() + comma || r2.ec != std::errc{} ||
            r2.ptr != line.data() + line.size())
            throw FormatError("read_labels: non-numeric field at line " + std::to_string(lineno));
        if (!seen.insert(idx).second)
            throw FormatError("read_labels: duplicate index at line " + std::to_string(lineno));
        if (expected_n > 0 && idx >= expected_n)
            throw FormatError("read_labels: index out of range at line " + std::to_string(lineno));
        table.rows.emplace_back(idx, cls);
    }
    return table;
}

void write_labels(const std::filesystem::path& path, const LabelTable& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("write_labels: cannot open " + path.string());
    for (const auto& [idx, cls] : labels.rows) out << idx << ',' << cls << '\n';
    if (!out) throw IoError("write_labels: write failed for " + path.string());
}

}  // namespace cbp::io
