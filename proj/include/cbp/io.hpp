#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "cbp/types.hpp"

namespace cbp::io {

// Grid file: magic "CBPF", version 1, then n,h,w,c as u32 LE (24-byte
// header), then n*h*w*c little-endian f32 in layout order. Values are
// widened to double on load.
inline constexpr char kMagic[4] = {'C', 'B', 'P', 'F'};
inline constexpr std::uint32_t kVersion = 1;

void write_grid(const std::filesystem::path& path, const Grid& grid);
Grid read_grid(const std::filesystem::path& path);

struct LabelTable {
    // (sample_index, class_id) rows, unique sample indices.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> rows;

    std::size_t size() const { return rows.size(); }
    std::uint32_t max_class() const;
};

// Text file, one "index,label" per line, '#' comment lines ignored.
// When expected_n > 0, indices must be < expected_n.
LabelTable read_labels(const std::filesystem::path& path, std::size_t expected_n = 0);
void write_labels(const std::filesystem::path& path, const LabelTable& labels);

}  // namespace cbp::io
