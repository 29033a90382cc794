#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "pxa/targets.hpp"

namespace pxa {

/// Parses ICDAR 2015 style ground truth: one "x1,y1,...,x4,y4,transcription"
/// per line. A transcription of "###" marks a do-not-care region. A UTF-8 BOM,
/// CRLF endings and blank lines are tolerated. Throws ParseError with the
/// 1-based line number.
GroundTruth parse_icdar_gt(std::string_view text, std::size_t image_w = 0, std::size_t image_h = 0);

GroundTruth read_icdar_gt(const std::filesystem::path& path, std::size_t image_w = 0,
                          std::size_t image_h = 0);

std::string format_icdar_gt(const GroundTruth& gt);

}  // namespace pxa
