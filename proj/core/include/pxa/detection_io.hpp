#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxa/postprocess.hpp"

namespace pxa {

/// JSON Lines, one record per box:
///   {"quad":[x1,y1,x2,y2,x3,y3,x4,y4],"score":0.93,"source":"anchor"}
/// Numbers are written with round-trip precision.
std::string format_detections(std::span<const Detection> dets);

/// Throws ParseError with the 1-based line number for malformed records.
std::vector<Detection> parse_detections(std::string_view text);

void write_detections(const std::filesystem::path& path, std::span<const Detection> dets);
std::vector<Detection> read_detections(const std::filesystem::path& path);

}  // namespace pxa
