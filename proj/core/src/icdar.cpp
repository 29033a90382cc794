#include "pxa/icdar.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pxa/error.hpp"
#include "pxa/io.hpp"

namespace pxa {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line) {
    field = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError(line, "invalid coordinate '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

GroundTruth parse_icdar_gt(std::string_view text, std::size_t image_w, std::size_t image_h) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    GroundTruth gt;
    gt.image_w = image_w;
    gt.image_h = image_h;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (line.empty()) continue;

        std::array<double, 8> xy{};
        for (std::size_t i = 0; i < 8; ++i) {
            const auto comma = line.find(',');
            if (comma == std::string_view::npos && i < 7) {
                throw ParseError(line_no, "expected 8 coordinates");
            }
            xy[i] = parse_number(line.substr(0, comma), line_no);
            line.remove_prefix(comma == std::string_view::npos ? line.size() : comma + 1);
        }
        const std::string text(trim(line));
        try {
            gt.boxes.push_back({Quad::from_coords(xy), text != "###", text});
        } catch (const InvalidInput& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return gt;
}

GroundTruth read_icdar_gt(const std::filesystem::path& path, std::size_t image_w, std::size_t image_h) {
    try {
        return parse_icdar_gt(read_file(path), image_w, image_h);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail() + " in " + path.string());
    }
}

std::string format_icdar_gt(const GroundTruth& gt) {
    std::ostringstream out;
    out.precision(17);
    for (const GroundTruthBox& b : gt.boxes) {
        for (double v : b.quad.coords()) out << v << ',';
        out << (b.care ? b.text : std::string("###")) << '\n';
    }
    return out.str();
}

}  // namespace pxa
