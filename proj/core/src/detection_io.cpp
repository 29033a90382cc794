#include "pxa/detection_io.hpp"

#include <array>

#include "json.hpp"
#include "pxa/error.hpp"
#include "pxa/io.hpp"

namespace pxa {

using nlohmann::json;

std::string format_detections(std::span<const Detection> dets) {
    std::string out;
    for (const Detection& d : dets) {
        const auto xy = d.quad.coords();
        json rec = {{"quad", xy}, {"score", d.score}, {"source", std::string(to_string(d.source))}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<Detection> parse_detections(std::string_view text) {
    std::vector<Detection> dets;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const json rec = json::parse(line);
            const auto xy = rec.at("quad").get<std::array<double, 8>>();
            const std::string source = rec.at("source").get<std::string>();
            if (source != "pixel" && source != "anchor") {
                throw ParseError(line_no, "unknown source '" + source + "'");
            }
            dets.push_back({Quad::from_coords(xy), rec.at("score").get<double>(),
                            source == "anchor" ? Source::Anchor : Source::Pixel});
        } catch (const json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const InvalidInput& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return dets;
}

void write_detections(const std::filesystem::path& path, std::span<const Detection> dets) {
    write_file_atomic(path, format_detections(dets));
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
    try {
        return parse_detections(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail() + " in " + path.string());
    }
}

}  // namespace pxa
