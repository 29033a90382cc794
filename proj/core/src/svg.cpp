#include "pxa/svg.hpp"

#include <sstream>

namespace pxa {

namespace {

void polygon(std::ostringstream& out, const Quad& q, const char* stroke, const char* extra) {
    out << "  <polygon points=\"";
    for (std::size_t i = 0; i < 4; ++i) {
        out << (i ? " " : "") << q[i].x << ',' << q[i].y;
    }
    out << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\"" << extra << "/>\n";
}

}  // namespace

std::string render_svg(std::span<const Detection> dets, const GroundTruth* gt, std::size_t width,
                       std::size_t height) {
    std::ostringstream out;
    out.precision(10);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    if (gt) {
        out << " <g id=\"ground-truth\">\n";
        for (const GroundTruthBox& b : gt->boxes) {
            polygon(out, b.quad, b.care ? "#2ca02c" : "#7f7f7f", " stroke-dasharray=\"6,3\"");
        }
        out << " </g>\n";
    }
    out << " <g id=\"detections\">\n";
    for (const Detection& d : dets) {
        polygon(out, d.quad, d.source == Source::Anchor ? "#d62728" : "#1f77b4", "");
        out << "  <text x=\"" << d.quad[0].x << "\" y=\"" << d.quad[0].y - 2
            << "\" font-size=\"10\" fill=\"" << (d.source == Source::Anchor ? "#d62728" : "#1f77b4")
            << "\">" << d.score << "</text>\n";
    }
    out << " </g>\n</svg>\n";
    return out.str();
}

}  // namespace pxa
