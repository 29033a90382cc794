#include "pxa/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "pxa/error.hpp"
#include "pxa/io.hpp"

namespace pxa {

namespace {

constexpr char kMagic[4] = {'P', 'X', 'A', 'T'};
constexpr std::size_t kFixedHeader = 12;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

std::uint32_t get_u(std::string_view in, std::size_t at, int bytes) {
    std::uint32_t v = 0;
    for (int b = 0; b < bytes; ++b) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(b)]))
             << (8 * b);
    }
    return v;
}

Label label_from(float v) {
    if (v == 1.0f) return Label::Positive;
    if (v == 0.0f) return Label::Negative;
    if (v == -1.0f) return Label::Ignored;
    throw FormatError("label tensor holds a value other than -1, 0, 1");
}

float label_value(Label l) { return static_cast<float>(static_cast<signed char>(l)); }

void require_rank(const Tensor& t, std::size_t rank) {
    if (t.dims.size() != rank) {
        throw FormatError("expected a rank-" + std::to_string(rank) + " tensor, got rank " +
                          std::to_string(t.dims.size()));
    }
}

}  // namespace

std::size_t Tensor::element_count() const {
    if (dims.empty()) return 0;
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return n;
}

std::string encode_tensor(const Tensor& t) {
    if (t.dims.empty()) throw FormatError("tensor rank must be >= 1");
    if (t.dims.size() > std::numeric_limits<std::uint16_t>::max()) throw FormatError("tensor rank too large");
    if (t.element_count() != t.data.size()) throw FormatError("tensor payload does not match its dims");
    std::string out;
    out.reserve(kFixedHeader + 4 * t.dims.size() + 4 * t.data.size());
    out.append(kMagic, 4);
    put_u16(out, kTensorVersion);
    put_u16(out, kDtypeFloat32);
    put_u16(out, static_cast<std::uint16_t>(t.dims.size()));
    put_u16(out, 0);
    for (std::uint32_t d : t.dims) put_u32(out, d);
    for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

Tensor decode_tensor(std::string_view in) {
    if (in.size() < kFixedHeader) throw FormatError("tensor file truncated in header");
    if (std::memcmp(in.data(), kMagic, 4) != 0) throw FormatError("bad tensor magic");
    if (get_u(in, 4, 2) != kTensorVersion) throw FormatError("unsupported tensor version");
    if (get_u(in, 6, 2) != kDtypeFloat32) throw FormatError("unsupported tensor dtype");
    const std::size_t rank = get_u(in, 8, 2);
    if (rank == 0) throw FormatError("tensor rank must be >= 1");
    const std::size_t header = kFixedHeader + 4 * rank;
    if (in.size() < header) throw FormatError("tensor file truncated in dims");

    Tensor t;
    t.dims.resize(rank);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        t.dims[i] = get_u(in, kFixedHeader + 4 * i, 4);
        if (t.dims[i] != 0 && count > std::numeric_limits<std::size_t>::max() / 4 / t.dims[i]) {
            throw FormatError("tensor dims overflow");
        }
        count *= t.dims[i];
    }
    const std::size_t payload = in.size() - header;
    if (payload < 4 * count) throw FormatError("tensor file truncated in payload");
    if (payload > 4 * count) throw FormatError("tensor file has trailing bytes");
    t.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        t.data[i] = std::bit_cast<float>(get_u(in, header + 4 * i, 4));
    }
    return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    write_file_atomic(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
    try {
        return decode_tensor(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

Tensor grid_tensor(const Grid<float>& g) {
    return {{static_cast<std::uint32_t>(g.rows()), static_cast<std::uint32_t>(g.cols())},
            {g.values().begin(), g.values().end()}};
}

Grid<float> tensor_grid(const Tensor& t) {
    require_rank(t, 2);
    return Grid<float>(t.dims[0], t.dims[1], t.data);
}

Tensor label_tensor(const Grid<Label>& g) {
    Tensor t{{static_cast<std::uint32_t>(g.rows()), static_cast<std::uint32_t>(g.cols())}, {}};
    t.data.reserve(g.size());
    for (Label l : g.values()) t.data.push_back(label_value(l));
    return t;
}

Grid<Label> tensor_labels(const Tensor& t) {
    require_rank(t, 2);
    std::vector<Label> v;
    v.reserve(t.data.size());
    for (float f : t.data) v.push_back(label_from(f));
    return Grid<Label>(t.dims[0], t.dims[1], std::move(v));
}

Tensor label_tensor(std::span<const Label> labels) {
    Tensor t{{static_cast<std::uint32_t>(labels.size())}, {}};
    t.data.reserve(labels.size());
    for (Label l : labels) t.data.push_back(label_value(l));
    return t;
}

std::vector<Label> tensor_label_list(const Tensor& t) {
    require_rank(t, 1);
    std::vector<Label> v;
    v.reserve(t.data.size());
    for (float f : t.data) v.push_back(label_from(f));
    return v;
}

Tensor stack_grids(std::span<const Grid<float>> grids) {
    if (grids.empty()) throw InvalidInput("nothing to stack");
    Tensor t{{static_cast<std::uint32_t>(grids.size()), static_cast<std::uint32_t>(grids[0].rows()),
              static_cast<std::uint32_t>(grids[0].cols())},
             {}};
    t.data.reserve(grids.size() * grids[0].size());
    for (const auto& g : grids) {
        if (!g.same_shape(grids[0])) throw InvalidInput("stacked grids differ in shape");
        t.data.insert(t.data.end(), g.values().begin(), g.values().end());
    }
    return t;
}

std::vector<Grid<float>> unstack_grids(const Tensor& t) {
    require_rank(t, 3);
    const std::size_t plane = static_cast<std::size_t>(t.dims[1]) * t.dims[2];
    std::vector<Grid<float>> out;
    for (std::size_t k = 0; k < t.dims[0]; ++k) {
        const auto first = t.data.begin() + static_cast<std::ptrdiff_t>(k * plane);
        out.emplace_back(t.dims[1], t.dims[2], std::vector<float>(first, first + static_cast<std::ptrdiff_t>(plane)));
    }
    return out;
}

}  // namespace pxa
