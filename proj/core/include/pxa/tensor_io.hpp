#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxa/grid.hpp"

namespace pxa {

/// Float32 tensor in row-major order.
///
/// On-disk layout (all integers little-endian):
///   0  char[4]  magic "PXAT"
///   4  u16      version (1)
///   6  u16      dtype tag (1 = float32 LE)
///   8  u16      rank (>= 1)
///  10  u16      reserved, 0
///  12  u32[rank] dims
///      f32[prod(dims)] payload
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t element_count() const;
    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint16_t kDtypeFloat32 = 1;

std::string encode_tensor(const Tensor& t);
/// Throws FormatError on bad magic, version, dtype, rank, truncation, trailing
/// bytes or a dimension product that overflows.
Tensor decode_tensor(std::string_view bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor grid_tensor(const Grid<float>& g);
Grid<float> tensor_grid(const Tensor& t);  // requires rank 2

/// Labels are stored as 1 (positive), 0 (negative), -1 (ignored).
Tensor label_tensor(const Grid<Label>& g);
Grid<Label> tensor_labels(const Tensor& t);
Tensor label_tensor(std::span<const Label> labels);
std::vector<Label> tensor_label_list(const Tensor& t);  // requires rank 1

/// Stacks equally shaped grids into a [n, rows, cols] tensor.
Tensor stack_grids(std::span<const Grid<float>> grids);
std::vector<Grid<float>> unstack_grids(const Tensor& t);  // requires rank 3

}  // namespace pxa
