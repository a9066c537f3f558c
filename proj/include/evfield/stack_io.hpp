#pragma once

#include <filesystem>

#include "evfield/grid.hpp"
#include "evfield/synth.hpp"

namespace evfield::io {

//---------------------------------------------------------------------------//
/*!
 * Stack file layout, all little-endian:
 *
 * Field       | Type    | Notes
 * ----------- | ------- | -----------------------------------------
 * magic       | char[4] | "EVLS"
 * version     | u16     | 1
 * width       | u32     |
 * height      | u32     |
 * n_frames    | u32     |
 * pixel_size  | f64     | nm
 * delta_e     | f64     | eV
 * kind        | u8      | 0 incident, 1 scattered, 2 difference, 3 SIM
 *
 * Followed by n_frames row-major frames of i32 counts, or for kind SIM a
 * single row-major frame of f64 values.
 */
inline constexpr std::uint16_t stack_format_version = 1;

void write_stack(const std::filesystem::path& path, const synth::FrameStack& stack);
synth::FrameStack read_stack(const std::filesystem::path& path);

//! Single real-valued frame (kind SIM).
struct SimImage
{
    Grid<double> values;
    Length pixel_size;
    Energy delta_e;
};

void write_image(const std::filesystem::path& path, const SimImage& image);
SimImage read_image(const std::filesystem::path& path);

} // namespace evfield::io
