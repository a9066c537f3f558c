#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evfield {

//! Row-major 2-D grid; rows run parallel to the sample/vacuum interface.
template <class T>
struct Grid
{
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& operator()(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    const T& operator()(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }

    std::span<T> row(int r) { return {data.data() + static_cast<std::size_t>(r) * width, static_cast<std::size_t>(width)}; }
    std::span<const T> row(int r) const
    {
        return {data.data() + static_cast<std::size_t>(r) * width, static_cast<std::size_t>(width)};
    }

    [[nodiscard]] std::size_t size() const { return data.size(); }
    friend bool operator==(const Grid&, const Grid&) = default;
};

} // namespace evfield
