#include "evfield/stack_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <span>
#include <vector>

#include "evfield/error.hpp"

namespace evfield::io {
namespace {

constexpr std::array<char, 4> magic = {'E', 'V', 'L', 'S'};

class Writer
{
  public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc)
    {
        if (!out_)
        {
            throw DataError("cannot open " + path.string() + " for writing");
        }
    }

    template <class T>
    void put(T value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        std::array<unsigned char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
        {
            std::ranges::reverse(bytes);
        }
        out_.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
    }

    void raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

    template <class T>
    void put_span(std::span<const T> values)
    {
        std::vector<unsigned char> bytes(values.size() * sizeof(T));
        std::memcpy(bytes.data(), values.data(), bytes.size());
        if constexpr (std::endian::native == std::endian::big)
        {
            for (std::size_t i = 0; i < bytes.size(); i += sizeof(T))
            {
                std::reverse(bytes.begin() + i, bytes.begin() + i + sizeof(T));
            }
        }
        raw(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }

    void finish()
    {
        out_.flush();
        if (!out_)
        {
            throw DataError("write failed");
        }
    }

  private:
    std::ofstream out_;
};

class Reader
{
  public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path)
    {
        if (!in_)
        {
            throw DataError("cannot open " + path.string());
        }
    }

    template <class T>
    T get()
    {
        std::array<unsigned char, sizeof(T)> bytes;
        in_.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
        if (!in_)
        {
            throw DataError(path_.string() + ": truncated file");
        }
        if constexpr (std::endian::native == std::endian::big)
        {
            std::ranges::reverse(bytes);
        }
        T value;
        std::memcpy(&value, bytes.data(), sizeof(T));
        return value;
    }

    void raw(char* data, std::size_t n)
    {
        in_.read(data, static_cast<std::streamsize>(n));
        if (!in_)
        {
            throw DataError(path_.string() + ": truncated file");
        }
    }

    template <class T>
    void get_span(std::span<T> values)
    {
        std::vector<unsigned char> bytes(values.size() * sizeof(T));
        raw(reinterpret_cast<char*>(bytes.data()), bytes.size());
        if constexpr (std::endian::native == std::endian::big)
        {
            for (std::size_t i = 0; i < bytes.size(); i += sizeof(T))
            {
                std::reverse(bytes.begin() + i, bytes.begin() + i + sizeof(T));
            }
        }
        std::memcpy(values.data(), bytes.data(), bytes.size());
    }

    void expect_end()
    {
        if (in_.peek() != std::char_traits<char>::eof())
        {
            throw DataError(path_.string() + ": trailing bytes after payload");
        }
    }

  private:
    std::ifstream in_;
    std::filesystem::path path_;
};

struct Header
{
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t n_frames = 0;
    double pixel_size = 0;
    double delta_e = 0;
    std::uint8_t kind = 0;
};

void write_header(Writer& w, const Header& h)
{
    w.raw(magic.data(), magic.size());
    w.put(stack_format_version);
    w.put(h.width);
    w.put(h.height);
    w.put(h.n_frames);
    w.put(h.pixel_size);
    w.put(h.delta_e);
    w.put(h.kind);
}

Header read_header(Reader& r, const std::filesystem::path& path)
{
    std::array<char, 4> m{};
    r.raw(m.data(), m.size());
    if (m != magic)
    {
        throw DataError(path.string() + ": not an EVLS stack file");
    }
    if (const auto version = r.get<std::uint16_t>(); version != stack_format_version)
    {
        throw DataError(path.string() + ": unsupported format version " + std::to_string(version));
    }
    Header h;
    h.width = r.get<std::uint32_t>();
    h.height = r.get<std::uint32_t>();
    h.n_frames = r.get<std::uint32_t>();
    h.pixel_size = r.get<double>();
    h.delta_e = r.get<double>();
    h.kind = r.get<std::uint8_t>();
    constexpr auto max_dim = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
    if (h.width == 0 || h.height == 0 || h.width > max_dim || h.height > max_dim)
    {
        throw DataError(path.string() + ": invalid frame dimensions");
    }
    if (h.kind > static_cast<std::uint8_t>(synth::StackKind::Simulated))
    {
        throw DataError(path.string() + ": unknown stack kind");
    }
    return h;
}

} // namespace

void write_stack(const std::filesystem::path& path, const synth::FrameStack& stack)
{
    if (stack.kind == synth::StackKind::Simulated)
    {
        throw DataError("simulated images are written with write_image");
    }
    Writer w(path);
    write_header(w, {static_cast<std::uint32_t>(stack.geometry.width),
                     static_cast<std::uint32_t>(stack.geometry.height),
                     static_cast<std::uint32_t>(stack.size()),
                     stack.geometry.pixel_size.value(),
                     stack.geometry.delta_e.value(),
                     static_cast<std::uint8_t>(stack.kind)});
    for (const synth::Frame& f : stack.frames)
    {
        w.put_span(std::span<const std::int32_t>(f.counts.data));
    }
    w.finish();
}

synth::FrameStack read_stack(const std::filesystem::path& path)
{
    Reader r(path);
    const Header h = read_header(r, path);
    if (h.kind == static_cast<std::uint8_t>(synth::StackKind::Simulated))
    {
        throw DataError(path.string() + ": holds a simulated image, not a count stack");
    }
    synth::FrameStack stack;
    stack.geometry = {static_cast<int>(h.width), static_cast<int>(h.height), Length(h.pixel_size), Energy(h.delta_e)};
    stack.kind = static_cast<synth::StackKind>(h.kind);
    stack.frames.resize(h.n_frames);
    for (std::uint32_t f = 0; f < h.n_frames; ++f)
    {
        synth::Frame& frame = stack.frames[f];
        frame.index = static_cast<int>(f);
        frame.counts = Grid<std::int32_t>(stack.geometry.width, stack.geometry.height);
        r.get_span(std::span<std::int32_t>(frame.counts.data));
    }
    r.expect_end();
    return stack;
}

void write_image(const std::filesystem::path& path, const SimImage& image)
{
    Writer w(path);
    write_header(w, {static_cast<std::uint32_t>(image.values.width),
                     static_cast<std::uint32_t>(image.values.height),
                     1u,
                     image.pixel_size.value(),
                     image.delta_e.value(),
                     static_cast<std::uint8_t>(synth::StackKind::Simulated)});
    w.put_span(std::span<const double>(image.values.data));
    w.finish();
}

SimImage read_image(const std::filesystem::path& path)
{
    Reader r(path);
    const Header h = read_header(r, path);
    if (h.kind != static_cast<std::uint8_t>(synth::StackKind::Simulated) || h.n_frames != 1)
    {
        throw DataError(path.string() + ": not a single-frame simulated image");
    }
    SimImage img;
    img.pixel_size = Length(h.pixel_size);
    img.delta_e = Energy(h.delta_e);
    img.values = Grid<double>(static_cast<int>(h.width), static_cast<int>(h.height));
    r.get_span(std::span<double>(img.values.data));
    r.expect_end();
    return img;
}

} // namespace evfield::io
