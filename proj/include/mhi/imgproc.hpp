#ifndef MHI_IMGPROC_HPP
#define MHI_IMGPROC_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "error.hpp"
#include "imgio.hpp"

namespace mhi {

struct BinaryMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> data; // row-major, values in {0,1}

    BinaryMask() = default;
    BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), data(w * h, 0) {}

    std::uint8_t at(std::size_t x, std::size_t y) const { return data[y * width + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return data[y * width + x]; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
    }
    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// 3x3 binomial blur ([1,2,1] x [1,2,1] / 16) with edge replication.
/// Integer arithmetic, rounded half-up.
inline GrayFrame gaussian_smooth(const GrayFrame& frame) {
    const auto w = frame.width;
    const auto h = frame.height;
    // horizontal pass keeps the unnormalised sum (max 4*255)
    std::vector<int> tmp(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xl = x == 0 ? 0 : x - 1;
            const std::size_t xr = x + 1 == w ? x : x + 1;
            tmp[y * w + x] = frame.at(xl, y) + 2 * frame.at(x, y) + frame.at(xr, y);
        }
    }
    GrayFrame out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t yu = y == 0 ? 0 : y - 1;
        const std::size_t yd = y + 1 == h ? y : y + 1;
        for (std::size_t x = 0; x < w; ++x) {
            const int sum = tmp[yu * w + x] + 2 * tmp[y * w + x] + tmp[yd * w + x];
            out.at(x, y) = static_cast<std::uint8_t>((sum + 8) / 16);
        }
    }
    return out;
}

/// mask = |curr - prev| > theta (strict).
inline BinaryMask frame_diff(const GrayFrame& prev, const GrayFrame& curr, int theta) {
    if (!prev.same_shape(curr))
        throw Error(ErrorKind::DimensionMismatch, "frame_diff on differently sized frames");
    if (theta < 0 || theta > 255)
        throw Error(ErrorKind::InvalidArgument, "theta must be in [0,255]");
    BinaryMask mask(curr.width, curr.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = std::abs(int(curr.data[i]) - int(prev.data[i])) > theta ? 1 : 0;
    return mask;
}

/// 3x3 square erosion; out-of-bounds neighbours count as 0.
inline BinaryMask erode(const BinaryMask& in) {
    const auto w = in.width;
    const auto h = in.height;
    BinaryMask out(w, h);
    if (w < 3 || h < 3)
        return out;
    for (std::size_t y = 1; y + 1 < h; ++y) {
        for (std::size_t x = 1; x + 1 < w; ++x) {
            std::uint8_t v = 1;
            for (std::size_t dy = 0; dy < 3 && v; ++dy)
                for (std::size_t dx = 0; dx < 3; ++dx)
                    if (!in.at(x + dx - 1, y + dy - 1)) {
                        v = 0;
                        break;
                    }
            out.at(x, y) = v;
        }
    }
    return out;
}

/// 3x3 square dilation; out-of-bounds neighbours contribute nothing.
inline BinaryMask dilate(const BinaryMask& in) {
    const auto w = in.width;
    const auto h = in.height;
    BinaryMask out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!in.at(x, y))
                continue;
            const std::size_t x0 = x == 0 ? 0 : x - 1, x1 = std::min(x + 1, w - 1);
            const std::size_t y0 = y == 0 ? 0 : y - 1, y1 = std::min(y + 1, h - 1);
            for (std::size_t yy = y0; yy <= y1; ++yy)
                for (std::size_t xx = x0; xx <= x1; ++xx)
                    out.at(xx, yy) = 1;
        }
    }
    return out;
}

inline BinaryMask morph_open(const BinaryMask& mask) { return dilate(erode(mask)); }

} // namespace mhi

#endif // MHI_IMGPROC_HPP
