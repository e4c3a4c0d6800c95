#ifndef MHI_DIAGNOSTICS_HPP
#define MHI_DIAGNOSTICS_HPP

#include <cstddef>
#include <vector>

#include "imgproc.hpp"

namespace mhi {

struct BlobDiagnostic {
    std::size_t component_count = 0;
    std::size_t large_components = 0; // components above the area fraction
    bool warning = false;
};

/// Sizes of the 8-connected components of `mask`, in raster-scan order of
/// their first pixel.
inline std::vector<std::size_t> component_areas(const BinaryMask& mask) {
    const auto w = mask.width;
    const auto h = mask.height;
    std::vector<std::uint8_t> seen(w * h, 0);
    std::vector<std::size_t> areas;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < w * h; ++start) {
        if (!mask.data[start] || seen[start])
            continue;
        std::size_t area = 0;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            ++area;
            const auto x = p % w, y = p / w;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto nx = static_cast<std::ptrdiff_t>(x) + dx;
                    const auto ny = static_cast<std::ptrdiff_t>(y) + dy;
                    if (nx < 0 || ny < 0 || nx >= std::ptrdiff_t(w) || ny >= std::ptrdiff_t(h))
                        continue;
                    const auto q = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
                    if (mask.data[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
        }
        areas.push_back(area);
    }
    return areas;
}

/// Flags motion energy split over several sizeable regions (a shadow or a
/// second actor): warning when at least two components each cover more
/// than `min_fraction` of the image.
inline BlobDiagnostic detect_secondary_blob(const BinaryMask& mask, double min_fraction = 0.01) {
    const auto areas = component_areas(mask);
    BlobDiagnostic d;
    d.component_count = areas.size();
    const double limit = min_fraction * double(mask.width * mask.height);
    for (auto a : areas)
        if (double(a) > limit)
            ++d.large_components;
    d.warning = d.large_components >= 2;
    return d;
}

} // namespace mhi

#endif // MHI_DIAGNOSTICS_HPP
