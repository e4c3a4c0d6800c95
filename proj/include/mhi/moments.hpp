#ifndef MHI_MOMENTS_HPP
#define MHI_MOMENTS_HPP

// Raw, central and scale-normalised image moments plus the Hu and Flusser
// invariants used as classifier features.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "temporal.hpp"

namespace mhi {

/// Anything addressable as I(x, y) with x = column, y = row (zero-based).
template <class Image>
concept Raster = requires(const Image& img, std::size_t i) {
    { img.width } -> std::convertible_to<std::size_t>;
    { img.height } -> std::convertible_to<std::size_t>;
    { img.at(i, i) } -> std::convertible_to<double>;
};

/// Owning real-valued raster, mainly for tests and intermediate results.
struct RealRaster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;

    RealRaster() = default;
    RealRaster(std::size_t w, std::size_t h) : width(w), height(h), values(w * h, 0.0) {}

    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
    double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
};

inline constexpr std::size_t moment_order = 3;

/// All moments with i + j <= 3. Arrays are indexed [p][q]; entries with
/// p + q > 3 stay zero. `nu` is filled only for 2 <= p + q <= 3.
struct MomentSet {
    std::array<std::array<double, 4>, 4> raw{};
    double xbar = 0.0;
    double ybar = 0.0;
    std::array<std::array<double, 4>, 4> central{};
    std::array<std::array<double, 4>, 4> nu{};

    double m(int i, int j) const { return raw[i][j]; }
    double mu(int p, int q) const { return central[p][q]; }
    double n(int p, int q) const { return nu[p][q]; }
};

inline constexpr std::size_t feature_count = 16;
using FeatureVector = std::array<double, feature_count>;
using HuMoments = std::array<double, 7>;

struct LabeledSample {
    FeatureVector features{};
    std::string label;
    std::string source; // sequence id + frame span
};

namespace detail {

inline double ipow(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i)
        r *= base;
    return r;
}

struct Bounds {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    bool empty = true;
};

// Top-left corner of the non-zero support. Central moments are accumulated
// in coordinates relative to it, so an integer translation of the input
// reproduces the same floating-point operations.
template <Raster Image>
Bounds support_origin(const Image& img) {
    Bounds b;
    b.x0 = img.width;
    b.y0 = img.height;
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            if (static_cast<double>(img.at(x, y)) != 0.0) {
                b.x0 = std::min(b.x0, x);
                b.y0 = std::min(b.y0, y);
                b.empty = false;
            }
    if (b.empty)
        b.x0 = b.y0 = 0;
    return b;
}

} // namespace detail

template <Raster Image>
double raw_moment(const Image& img, int i, int j) {
    if (i < 0 || j < 0)
        throw Error(ErrorKind::InvalidArgument, "moment orders must be non-negative");
    double sum = 0.0;
    for (std::size_t y = 0; y < img.height; ++y) {
        const double yj = detail::ipow(double(y), j);
        for (std::size_t x = 0; x < img.width; ++x) {
            const double v = static_cast<double>(img.at(x, y));
            if (v != 0.0)
                sum += detail::ipow(double(x), i) * yj * v;
        }
    }
    return sum;
}

/// (M10/M00, M01/M00); throws ZeroMass on an empty image.
template <Raster Image>
std::array<double, 2> centroid(const Image& img) {
    const double m00 = raw_moment(img, 0, 0);
    if (!(m00 > 0.0))
        throw Error(ErrorKind::ZeroMass, "centroid of zero-mass image");
    const auto b = detail::support_origin(img);
    // local-frame centroid shifted back keeps translation exactness
    double m10 = 0.0, m01 = 0.0, mass = 0.0;
    for (std::size_t y = b.y0; y < img.height; ++y)
        for (std::size_t x = b.x0; x < img.width; ++x) {
            const double v = static_cast<double>(img.at(x, y));
            mass += v;
            m10 += double(x - b.x0) * v;
            m01 += double(y - b.y0) * v;
        }
    return {double(b.x0) + m10 / mass, double(b.y0) + m01 / mass};
}

namespace detail {

template <Raster Image>
void accumulate_central(const Image& img, MomentSet& ms) {
    const auto b = support_origin(img);
    double mass = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t y = b.y0; y < img.height; ++y)
        for (std::size_t x = b.x0; x < img.width; ++x) {
            const double v = static_cast<double>(img.at(x, y));
            mass += v;
            sx += double(x - b.x0) * v;
            sy += double(y - b.y0) * v;
        }
    const double lx = sx / mass;
    const double ly = sy / mass;
    ms.xbar = double(b.x0) + lx;
    ms.ybar = double(b.y0) + ly;
    for (auto& row : ms.central)
        row.fill(0.0);
    for (std::size_t y = b.y0; y < img.height; ++y) {
        const double dy = double(y - b.y0) - ly;
        for (std::size_t x = b.x0; x < img.width; ++x) {
            const double v = static_cast<double>(img.at(x, y));
            if (v == 0.0)
                continue;
            const double dx = double(x - b.x0) - lx;
            double xp = v;
            for (int p = 0; p <= 3; ++p) {
                double term = xp;
                for (int q = 0; p + q <= 3; ++q) {
                    ms.central[p][q] += term;
                    term *= dy;
                }
                xp *= dx;
            }
        }
    }
}

} // namespace detail

template <Raster Image>
double central_moment(const Image& img, int p, int q) {
    if (p < 0 || q < 0)
        throw Error(ErrorKind::InvalidArgument, "moment orders must be non-negative");
    if (!(raw_moment(img, 0, 0) > 0.0))
        throw Error(ErrorKind::ZeroMass, "central moment of zero-mass image");
    if (p + q <= 3) {
        MomentSet ms;
        detail::accumulate_central(img, ms);
        return ms.central[p][q];
    }
    const auto c = centroid(img);
    double sum = 0.0;
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            sum += detail::ipow(double(x) - c[0], p) * detail::ipow(double(y) - c[1], q) *
                   static_cast<double>(img.at(x, y));
    return sum;
}

/// Raw, central and normalised moments up to order 3.
template <Raster Image>
MomentSet scale_invariant_moments(const Image& img) {
    MomentSet ms;
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            const double v = static_cast<double>(img.at(x, y));
            if (v == 0.0)
                continue;
            double xi = v;
            for (int i = 0; i <= 3; ++i) {
                double term = xi;
                for (int j = 0; i + j <= 3; ++j) {
                    ms.raw[i][j] += term;
                    term *= double(y);
                }
                xi *= double(x);
            }
        }
    }
    if (!(ms.raw[0][0] > 0.0))
        throw Error(ErrorKind::ZeroMass, "moments of zero-mass image");
    detail::accumulate_central(img, ms);
    const double mu00 = ms.central[0][0];
    for (int p = 0; p <= 3; ++p)
        for (int q = 0; p + q <= 3; ++q)
            if (p + q >= 2)
                ms.nu[p][q] = ms.central[p][q] / std::pow(mu00, 1.0 + (p + q) / 2.0);
    return ms;
}

/// The seven Hu invariants. h7 changes sign under reflection.
inline HuMoments hu_moments(const MomentSet& ms) {
    const double n20 = ms.n(2, 0), n02 = ms.n(0, 2), n11 = ms.n(1, 1);
    const double n30 = ms.n(3, 0), n03 = ms.n(0, 3), n21 = ms.n(2, 1), n12 = ms.n(1, 2);

    const double a = n30 + n12;  // shared third-order sums
    const double b = n21 + n03;
    const double c = n30 - 3.0 * n12;
    const double d = 3.0 * n21 - n03;

    HuMoments h{};
    h[0] = n20 + n02;
    h[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
    h[2] = c * c + d * d;
    h[3] = a * a + b * b;
    h[4] = c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b);
    h[5] = (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b;
    h[6] = d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b);
    return h;
}

/// Flusser's independent third-order invariant.
inline double flusser_i8(const MomentSet& ms) {
    const double a = ms.n(3, 0) + ms.n(1, 2);
    const double b = ms.n(0, 3) + ms.n(2, 1);
    return ms.n(1, 1) * (a * a - b * b) - (ms.n(2, 0) - ms.n(0, 2)) * a * b;
}

inline constexpr double signed_log_epsilon = 1e-12;

/// sign(f) * log10(1 + |f| / eps); monotone and sign-preserving.
inline double signed_log(double f) {
    const double mag = std::log10(1.0 + std::abs(f) / signed_log_epsilon);
    return f < 0.0 ? -mag : mag;
}

/// The eight invariants [h1..h7, I8] of one raster, unconditioned.
template <Raster Image>
std::array<double, 8> invariants(const Image& img) {
    const auto ms = scale_invariant_moments(img);
    const auto hu = hu_moments(ms);
    std::array<double, 8> out{};
    std::copy(hu.begin(), hu.end(), out.begin());
    out[7] = flusser_i8(ms);
    return out;
}

/// [hu(mhi), i8(mhi), hu(mei), i8(mei)] with signed-log conditioning.
/// Throws NoMotion when the history has zero mass.
inline FeatureVector feature_vector(const TemporalTemplate& t) {
    if (!(t.mhi.mass() > 0.0))
        throw Error(ErrorKind::NoMotion, "template has no motion");
    const auto mhi_inv = invariants(t.mhi);
    const auto mei_inv = invariants(t.mei);
    FeatureVector f{};
    for (std::size_t i = 0; i < 8; ++i) {
        f[i] = signed_log(mhi_inv[i]);
        f[8 + i] = signed_log(mei_inv[i]);
    }
    return f;
}

} // namespace mhi

#endif // MHI_MOMENTS_HPP
