#ifndef MHI_TEMPORAL_HPP
#define MHI_TEMPORAL_HPP

// Motion-history / motion-energy accumulation over a tau-frame window.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "imgio.hpp"
#include "imgproc.hpp"

namespace mhi {

inline constexpr int default_tau = 300;
inline constexpr int default_theta = 25;

struct MotionHistory {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values; // row-major, each in [0, tau]
    int tau = 1;

    MotionHistory() = default;
    MotionHistory(std::size_t w, std::size_t h, int tau_frames) : width(w), height(h), values(w * h, 0.0), tau(tau_frames) {
        if (tau_frames < 1)
            throw Error(ErrorKind::InvalidArgument, "tau must be >= 1");
    }

    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
    double mass() const {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    friend bool operator==(const MotionHistory&, const MotionHistory&) = default;
};

struct TemporalTemplate {
    MotionHistory mhi;
    BinaryMask mei;
    std::pair<std::int64_t, std::int64_t> frame_span{0, 0}; // absolute, inclusive
};

/// One step of the history recurrence: tau where the mask fires, otherwise
/// decay by one frame and floor at zero.
inline MotionHistory mhi_step(const MotionHistory& prev, const BinaryMask& mask) {
    if (prev.width != mask.width || prev.height != mask.height)
        throw Error(ErrorKind::DimensionMismatch, "mhi_step: mask and history differ in size");
    if (prev.tau < 1)
        throw Error(ErrorKind::InvalidArgument, "tau must be >= 1");
    MotionHistory next = prev;
    const double tau = prev.tau;
    for (std::size_t i = 0; i < next.values.size(); ++i)
        next.values[i] = mask.data[i] ? tau : std::max(0.0, prev.values[i] - 1.0);
    return next;
}

/// Cleaned motion mask between two raw frames: smooth, difference, open.
inline BinaryMask motion_mask(const GrayFrame& prev, const GrayFrame& curr, int theta) {
    return morph_open(frame_diff(gaussian_smooth(prev), gaussian_smooth(curr), theta));
}

/// Builds MHI and MEI from the trailing min(n-1, tau) frame transitions of
/// `frames`. `first_index` is the absolute index of frames[0].
inline TemporalTemplate build_templates(std::span<const GrayFrame> frames, int theta, int tau,
                                        std::int64_t first_index = 0) {
    if (frames.size() < 2)
        throw Error(ErrorKind::TooFewFrames, "need at least 2 frames, got " + std::to_string(frames.size()));
    if (tau < 1)
        throw Error(ErrorKind::InvalidArgument, "tau must be >= 1");
    const auto& shape = frames.front();
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (!frames[i].same_shape(shape))
            throw Error(ErrorKind::DimensionMismatch, "frame size differs", first_index + std::int64_t(i));

    const std::size_t steps = std::min(frames.size() - 1, static_cast<std::size_t>(tau));
    const std::size_t first = frames.size() - 1 - steps; // first frame that takes part

    TemporalTemplate t;
    t.mhi = MotionHistory(shape.width, shape.height, tau);
    t.mei = BinaryMask(shape.width, shape.height);
    t.frame_span = {first_index + std::int64_t(first), first_index + std::int64_t(frames.size() - 1)};

    GrayFrame prev = gaussian_smooth(frames[first]);
    for (std::size_t i = first + 1; i < frames.size(); ++i) {
        GrayFrame curr = gaussian_smooth(frames[i]);
        const BinaryMask mask = morph_open(frame_diff(prev, curr, theta));
        t.mhi = mhi_step(t.mhi, mask);
        for (std::size_t p = 0; p < mask.data.size(); ++p)
            t.mei.data[p] |= mask.data[p];
        prev = std::move(curr);
    }
    return t;
}

inline TemporalTemplate build_templates(const FrameSequence& seq, int theta, int tau) {
    return build_templates(std::span<const GrayFrame>(seq.frames), theta, tau, seq.record.start);
}

/// Display form: round(255 * value / tau), half-up.
inline GrayFrame normalize_mhi(const MotionHistory& mhi) {
    if (mhi.tau < 1)
        throw Error(ErrorKind::InvalidArgument, "tau must be >= 1");
    GrayFrame out(mhi.width, mhi.height);
    for (std::size_t i = 0; i < mhi.values.size(); ++i) {
        const double scaled = std::floor(255.0 * mhi.values[i] / mhi.tau + 0.5);
        out.data[i] = static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
    }
    return out;
}

/// MEI scaled to 0/255 for display.
inline GrayFrame render_mei(const BinaryMask& mei) {
    GrayFrame out(mei.width, mei.height);
    for (std::size_t i = 0; i < mei.data.size(); ++i)
        out.data[i] = mei.data[i] ? 255 : 0;
    return out;
}

} // namespace mhi

#endif // MHI_TEMPORAL_HPP
