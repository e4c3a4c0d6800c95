#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mhi;

namespace {

// Direct 3x3 convolution with clamped indices, rounded half-up.
GrayFrame smooth_oracle(const GrayFrame& f) {
    static const int k[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
    GrayFrame out(f.width, f.height);
    const auto W = static_cast<long>(f.width), H = static_cast<long>(f.height);
    for (long y = 0; y < H; ++y)
        for (long x = 0; x < W; ++x) {
            int s = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long xx = std::clamp(x + dx, 0L, W - 1), yy = std::clamp(y + dy, 0L, H - 1);
                    s += k[dy + 1][dx + 1] * f.at(std::size_t(xx), std::size_t(yy));
                }
            out.at(std::size_t(x), std::size_t(y)) = std::uint8_t(std::floor(s / 16.0 + 0.5));
        }
    return out;
}

BinaryMask block(std::size_t w, std::size_t h, std::size_t x0, std::size_t y0, std::size_t bw, std::size_t bh) {
    BinaryMask m(w, h);
    for (std::size_t y = y0; y < y0 + bh; ++y)
        for (std::size_t x = x0; x < x0 + bw; ++x)
            m.at(x, y) = 1;
    return m;
}

} // namespace

TEST(GaussianSmooth, PreservesConstant) {
    const GrayFrame f(7, 5, 100);
    EXPECT_EQ(gaussian_smooth(f), f);
}

TEST(GaussianSmooth, CenterImpulse) {
    GrayFrame f(3, 3, 0);
    f.at(1, 1) = 16;
    const auto s = gaussian_smooth(f);
    EXPECT_EQ(s.at(1, 1), 4);
    EXPECT_EQ(s.at(1, 0), 2);
    EXPECT_EQ(s.at(0, 1), 2);
    EXPECT_EQ(s.at(2, 1), 2);
    EXPECT_EQ(s.at(1, 2), 2);
    EXPECT_EQ(s.at(0, 0), 1);
    EXPECT_EQ(s.at(2, 2), 1);
}

TEST(GaussianSmooth, SinglePixel) {
    const GrayFrame f(1, 1, std::vector<std::uint8_t>{42});
    EXPECT_EQ(gaussian_smooth(f), f);
}

TEST(GaussianSmooth, MatchesDirectConvolutionAndStaysInRange) {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const auto f = mhi::testing::random_frame(rng, 1 + rng.below(12), 1 + rng.below(12));
        const auto s = gaussian_smooth(f);
        EXPECT_EQ(s, smooth_oracle(f));
        const auto [lo, hi] = std::minmax_element(f.data.begin(), f.data.end());
        for (auto v : s.data) {
            EXPECT_GE(int(v), int(*lo) - 1);
            EXPECT_LE(int(v), int(*hi) + 1);
        }
    }
}

TEST(FrameDiff, NoMotion) {
    Rng rng(5);
    const auto f = mhi::testing::random_frame(rng, 6, 6);
    for (int theta : {0, 25, 255})
        EXPECT_EQ(frame_diff(f, f, theta).count(), 0u);
}

TEST(FrameDiff, StrictThreshold) {
    const GrayFrame prev(1, 1, std::vector<std::uint8_t>{10});
    const GrayFrame curr(1, 1, std::vector<std::uint8_t>{50});
    EXPECT_EQ(frame_diff(prev, curr, 25).data[0], 1);
    EXPECT_EQ(frame_diff(prev, curr, 40).data[0], 0);
    EXPECT_EQ(frame_diff(prev, curr, 39).data[0], 1);
}

TEST(FrameDiff, ExhaustivePixelOracleAndSymmetry) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = mhi::testing::random_frame(rng, 8, 8);
        const auto b = mhi::testing::random_frame(rng, 8, 8);
        const int theta = int(rng.below(256));
        const auto m = frame_diff(a, b, theta);
        for (std::size_t i = 0; i < 64; ++i)
            EXPECT_EQ(m.data[i], std::abs(int(a.data[i]) - int(b.data[i])) > theta ? 1 : 0);
        EXPECT_EQ(m, frame_diff(b, a, theta));
    }
}

TEST(FrameDiff, DimensionMismatch) {
    try {
        frame_diff(GrayFrame(2, 2), GrayFrame(2, 3), 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(MorphOpen, RemovesIsolatedPixel) {
    BinaryMask m(5, 5);
    m.at(2, 2) = 1;
    EXPECT_EQ(morph_open(m).count(), 0u);
}

TEST(MorphOpen, KeepsSolidBlock) {
    const auto m = block(8, 8, 2, 2, 4, 4);
    EXPECT_EQ(morph_open(m), m);
}

TEST(MorphOpen, AllZero) {
    const BinaryMask m(6, 4);
    EXPECT_EQ(morph_open(m), m);
}

TEST(MorphOpen, BlockTouchingBorderIsErodedAway) {
    // zero padding: a 2-wide strip along the border cannot contain the element
    const auto m = block(6, 6, 0, 0, 2, 6);
    EXPECT_EQ(morph_open(m).count(), 0u);
    // 3-wide: erodes to column 1 rows 1..4, which dilates back to the strip
    const auto strip = block(6, 6, 0, 0, 3, 6);
    EXPECT_EQ(erode(strip), block(6, 6, 1, 1, 1, 4));
    EXPECT_EQ(morph_open(strip), strip);
}

TEST(MorphOpen, ThinLineRemoved) {
    const auto m = block(10, 10, 1, 4, 8, 2);
    EXPECT_EQ(morph_open(m).count(), 0u);
}

TEST(MorphOpen, AntiExtensiveAndIdempotent) {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = mhi::testing::random_mask(rng, 16, 16, 0.6);
        const auto o = morph_open(m);
        for (std::size_t i = 0; i < m.data.size(); ++i)
            EXPECT_LE(o.data[i], m.data[i]);
        EXPECT_EQ(morph_open(o), o);
    }
}
