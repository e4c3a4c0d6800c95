#ifndef MHI_SYNTH_HPP
#define MHI_SYNTH_HPP

// Synthetic clips: a white rectangle on black moving under a simple motion
// program, with seeded +-1 px jitter. Stand-in data for tests and demos.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "imgio.hpp"
#include "rng.hpp"

namespace mhi {

enum class MotionKind { Translate, Oscillate, ExpandContract };

struct MotionProgram {
    MotionKind kind = MotionKind::Translate;
    int dx = 1, dy = 0, speed = 1; // translate: position += speed * (dx, dy) per frame
    char axis = 'x';               // oscillate
    int period = 10;               // oscillate, expand-contract
    int amplitude = 8;             // oscillate: peak offset in px
    int rate = 1;                  // expand-contract: px per frame per side
};

struct SynthSpec {
    std::string name; // class label
    MotionProgram program;
    int frames = 30;
    int width = 64;
    int height = 64;
    int rect_w = 16;
    int rect_h = 16;
    std::uint64_t seed = 0;
    int count = 1; // sequences generated for this class
    bool jitter = true;
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
};

namespace detail {

inline int triangle(int t, int period) {
    const int m = t % period;
    return m <= period / 2 ? m : period - m;
}

inline int require_int(const nlohmann::json& j, const char* key, int fallback, const std::string& ctx) {
    if (!j.contains(key))
        return fallback;
    if (!j.at(key).is_number_integer())
        throw Error(ErrorKind::InvalidArgument, ctx + ": '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

// Extent of the motion relative to the base position, before jitter.
struct Excursion {
    int min_x = 0, max_x = 0, min_y = 0, max_y = 0, grow = 0;
};

inline Excursion excursion(const SynthSpec& s) {
    Excursion e;
    const auto& p = s.program;
    switch (p.kind) {
    case MotionKind::Translate: {
        const int span_x = p.dx * p.speed * (s.frames - 1);
        const int span_y = p.dy * p.speed * (s.frames - 1);
        e.min_x = std::min(0, span_x);
        e.max_x = std::max(0, span_x);
        e.min_y = std::min(0, span_y);
        e.max_y = std::max(0, span_y);
        break;
    }
    case MotionKind::Oscillate:
        (p.axis == 'x' ? e.min_x : e.min_y) = -p.amplitude;
        (p.axis == 'x' ? e.max_x : e.max_y) = p.amplitude;
        break;
    case MotionKind::ExpandContract:
        e.grow = p.rate * (p.period / 2);
        break;
    }
    return e;
}

} // namespace detail

inline void validate(const SynthSpec& s) {
    const std::string ctx = "synth spec '" + s.name + "'";
    if (s.name.empty())
        throw Error(ErrorKind::InvalidArgument, "synth spec needs a class name");
    if (s.frames < 2)
        throw Error(ErrorKind::InvalidArgument, ctx + ": frames must be >= 2");
    if (s.width < 1 || s.height < 1 || s.rect_w < 1 || s.rect_h < 1)
        throw Error(ErrorKind::InvalidArgument, ctx + ": sizes must be positive");
    if (s.count < 1)
        throw Error(ErrorKind::InvalidArgument, ctx + ": count must be >= 1");
    const auto& p = s.program;
    if (p.kind == MotionKind::Translate && (p.speed < 1 || (p.dx == 0 && p.dy == 0)))
        throw Error(ErrorKind::InvalidArgument, ctx + ": translate needs speed >= 1 and a nonzero direction");
    if (p.kind != MotionKind::Translate && p.period < 2)
        throw Error(ErrorKind::InvalidArgument, ctx + ": period must be >= 2");
    if (p.kind == MotionKind::Oscillate && (p.amplitude < 1 || (p.axis != 'x' && p.axis != 'y')))
        throw Error(ErrorKind::InvalidArgument, ctx + ": oscillate needs amplitude >= 1 and axis x|y");
    if (p.kind == MotionKind::ExpandContract && p.rate < 1)
        throw Error(ErrorKind::InvalidArgument, ctx + ": rate must be >= 1");
    const auto e = detail::excursion(s);
    const int margin = s.jitter ? 1 : 0;
    if (s.rect_w + 2 * e.grow + (e.max_x - e.min_x) + 2 * margin > s.width ||
        s.rect_h + 2 * e.grow + (e.max_y - e.min_y) + 2 * margin > s.height)
        throw Error(ErrorKind::InvalidArgument, ctx + ": motion does not fit inside the image");
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw Error(ErrorKind::InvalidArgument, "synth spec entries must be objects");
    SynthSpec s;
    if (!j.contains("class") || !j.at("class").is_string())
        throw Error(ErrorKind::InvalidArgument, "synth spec needs a string 'class'");
    s.name = j.at("class").get<std::string>();
    const std::string ctx = "synth spec '" + s.name + "'";
    s.frames = detail::require_int(j, "frames", s.frames, ctx);
    s.width = detail::require_int(j, "width", s.width, ctx);
    s.height = detail::require_int(j, "height", s.height, ctx);
    s.rect_w = detail::require_int(j, "rect_w", s.rect_w, ctx);
    s.rect_h = detail::require_int(j, "rect_h", s.rect_h, ctx);
    s.count = detail::require_int(j, "count", s.count, ctx);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            throw Error(ErrorKind::InvalidArgument, ctx + ": 'seed' must be a non-negative integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("jitter"))
        s.jitter = j.at("jitter").get<bool>();
    if (!j.contains("program") || !j.at("program").is_object())
        throw Error(ErrorKind::InvalidArgument, ctx + ": missing 'program' object");
    const auto& pj = j.at("program");
    const auto type = pj.value("type", std::string{});
    auto& p = s.program;
    if (type == "translate") {
        p.kind = MotionKind::Translate;
        p.dx = detail::require_int(pj, "dx", 1, ctx);
        p.dy = detail::require_int(pj, "dy", 0, ctx);
        p.speed = detail::require_int(pj, "speed", 1, ctx);
    } else if (type == "oscillate") {
        p.kind = MotionKind::Oscillate;
        const auto axis = pj.value("axis", std::string("x"));
        p.axis = axis.size() == 1 ? axis[0] : '?';
        p.period = detail::require_int(pj, "period", 10, ctx);
        p.amplitude = detail::require_int(pj, "amplitude", 8, ctx);
    } else if (type == "expand-contract") {
        p.kind = MotionKind::ExpandContract;
        p.rate = detail::require_int(pj, "rate", 1, ctx);
        p.period = detail::require_int(pj, "period", 10, ctx);
    } else {
        throw Error(ErrorKind::InvalidArgument, ctx + ": unknown program type '" + type + "'");
    }
    validate(s);
    return s;
}

/// Accepts either a JSON array of specs or a single spec object.
inline std::vector<SynthSpec> parse_synth_specs(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("synth spec: ") + e.what());
    }
    std::vector<SynthSpec> specs;
    try {
        if (j.is_array())
            for (const auto& e : j)
                specs.push_back(synth_spec_from_json(e));
        else
            specs.push_back(synth_spec_from_json(j));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("synth spec: ") + e.what());
    }
    return specs;
}

/// Rectangle of frame `t` given the base position and per-frame jitter.
inline Rect synth_rect(const SynthSpec& s, int base_x, int base_y, int t, int jx = 0, int jy = 0) {
    const auto& p = s.program;
    Rect r{base_x + jx, base_y + jy, s.rect_w, s.rect_h};
    switch (p.kind) {
    case MotionKind::Translate:
        r.x += p.dx * p.speed * t;
        r.y += p.dy * p.speed * t;
        break;
    case MotionKind::Oscillate: {
        const int off = static_cast<int>(
            std::lround(p.amplitude * std::sin(2.0 * std::numbers::pi * double(t) / double(p.period))));
        (p.axis == 'x' ? r.x : r.y) += off;
        break;
    }
    case MotionKind::ExpandContract: {
        const int g = p.rate * detail::triangle(t, p.period);
        r.x -= g;
        r.y -= g;
        r.w += 2 * g;
        r.h += 2 * g;
        break;
    }
    }
    return r;
}

inline GrayFrame draw_rect(int width, int height, const Rect& r) {
    GrayFrame f{static_cast<std::size_t>(width), static_cast<std::size_t>(height)};
    for (int y = std::max(0, r.y); y < std::min(height, r.y + r.h); ++y)
        for (int x = std::max(0, r.x); x < std::min(width, r.x + r.w); ++x)
            f.at(std::size_t(x), std::size_t(y)) = 255;
    return f;
}

/// Frames of sequence `index` of `s`. Base position and jitter come from
/// an Rng seeded by (s.seed, index).
inline std::vector<GrayFrame> synth_frames(const SynthSpec& s, int index) {
    validate(s);
    std::uint64_t mix = s.seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(index + 1));
    Rng rng(Rng::splitmix64(mix));
    const auto e = detail::excursion(s);
    const int margin = s.jitter ? 1 : 0;
    // feasible base range keeps the rectangle fully inside every frame
    const int lo_x = margin + e.grow - e.min_x;
    const int hi_x = s.width - s.rect_w - margin - e.grow - e.max_x;
    const int lo_y = margin + e.grow - e.min_y;
    const int hi_y = s.height - s.rect_h - margin - e.grow - e.max_y;
    const int base_x = lo_x + int(rng.below(std::uint64_t(hi_x - lo_x + 1)));
    const int base_y = lo_y + int(rng.below(std::uint64_t(hi_y - lo_y + 1)));

    std::vector<GrayFrame> frames;
    frames.reserve(std::size_t(s.frames));
    for (int t = 0; t < s.frames; ++t) {
        int jx = 0, jy = 0;
        if (s.jitter) {
            jx = int(rng.below(3)) - 1;
            jy = int(rng.below(3)) - 1;
        }
        frames.push_back(draw_rect(s.width, s.height, synth_rect(s, base_x, base_y, t, jx, jy)));
    }
    return frames;
}

/// Writes every sequence under `out_dir/<class>_<NNN>/` and returns the
/// manifest records (dirs relative to `out_dir`).
inline std::vector<SequenceRecord> write_synth(const std::vector<SynthSpec>& specs,
                                               const std::filesystem::path& out_dir) {
    std::vector<SequenceRecord> records;
    std::filesystem::create_directories(out_dir);
    for (const auto& s : specs) {
        for (int n = 0; n < s.count; ++n) {
            std::string idx = std::to_string(n);
            idx.insert(0, idx.size() < 3 ? 3 - idx.size() : 0, '0');
            const std::string rel = s.name + "_" + idx;
            const auto dir = out_dir / rel;
            std::filesystem::create_directories(dir);
            const auto frames = synth_frames(s, n);
            for (std::size_t t = 0; t < frames.size(); ++t)
                write_pgm_file(frame_path(dir, std::int64_t(t)), frames[t]);
            records.push_back({rel, s.name, 0, std::int64_t(frames.size()) - 1});
        }
    }
    return records;
}

} // namespace mhi

#endif // MHI_SYNTH_HPP
