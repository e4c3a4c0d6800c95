#ifndef MHI_IMGIO_HPP
#define MHI_IMGIO_HPP

// Grayscale frame container, binary PGM (P5) codec and sequence manifests.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace mhi {

struct GrayFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> data; // row-major

    GrayFrame() = default;
    GrayFrame(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), data(w * h, fill) {}
    GrayFrame(std::size_t w, std::size_t h, std::vector<std::uint8_t> pixels)
        : width(w), height(h), data(std::move(pixels)) {
        if (w == 0 || h == 0 || data.size() != w * h)
            throw Error(ErrorKind::InvalidArgument, "frame data does not match " + std::to_string(w) + "x" +
                                                        std::to_string(h));
    }

    std::uint8_t at(std::size_t x, std::size_t y) const { return data[y * width + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return data[y * width + x]; }

    bool same_shape(const GrayFrame& o) const { return width == o.width && height == o.height; }
    friend bool operator==(const GrayFrame&, const GrayFrame&) = default;
};

struct SequenceRecord {
    std::string dir;
    std::optional<std::string> label;
    std::int64_t start = 0;
    std::int64_t end = 0;

    std::size_t length() const { return static_cast<std::size_t>(end - start + 1); }
    friend bool operator==(const SequenceRecord&, const SequenceRecord&) = default;
};

struct FrameSequence {
    std::vector<GrayFrame> frames;
    SequenceRecord record;
};

namespace detail {

class PgmHeaderReader {
public:
    explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r')
                    ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* field) {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (std::size_t{1} << 31))
                throw Error(ErrorKind::MalformedHeader, std::string("PGM ") + field + " out of range");
            ++pos_;
            ++digits;
        }
        if (digits == 0)
            throw Error(ErrorKind::MalformedHeader, std::string("PGM ") + field + " is not a number");
        return value;
    }

    std::size_t& pos() { return pos_; }
    std::size_t size() const { return bytes_.size(); }
    std::uint8_t byte(std::size_t i) const { return bytes_[i]; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorKind::IoError, "short write to " + path.string());
}

} // namespace detail

/// Decodes a binary PGM. Exactly width*height bytes are consumed after the
/// single whitespace byte that ends the header; trailing bytes are ignored.
inline GrayFrame read_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw Error(ErrorKind::MalformedHeader, "missing P5 magic");
    detail::PgmHeaderReader reader(bytes);
    reader.pos() = 2;
    if (reader.pos() < reader.size() && !std::isspace(reader.byte(reader.pos())) && reader.byte(reader.pos()) != '#')
        throw Error(ErrorKind::MalformedHeader, "missing P5 magic");
    const auto width = reader.read_uint("width");
    const auto height = reader.read_uint("height");
    const auto maxval = reader.read_uint("maxval");
    if (width == 0 || height == 0)
        throw Error(ErrorKind::MalformedHeader, "zero image dimension");
    if (maxval == 0)
        throw Error(ErrorKind::MalformedHeader, "maxval must be positive");
    if (maxval > 255)
        throw Error(ErrorKind::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " exceeds 255");
    auto& pos = reader.pos();
    if (pos >= reader.size() || !std::isspace(reader.byte(pos)))
        throw Error(ErrorKind::MalformedHeader, "header not terminated by whitespace");
    ++pos;
    const std::size_t need = width * height;
    if (reader.size() - pos < need)
        throw Error(ErrorKind::TruncatedData, "expected " + std::to_string(need) + " pixel bytes, found " +
                                                  std::to_string(reader.size() - pos));
    std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return GrayFrame(width, height, std::move(pixels));
}

inline GrayFrame read_pgm(std::string_view bytes) {
    return read_pgm(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

inline std::vector<std::uint8_t> write_pgm(const GrayFrame& frame) {
    const std::string header = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), frame.data.begin(), frame.data.end());
    return out;
}

inline GrayFrame read_pgm_file(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return read_pgm(std::span<const std::uint8_t>(bytes));
}

inline void write_pgm_file(const std::filesystem::path& path, const GrayFrame& frame) {
    detail::write_file_bytes(path, write_pgm(frame));
}

/// `dir/NNNNNN.pgm`
inline std::filesystem::path frame_path(const std::filesystem::path& dir, std::int64_t index) {
    std::string name = std::to_string(index);
    if (name.size() < 6)
        name.insert(0, 6 - name.size(), '0');
    return dir / (name + ".pgm");
}

/// Parses a JSON Lines manifest. Line numbers in errors are 1-based.
inline std::vector<SequenceRecord> load_manifest(std::string_view text) {
    std::vector<SequenceRecord> records;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        auto nl = text.find('\n', begin);
        if (nl == std::string_view::npos)
            nl = text.size();
        std::string_view line = text.substr(begin, nl - begin);
        begin = nl + 1;
        ++line_no;
        const auto idx = static_cast<std::int64_t>(line_no);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what(), idx);
        }
        if (!obj.is_object())
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected a JSON object", idx);
        for (const auto& [key, _] : obj.items()) {
            if (key != "dir" && key != "label" && key != "start" && key != "end")
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": unknown key '" + key + "'",
                            idx);
        }
        auto require = [&](const char* key) -> const nlohmann::json& {
            if (!obj.contains(key))
                throw Error(ErrorKind::ParseError,
                            "line " + std::to_string(line_no) + ": missing key '" + key + "'", idx);
            return obj.at(key);
        };
        const auto& dir = require("dir");
        const auto& start = require("start");
        const auto& end = require("end");
        if (!dir.is_string() || !start.is_number_integer() || !end.is_number_integer())
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": wrong value type", idx);

        SequenceRecord rec;
        rec.dir = dir.get<std::string>();
        rec.start = start.get<std::int64_t>();
        rec.end = end.get<std::int64_t>();
        if (obj.contains("label")) {
            if (!obj["label"].is_string())
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": label must be a string", idx);
            rec.label = obj["label"].get<std::string>();
        }
        if (rec.start < 0)
            throw Error(ErrorKind::RangeError, "line " + std::to_string(line_no) + ": start < 0", idx);
        if (rec.end < rec.start)
            throw Error(ErrorKind::RangeError, "line " + std::to_string(line_no) + ": end < start", idx);
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::vector<SequenceRecord> load_manifest_file(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return load_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline std::string manifest_line(const SequenceRecord& rec) {
    nlohmann::ordered_json obj;
    obj["dir"] = rec.dir;
    if (rec.label)
        obj["label"] = *rec.label;
    obj["start"] = rec.start;
    obj["end"] = rec.end;
    return obj.dump();
}

/// Loads frames [start, end] from `record.dir`. The index carried by
/// MissingFrame / DimensionMismatch is the absolute frame index.
inline FrameSequence load_sequence(const SequenceRecord& record) {
    FrameSequence seq;
    seq.record = record;
    seq.frames.reserve(record.length());
    for (std::int64_t i = record.start; i <= record.end; ++i) {
        const auto path = frame_path(record.dir, i);
        if (!std::filesystem::is_regular_file(path))
            throw Error(ErrorKind::MissingFrame, path.string(), i);
        auto frame = read_pgm_file(path);
        if (!seq.frames.empty() && !frame.same_shape(seq.frames.front()))
            throw Error(ErrorKind::DimensionMismatch, path.string(), i);
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

} // namespace mhi

#endif // MHI_IMGIO_HPP
