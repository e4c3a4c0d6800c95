#ifndef MHI_FORMATS_HPP
#define MHI_FORMATS_HPP

// Text formats: feature CSV, confusion-matrix CSV and the JSON model file.
// Doubles are always written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "classify.hpp"
#include "error.hpp"

namespace mhi {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> csv_split(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": unterminated quote",
                    std::int64_t(line_no));
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(ErrorKind::IoError, "short write to " + path.string());
}

inline double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" + s + "'",
                    std::int64_t(line_no));
    }
}

} // namespace detail

// ------------------------------------------------------------ feature CSV

inline std::string features_csv_header(std::size_t dim = feature_count) {
    std::string h = "label,src";
    for (std::size_t i = 0; i < dim; ++i)
        h += ",f" + std::to_string(i);
    return h;
}

inline std::string features_csv_row(const Sample& s) {
    std::string row = detail::csv_field(s.label) + "," + detail::csv_field(s.source);
    for (double v : s.x)
        row += "," + format_double(v);
    return row;
}

inline std::string write_features_csv(std::span<const Sample> samples) {
    std::string out = features_csv_header(samples.empty() ? feature_count : samples.front().x.size()) + "\n";
    for (const auto& s : samples)
        out += features_csv_row(s) + "\n";
    return out;
}

inline std::vector<Sample> read_features_csv(std::string_view text) {
    std::vector<Sample> out;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    std::size_t begin = 0;
    while (begin < text.size()) {
        auto nl = text.find('\n', begin);
        if (nl == std::string_view::npos)
            nl = text.size();
        std::string_view line = text.substr(begin, nl - begin);
        begin = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        const auto fields = detail::csv_split(line, line_no);
        if (line_no == 1) {
            if (fields.size() < 3 || fields[0] != "label" || fields[1] != "src")
                throw Error(ErrorKind::ParseError, "line 1: expected header 'label,src,f0,...'", 1);
            dim = fields.size() - 2;
            if (std::string(line) != features_csv_header(dim))
                throw Error(ErrorKind::ParseError, "line 1: unexpected feature column names", 1);
            continue;
        }
        if (fields.size() != dim + 2)
            throw Error(ErrorKind::ParseError,
                        "line " + std::to_string(line_no) + ": expected " + std::to_string(dim + 2) + " fields",
                        std::int64_t(line_no));
        Sample s;
        s.label = fields[0];
        s.source = fields[1];
        for (std::size_t i = 0; i < dim; ++i)
            s.x.push_back(detail::parse_double(fields[i + 2], line_no));
        out.push_back(std::move(s));
    }
    if (line_no == 0)
        throw Error(ErrorKind::ParseError, "empty feature file", 1);
    return out;
}

// ----------------------------------------------------- confusion matrix CSV

inline std::string confusion_csv(const Evaluation& ev) {
    std::string out = "true\\predicted";
    for (const auto& l : ev.matrix.labels)
        out += "," + detail::csv_field(l);
    out += "\n";
    for (std::size_t r = 0; r < ev.matrix.labels.size(); ++r) {
        out += detail::csv_field(ev.matrix.labels[r]);
        for (auto c : ev.matrix.counts[r])
            out += "," + std::to_string(c);
        out += "\n";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", ev.accuracy);
    out += std::string("accuracy,") + buf + "\n";
    return out;
}

// ------------------------------------------------------------- model file

inline constexpr int model_file_version = 1;

namespace detail {

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

inline std::string json_numbers(std::span<const double> v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + format_double(v[i]);
    return out + "]";
}

inline std::string json_strings(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + json_string(v[i]);
    return out + "]";
}

inline std::vector<double> numbers_from(const nlohmann::json& j) {
    std::vector<double> v;
    for (const auto& e : j) {
        if (!e.is_number())
            throw Error(ErrorKind::ParseError, "model file: expected a number");
        v.push_back(e.get<double>());
    }
    return v;
}

} // namespace detail

/// Serialises a classifier as one JSON document (trailing newline).
inline std::string model_to_json(const Classifier& c) {
    std::string out = "{\"version\":" + std::to_string(model_file_version) + ",\"classifier\":\"" +
                      std::string(c.kind()) + "\",\"tau\":" + std::to_string(c.tau) +
                      ",\"theta\":" + std::to_string(c.theta) + ",\"labels\":" + detail::json_strings(c.labels) +
                      ",\"standardizer\":{\"mean\":" + detail::json_numbers(c.standardizer.mean) +
                      ",\"std\":" + detail::json_numbers(c.standardizer.stddev) + "}";
    if (const auto* knn = std::get_if<KnnModel>(&c.model)) {
        out += ",\"knn\":{\"k\":" + std::to_string(knn->k) + ",\"vectors\":[";
        for (std::size_t i = 0; i < knn->vectors.size(); ++i)
            out += (i ? "," : "") + detail::json_numbers(knn->vectors[i]);
        out += "],\"labels\":" + detail::json_strings(knn->labels) + "}";
    } else {
        const auto& mlp = std::get<MlpModel>(c.model);
        out += ",\"mlp\":{\"sizes\":[";
        for (std::size_t i = 0; i < mlp.sizes.size(); ++i)
            out += (i ? "," : "") + std::to_string(mlp.sizes[i]);
        out += "],\"weights\":[";
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            const auto& L = mlp.layers[l];
            out += l ? ",[" : "[";
            for (std::size_t o = 0; o < L.out; ++o)
                out += (o ? "," : "") +
                       detail::json_numbers(std::span(L.weights).subspan(o * L.in, L.in));
            out += "]";
        }
        out += "],\"biases\":[";
        for (std::size_t l = 0; l < mlp.layers.size(); ++l)
            out += (l ? "," : "") + detail::json_numbers(mlp.layers[l].bias);
        out += "]}";
    }
    return out + "}\n";
}

inline Classifier model_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("model file: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != model_file_version)
            throw Error(ErrorKind::ParseError, "model file: unsupported version");
        Classifier c;
        c.tau = j.at("tau").get<int>();
        c.theta = j.at("theta").get<int>();
        c.labels = j.at("labels").get<std::vector<std::string>>();
        c.standardizer.mean = detail::numbers_from(j.at("standardizer").at("mean"));
        c.standardizer.stddev = detail::numbers_from(j.at("standardizer").at("std"));
        if (c.standardizer.mean.size() != c.standardizer.stddev.size())
            throw Error(ErrorKind::ParseError, "model file: standardizer mean/std length differ");
        const auto kind = j.at("classifier").get<std::string>();
        if (kind == "knn") {
            KnnModel m;
            const auto& kj = j.at("knn");
            m.k = kj.at("k").get<int>();
            for (const auto& v : kj.at("vectors"))
                m.vectors.push_back(detail::numbers_from(v));
            m.labels = kj.at("labels").get<std::vector<std::string>>();
            if (m.vectors.size() != m.labels.size() || m.k < 1 || std::size_t(m.k) > m.vectors.size())
                throw Error(ErrorKind::ParseError, "model file: inconsistent knn section");
            c.model = std::move(m);
        } else if (kind == "mlp") {
            MlpModel m;
            const auto& mj = j.at("mlp");
            m.labels = c.labels;
            m.sizes = mj.at("sizes").get<std::vector<std::size_t>>();
            const auto& weights = mj.at("weights");
            const auto& biases = mj.at("biases");
            if (m.sizes.size() < 2 || weights.size() + 1 != m.sizes.size() || biases.size() != weights.size())
                throw Error(ErrorKind::ParseError, "model file: inconsistent mlp section");
            for (std::size_t l = 0; l < weights.size(); ++l) {
                DenseLayer L;
                L.in = m.sizes[l];
                L.out = m.sizes[l + 1];
                if (weights[l].size() != L.out)
                    throw Error(ErrorKind::ParseError, "model file: weight rows mismatch");
                for (const auto& row : weights[l]) {
                    auto r = detail::numbers_from(row);
                    if (r.size() != L.in)
                        throw Error(ErrorKind::ParseError, "model file: weight columns mismatch");
                    L.weights.insert(L.weights.end(), r.begin(), r.end());
                }
                L.bias = detail::numbers_from(biases[l]);
                m.layers.push_back(std::move(L));
            }
            try {
                m.validate();
            } catch (const Error& e) {
                throw Error(ErrorKind::ParseError, std::string("model file: ") + e.what());
            }
            c.model = std::move(m);
        } else {
            throw Error(ErrorKind::ParseError, "model file: unknown classifier '" + kind + "'");
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("model file: ") + e.what());
    }
}

} // namespace mhi

#endif // MHI_FORMATS_HPP
