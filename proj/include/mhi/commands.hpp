#ifndef MHI_COMMANDS_HPP
#define MHI_COMMANDS_HPP

// The operations behind the `mhi` command-line tool. Each command is a
// plain function so it can be driven from tests without a subprocess.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "classify.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "formats.hpp"
#include "imgio.hpp"
#include "moments.hpp"
#include "synth.hpp"
#include "temporal.hpp"

namespace mhi {

namespace fs = std::filesystem;

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results land in
/// index order; the lowest-index exception is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](std::size_t i) {
        try {
            out[i] = fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            run(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(workers, n); ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers)
                    run(i);
            });
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

// ------------------------------------------------------------------ extract

struct ExtractResult {
    std::vector<Sample> samples;
    std::vector<std::string> warnings;
};

inline std::string sample_source(const SequenceRecord& rec, const TemporalTemplate& t) {
    return rec.dir + "@" + std::to_string(t.frame_span.first) + "-" + std::to_string(t.frame_span.second);
}

/// Relative record dirs are resolved against `base` when loading, but the
/// manifest's spelling is kept as the sample source.
inline ExtractResult extract_features(const std::vector<SequenceRecord>& records, const fs::path& base, int theta,
                                      int tau, int jobs = 1) {
    struct Item {
        std::optional<Sample> sample;
        std::string warning;
    };
    const auto items = parallel_map<Item>(records.size(), jobs, [&](std::size_t i) {
        const auto& rec = records[i];
        Item item;
        if (!rec.label) {
            item.warning = "skipping unlabeled sequence " + rec.dir;
            return item;
        }
        SequenceRecord resolved = rec;
        if (fs::path(rec.dir).is_relative())
            resolved.dir = (base / rec.dir).string();
        try {
            const auto seq = load_sequence(resolved);
            const auto tmpl = build_templates(seq, theta, tau);
            const auto fv = feature_vector(tmpl);
            item.sample = Sample{std::vector<double>(fv.begin(), fv.end()), *rec.label, sample_source(rec, tmpl)};
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NoMotion) {
                item.warning = "no motion in " + rec.dir + " [" + std::to_string(rec.start) + "," +
                               std::to_string(rec.end) + "], skipped";
                return item;
            }
            throw Error(e.kind(), "sequence " + rec.dir + ": " + e.detail(), e.index());
        }
        return item;
    });
    ExtractResult out;
    for (const auto& it : items) {
        if (it.sample)
            out.samples.push_back(*it.sample);
        if (!it.warning.empty())
            out.warnings.push_back(it.warning);
    }
    return out;
}

inline ExtractResult cmd_extract(const fs::path& manifest, int theta, int tau, const fs::path& out_csv,
                                 int jobs = 1) {
    const auto records = load_manifest_file(manifest);
    auto result = extract_features(records, manifest.parent_path(), theta, tau, jobs);
    detail::write_text(out_csv, write_features_csv(result.samples));
    return result;
}

/// Feature CSV if the file starts with the CSV header, else a manifest
/// that is run through extraction first.
inline ExtractResult load_samples(const fs::path& input, int theta, int tau, int jobs = 1) {
    const auto text = detail::read_text(input);
    if (text.starts_with("label,src"))
        return {read_features_csv(text), {}};
    const auto records = load_manifest(text);
    return extract_features(records, input.parent_path(), theta, tau, jobs);
}

// -------------------------------------------------------------------- train

enum class ClassifierKind { Knn, Mlp };

struct TrainOptions {
    ClassifierKind classifier = ClassifierKind::Mlp;
    SplitSpec split{};
    int k = default_k;
    MlpConfig mlp{};
    int theta = default_theta;
    int tau = default_tau;
    int jobs = 1;
};

struct TrainResult {
    Classifier model;
    Evaluation train, val, test;
    std::vector<EpochStats> history;
    std::vector<std::string> warnings;
    std::string report;
};

inline std::string train_report(const TrainResult& r, const TrainOptions& opt, std::size_t n_train,
                                std::size_t n_val, std::size_t n_test) {
    std::string rep = "classifier: " + std::string(r.model.kind()) + "\n";
    rep += "labels: ";
    for (std::size_t i = 0; i < r.model.labels.size(); ++i)
        rep += (i ? "," : "") + r.model.labels[i];
    rep += "\nsplit seed: " + std::to_string(opt.split.seed) + "\n";
    rep += "samples: train " + std::to_string(n_train) + ", val " + std::to_string(n_val) + ", test " +
           std::to_string(n_test) + "\n";
    if (opt.classifier == ClassifierKind::Knn)
        rep += "k: " + std::to_string(opt.k) + "\n";
    else
        rep += "lr: " + format_double(opt.mlp.lr) + ", epochs: " + std::to_string(opt.mlp.epochs) +
               ", batch: " + std::to_string(opt.mlp.batch) + "\n";
    for (const auto& [name, ev] : {std::pair{"train", &r.train}, {"val", &r.val}, {"test", &r.test}}) {
        rep += "\n[" + std::string(name) + "] confusion matrix (rows = true, cols = predicted)\n";
        rep += confusion_csv(*ev);
    }
    return rep;
}

/// Split, fit the standardiser on train only, train, and evaluate all
/// three splits.
inline TrainResult train_classifier(std::span<const Sample> samples, const TrainOptions& opt) {
    if (label_set(samples).size() < 2)
        throw Error(ErrorKind::SingleClass, "need at least two classes to train");
    const auto split = split_dataset(samples, opt.split);

    TrainResult r;
    r.model.tau = opt.tau;
    r.model.theta = opt.theta;
    r.model.standardizer = standardize_fit(split.train);
    r.model.labels = label_set(split.train);
    if (r.model.labels.size() < 2)
        throw Error(ErrorKind::SingleClass, "training split has a single class");
    const auto train = r.model.standardizer.apply(std::span<const Sample>(split.train));
    const auto val = r.model.standardizer.apply(std::span<const Sample>(split.val));
    if (opt.classifier == ClassifierKind::Knn) {
        r.model.model = knn_fit(train, std::min<int>(opt.k, int(train.size())));
        if (opt.k > int(train.size()))
            r.warnings.push_back("k reduced to " + std::to_string(train.size()) + " (training set size)");
    } else {
        r.model.model = mlp_train(train, val, opt.mlp, &r.history);
    }
    r.train = evaluate(r.model, split.train);
    r.val = evaluate(r.model, split.val);
    r.test = evaluate(r.model, split.test);
    r.report = train_report(r, opt, split.train.size(), split.val.size(), split.test.size());
    return r;
}

inline TrainResult cmd_train(const fs::path& input, const TrainOptions& opt, const fs::path& out_model,
                             const fs::path& out_report) {
    auto loaded = load_samples(input, opt.theta, opt.tau, opt.jobs);
    auto r = train_classifier(loaded.samples, opt);
    r.warnings.insert(r.warnings.begin(), loaded.warnings.begin(), loaded.warnings.end());
    detail::write_text(out_model, model_to_json(r.model));
    if (!out_report.empty())
        detail::write_text(out_report, r.report);
    return r;
}

inline Classifier load_model(const fs::path& path) { return model_from_json(detail::read_text(path)); }

// --------------------------------------------------------------------- eval

struct EvalResult {
    Evaluation evaluation;
    std::vector<std::string> warnings;
};

inline EvalResult cmd_eval(const fs::path& model_path, const fs::path& input, const fs::path& out_csv, int jobs = 1) {
    const auto model = load_model(model_path);
    auto loaded = load_samples(input, model.theta, model.tau, jobs);
    EvalResult r{evaluate(model, loaded.samples), std::move(loaded.warnings)};
    if (!out_csv.empty())
        detail::write_text(out_csv, confusion_csv(r.evaluation));
    return r;
}

// ------------------------------------------------------------------ predict

struct WindowLabel {
    std::int64_t start_frame = 0;
    std::int64_t end_frame = 0;
    std::string label;
    double score = 0.0;
    BlobDiagnostic blobs;
};

/// Window starts over n frames: 0, stride, 2*stride, ... plus a trailing
/// window ending on the last frame. A window longer than the clip is
/// clamped to the clip.
inline std::vector<std::size_t> window_starts(std::size_t n, std::size_t window, std::size_t stride) {
    if (window < 2 || stride < 1)
        throw Error(ErrorKind::InvalidArgument, "window must be >= 2 and stride >= 1");
    if (n < 2)
        throw Error(ErrorKind::TooFewFrames, "need at least 2 frames");
    window = std::min(window, n);
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + window <= n; s += stride)
        starts.push_back(s);
    if (starts.back() + window < n)
        starts.push_back(n - window);
    return starts;
}

/// Loads every NNNNNN.pgm in `dir`; indices must be contiguous.
inline FrameSequence load_frame_dir(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error(ErrorKind::IoError, "not a directory: " + dir.string());
    static const std::regex name_re(R"(\d{6}\.pgm)");
    std::set<std::int64_t> indices;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, name_re))
            indices.insert(std::stoll(name.substr(0, 6)));
    }
    if (indices.empty())
        throw Error(ErrorKind::MissingFrame, "no NNNNNN.pgm frames in " + dir.string());
    SequenceRecord rec{dir.string(), std::nullopt, *indices.begin(), *indices.rbegin()};
    return load_sequence(rec);
}

struct PredictOptions {
    std::size_t window = 0; // 0: model tau
    std::size_t stride = 0; // 0: window / 2
    int jobs = 1;
};

inline std::vector<WindowLabel> predict_windows(const Classifier& model, const FrameSequence& seq,
                                                const PredictOptions& opt) {
    const std::size_t window = opt.window ? opt.window : static_cast<std::size_t>(model.tau);
    const std::size_t stride = opt.stride ? opt.stride : std::max<std::size_t>(1, window / 2);
    const auto starts = window_starts(seq.frames.size(), window, stride);
    const auto len = std::min(window, seq.frames.size());
    return parallel_map<WindowLabel>(starts.size(), opt.jobs, [&](std::size_t w) {
        const auto s = starts[w];
        const std::span<const GrayFrame> frames(seq.frames.data() + s, len);
        WindowLabel out;
        out.start_frame = seq.record.start + std::int64_t(s);
        out.end_frame = out.start_frame + std::int64_t(len) - 1;
        const auto tmpl = build_templates(frames, model.theta, model.tau, out.start_frame);
        out.blobs = detect_secondary_blob(tmpl.mei);
        try {
            const auto fv = feature_vector(tmpl);
            const auto p = model.predict(fv);
            out.label = p.label;
            out.score = p.score;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoMotion)
                throw;
            out.label = "none";
            out.score = 0.0;
        }
        return out;
    });
}

inline std::string windows_to_json(const std::vector<WindowLabel>& windows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& w : windows) {
        nlohmann::ordered_json o;
        o["start_frame"] = w.start_frame;
        o["end_frame"] = w.end_frame;
        o["label"] = w.label;
        o["score"] = w.score;
        o["components"] = w.blobs.component_count;
        o["secondary_blob_warning"] = w.blobs.warning;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

inline std::vector<WindowLabel> cmd_predict(const fs::path& model_path, const fs::path& frame_dir,
                                            const PredictOptions& opt) {
    const auto model = load_model(model_path);
    return predict_windows(model, load_frame_dir(frame_dir), opt);
}

// ------------------------------------------------------------------- render

inline TemporalTemplate cmd_render(const fs::path& frame_dir, int theta, int tau, const fs::path& out_dir) {
    const auto seq = load_frame_dir(frame_dir);
    auto t = build_templates(seq, theta, tau);
    fs::create_directories(out_dir);
    write_pgm_file(out_dir / "mei.pgm", render_mei(t.mei));
    write_pgm_file(out_dir / "mhi.pgm", normalize_mhi(t.mhi));
    return t;
}

// -------------------------------------------------------------------- synth

/// Renders the clips and writes `out_dir/manifest.jsonl`.
inline std::vector<SequenceRecord> cmd_synth(const fs::path& spec_file, const fs::path& out_dir) {
    const auto specs = parse_synth_specs(detail::read_text(spec_file));
    const auto records = write_synth(specs, out_dir);
    std::string manifest;
    for (const auto& r : records)
        manifest += manifest_line(r) + "\n";
    detail::write_text(out_dir / "manifest.jsonl", manifest);
    return records;
}

} // namespace mhi

#endif // MHI_COMMANDS_HPP
