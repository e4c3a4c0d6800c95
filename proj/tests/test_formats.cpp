#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mhi;
using namespace mhi::testing;

namespace {

Classifier small_knn() {
    Classifier c;
    c.tau = 30;
    c.theta = 10;
    c.labels = {"jog", "walk"};
    c.standardizer.mean = {0.1, 1.0 / 3.0};
    c.standardizer.stddev = {2.0, 1e-12};
    c.model = KnnModel{1, {{0.1, 0.2}, {-1.0 / 7.0, 5e-300}}, {"walk", "jog"}};
    return c;
}

Classifier small_mlp() {
    Rng rng(4);
    Classifier c;
    c.labels = {"a", "b", "c"};
    c.standardizer.mean = std::vector<double>(16, 0.25);
    c.standardizer.stddev = std::vector<double>(16, 3.0);
    c.model = mlp_init(16, {8, 4}, c.labels, rng);
    return c;
}

BinaryMask with_rect(BinaryMask m, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
    for (std::size_t y = y0; y < y0 + h; ++y)
        for (std::size_t x = x0; x < x0 + w; ++x)
            m.at(x, y) = 1;
    return m;
}

} // namespace

TEST(FormatDouble, SeventeenDigitsRoundTrip) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, double(int(rng.below(40)) - 20));
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(FeaturesCsv, HeaderAndRows) {
    EXPECT_EQ(features_csv_header(),
              "label,src,f0,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12,f13,f14,f15");
    const std::vector<Sample> s{{std::vector<double>(16, 0.5), "walk", "clips/a@0-9"},
                                {std::vector<double>(16, -2.0), "odd,\"label\"", "x"}};
    const auto text = write_features_csv(s);
    const auto back = read_features_csv(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].label, "odd,\"label\"");
    EXPECT_EQ(back[0].source, "clips/a@0-9");
    EXPECT_EQ(back[0].x, s[0].x);
    EXPECT_EQ(write_features_csv(back), text);
}

TEST(FeaturesCsv, RandomRoundTripIsExact) {
    Rng rng(2);
    std::vector<Sample> s(20);
    for (auto& x : s) {
        for (int d = 0; d < 16; ++d)
            x.x.push_back(signed_log(rng.uniform(-1.0, 1.0) * 1e-3));
        x.label = "c" + std::to_string(rng.below(3));
        x.source = "seq" + std::to_string(rng.below(100));
    }
    const auto back = read_features_csv(write_features_csv(s));
    for (std::size_t i = 0; i < s.size(); ++i)
        EXPECT_EQ(back[i].x, s[i].x);
}

TEST(FeaturesCsv, Errors) {
    EXPECT_THROW(read_features_csv("name,src,f0\nx,y,1\n"), Error);
    try {
        read_features_csv("label,src,f0,f1\na,b,1,2\na,b,1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_EQ(e.index(), 3);
    }
    EXPECT_THROW(read_features_csv("label,src,f0\na,b,abc\n"), Error);
    EXPECT_THROW(read_features_csv(""), Error);
}

TEST(ConfusionCsv, Layout) {
    Evaluation ev{ConfusionMatrix({"jog", "walk"}), 0.0};
    ev.matrix.counts = {{3, 1}, {0, 4}};
    ev.accuracy = ev.matrix.accuracy();
    EXPECT_EQ(confusion_csv(ev), "true\\predicted,jog,walk\njog,3,1\nwalk,0,4\naccuracy,0.875000\n");
}

TEST(ModelFile, KnnRoundTripIsExact) {
    const auto c = small_knn();
    const auto text = model_to_json(c);
    const auto j = nlohmann::json::parse(text);
    EXPECT_EQ(j["version"], 1);
    EXPECT_EQ(j["classifier"], "knn");
    EXPECT_EQ(j["knn"]["k"], 1);
    const auto back = model_from_json(text);
    EXPECT_EQ(back.tau, 30);
    EXPECT_EQ(back.theta, 10);
    EXPECT_EQ(back.labels, c.labels);
    EXPECT_EQ(back.standardizer.mean, c.standardizer.mean);
    EXPECT_EQ(back.standardizer.stddev, c.standardizer.stddev);
    const auto& k = std::get<KnnModel>(back.model);
    EXPECT_EQ(k.vectors, std::get<KnnModel>(c.model).vectors);
    EXPECT_EQ(k.labels, std::get<KnnModel>(c.model).labels);
    EXPECT_EQ(model_to_json(back), text);
    EXPECT_NE(text.find("0.33333333333333331"), std::string::npos);
}

TEST(ModelFile, MlpRoundTripIsExact) {
    const auto c = small_mlp();
    const auto text = model_to_json(c);
    const auto j = nlohmann::json::parse(text);
    EXPECT_EQ(j["classifier"], "mlp");
    EXPECT_EQ(j["mlp"]["sizes"], nlohmann::json({16, 8, 4, 3}));
    EXPECT_EQ(j["mlp"]["weights"][0].size(), 8u);    // rows = outputs
    EXPECT_EQ(j["mlp"]["weights"][0][0].size(), 16u); // cols = inputs
    const auto back = model_from_json(text);
    EXPECT_EQ(std::get<MlpModel>(back.model), std::get<MlpModel>(c.model));
    EXPECT_EQ(model_to_json(back), text);
}

TEST(ModelFile, RejectsBadDocuments) {
    EXPECT_THROW(model_from_json("{"), Error);
    EXPECT_THROW(model_from_json(R"({"version":2})"), Error);
    auto j = nlohmann::json::parse(model_to_json(small_mlp()));
    j["mlp"]["sizes"][1] = 9;
    EXPECT_THROW(model_from_json(j.dump()), Error);
    auto k = nlohmann::json::parse(model_to_json(small_knn()));
    k["knn"]["k"] = 5;
    EXPECT_THROW(model_from_json(k.dump()), Error);
    k["classifier"] = "svm";
    EXPECT_THROW(model_from_json(k.dump()), Error);
}

TEST(ClassifierPredict, AppliesStandardizer) {
    const auto c = small_knn();
    // raw (0.3, 1/3 + 2e-13) -> standardised (0.1, 0.2) -> "walk"
    const std::vector<double> raw{0.3, 1.0 / 3.0 + 2e-13};
    EXPECT_EQ(c.predict(raw).label, "walk");
}

// ------------------------------------------------------------- diagnostics

TEST(SecondaryBlob, SingleBlob) {
    const auto m = with_rect(BinaryMask(50, 50), 10, 10, 12, 12);
    const auto d = detect_secondary_blob(m);
    EXPECT_EQ(d.component_count, 1u);
    EXPECT_FALSE(d.warning);
}

TEST(SecondaryBlob, TwoLargeBlobs) {
    // two 10x10 blobs, each 10% of a 40x25 canvas
    auto m = with_rect(BinaryMask(40, 25), 2, 2, 10, 10);
    m = with_rect(m, 25, 10, 10, 10);
    const auto d = detect_secondary_blob(m);
    EXPECT_EQ(d.component_count, 2u);
    EXPECT_TRUE(d.warning);
}

TEST(SecondaryBlob, SpeckBelowThreshold) {
    auto m = with_rect(BinaryMask(100, 100), 20, 20, 30, 30);
    m.at(80, 80) = 1;
    m.at(81, 81) = 1; // diagonal pair: one 8-connected component of 2 px
    const auto d = detect_secondary_blob(m);
    EXPECT_EQ(d.component_count, 2u);
    EXPECT_EQ(d.large_components, 1u);
    EXPECT_FALSE(d.warning);
}

TEST(SecondaryBlob, DiagonalConnectivity) {
    BinaryMask m(4, 4);
    m.at(0, 0) = m.at(1, 1) = m.at(2, 2) = 1;
    EXPECT_EQ(component_areas(m), (std::vector<std::size_t>{3}));
}

// ------------------------------------------------------------------ synth

TEST(Synth, TranslatePositions) {
    const auto specs = parse_synth_specs(
        R"({"class":"slide","program":{"type":"translate","dx":2,"dy":0},"frames":20,"width":64,"height":32,"rect_w":8,"rect_h":8,"seed":3})");
    ASSERT_EQ(specs.size(), 1u);
    const auto frames = synth_frames(specs[0], 0);
    ASSERT_EQ(frames.size(), 20u);
    auto left_edge = [](const GrayFrame& f) {
        for (std::size_t x = 0; x < f.width; ++x)
            for (std::size_t y = 0; y < f.height; ++y)
                if (f.at(x, y))
                    return int(x);
        return -1;
    };
    const int x0 = left_edge(frames[0]); // includes frame-0 jitter
    for (int t = 0; t < 20; ++t)
        EXPECT_LE(std::abs(left_edge(frames[std::size_t(t)]) - (x0 + 2 * t)), 2) << t;
    for (const auto& f : frames)
        EXPECT_EQ(std::count(f.data.begin(), f.data.end(), 255), 64);
}

TEST(Synth, NoJitterIsExact) {
    auto specs = parse_synth_specs(
        R"({"class":"slide","program":{"type":"translate","dx":2,"dy":1},"frames":10,"width":64,"height":32,"rect_w":8,"rect_h":8,"jitter":false})");
    const auto frames = synth_frames(specs[0], 0);
    std::size_t x0 = 99, y0 = 99;
    for (std::size_t y = 0; y < 32 && x0 == 99; ++y)
        for (std::size_t x = 0; x < 64; ++x)
            if (frames[0].at(x, y)) {
                x0 = x;
                y0 = y;
                break;
            }
    for (std::size_t t = 0; t < frames.size(); ++t) {
        EXPECT_EQ(frames[t].at(x0 + 2 * t, y0 + t), 255);
        if (x0 + 2 * t > 0) {
            EXPECT_EQ(frames[t].at(x0 + 2 * t - 1, y0 + t), 0);
        }
    }
}

TEST(Synth, DeterministicAndWritesManifest) {
    TempDir a, b;
    const std::string text = three_class_spec(2);
    const auto specs = parse_synth_specs(text);
    ASSERT_EQ(specs.size(), 3u);
    const auto ra = write_synth(specs, a.path());
    const auto rb = write_synth(specs, b.path());
    EXPECT_EQ(ra, rb);
    ASSERT_EQ(ra.size(), 6u);
    EXPECT_EQ(ra[0].dir, "slide_000");
    EXPECT_EQ(ra[0].label, "slide");
    EXPECT_EQ(ra[0].end, 29);
    for (const auto& r : ra)
        for (int t = 0; t <= r.end; ++t)
            EXPECT_EQ(detail::read_file_bytes(frame_path(a.path() / r.dir, t)),
                      detail::read_file_bytes(frame_path(b.path() / r.dir, t)));
    EXPECT_NE(synth_frames(specs[0], 0), synth_frames(specs[0], 1));
}

TEST(Synth, ValidationErrors) {
    EXPECT_THROW(parse_synth_specs(R"({"class":"x","program":{"type":"spin"}})"), Error);
    EXPECT_THROW(parse_synth_specs(R"({"class":"x","program":{"type":"translate","speed":0}})"), Error);
    EXPECT_THROW(parse_synth_specs(R"({"class":"x","frames":1,"program":{"type":"translate"}})"), Error);
    EXPECT_THROW(parse_synth_specs(R"({"class":"x","width":20,"program":{"type":"translate","dx":3},"frames":30})"),
                 Error);
    EXPECT_THROW(parse_synth_specs(R"({"program":{"type":"translate"}})"), Error);
    EXPECT_THROW(parse_synth_specs(R"([1,2])"), Error);
    EXPECT_THROW(parse_synth_specs("not json"), Error);
    EXPECT_EQ(parse_synth_specs(R"([{"class":"a","program":{"type":"oscillate"}},
                                    {"class":"b","program":{"type":"expand-contract"}}])")
                  .size(),
              2u);
}
