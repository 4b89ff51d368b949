#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

using namespace mscfb;
using namespace mscfb::testing;

namespace {

template <class Fn>
ErrorCode error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Usage;
}

DatasetManifest manifest_with_counts(const std::vector<int>& counts) {
    DatasetManifest m;
    for (std::size_t s = 0; s < counts.size(); ++s)
        for (int i = 0; i < counts[s]; ++i)
            m.entries.push_back({"s" + std::to_string(s) + "_" + std::to_string(i) + ".pgm", "s" + std::to_string(s)});
    return m;
}

SyntheticParams small_params() {
    SyntheticParams p;
    p.classes = 6;
    p.per_class = 5;
    p.width = 16;
    p.height = 22;
    p.separation = 40.0;
    p.noise = 5.0;
    p.seed = 123;
    return p;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.block_width = 8;
    c.block_height = 11;
    c.t = 2;
    c.trials = 4;
    c.seed = 99;
    return c;
}

} // namespace

TEST(Manifest, ParsesRowsInOrderWithFirstSeenClasses) {
    const auto m = parse_manifest("a.pgm,s1\nb.pgm,s1\nc.pgm,s0\n");
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m.subjects(), (std::vector<std::string>{"s1", "s0"}));
    EXPECT_EQ(m.class_indices(), (std::vector<std::size_t>{0, 0, 1}));
    EXPECT_EQ(parse_manifest("a.pgm,s1\r\nb.pgm,s1\r\n").subjects().size(), 1u);
}

TEST(Manifest, EmptyFile) { EXPECT_EQ(parse_manifest("").size(), 0u); }

TEST(Manifest, Errors) {
    EXPECT_EQ(error_of([] { parse_manifest("a.pgm,s1,extra\n"); }), ErrorCode::MalformedRow);
    EXPECT_EQ(error_of([] { parse_manifest("a.pgm\n"); }), ErrorCode::MalformedRow);
    EXPECT_EQ(error_of([] { parse_manifest("a.pgm,\n"); }), ErrorCode::MalformedRow);
    EXPECT_EQ(error_of([] { parse_manifest("a.pgm,s1\na.pgm,s2\n"); }), ErrorCode::DuplicatePath);
    EXPECT_EQ(error_of([] { load_manifest("/nonexistent/manifest.csv"); }), ErrorCode::FileNotFound);
}

TEST(Manifest, CsvRoundTrip) {
    const auto m = manifest_with_counts({3, 2, 4});
    EXPECT_EQ(parse_manifest(manifest_to_csv(m)).entries, m.entries);
}

TEST(Synthetic, DeterministicForSeed) {
    const auto a = generate_synthetic(small_params());
    const auto b = generate_synthetic(small_params());
    ASSERT_EQ(a.size(), 30u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(encode_pgm(a[i].image), encode_pgm(b[i].image));
        EXPECT_EQ(a[i].label, b[i].label);
    }
    auto other = small_params();
    other.seed = 124;
    EXPECT_NE(generate_synthetic(other)[0].image, a[0].image);
}

TEST(Synthetic, ZeroNoiseMakesClassSamplesIdentical) {
    auto p = small_params();
    p.noise = 0.0;
    const auto d = generate_synthetic(p);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (i % p.per_class) EXPECT_EQ(d[i].image, d[i - 1].image);
    EXPECT_NE(d[0].image, d[p.per_class].image);
}

TEST(Synthetic, WritesDatasetThatLoadsBack) {
    ScratchDir dir("synth");
    const auto data = generate_synthetic(small_params());
    const auto manifest_path = write_dataset(data, dir.path());
    const auto m = load_manifest(manifest_path);
    ASSERT_EQ(m.size(), data.size());
    const auto images = load_images(m);
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(images[i], data[i].image);
}

TEST(Synthetic, InvalidParameters) {
    auto p = small_params();
    p.classes = 1;
    EXPECT_EQ(error_of([&] { generate_synthetic(p); }), ErrorCode::InvalidGeometry);
    p = small_params();
    p.per_class = 0;
    EXPECT_EQ(error_of([&] { generate_synthetic(p); }), ErrorCode::InvalidGeometry);
}

TEST(RandomSplit, SevenImagesThreeTrain) {
    const auto m = manifest_with_counts({7});
    const auto s = random_split(m, 3, 42);
    EXPECT_EQ(s.train.size(), 3u);
    EXPECT_EQ(s.test.size(), 4u);
}

TEST(RandomSplit, LeaveOneOutPerSubject) {
    const auto m = manifest_with_counts({4, 4, 4});
    const auto s = random_split(m, 3, 7);
    EXPECT_EQ(s.test.size(), 3u);
    std::set<std::string> subjects;
    for (auto i : s.test) subjects.insert(m.entries[i].label);
    EXPECT_EQ(subjects.size(), 3u);
}

TEST(RandomSplit, DeterministicForSeed) {
    const auto m = manifest_with_counts({6, 8, 5});
    const auto a = random_split(m, 2, 1234), b = random_split(m, 2, 1234);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    bool differs = false;
    for (std::uint64_t seed = 0; seed < 10 && !differs; ++seed) differs = random_split(m, 2, seed).train != a.train;
    EXPECT_TRUE(differs);
}

TEST(RandomSplit, PropertySoundness) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> counts;
        const int subjects = std::uniform_int_distribution<int>(1, 8)(rng);
        const std::uint32_t t = std::uniform_int_distribution<std::uint32_t>(1, 4)(rng);
        for (int s = 0; s < subjects; ++s) counts.push_back(std::uniform_int_distribution<int>(t + 1, t + 6)(rng));
        const auto m = manifest_with_counts(counts);
        const auto split = random_split(m, t, rng());
        std::set<std::size_t> train(split.train.begin(), split.train.end()), test(split.test.begin(), split.test.end());
        EXPECT_EQ(train.size() + test.size(), m.size());
        for (auto i : train) EXPECT_FALSE(test.count(i));
        std::map<std::string, std::uint32_t> per_subject;
        for (auto i : split.train) ++per_subject[m.entries[i].label];
        for (const auto& [label, n] : per_subject) EXPECT_EQ(n, t) << label;
        EXPECT_EQ(per_subject.size(), counts.size());
    }
}

TEST(RandomSplit, InsufficientSamplesNamesSubject) {
    const auto m = manifest_with_counts({5, 3});
    try {
        random_split(m, 3, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
        EXPECT_NE(std::string(e.what()).find("'s1'"), std::string::npos);
    }
}

TEST(TrialSeed, XorOfMasterAndIndex) {
    EXPECT_EQ(trial_seed(0xF0, 3), 0xF3u);
    EXPECT_EQ(trial_seed(7, 0), 7u);
}

TEST(SplitMix64, ReferenceOutputs) {
    // First outputs for seed 1234567 from the published reference generator.
    SplitMix64 rng(1234567);
    EXPECT_EQ(rng.next(), 6457827717110365317ull);
    EXPECT_EQ(rng.next(), 3203168211198807973ull);
    EXPECT_EQ(rng.next(), 9817491932198370423ull);
}

TEST(RepeatedTrials, DuplicatedImagesAreRecognizedPerfectly) {
    // Every subject has two byte-identical images; with t = 1 the probe is a
    // copy of its own gallery entry.
    ScratchDir dir("dup");
    auto p = small_params();
    p.per_class = 1;
    auto data = generate_synthetic(p);
    std::vector<LabeledImage> doubled;
    for (auto& d : data) {
        doubled.push_back(d);
        d.name = "copy_" + d.name;
        doubled.push_back(d);
    }
    const auto m = load_manifest(write_dataset(doubled, dir.path()));
    auto c = small_config();
    c.t = 1;
    c.trials = 1;
    const auto r = run_repeated_trials(m, c);
    EXPECT_EQ(r.trials[0].accuracy, 1.0);
    EXPECT_EQ(r.mean, 1.0);
}

TEST(RepeatedTrials, DefaultConfigMatchesPublishedSettings) {
    const ExperimentConfig c;
    EXPECT_EQ(c.block_width, 16u);
    EXPECT_EQ(c.block_height, 11u);
    EXPECT_EQ(c.alpha, 0.6);
    EXPECT_EQ(c.trials, 20u);
    EXPECT_EQ(c.classifier, Classifier::cosine);
    const auto json = nlohmann::json::parse(report_to_json(ExperimentReport{c, {}, 0, 0, 0}));
    EXPECT_EQ(json["config"]["block_width"], 16);
    EXPECT_EQ(json["config"]["block_height"], 11);
    EXPECT_EQ(json["config"]["alpha"], 0.6);
}

TEST(RepeatedTrials, WellSeparatedSyntheticDataAndDeterminism) {
    ScratchDir dir("trials");
    const auto m = load_manifest(write_dataset(generate_synthetic(small_params()), dir.path()));
    auto c = small_config();
    const auto a = run_repeated_trials(m, c);
    c.workers = 3;
    const auto b = run_repeated_trials(m, c);
    EXPECT_GE(a.mean, 0.99);
    ASSERT_EQ(a.trials.size(), 4u);
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        EXPECT_EQ(a.trials[i], b.trials[i]);
        EXPECT_EQ(a.trials[i].split_seed, trial_seed(c.seed, i));
        EXPECT_GE(a.trials[i].accuracy, 0.0);
        EXPECT_LE(a.trials[i].accuracy, 1.0);
    }
    auto strip = [](ExperimentReport r) {
        r.wall_clock_seconds = 0;
        return report_to_json(r);
    };
    EXPECT_EQ(strip(a), strip(b));
    const auto s = summarize(a.accuracies());
    EXPECT_LE(std::abs(s.mean - a.mean), 1e-12);
    EXPECT_LE(std::abs(s.std - a.std), 1e-12);
}

TEST(RepeatedTrials, ErrorsCarryTrialIndex) {
    ScratchDir dir("few");
    auto p = small_params();
    p.per_class = 2;
    const auto m = load_manifest(write_dataset(generate_synthetic(p), dir.path()));
    auto c = small_config();
    c.t = 2;
    try {
        run_repeated_trials(m, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
        EXPECT_NE(std::string(e.what()).find("trial 0"), std::string::npos);
    }
    c = small_config();
    c.alpha = 0.0;
    EXPECT_EQ(error_of([&] { run_repeated_trials(m, c); }), ErrorCode::AlphaOutOfRange);
    c = small_config();
    c.block_width = 5;
    EXPECT_EQ(error_of([&] { run_repeated_trials(m, c); }), ErrorCode::NonDivisibleGeometry);
}

TEST(GalleryProbe, MaxRuleRejected) {
    auto c = small_config();
    c.classifier = Classifier::max;
    EXPECT_EQ(error_of([&] { run_gallery_probe({}, {}, {}, c); }), ErrorCode::UnseenSubjectsRequireNN);
}

TEST(GalleryProbe, UnseenSubjects) {
    ScratchDir dir("gp");
    auto p = small_params();
    p.classes = 12;
    const auto data = generate_synthetic(p);
    std::vector<LabeledImage> train(data.begin(), data.begin() + 6 * p.per_class);
    std::vector<LabeledImage> gallery, probe;
    for (std::size_t i = 6 * p.per_class; i < data.size(); ++i)
        (i % p.per_class == 0 ? gallery : probe).push_back(data[i]);
    const auto tm = load_manifest(write_dataset(train, dir / "train"));
    const auto gm = load_manifest(write_dataset(gallery, dir / "gallery"));
    const auto pm = load_manifest(write_dataset(probe, dir / "probe"));
    const auto r = run_gallery_probe(tm, gm, {{"self", gm}, {"probe", pm}}, small_config());
    EXPECT_EQ(r.train_classes, 6u);
    EXPECT_EQ(r.gallery_size, 6u);
    ASSERT_EQ(r.probes.size(), 2u);
    EXPECT_EQ(r.probes[0].accuracy, 1.0);
    EXPECT_GE(r.probes[1].accuracy, 0.95);
    const auto back = gallery_probe_from_json(gallery_probe_to_json(r));
    EXPECT_EQ(back.probes[1].correct, r.probes[1].correct);
    EXPECT_EQ(back.probes[1].accuracy, r.probes[1].accuracy);
}

TEST(Report, SummaryStatistics) {
    EXPECT_NEAR(summarize({0.7, 0.7, 0.7}).std, 0.0, 1e-15);
    EXPECT_EQ(summarize({1.0, 1.0, 1.0}).std, 0.0);
    EXPECT_NEAR(summarize({0.8, 1.0}).mean, 0.9, 1e-15);
    EXPECT_NEAR(summarize({0.8, 1.0}).std, 0.1, 1e-15); // population estimator
}

TEST(Report, JsonAndCsvRoundTrip) {
    ExperimentReport r;
    r.config = small_config();
    r.config.seed = 18446744073709551615ull;
    r.config.classifier = Classifier::max;
    r.config.path = SolvePath::woodbury;
    r.trials = {{1, 7, 9, 7.0 / 9.0}, {2, 9, 9, 1.0}, {3, 8, 9, 8.0 / 9.0}};
    const auto s = summarize(r.accuracies());
    r.mean = s.mean;
    r.std = s.std;
    r.wall_clock_seconds = 0.125;
    for (const auto& back : {report_from_json(report_to_json(r)), report_from_csv(report_to_csv(r))}) {
        EXPECT_EQ(back.config, r.config);
        EXPECT_EQ(back.trials, r.trials);
        EXPECT_EQ(back.mean, r.mean);
        EXPECT_EQ(back.std, r.std);
        EXPECT_EQ(back.wall_clock_seconds, r.wall_clock_seconds);
    }
    EXPECT_EQ(report_to_json(report_from_json(report_to_json(r))), report_to_json(r));
    EXPECT_EQ(report_to_csv(report_from_csv(report_to_csv(r))), report_to_csv(r));
}

TEST(Report, EmitWritesChosenFormat) {
    ScratchDir dir("emit");
    ExperimentReport r;
    r.trials = {{0, 1, 1, 1.0}};
    r.mean = 1.0;
    emit_report(r, dir / "r.json", ReportFormat::json);
    emit_report(r, dir / "r.csv", ReportFormat::csv);
    EXPECT_EQ(read_file_text(dir / "r.json"), report_to_json(r));
    EXPECT_EQ(read_file_text(dir / "r.csv"), report_to_csv(r));
    EXPECT_EQ(error_of([&] { emit_report(r, dir / "missing" / "r.json", ReportFormat::json); }), ErrorCode::IoFailure);
}
