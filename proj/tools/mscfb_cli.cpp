#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mscfb/mscfb.hpp"

namespace {

struct BlockArg {
    std::uint32_t width = 16;
    std::uint32_t height = 11;
};

BlockArg parse_block(const std::string& s) {
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) throw mscfb::Error(mscfb::ErrorCode::Usage, "block must be WxH, got '" + s + "'");
    try {
        std::size_t a = 0, b = 0;
        const auto w = std::stoul(s.substr(0, x), &a);
        const auto h = std::stoul(s.substr(x + 1), &b);
        if (a != x || b != s.size() - x - 1 || w == 0 || h == 0) throw std::invalid_argument(s);
        return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
    } catch (const std::logic_error&) {
        throw mscfb::Error(mscfb::ErrorCode::Usage, "block must be WxH, got '" + s + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-subregion correlation filter bank feature extraction and classification"};
    app.require_subcommand(1);

    std::string block = "16x11";
    double alpha = mscfb::kDefaultAlpha;
    std::string path = "auto";
    std::size_t workers = 1;

    std::string manifest, out, model;
    auto* train = app.add_subcommand("train", "Design one filter bank per class and save the model");
    train->add_option("--manifest", manifest, "Training manifest (path,label CSV)")->required();
    train->add_option("--block", block, "Block size WxH")->capture_default_str();
    train->add_option("--alpha", alpha, "Regularization weight in (0,1]")->capture_default_str();
    train->add_option("--path", path, "Solver: dense, woodbury or auto")->capture_default_str();
    train->add_option("--out", out, "Model file to write")->required();
    train->add_option("--workers", workers, "Threads")->capture_default_str();

    auto* extract = app.add_subcommand("extract", "Write per-image feature vectors as CSV");
    extract->add_option("--model", model, "Model file")->required();
    extract->add_option("--manifest", manifest, "Images to featurize")->required();
    extract->add_option("--out", out, "Feature CSV to write")->required();
    extract->add_option("--workers", workers, "Threads")->capture_default_str();

    mscfb::ExperimentConfig config;
    std::string classifier = "cosine", report, format = "json";
    std::uint32_t t = config.t, trials = config.trials;
    std::uint64_t seed = config.seed;
    auto* evaluate = app.add_subcommand("evaluate", "Repeated random t-per-subject trials");
    evaluate->add_option("--manifest", manifest, "Dataset manifest")->required();
    evaluate->add_option("--t", t, "Training images per subject")->capture_default_str();
    evaluate->add_option("--trials", trials, "Number of random splits")->capture_default_str();
    evaluate->add_option("--seed", seed, "Master seed")->capture_default_str();
    evaluate->add_option("--classifier", classifier, "max or cosine")->capture_default_str();
    evaluate->add_option("--block", block, "Block size WxH")->capture_default_str();
    evaluate->add_option("--alpha", alpha, "Regularization weight in (0,1]")->capture_default_str();
    evaluate->add_option("--path", path, "Solver: dense, woodbury or auto")->capture_default_str();
    evaluate->add_option("--report", report, "Report file")->required();
    evaluate->add_option("--format", format, "json or csv")->capture_default_str();
    evaluate->add_option("--workers", workers, "Threads")->capture_default_str();

    std::string train_csv, gallery_csv, probe_csv;
    auto* gp = app.add_subcommand("gallery-probe", "Rank-1 gallery/probe matching with banks from a separate training set");
    gp->add_option("--train", train_csv, "Training manifest")->required();
    gp->add_option("--gallery", gallery_csv, "Gallery manifest")->required();
    gp->add_option("--probe", probe_csv, "Probe manifest")->required();
    gp->add_option("--block", block, "Block size WxH")->capture_default_str();
    gp->add_option("--alpha", alpha, "Regularization weight in (0,1]")->capture_default_str();
    gp->add_option("--path", path, "Solver: dense, woodbury or auto")->capture_default_str();
    gp->add_option("--classifier", classifier, "Must be cosine")->capture_default_str();
    gp->add_option("--report", report, "Report file (JSON)")->required();
    gp->add_option("--workers", workers, "Threads")->capture_default_str();

    mscfb::SyntheticParams synth_params;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic PGM dataset");
    synth->add_option("--classes", synth_params.classes, "Number of classes")->required();
    synth->add_option("--per-class", synth_params.per_class, "Images per class")->required();
    synth->add_option("--width", synth_params.width, "Image width")->required();
    synth->add_option("--height", synth_params.height, "Image height")->required();
    synth->add_option("--separation", synth_params.separation, "Template pixel std")->required();
    synth->add_option("--noise", synth_params.noise, "Per-sample noise std")->required();
    synth->add_option("--seed", synth_params.seed, "Seed")->required();
    synth->add_option("--out", synth_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const auto b = parse_block(block);
        config.block_width = b.width;
        config.block_height = b.height;
        config.alpha = alpha;
        config.path = mscfb::parse_solve_path(path);
        config.workers = workers;

        if (*train) {
            mscfb::require_design_alpha(alpha);
            const auto banks = mscfb::train_from_manifest(mscfb::load_manifest(manifest), b.width, b.height, alpha,
                                                          config.path, workers);
            mscfb::save_model(banks, out);
            std::cout << "trained " << banks.class_count() << " banks of length " << banks.spec.total_size() << " -> "
                      << out << "\n";
        } else if (*extract) {
            const auto banks = mscfb::load_model(model);
            const auto rows = mscfb::extract_from_manifest(mscfb::load_manifest(manifest), banks, workers);
            mscfb::write_file_text(out, mscfb::features_to_csv(rows));
            std::cout << "wrote " << rows.size() << " feature rows -> " << out << "\n";
        } else if (*evaluate) {
            config.t = t;
            config.trials = trials;
            config.seed = seed;
            config.classifier = mscfb::parse_classifier(classifier);
            const auto fmt = mscfb::parse_report_format(format);
            const auto r = mscfb::run_repeated_trials(mscfb::load_manifest(manifest), config);
            mscfb::emit_report(r, report, fmt);
            std::printf("accuracy %.4f +/- %.4f over %u trials\n", r.mean, r.std, r.config.trials);
        } else if (*gp) {
            config.classifier = mscfb::parse_classifier(classifier);
            const auto r = mscfb::run_gallery_probe(mscfb::load_manifest(train_csv), mscfb::load_manifest(gallery_csv),
                                                    {{probe_csv, mscfb::load_manifest(probe_csv)}}, config);
            mscfb::emit_report(r, report);
            for (const auto& p : r.probes) std::printf("%s: rank-1 accuracy %.4f (%zu/%zu)\n", p.name.c_str(), p.accuracy, p.correct, p.total);
        } else if (*synth) {
            const auto m = mscfb::write_dataset(mscfb::generate_synthetic(synth_params), synth_dir);
            std::cout << "wrote " << std::size_t{synth_params.classes} * synth_params.per_class << " images -> " << m.string() << "\n";
        }
    } catch (const mscfb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mscfb::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
