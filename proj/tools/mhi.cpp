// mhi: temporal-template action recognition from the command line.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mhi/mhi.hpp"

namespace {

enum ExitCode { ok = 0, usage_error = 1, data_error = 2, numeric_failure = 3 };

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << "\n";
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        mhi::detail::write_text(out, text);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motion-history temporal templates, moment features and action classifiers"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(36);

    int theta = mhi::default_theta;
    int tau = mhi::default_tau;
    int jobs = 1;
    std::string out;

    auto add_pipeline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--theta", theta, "Frame-difference threshold (strict >)")
            ->capture_default_str()
            ->check(CLI::Range(0, 255));
        cmd->add_option("--tau", tau, "Temporal window length in frames")->capture_default_str()->check(CLI::PositiveNumber);
    };
    auto add_jobs = [&](CLI::App* cmd) {
        cmd->add_option("--jobs", jobs, "Worker threads (output does not depend on it)")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    };

    // extract
    std::string manifest;
    auto* extract = app.add_subcommand("extract", "Compute feature CSV from a sequence manifest");
    extract->add_option("manifest", manifest, "JSON Lines manifest")->required()->check(CLI::ExistingFile);
    add_pipeline_flags(extract);
    add_jobs(extract);
    extract->add_option("--out", out, "Output feature CSV")->required();

    // train
    std::string train_input, classifier = "mlp", report;
    mhi::TrainOptions topt;
    auto* train = app.add_subcommand("train", "Split, standardise and train a classifier");
    train->add_option("input", train_input, "Feature CSV or manifest")->required()->check(CLI::ExistingFile);
    train->add_option("--classifier", classifier, "knn or mlp")
        ->capture_default_str()
        ->check(CLI::IsMember({"knn", "mlp"}));
    train->add_option("--seed", topt.split.seed, "Seed for splitting and MLP initialisation")->capture_default_str();
    train->add_option("--k", topt.k, "KNN neighbour count")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--lr", topt.mlp.lr, "MLP learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--epochs", topt.mlp.epochs, "MLP epochs")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--batch", topt.mlp.batch, "MLP mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--hidden", topt.mlp.hidden, "MLP hidden layer sizes")->capture_default_str()->delimiter(',');
    add_pipeline_flags(train);
    add_jobs(train);
    train->add_option("--out", out, "Output model file (JSON)")->required();
    train->add_option("--report", report, "Report path (default: <out>.report.txt)");

    // eval
    std::string model_path, eval_input;
    auto* eval = app.add_subcommand("eval", "Confusion matrix of a model on labelled data");
    eval->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    eval->add_option("input", eval_input, "Feature CSV or manifest")->required()->check(CLI::ExistingFile);
    add_jobs(eval);
    eval->add_option("--out", out, "Confusion matrix CSV (default: stdout)");

    // predict
    std::string frame_dir;
    mhi::PredictOptions popt;
    auto* predict = app.add_subcommand("predict", "Sliding-window action labelling of a frame directory");
    predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    predict->add_option("frames", frame_dir, "Directory of NNNNNN.pgm frames")->required()->check(CLI::ExistingDirectory);
    predict->add_option("--window", popt.window, "Window length in frames (default: model tau)")->check(CLI::Range(2, 1 << 30));
    predict->add_option("--stride", popt.stride, "Window stride (default: window/2)")->check(CLI::PositiveNumber);
    add_jobs(predict);
    predict->add_option("--out", out, "Output JSON (default: stdout)");

    // render
    auto* render = app.add_subcommand("render", "Write mei.pgm and mhi.pgm for a frame directory");
    render->add_option("frames", frame_dir, "Directory of NNNNNN.pgm frames")->required()->check(CLI::ExistingDirectory);
    add_pipeline_flags(render);
    render->add_option("--out", out, "Output directory")->required();

    // synth
    std::string spec_file;
    auto* synth = app.add_subcommand("synth", "Generate synthetic moving-rectangle clips and a manifest");
    synth->add_option("spec", spec_file, "JSON synth spec (array of clip classes)")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (*extract) {
            const auto r = mhi::cmd_extract(manifest, theta, tau, out, jobs);
            print_warnings(r.warnings);
            std::cerr << "wrote " << r.samples.size() << " samples to " << out << "\n";
        } else if (*train) {
            topt.classifier = classifier == "knn" ? mhi::ClassifierKind::Knn : mhi::ClassifierKind::Mlp;
            topt.mlp.seed = topt.split.seed;
            topt.theta = theta;
            topt.tau = tau;
            topt.jobs = jobs;
            if (report.empty())
                report = out + ".report.txt";
            const auto r = mhi::cmd_train(train_input, topt, out, report);
            print_warnings(r.warnings);
            std::cout << r.report;
        } else if (*eval) {
            const auto r = mhi::cmd_eval(model_path, eval_input, "", jobs);
            print_warnings(r.warnings);
            emit(mhi::confusion_csv(r.evaluation), out);
        } else if (*predict) {
            popt.jobs = jobs;
            const auto windows = mhi::cmd_predict(model_path, frame_dir, popt);
            for (const auto& w : windows)
                if (w.blobs.warning)
                    std::cerr << "warning: frames " << w.start_frame << "-" << w.end_frame << ": "
                              << w.blobs.large_components << " separate motion regions (shadow or second actor?)\n";
            emit(mhi::windows_to_json(windows), out);
        } else if (*render) {
            mhi::cmd_render(frame_dir, theta, tau, out);
        } else if (*synth) {
            const auto records = mhi::cmd_synth(spec_file, out);
            std::cerr << "wrote " << records.size() << " sequences to " << out << "\n";
        }
    } catch (const mhi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case mhi::ErrorKind::NonFiniteLoss: return numeric_failure;
        case mhi::ErrorKind::InvalidArgument: return usage_error;
        default: return data_error;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data_error;
    }
    return ok;
}
