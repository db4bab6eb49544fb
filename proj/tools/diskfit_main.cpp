#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "diskfit/bench.hpp"
#include "diskfit/circlefit.hpp"
#include "diskfit/empupil.hpp"
#include "diskfit/imagepipe.hpp"
#include "diskfit/pgm.hpp"
#include "diskfit/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

int exit_code_for(const diskfit::Error& e) {
    switch (e.code()) {
    case diskfit::ErrorCode::InvalidInput:
        return kExitValidation;
    case diskfit::ErrorCode::IoError:
        return kExitIo;
    default:
        return kExitData;
    }
}

void emit_error(const diskfit::Error& e) {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "error";
    j["error"] = {{"code", e.code_name()}, {"message", e.what()}};
    std::cout << j.dump(2) << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json fit_to_json(const diskfit::CircleFit& fit) {
    return {{"x0", fit.x0}, {"y0", fit.y0}, {"r", fit.r}, {"sigma2", fit.sigma2}};
}

struct DetectArgs {
    std::string image_path;
    std::string polarity = "outer";
    std::size_t max_points = 320;
    std::uint64_t seed = 1;
    std::string method = "closed";
    double rel_tol = 1e-4;
    int max_iter = 100;
};

int run_detect(const DetectArgs& args) {
    const auto t_start = std::chrono::steady_clock::now();
    const diskfit::GrayImage image = diskfit::read_pgm(args.image_path);
    const double t_read = seconds_since(t_start);

    const auto t_pipe = std::chrono::steady_clock::now();
    const diskfit::GradientField field = diskfit::gradient_field(image);
    const diskfit::EdgePointSet points =
        diskfit::extract_edge_points(field, args.max_points, args.seed);
    const double t_pipeline = seconds_since(t_pipe);

    const diskfit::EdgePolarity polarity = args.polarity == "inner"
                                               ? diskfit::EdgePolarity::Inner
                                               : diskfit::EdgePolarity::Outer;

    const auto t_fit = std::chrono::steady_clock::now();
    diskfit::CircleFit fit;
    int iterations = 0;
    bool converged = true;
    if (args.method == "closed") {
        fit = diskfit::fit_closed_form(points, polarity);
    } else {
        const diskfit::CircleFit init = args.method == "warm"
                                            ? diskfit::fit_closed_form(points, polarity)
                                            : diskfit::fit_kasa(points);
        const diskfit::FitReport rep =
            diskfit::fit_geometric_iterative(points, init, args.rel_tol, args.max_iter);
        fit = rep.fit;
        iterations = rep.iterations;
        converged = rep.converged;
    }
    const double t_fitting = seconds_since(t_fit);

    json j;
    j["schema_version"] = 1;
    j["kind"] = "detection";
    j["fit"] = fit_to_json(fit);
    j["points_used"] = points.size();
    j["polarity"] = args.polarity;
    j["method"] = args.method;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["timing"] = {{"read_s", t_read}, {"pipeline_s", t_pipeline}, {"fit_s", t_fitting}};
    j["warnings"] = json::array();
    if (!converged)
        j["warnings"].push_back("fit_not_converged");
    std::cout << j.dump(2) << std::endl;
    return kExitOk;
}

struct PupilArgs {
    std::string image_path;
    std::size_t max_points = 320;
    std::uint64_t seed = 1;
    double rel_tol = 1e-6;
    int max_iter = 200;
};

int run_pupil(const PupilArgs& args) {
    const auto t_start = std::chrono::steady_clock::now();
    const diskfit::GrayImage image = diskfit::read_pgm(args.image_path);
    const diskfit::GradientField field = diskfit::gradient_field(image);
    const diskfit::EdgePointSet points =
        diskfit::extract_edge_points(field, args.max_points, args.seed);

    const double diag = std::hypot(image.width(), image.height());
    const diskfit::MixtureParams init = diskfit::init_params(points, diag);
    const auto [params, trace] = diskfit::fit_pupil_em(points, init, args.rel_tol, args.max_iter);
    const double total_s = seconds_since(t_start);

    json j;
    j["schema_version"] = 1;
    j["kind"] = "pupil";
    j["mixture"] = {{"tau", params.tau},   {"x01", params.x01},       {"y01", params.y01},
                    {"r", params.r},       {"sigma1", params.sigma1}, {"x02", params.x02},
                    {"y02", params.y02},   {"sigma2", params.sigma2}};
    j["points_used"] = points.size();
    j["em"] = {{"iterations", trace.iteration_count},
               {"converged", trace.converged},
               {"final_loglik", trace.iterations.empty() ? 0.0 : trace.iterations.back().loglik}};
    j["timing"] = {{"total_s", total_s}};
    j["warnings"] = json::array();
    if (!trace.converged)
        j["warnings"].push_back("em_not_converged");
    std::cout << j.dump(2) << std::endl;
    return kExitOk;
}

struct SynthArgs {
    std::string kind = "disk";
    std::string out_path;
    int width = 640;
    int height = 480;
    double r_min = 30.0;
    double r_max = 270.0;
    double inner_r = 40.0;
    int spider_count = 4;
    double spider_width = 6.0;
    double noise_lambda = 0.0;
    std::uint64_t seed = 1;
    bool hard_edges = false;
};

int run_synth(const SynthArgs& args) {
    json truth;
    truth["schema_version"] = 1;
    truth["kind"] = "synth_truth";
    truth["seed"] = args.seed;
    truth["noise_lambda"] = args.noise_lambda;

    std::optional<diskfit::GrayImage> image;
    if (args.kind == "disk") {
        diskfit::SynthDiskConfig cfg;
        cfg.width = args.width;
        cfg.height = args.height;
        cfg.r_min = args.r_min;
        cfg.r_max = args.r_max;
        cfg.noise_lambda = args.noise_lambda;
        cfg.seed = args.seed;
        cfg.antialias = !args.hard_edges;
        cfg.validate();
        diskfit::DiskSample sample = diskfit::render_disk(cfg);
        truth["disk"] = fit_to_json(sample.truth);
        image.emplace(std::move(sample.image));
    } else {
        diskfit::SynthAnnulusConfig cfg;
        cfg.width = args.width;
        cfg.height = args.height;
        cfg.r_min = args.r_min;
        cfg.r_max = args.r_max;
        cfg.inner_r = args.inner_r;
        cfg.spider_count = args.spider_count;
        cfg.spider_width = args.spider_width;
        cfg.noise_lambda = args.noise_lambda;
        cfg.seed = args.seed;
        cfg.validate();
        diskfit::AnnulusSample sample = diskfit::render_annulus(cfg);
        truth["outer"] = fit_to_json(sample.outer);
        truth["inner"] = fit_to_json(sample.inner);
        image.emplace(std::move(sample.image));
    }

    // Noisy pixel counts can exceed 8 bits; pick the payload width accordingly.
    double peak = 0.0;
    for (double v : image->pixels())
        peak = std::max(peak, v);
    const int maxval = peak > 255.0 ? 65535 : 255;
    diskfit::write_pgm(*image, args.out_path, maxval);

    std::ofstream sidecar(args.out_path + ".json");
    if (!sidecar)
        throw diskfit::Error(diskfit::ErrorCode::IoError, "cannot write truth sidecar");
    sidecar << truth.dump(2) << "\n";
    std::cout << truth.dump(2) << std::endl;
    return kExitOk;
}

struct BenchArgs {
    std::size_t trials = 500;
    std::uint64_t seed = 1;
    std::vector<double> noise_levels = {1.0, 256.0, 1024.0};
    std::vector<std::size_t> point_counts = {30, 60, 120, 240, 320};
    double rel_tol = 1e-4;
    std::string out_path;
};

int run_bench(const BenchArgs& args) {
    diskfit::BenchConfig cfg;
    cfg.trials = args.trials;
    cfg.seed = args.seed;
    cfg.noise_levels = args.noise_levels;
    cfg.point_counts = args.point_counts;
    cfg.rel_tol = args.rel_tol;
    const diskfit::BenchReport report = diskfit::run_benchmark(cfg);

    std::cout << diskfit::report_to_table(report);
    const std::string payload = diskfit::report_to_json(report);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out)
            throw diskfit::Error(diskfit::ErrorCode::IoError, "cannot write " + args.out_path);
        out << payload << "\n";
    } else {
        std::cout << payload << std::endl;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disk and annulus detection via gradient-based maximum-likelihood fitting"};
    app.require_subcommand(1);

    DetectArgs detect;
    CLI::App* cmd_detect = app.add_subcommand("detect", "Fit a disk in a PGM image");
    cmd_detect->add_option("image", detect.image_path, "input PGM file")->required();
    cmd_detect->add_option("--polarity", detect.polarity, "outer|inner")
        ->check(CLI::IsMember({"outer", "inner"}));
    cmd_detect->add_option("--max-points", detect.max_points, "edge point budget");
    cmd_detect->add_option("--seed", detect.seed, "subsampling seed");
    cmd_detect->add_option("--method", detect.method, "closed|iterative|warm")
        ->check(CLI::IsMember({"closed", "iterative", "warm"}));
    cmd_detect->add_option("--rel-tol", detect.rel_tol, "iterative termination tolerance");
    cmd_detect->add_option("--max-iter", detect.max_iter, "iteration cap");

    PupilArgs pupil;
    CLI::App* cmd_pupil = app.add_subcommand("pupil", "EM annulus (pupil) fit in a PGM image");
    cmd_pupil->add_option("image", pupil.image_path, "input PGM file")->required();
    cmd_pupil->add_option("--max-points", pupil.max_points, "edge point budget");
    cmd_pupil->add_option("--seed", pupil.seed, "subsampling seed");
    cmd_pupil->add_option("--rel-tol", pupil.rel_tol, "EM termination tolerance");
    cmd_pupil->add_option("--max-iter", pupil.max_iter, "EM iteration cap");

    SynthArgs synth;
    CLI::App* cmd_synth = app.add_subcommand("synth", "Render a synthetic disk or annulus");
    cmd_synth->add_option("kind", synth.kind, "disk|annulus")
        ->required()
        ->check(CLI::IsMember({"disk", "annulus"}));
    cmd_synth->add_option("--out", synth.out_path, "output PGM path")->required();
    cmd_synth->add_option("--width", synth.width);
    cmd_synth->add_option("--height", synth.height);
    cmd_synth->add_option("--r-min", synth.r_min);
    cmd_synth->add_option("--r-max", synth.r_max);
    cmd_synth->add_option("--inner-r", synth.inner_r);
    cmd_synth->add_option("--spiders", synth.spider_count);
    cmd_synth->add_option("--spider-width", synth.spider_width);
    cmd_synth->add_option("--noise-lambda", synth.noise_lambda);
    cmd_synth->add_option("--seed", synth.seed);
    cmd_synth->add_flag("--hard-edges", synth.hard_edges,
                        "disable boundary anti-aliasing (disk only)");

    BenchArgs bench;
    CLI::App* cmd_bench = app.add_subcommand("bench", "Run the synthetic evaluation grid");
    cmd_bench->add_option("--trials", bench.trials, "trials per cell");
    cmd_bench->add_option("--seed", bench.seed);
    cmd_bench->add_option("--noise-levels", bench.noise_levels, "lambda values");
    cmd_bench->add_option("--point-counts", bench.point_counts);
    cmd_bench->add_option("--rel-tol", bench.rel_tol);
    cmd_bench->add_option("--out", bench.out_path, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (cmd_detect->parsed())
            return run_detect(detect);
        if (cmd_pupil->parsed())
            return run_pupil(pupil);
        if (cmd_synth->parsed())
            return run_synth(synth);
        if (cmd_bench->parsed())
            return run_bench(bench);
    } catch (const diskfit::Error& e) {
        emit_error(e);
        return exit_code_for(e);
    } catch (const std::exception& e) {
        emit_error(diskfit::Error(diskfit::ErrorCode::NumericalFailure, e.what()));
        return kExitData;
    }
    return kExitValidation;
}
