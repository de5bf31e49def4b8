// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#include "intrinsic/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "intrinsic/errors.hpp"
#include "intrinsic/metrics.hpp"

namespace fs = std::filesystem;

namespace intrinsic::cli {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw IoError("write failed for " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename temporary file onto " + path);
    }
}

nlohmann::json trace_json(const DecompositionResult& result) {
    nlohmann::json residuals = nlohmann::json::array();
    for (const IterationResidual& r : result.residual_trace) {
        residuals.push_back({{"eps_R", r.eps_r}, {"eps_S", r.eps_s}});
    }
    return nlohmann::json{{"iterations", result.iterations},
                          {"residuals", residuals},
                          {"energy", result.energy_trace},
                          {"wall_time_s", result.wall_time_s}};
}

struct Decomposed {
    ImageTensor image;
    DecompositionResult result;
};

Decomposed decompose_from_config(const RunConfig& cfg) {
    const ImageTensor image = load_image(cfg.input);
    if (image.channels() != 3) {
        throw FormatError("input image must be RGB: " + cfg.input);
    }
    ImageTensor prior_file = load_image(cfg.r_prior);
    if (prior_file.channels() == 1) prior_file = replicate_channels(prior_file, 3);
    const PriorBundle priors = build_priors(image, prior_file, cfg.params.multichannel_shading,
                                            cfg.params.division_floor);
    DecompositionResult result = run(image, priors, cfg.params);
    return {image, std::move(result)};
}

void write_decomposition_outputs(const RunConfig& cfg, const DecompositionResult& result) {
    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    save_image(result.reflectance, (out / "reflectance.png").string(), cfg.display_rescale);
    save_image(result.shading, (out / "shading.png").string(), cfg.display_rescale);
    if (cfg.emit_trace) {
        // Keep both the raw and the display-rescaled variants around.
        const bool clip_selected = cfg.display_rescale == Rescale::clip;
        const Rescale other = clip_selected ? Rescale::minmax : Rescale::clip;
        const std::string suffix = clip_selected ? "_display" : "_raw";
        save_image(result.reflectance, (out / ("reflectance" + suffix + ".png")).string(),
                   other);
        save_image(result.shading, (out / ("shading" + suffix + ".png")).string(), other);
        write_text_atomic((out / "trace.json").string(), trace_json(result).dump(2) + "\n");
    }
}

std::optional<std::array<double, 3>> parse_color(const std::string& text) {
    std::array<double, 3> rgb{};
    if (!text.empty() && text[0] == '#') {
        if (text.size() != 7) return std::nullopt;
        for (int c = 0; c < 3; ++c) {
            const std::string byte = text.substr(1 + 2 * c, 2);
            char* end = nullptr;
            const long v = std::strtol(byte.c_str(), &end, 16);
            if (end != byte.c_str() + 2) return std::nullopt;
            rgb[c] = static_cast<double>(v) / 255.0;
        }
        return rgb;
    }
    std::stringstream ss(text);
    std::string part;
    int c = 0;
    while (std::getline(ss, part, ',')) {
        if (c == 3) return std::nullopt;
        try {
            std::size_t pos = 0;
            rgb[c] = std::stod(part, &pos);
            if (pos != part.size()) return std::nullopt;
        } catch (const std::exception&) {
            return std::nullopt;
        }
        ++c;
    }
    if (c != 3) return std::nullopt;
    return rgb;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEval;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_decompose(const RunConfig& cfg) {
    return run_guarded([&] {
        const Decomposed d = decompose_from_config(cfg);
        write_decomposition_outputs(cfg, d.result);
        return 0;
    });
}

int cmd_enhance(const RunConfig& cfg, double gamma) {
    return run_guarded([&] {
        if (!(gamma > 0.0)) {
            throw ParamError("enhance: gamma must be positive, got " + format_double(gamma));
        }
        const Decomposed d = decompose_from_config(cfg);
        const ImageTensor corrected = pow_elements(d.result.shading, 1.0 / gamma);
        const ImageTensor enhanced = clamp_unit(hadamard(d.result.reflectance, corrected));
        fs::create_directories(cfg.output_dir);
        const fs::path out(cfg.output_dir);
        save_image(enhanced, (out / "enhanced.png").string(), Rescale::clip);
        if (cfg.emit_trace) {
            write_text_atomic((out / "trace.json").string(),
                              trace_json(d.result).dump(2) + "\n");
        }
        return 0;
    });
}

int cmd_recolor(const RunConfig& cfg, const std::string& mask_path,
                const std::string& swatch) {
    return run_guarded([&] {
        const Decomposed d = decompose_from_config(cfg);

        ImageTensor mask = load_image(mask_path);
        if (mask.channels() == 3) mask = channel_mean(mask);
        if (mask.height() != d.image.height() || mask.width() != d.image.width()) {
            throw ShapeError("recolor: mask dimensions " + mask.shape_string() +
                             " do not match input " + d.image.shape_string());
        }

        const ImageTensor& r = d.result.reflectance;
        ImageTensor replacement(r.height(), r.width(), 3);
        if (const auto color = parse_color(swatch)) {
            for (int c = 0; c < 3; ++c) {
                std::fill_n(replacement.channel(c), replacement.pixel_count(), (*color)[c]);
            }
        } else {
            ImageTensor texture = load_image(swatch);
            if (texture.channels() == 1) texture = replicate_channels(texture, 3);
            for (int c = 0; c < 3; ++c) {
                for (int i = 0; i < r.height(); ++i) {
                    for (int j = 0; j < r.width(); ++j) {
                        replacement.at(c, i, j) =
                            texture.at(c, i % texture.height(), j % texture.width());
                    }
                }
            }
        }

        ImageTensor recolored_r(r.height(), r.width(), 3);
        for (int c = 0; c < 3; ++c) {
            const double* m = mask.channel(0);
            const double* pr = r.channel(c);
            const double* pw = replacement.channel(c);
            double* po = recolored_r.channel(c);
            for (std::size_t k = 0; k < r.pixel_count(); ++k) {
                po[k] = (1.0 - m[k]) * pr[k] + m[k] * pw[k];
            }
        }

        const ImageTensor recolored = clamp_unit(hadamard(recolored_r, d.result.shading));
        fs::create_directories(cfg.output_dir);
        save_image(recolored, (fs::path(cfg.output_dir) / "recolored.png").string(),
                   Rescale::clip);
        return 0;
    });
}

int cmd_eval_whdr(const std::string& pred_path, const std::string& judgments_path,
                  double delta) {
    return run_guarded([&] {
        const ImageTensor pred = load_image(pred_path);
        const JudgmentSet judgments =
            load_judgments(judgments_path, pred.height(), pred.width());
        const WhdrReport report = whdr(pred, judgments, delta);
        const nlohmann::json doc{{"whdr", report.whdr},
                                 {"total_weight", report.total_weight},
                                 {"disagreement_weight", report.disagreement_weight},
                                 {"delta", report.delta},
                                 {"n_comparisons", report.n_comparisons}};
        std::cout << doc.dump(2) << "\n";
        return 0;
    });
}

int cmd_bench(const std::string& dataset_dir, const std::string& priors_dir,
              const SolverParams& params, const std::string& out_csv, int workers) {
    return run_guarded([&] {
        if (workers < 1) throw ParamError("bench: workers must be >= 1");
        if (!fs::is_directory(dataset_dir)) {
            throw IoError("bench: dataset directory not found: " + dataset_dir);
        }
        if (!fs::is_directory(priors_dir)) {
            throw IoError("bench: priors directory not found: " + priors_dir);
        }

        struct Job {
            std::string id;
            fs::path image;
            fs::path judgments;
            fs::path prior;
        };
        std::vector<Job> jobs;
        std::vector<fs::path> images;
        for (const auto& entry : fs::directory_iterator(dataset_dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string ext = entry.path().extension().string();
            if (ext == ".png" || ext == ".ppm") images.push_back(entry.path());
        }
        std::sort(images.begin(), images.end());
        if (images.empty()) {
            throw EvalError("bench: no images found in " + dataset_dir);
        }

        for (const fs::path& img : images) {
            const std::string id = img.stem().string();
            const fs::path judgments = fs::path(dataset_dir) / (id + ".json");
            fs::path prior = fs::path(priors_dir) / (id + ".png");
            if (!fs::exists(prior)) prior = fs::path(priors_dir) / (id + ".ppm");
            if (!fs::exists(prior)) {
                std::cerr << "bench: skipping " << id << " (no prior in " << priors_dir
                          << ")\n";
                continue;
            }
            if (!fs::exists(judgments)) {
                std::cerr << "bench: skipping " << id << " (no judgment file " << judgments
                          << ")\n";
                continue;
            }
            jobs.push_back({id, img, judgments, prior});
        }
        if (jobs.empty()) {
            throw EvalError("bench: no image in " + dataset_dir +
                            " has both a prior and judgments");
        }

        std::vector<BenchEntry> entries(jobs.size());
        std::vector<std::string> failures(jobs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t k = next.fetch_add(1); k < jobs.size(); k = next.fetch_add(1)) {
                const Job& job = jobs[k];
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    const ImageTensor image = load_image(job.image.string());
                    if (image.channels() != 3) {
                        throw FormatError("bench: image must be RGB: " + job.image.string());
                    }
                    ImageTensor prior_file = load_image(job.prior.string());
                    if (prior_file.channels() == 1) {
                        prior_file = replicate_channels(prior_file, 3);
                    }
                    const PriorBundle priors = build_priors(
                        image, prior_file, params.multichannel_shading, params.division_floor);
                    const DecompositionResult result = run(image, priors, params);
                    const JudgmentSet judgments = load_judgments(
                        job.judgments.string(), image.height(), image.width());
                    const WhdrReport report = whdr(result.reflectance, judgments);
                    const double elapsed =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    entries[k] = {job.id, report.whdr, elapsed, result.iterations};
                } catch (const std::exception& e) {
                    failures[k] = e.what();
                }
            }
        };

        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
            pool.reserve(n);
            for (int t = 0; t < n; ++t) pool.emplace_back(worker);
            for (std::thread& t : pool) t.join();
        }

        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (!failures[k].empty()) {
                throw Error("bench: " + jobs[k].id + " failed: " + failures[k]);
            }
        }

        std::ostringstream csv;
        csv << "image_id,whdr,wall_time_s,iterations\n";
        double whdr_sum = 0.0, time_sum = 0.0, iter_sum = 0.0;
        for (const BenchEntry& e : entries) {
            csv << e.image_id << "," << format_double(e.whdr) << ","
                << format_double(e.wall_time_s) << "," << e.iterations << "\n";
            whdr_sum += e.whdr;
            time_sum += e.wall_time_s;
            iter_sum += e.iterations;
        }
        const double n = static_cast<double>(entries.size());
        csv << "mean," << format_double(whdr_sum / n) << "," << format_double(time_sum / n)
            << "," << format_double(iter_sum / n) << "\n";

        if (out_csv.empty()) {
            std::cout << csv.str();
        } else {
            write_text_atomic(out_csv, csv.str());
        }
        return 0;
    });
}

namespace {

void add_solver_options(CLI::App* sub, SolverParams& params, bool& gray_shading) {
    sub->add_option("--alpha", params.alpha, "TV weight on the shading prior residual");
    sub->add_option("--beta", params.beta, "l0 weight on reflectance gradients");
    sub->add_option("--gamma-weight", params.gamma, "absolute-scale weight");
    sub->add_option("--mu", params.mu, "half-quadratic splitting weight");
    sub->add_option("--sigma", params.sigma, "shading/denoiser coupling weight");
    sub->add_option("--s0", params.s0, "absolute scale anchor");
    sub->add_option("--eps", params.eps, "convergence tolerance on relative change");
    sub->add_option("--max-iters", params.max_iters, "iteration cap");
    sub->add_flag("--gray-shading", gray_shading,
                  "solve for single-channel shading instead of RGB");
    sub->set_config("--config", "", "flat key=value file mirroring the flag names");
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("intrinsic");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Reflectance/shading separation with precomputed priors"};
    app.require_subcommand(1);

    RunConfig cfg;
    bool gray_shading = false;
    std::string rescale = "clip";
    double gamma = 2.2;
    std::string mask_path, swatch;
    std::string pred_path, judgments_path;
    double delta = 0.10;
    std::string dataset_dir, priors_dir, out_csv;
    int workers = 1;

    auto add_io_options = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "input image (PNG or binary PPM)")->required();
        sub->add_option("--prior", cfg.r_prior, "precomputed reflectance prior image")
            ->required();
        sub->add_option("--out", cfg.output_dir, "output directory")->required();
        sub->add_option("--rescale", rescale, "output mapping: clip or minmax")
            ->check(CLI::IsMember({"clip", "minmax"}));
        sub->add_flag("--trace", cfg.emit_trace,
                      "also write trace.json and the alternate rescale variant");
        add_solver_options(sub, cfg.params, gray_shading);
    };

    CLI::App* dec = app.add_subcommand("decompose", "split an image into reflectance and shading");
    add_io_options(dec);

    CLI::App* enh = app.add_subcommand("enhance", "low-light enhancement via gamma-corrected shading");
    add_io_options(enh);
    enh->add_option("--gamma", gamma, "gamma applied to shading as S^(1/gamma)");

    CLI::App* rec = app.add_subcommand("recolor", "replace masked reflectance with a swatch");
    add_io_options(rec);
    rec->add_option("--mask", mask_path, "grayscale mask image")->required();
    rec->add_option("--swatch", swatch, "replacement color (#rrggbb or r,g,b) or texture image")
        ->required();

    CLI::App* ev = app.add_subcommand("eval-whdr", "score a reflectance image against judgments");
    ev->add_option("--input", pred_path, "predicted reflectance image")->required();
    ev->add_option("--judgments", judgments_path, "IIW-style judgment JSON")->required();
    ev->add_option("--delta", delta, "equality threshold on lightness ratios");
    ev->set_config("--config", "", "flat key=value file mirroring the flag names");

    CLI::App* bench = app.add_subcommand("bench", "batch decomposition + WHDR over a dataset");
    bench->add_option("--dataset", dataset_dir, "directory of images + judgment JSONs")
        ->required();
    bench->add_option("--priors", priors_dir, "directory of matching prior images")->required();
    bench->add_option("--out", out_csv, "CSV output path (stdout when omitted)");
    bench->add_option("--workers", workers, "number of concurrent images");
    {
        static bool bench_gray = false;
        add_solver_options(bench, cfg.params, bench_gray);
        gray_shading = bench_gray;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    cfg.params.multichannel_shading = !gray_shading;
    cfg.display_rescale = rescale == "minmax" ? Rescale::minmax : Rescale::clip;

    if (dec->parsed()) return cmd_decompose(cfg);
    if (enh->parsed()) return cmd_enhance(cfg, gamma);
    if (rec->parsed()) return cmd_recolor(cfg, mask_path, swatch);
    if (ev->parsed()) return cmd_eval_whdr(pred_path, judgments_path, delta);
    if (bench->parsed()) return cmd_bench(dataset_dir, priors_dir, cfg.params, out_csv, workers);
    return 1;
}

}  // namespace intrinsic::cli
