#include "genshift/diffusion.hpp"
#include "genshift/errors.hpp"
#include "genshift/filters.hpp"
#include "genshift/io.hpp"
#include "genshift/parallel.hpp"
#include "genshift/pipeline.hpp"
#include "genshift/range_space.hpp"
#include "genshift/run_config.hpp"

#include <CLI11.hpp>
#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace genshift;
using Clock = std::chrono::steady_clock;
using Type = ConfigKey::Type;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

/// Machine-readable `key=value` output on stdout.
class Report {
public:
    explicit Report(bool enabled) : enabled_(enabled) {}

    template <typename T>
    void operator()(const std::string& key, const T& value) const
    {
        if (!enabled_) return;
        if constexpr (std::is_floating_point_v<T>) {
            std::cout << key << '=' << io::format_real(value, 9) << '\n';
        } else {
            std::cout << key << '=' << value << '\n';
        }
    }

private:
    bool enabled_;
};

/// A subcommand whose options double as RunConfig keys.
class Command {
public:
    Command(CLI::App& parent, const std::string& name, const std::string& description)
        : app_(parent.add_subcommand(name, description))
    {
        app_->add_option("--config", config_path_, "key = value file with defaults for any option");
    }

    CLI::App& app() { return *app_; }
    const std::vector<ConfigKey>& schema() const { return schema_; }

    template <typename T>
    CLI::Option* option(const std::string& name, T& target, const std::string& description, Type type,
                        std::vector<std::string> choices = {})
    {
        schema_.push_back({name, type, choices});
        CLI::Option* opt = app_->add_option("--" + name, target, description)->capture_default_str();
        if (!choices.empty()) opt->check(CLI::IsMember(choices));
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& target, const std::string& description)
    {
        schema_.push_back({name, Type::flag, {}});
        return app_->add_flag("--" + name, target, description);
    }

    CLI::Option* threads(std::size_t& target)
    {
        return option("threads", target, "worker threads, 0 for all cores (default: $GENSHIFT_THREADS)", Type::integer)
            ->check(CLI::NonNegativeNumber);
    }

    void on_run(std::function<void()> fn) { app_->callback(std::move(fn)); }

private:
    CLI::App* app_;
    std::vector<ConfigKey> schema_;
    std::string config_path_;
};

FilterMode parse_filter_mode(const std::string& s) { return s == "bilateral" ? FilterMode::bilateral : FilterMode::mean_shift; }

PartitionScheme parse_scheme(const std::string& s)
{
    return s == "vmf" ? PartitionScheme::vmf_meshless : PartitionScheme::spherical_hat;
}

double psnr(double mse) { return mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : std::numeric_limits<double>::infinity(); }

std::size_t count_within(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double max_angle)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::atan2(a[i].cross(b[i]).norm(), a[i].dot(b[i])) <= max_angle) ++count;
    }
    return count;
}

// Settings shared by the normal-filtering subcommands.
struct NormalOptions {
    std::string mode = "meanshift";
    std::string scheme = "hat";
    double sigma_s = 2.0;
    double sigma_r = 0.1;
    int level = 1;
    std::size_t meshless_samples = 42;
    int max_iters = 50;
    double tolerance_deg = 0.01;
    std::size_t threads = 0;

    void add_to(Command& cmd, const std::string& sigma_s_help)
    {
        cmd.option("mode", mode, "bilateral or meanshift", Type::choice, {"bilateral", "meanshift"});
        cmd.option("scheme", scheme, "sphere partition: hat (subdivided icosahedron) or vmf (meshless)", Type::choice,
                   {"hat", "vmf"});
        cmd.option("sigma-s", sigma_s, sigma_s_help, Type::positive_real)->check(CLI::PositiveNumber);
        cmd.option("sigma-r", sigma_r, "VMF range width", Type::positive_real)->check(CLI::PositiveNumber);
        cmd.option("samples-level", level, "icosahedron subdivision level for range samples", Type::integer)
            ->check(CLI::Range(0, 6));
        cmd.option("meshless-samples", meshless_samples, "sample count for --scheme vmf", Type::positive_integer)
            ->check(CLI::PositiveNumber);
        cmd.option("max-iters", max_iters, "mean-shift iteration cap", Type::positive_integer)->check(CLI::PositiveNumber);
        cmd.option("tolerance", tolerance_deg, "mean-shift stopping angle in degrees", Type::positive_real)
            ->check(CLI::PositiveNumber);
        cmd.threads(threads);
    }

    DenoiseConfig config() const
    {
        DenoiseConfig cfg;
        cfg.mode = parse_filter_mode(mode);
        cfg.scheme = parse_scheme(scheme);
        cfg.sigma_spatial = sigma_s;
        cfg.sigma_range = sigma_r;
        cfg.subdivision_level = level;
        cfg.meshless_samples = meshless_samples;
        cfg.max_iterations = max_iters;
        cfg.tolerance = tolerance_deg * std::numbers::pi / 180.0;
        cfg.threads = threads;
        return cfg;
    }
};

void add_image_bilateral(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        std::string input, output, encoding = "raw";
        double sigma_s = 0.0, sigma_r = 0.0;
        std::size_t samples = 20, threads = 0;
        bool exact = false, report = false;
    };
    auto opt = std::make_shared<Options>();
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "image-bilateral",
                                                                 "cross-bilateral filter of a PGM/PPM image"));
    cmd.option("input", opt->input, "input PGM or PPM", Type::text)->required();
    cmd.option("output", opt->output, "output image", Type::text);
    cmd.option("sigma-s", opt->sigma_s, "spatial width in pixels", Type::positive_real)->required()->check(CLI::PositiveNumber);
    cmd.option("sigma-r", opt->sigma_r, "range width in intensity units", Type::positive_real)
        ->required()
        ->check(CLI::PositiveNumber);
    cmd.option("samples", opt->samples, "range samples (per channel for color)", Type::positive_integer)
        ->check(CLI::Range(2, 4096));
    cmd.option("encoding", opt->encoding, "output encoding", Type::choice, {"plain", "raw"});
    cmd.flag("exact", opt->exact, "also run the dense filter and print the error");
    cmd.flag("report", opt->report, "print key=value statistics");
    cmd.threads(opt->threads);
    cmd.on_run([opt] {
        const io::Image image = io::read_image(opt->input);
        const std::size_t channels = image.pixels.channels();
        FilterParams params;
        params.range = channels == 1 ? interval_range_space(opt->samples, opt->sigma_r)
                                     : box_range_space(channels, opt->samples, opt->sigma_r);
        params.blur = build_grid_blur(image.grid, opt->sigma_s);
        params.threads = opt->threads;

        const auto start = Clock::now();
        const BilateralResult r = generalized_bilateral(image.pixels, image.pixels, params);
        const double elapsed = seconds_since(start);
        if (!opt->output.empty()) {
            io::write_image(opt->output, {image.grid, r.output},
                            opt->encoding == "plain" ? io::NetpbmEncoding::plain : io::NetpbmEncoding::raw);
        }
        const Report report(opt->report);
        report("width", image.grid.width);
        report("height", image.grid.height);
        report("channels", channels);
        report("samples_blurred", r.samples_blurred);
        report("fallbacks", r.fallback_count);
        report("seconds", elapsed);
        if (opt->exact) {
            const Signal exact =
                exact_grid_bilateral_oracle(image.grid, image.pixels, image.pixels, opt->sigma_s, params.range.kernel());
            double max_err = 0.0, sum_sq = 0.0;
            const auto a = r.output.values();
            const auto b = exact.values();
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                max_err = std::max(max_err, std::abs(d));
                sum_sq += d * d;
            }
            const Report always(true);
            always("max_abs_error", max_err);
            always("psnr_db", psnr(sum_sq / static_cast<double>(a.size())));
        }
    });
}

void add_mesh_scalar(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        std::string input, signal, output, cross = "self", mode = "bilateral";
        double sigma_s = 2.0, sigma_r = 0.1, tolerance = 1e-4;
        std::size_t samples = 20, threads = 0;
        int level = 1, max_iters = 50;
        bool report = false;
    };
    auto opt = std::make_shared<Options>();
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "mesh-scalar",
                                                                 "filter a per-vertex scalar signal on a mesh"));
    cmd.option("input", opt->input, "input OBJ/PLY mesh", Type::text)->required();
    cmd.option("signal", opt->signal, "per-vertex CSV signal", Type::text)->required();
    cmd.option("output", opt->output, "output CSV", Type::text);
    cmd.option("cross", opt->cross, "range guide: the signal itself or vertex normals", Type::choice, {"self", "normals"});
    cmd.option("mode", opt->mode, "blur, bilateral or meanshift", Type::choice, {"blur", "bilateral", "meanshift"});
    cmd.option("sigma-s", opt->sigma_s, "spatial width in mean edge lengths", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("sigma-r", opt->sigma_r, "range width (normalized units, or VMF width for normals)", Type::positive_real)
        ->check(CLI::PositiveNumber);
    cmd.option("samples", opt->samples, "interval range samples", Type::positive_integer)->check(CLI::Range(2, 4096));
    cmd.option("samples-level", opt->level, "icosahedron level for the normal guide", Type::integer)->check(CLI::Range(0, 6));
    cmd.option("max-iters", opt->max_iters, "mean-shift iteration cap", Type::positive_integer)->check(CLI::PositiveNumber);
    cmd.option("tolerance", opt->tolerance, "mean-shift stopping change", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.flag("report", opt->report, "print key=value statistics");
    cmd.threads(opt->threads);
    cmd.on_run([opt] {
        const TriangleMesh mesh = io::read_mesh(opt->input);
        const Signal signal = io::read_signal_csv(opt->signal, DomainKind::vertex);
        ScalarFilterConfig cfg;
        cfg.mode = opt->mode == "blur" ? ScalarMode::blur
                   : opt->mode == "bilateral" ? ScalarMode::bilateral
                                              : ScalarMode::mean_shift;
        cfg.cross = opt->cross == "normals" ? CrossGuide::normals : CrossGuide::self;
        cfg.sigma_spatial = opt->sigma_s;
        cfg.sigma_range = opt->sigma_r;
        cfg.samples = opt->samples;
        cfg.subdivision_level = opt->level;
        cfg.max_iterations = opt->max_iters;
        cfg.tolerance = opt->tolerance;
        cfg.threads = opt->threads;
        const auto start = Clock::now();
        const ScalarFilterResult r = filter_mesh_scalar(mesh, signal, cfg);
        const double elapsed = seconds_since(start);
        if (!opt->output.empty()) io::write_signal_csv(opt->output, r.output);
        const Report report(opt->report);
        report("vertices", mesh.vertex_count());
        report("iterations", r.iterations);
        report("converged", r.converged ? "true" : "false");
        report("fallbacks", r.fallback_count);
        report("seconds", elapsed);
    });
}

void add_mesh_denoise(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        NormalOptions normals;
        std::string input, output, noisy_output;
        int recon_iters = 20;
        double noise = 0.0;
        std::uint64_t seed = 1;
        bool report = false;
    };
    auto opt = std::make_shared<Options>();
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "mesh-denoise",
                                                                 "filter face normals and move vertices to match"));
    cmd.option("input", opt->input, "input OBJ/PLY mesh", Type::text)->required();
    cmd.option("output", opt->output, "output mesh", Type::text);
    opt->normals.add_to(cmd, "spatial width in mean edge lengths");
    cmd.option("recon-iters", opt->recon_iters, "vertex reconstruction iterations", Type::positive_integer)
        ->check(CLI::PositiveNumber);
    cmd.option("noise", opt->noise, "add uniform vertex noise of this many mean edge lengths first", Type::nonnegative_real)
        ->check(CLI::NonNegativeNumber);
    cmd.option("seed", opt->seed, "noise seed", Type::integer);
    cmd.option("noisy-output", opt->noisy_output, "write the noisy mesh here", Type::text);
    cmd.flag("report", opt->report, "print key=value statistics");
    cmd.on_run([opt] {
        const TriangleMesh clean = io::read_mesh(opt->input);
        const TriangleMesh noisy = add_vertex_noise(clean, opt->noise, opt->seed);
        if (!opt->noisy_output.empty()) io::write_mesh(opt->noisy_output, noisy);
        DenoiseConfig cfg = opt->normals.config();
        cfg.reconstruction_iterations = opt->recon_iters;
        const auto start = Clock::now();
        const DenoiseResult r = denoise_mesh(noisy, cfg);
        const double elapsed = seconds_since(start);
        if (!opt->output.empty()) io::write_mesh(opt->output, r.mesh);

        const Report report(opt->report);
        report("vertices", clean.vertex_count());
        report("faces", clean.face_count());
        report("mean_edge_length", clean.mean_edge_length());
        report("iterations", r.normals.iterations);
        report("converged", r.normals.converged ? "true" : "false");
        report("fallbacks", r.normals.fallback_count);
        report("seconds", elapsed);
        if (opt->noise > 0.0) {
            const double before = vertex_rmse(noisy, clean);
            const double after = vertex_rmse(r.mesh, clean);
            const double faces = static_cast<double>(clean.face_count());
            const double two_degrees = 2.0 * std::numbers::pi / 180.0;
            report("noisy_rmse", before);
            report("rmse", after);
            report("rmse_reduction", 1.0 - after / before);
            report("filtered_normals_within_2deg",
                   static_cast<double>(count_within(to_vectors(r.normals.normals), clean.face_normals(), two_degrees)) /
                       faces);
            report("mesh_normals_within_2deg",
                   static_cast<double>(count_within(r.mesh.face_normals(), clean.face_normals(), two_degrees)) / faces);
        }
    });
}

void add_cloud_normals(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        NormalOptions normals;
        std::string input, output;
        std::size_t k = 10;
        double t = 0.0;
        bool report = false;
    };
    auto opt = std::make_shared<Options>();
    opt->normals.sigma_r = 0.2;
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "cloud-normals",
                                                                 "filter normals of an oriented point cloud"));
    cmd.option("input", opt->input, "input xyzn file", Type::text)->required();
    cmd.option("output", opt->output, "output xyzn file", Type::text);
    opt->normals.add_to(cmd, "spatial width in graph hops");
    cmd.app().add_option("-k", opt->k, "neighbors per point")->capture_default_str()->check(CLI::Range(3, 1000));
    cmd.app().add_option("-t", opt->t, "kNN weight scale exp(-d^2/t); default: squared mean neighbor distance")
        ->check(CLI::PositiveNumber);
    cmd.flag("report", opt->report, "print key=value statistics");
    cmd.on_run([opt] {
        const io::CloudParse parsed = io::read_xyzn(opt->input);
        const double nn = mean_neighbor_distance(parsed.cloud, opt->k);
        const double t = opt->t > 0.0 ? opt->t : nn * nn;
        const auto start = Clock::now();
        const CloudFilterResult r = filter_cloud_normals(parsed.cloud, opt->normals.config(), opt->k, t);
        const double elapsed = seconds_since(start);
        if (!opt->output.empty()) io::write_xyzn(opt->output, r.cloud);
        if (parsed.renormalized > 0) {
            std::cerr << "genshift: warning: renormalized " << parsed.renormalized << " input normals\n";
        }
        const Report report(opt->report);
        report("points", r.cloud.size());
        report("t", t);
        report("iterations", r.iterations);
        report("converged", r.converged ? "true" : "false");
        report("duplicate_pairs", r.duplicate_pairs);
        report("seconds", elapsed);
    });
}

void add_histogram(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        std::string input, signal = "normals", output;
        double sigma_s = 2.0, sigma_r = 0.1;
        int level = 1;
        std::size_t samples = 20, threads = 0;
        bool report = false;
    };
    auto opt = std::make_shared<Options>();
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "histogram", "local histograms on a mesh"));
    cmd.option("input", opt->input, "input OBJ/PLY mesh", Type::text)->required();
    cmd.option("signal", opt->signal, "'normals' for face normals, or a per-vertex CSV path", Type::text);
    cmd.option("output", opt->output, "output CSV", Type::text)->required();
    cmd.option("sigma-s", opt->sigma_s, "spatial width in mean edge lengths", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("sigma-r", opt->sigma_r, "bin kernel width", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("samples-level", opt->level, "icosahedron level for normal bins", Type::integer)->check(CLI::Range(0, 6));
    cmd.option("samples", opt->samples, "bins for a scalar signal", Type::positive_integer)->check(CLI::Range(2, 4096));
    cmd.flag("report", opt->report, "print key=value statistics");
    cmd.threads(opt->threads);
    cmd.on_run([opt] {
        const TriangleMesh mesh = io::read_mesh(opt->input);
        HistogramField h;
        if (opt->signal == "normals") {
            DenoiseConfig cfg;
            cfg.sigma_spatial = opt->sigma_s;
            cfg.sigma_range = opt->sigma_r;
            cfg.subdivision_level = opt->level;
            cfg.threads = opt->threads;
            h = mesh_normal_histograms(mesh, cfg);
        } else {
            const Signal s = io::read_signal_csv(opt->signal, DomainKind::vertex);
            h = mesh_scalar_histograms(mesh, s, opt->sigma_s, opt->sigma_r, opt->samples, opt->threads);
        }
        io::write_histograms_csv(opt->output, h);
        const Report report(opt->report);
        report("elements", h.size());
        report("bins", h.bins());
        report("uniform_fallbacks", h.uniform_fallbacks);
    });
}

void add_enhance(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        std::string input, output;
        double lambda = 1.0, sigma_s = 2.0, sigma_r = 0.3;
        int level = 1;
        std::size_t threads = 0;
        bool report = false;
    };
    auto opt = std::make_shared<Options>();
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "enhance", "edge-aware curvature exaggeration"));
    cmd.option("input", opt->input, "input OBJ/PLY mesh", Type::text)->required();
    cmd.option("output", opt->output, "output mesh", Type::text);
    cmd.option("lambda", opt->lambda, "unsharp gain", Type::nonnegative_real)->check(CLI::NonNegativeNumber);
    cmd.option("sigma-s", opt->sigma_s, "spatial width in mean edge lengths", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("sigma-r", opt->sigma_r, "normal kernel width", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("samples-level", opt->level, "icosahedron level for normal samples", Type::integer)->check(CLI::Range(0, 6));
    cmd.flag("report", opt->report, "print key=value statistics");
    cmd.threads(opt->threads);
    cmd.on_run([opt] {
        const TriangleMesh mesh = io::read_mesh(opt->input);
        EnhanceConfig cfg;
        cfg.gain = opt->lambda;
        cfg.sigma_spatial = opt->sigma_s;
        cfg.sigma_range = opt->sigma_r;
        cfg.subdivision_level = opt->level;
        cfg.threads = opt->threads;
        const EnhanceResult r = enhance_features(mesh, cfg);
        if (!opt->output.empty()) io::write_mesh(opt->output, r.mesh);
        double total = 0.0;
        for (double d : r.displacement) total += d;
        const Report report(opt->report);
        report("vertices", mesh.vertex_count());
        report("max_displacement", *std::max_element(r.displacement.begin(), r.displacement.end()));
        report("mean_displacement", total / static_cast<double>(r.displacement.size()));
        report("fallbacks", r.fallback_count);
    });
}

void add_bench(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands)
{
    struct Options {
        std::string input;
        double sigma_s = 2.0, sigma_r = 0.1;
        int level = 1, repeat = 1;
        std::vector<std::size_t> threads;
    };
    auto opt = std::make_shared<Options>();
    auto& cmd = *commands.emplace_back(std::make_unique<Command>(root, "bench", "time one bilateral normal pass"));
    cmd.option("input", opt->input, "input OBJ/PLY mesh", Type::text)->required();
    cmd.option("sigma-s", opt->sigma_s, "spatial width in mean edge lengths", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("sigma-r", opt->sigma_r, "VMF range width", Type::positive_real)->check(CLI::PositiveNumber);
    cmd.option("samples-level", opt->level, "icosahedron subdivision level", Type::integer)->check(CLI::Range(0, 6));
    cmd.option("repeat", opt->repeat, "runs per thread count; the fastest is reported", Type::positive_integer)
        ->check(CLI::PositiveNumber);
    cmd.option("threads", opt->threads, "comma-separated thread counts (default: $GENSHIFT_THREADS)", Type::text)
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    cmd.on_run([opt] {
        const TriangleMesh mesh = io::read_mesh(opt->input);
        std::vector<std::size_t> counts = opt->threads;
        if (counts.empty()) counts = {1, resolve_threads(0)};
        std::cout << "faces=" << mesh.face_count() << " samples="
                  << sphere_polyhedral_range_space(opt->level, opt->sigma_r).sample_count() << '\n';
        for (std::size_t threads : counts) {
            double best_factor = 1e300, best_partition = 0.0, best_blur = 0.0, best_accumulate = 0.0, best_total = 1e300;
            std::size_t blurred = 0;
            for (int run = 0; run < opt->repeat; ++run) {
                const auto start = Clock::now();
                const LaplacianPair lap = build_face_dual_laplacian(mesh);
                FilterParams params;
                params.range = sphere_polyhedral_range_space(opt->level, opt->sigma_r);
                params.blur = heat_step(lap.laplacian, lap.mass, diffusion_time(opt->sigma_s, mesh.mean_edge_length()));
                params.threads = threads;
                const double factor = seconds_since(start);
                const Signal normals = face_normals(mesh);
                const BilateralResult r = generalized_bilateral(normals, normals, params);
                const double total = seconds_since(start);
                blurred = r.samples_blurred;
                if (total < best_total) {
                    best_total = total;
                    best_factor = factor;
                    best_partition = r.partition_seconds;
                    best_blur = r.blur_seconds;
                    best_accumulate = r.accumulate_seconds;
                }
            }
            std::cout << "threads=" << threads << " samples_blurred=" << blurred << " factorization_seconds=" << io::format_real(best_factor, 4)
                      << " partition_seconds=" << io::format_real(best_partition, 4)
                      << " blur_seconds=" << io::format_real(best_blur, 4)
                      << " accumulation_seconds=" << io::format_real(best_accumulate, 4)
                      << " total_seconds=" << io::format_real(best_total, 4) << '\n';
        }
    });
}

bool has_option(const std::vector<std::string>& args, const std::string& name)
{
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == name || a.rfind(name + "=", 0) == 0; });
}

// Expands `--config FILE` into ordinary flags placed before the command-line
// arguments, so explicit flags win, and falls back to GENSHIFT_THREADS when
// neither sets --threads.
std::vector<std::string> expand_defaults(const std::vector<std::string>& args,
                                         const std::vector<std::unique_ptr<Command>>& commands)
{
    if (args.size() < 2) return args;
    const auto cmd = std::find_if(commands.begin(), commands.end(),
                                  [&](const auto& c) { return c->app().get_name() == args[1]; });
    if (cmd == commands.end()) return args;

    std::optional<std::string> path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }

    std::vector<std::string> out(args.begin(), args.begin() + 2);
    if (path) {
        const RunConfig config = RunConfig::load(*path, (*cmd)->schema());
        for (const auto& [key, value] : config.entries()) {
            const auto declared = std::find_if((*cmd)->schema().begin(), (*cmd)->schema().end(),
                                           [&](const ConfigKey& k) { return k.name == key; });
            if (declared->type == Type::flag) {
                const bool on = value == "true" || value == "1" || value == "yes";
                out.push_back("--" + key + "=" + (on ? "true" : "false"));
            } else {
                out.push_back("--" + key);
                out.push_back(value);
            }
        }
    }
    const char* env = std::getenv("GENSHIFT_THREADS");
    if (env && !has_option(out, "--threads") && !has_option(args, "--threads")) {
        out.push_back("--threads");
        out.push_back(env);
    }
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generalized bilateral filtering and mean shift on images, meshes and point clouds", "genshift"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", "genshift 1.0.0");

    std::vector<std::unique_ptr<Command>> commands;
    add_image_bilateral(app, commands);
    add_mesh_scalar(app, commands);
    add_mesh_denoise(app, commands);
    add_cloud_normals(app, commands);
    add_histogram(app, commands);
    add_enhance(app, commands);
    add_bench(app, commands);

    try {
        const std::vector<std::string> args = expand_defaults(std::vector<std::string>(argv, argv + argc), commands);
        std::vector<char*> pointers;
        for (const std::string& a : args) pointers.push_back(const_cast<char*>(a.c_str()));
        app.parse(static_cast<int>(pointers.size()), pointers.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "genshift: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "genshift: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
