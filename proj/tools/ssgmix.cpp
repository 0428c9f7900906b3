// Command-line front end: fit / simulate / classify / density-grid / eval.
// Exit codes: 0 ok, 2 input error, 3 numeric or fitting error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ssgmix/em.hpp"
#include "ssgmix/errors.hpp"
#include "ssgmix/io.hpp"
#include "ssgmix/metrics.hpp"
#include "ssgmix/sampling.hpp"
#include "ssgmix/version.hpp"

namespace {

using namespace ssgmix;

int thread_count_from(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("SSGMIX_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // library default: all available
}

// Feature matrix for fit/classify: a header column literally named "label"
// (as written by `simulate`) is dropped so simulated files round-trip.
Matrix feature_matrix(const CsvTable& table) {
    if (!table.had_header) return table.data;
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < table.header.size(); ++j)
        if (table.header[j] != "label") keep.push_back(static_cast<Eigen::Index>(j));
    if (keep.size() == table.header.size()) return table.data;
    Matrix out(table.data.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = table.data.col(keep[j]);
    return out;
}

MixtureModel sim_study_preset() {
    MixtureModel m;
    m.weights.resize(2);
    m.weights << 0.25, 0.75;
    m.components.resize(2);
    auto& c1 = m.components[0];
    c1.alpha = 1.5;
    c1.mu = Vector(2);
    c1.mu << 1.0, 1.0;
    c1.lambda = Vector(2);
    c1.lambda << 5.0, 1.0;
    c1.sigma = Matrix(2, 2);
    c1.sigma << 1.0, -0.5, -0.5, 1.0;
    auto& c2 = m.components[1];
    c2.alpha = 1.5;
    c2.mu = Vector(2);
    c2.mu << -2.0, -2.0;
    c2.lambda = Vector(2);
    c2.lambda << 1.0, 5.0;
    c2.sigma = Matrix(2, 2);
    c2.sigma << 1.0, 0.5, 0.5, 1.0;
    return m;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Finite mixtures of skewed sub-Gaussian stable distributions"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "Fit a mixture to a CSV of observations");
    std::string fit_input, fit_out = "model.json", fit_labels, fit_trace;
    FitConfig cfg;
    int fit_k = 2;
    int threads_flag = 0;
    fit_cmd->add_option("input", fit_input, "input CSV (rows = observations)")->required();
    fit_cmd->add_option("--k", fit_k, "number of components")->required();
    fit_cmd->add_option("--seed", cfg.seed, "RNG seed");
    fit_cmd->add_option("--max-iter", cfg.max_iter, "iteration cap");
    fit_cmd->add_option("--min-iter", cfg.min_iter, "iterations before the stopping rule engages");
    fit_cmd->add_option("--eps", cfg.eps, "stopping slope tolerance");
    fit_cmd->add_option("--n-mc", cfg.n_mc, "Monte Carlo pool size");
    fit_cmd->add_option("--n-terms", cfg.n_terms, "series terms");
    fit_cmd->add_option("--m-repeats", cfg.m_repeats, "CM-step repeats");
    fit_cmd->add_option("--threads", threads_flag, "worker threads (0 = all)");
    fit_cmd->add_option("--out", fit_out, "model JSON path");
    fit_cmd->add_option("--labels", fit_labels, "hard-labels CSV path");
    fit_cmd->add_option("--trace", fit_trace, "log-likelihood trace CSV path");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "Draw a labeled sample from a mixture");
    std::string sim_model, sim_out = "data.csv";
    std::uint64_t sim_seed = 0;
    std::size_t sim_n = 0;
    bool sim_preset = false;
    sim_cmd->add_option("--model", sim_model, "model JSON");
    sim_cmd->add_flag("--preset", sim_preset, "use the built-in two-component study design");
    sim_cmd->add_option("--n", sim_n, "sample size")->required();
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");
    sim_cmd->add_option("--out", sim_out, "output CSV (features plus label column)");

    // ---- classify ----
    auto* cls_cmd = app.add_subcommand("classify", "Hard-assign observations under a model");
    std::string cls_model, cls_input, cls_out = "labels.csv";
    std::uint64_t cls_seed = 0;
    int cls_threads = 0;
    cls_cmd->add_option("--model", cls_model, "model JSON")->required();
    cls_cmd->add_option("input", cls_input, "input CSV")->required();
    cls_cmd->add_option("--seed", cls_seed, "RNG seed");
    cls_cmd->add_option("--threads", cls_threads, "worker threads (0 = all)");
    cls_cmd->add_option("--out", cls_out, "labels CSV path");

    // ---- density-grid ----
    auto* grid_cmd = app.add_subcommand("density-grid", "Mixture density on a 2-d grid");
    std::string grid_model, grid_out = "grid.csv";
    std::vector<double> xlim{-10.0, 10.0}, ylim{-10.0, 10.0};
    int grid_res = 50;
    std::uint64_t grid_seed = 0;
    grid_cmd->add_option("--model", grid_model, "model JSON")->required();
    grid_cmd->add_option("--xlim", xlim, "x range")->expected(2);
    grid_cmd->add_option("--ylim", ylim, "y range")->expected(2);
    grid_cmd->add_option("--res", grid_res, "grid resolution per axis");
    grid_cmd->add_option("--seed", grid_seed, "RNG seed");
    grid_cmd->add_option("--out", grid_out, "output CSV (x,y,density)");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Score labels (ARI) or a model (loglik, BIC)");
    std::string eval_labels, eval_truth, eval_model, eval_data;
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--labels", eval_labels, "labels CSV");
    eval_cmd->add_option("--truth", eval_truth, "reference labels CSV");
    eval_cmd->add_option("--model", eval_model, "model JSON");
    eval_cmd->add_option("--data", eval_data, "data CSV");
    eval_cmd->add_option("--seed", eval_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    if (fit_cmd->parsed()) {
        Timer timer;
        const CsvTable table = read_csv(fit_input);
        const Matrix X = feature_matrix(table);
        cfg.threads = thread_count_from(threads_flag);
        const FitResult res = fit(X, fit_k, cfg);
        std::ostringstream cfg_echo;
        cfg_echo << "k=" << fit_k << " n_terms=" << cfg.n_terms << " n_mc=" << cfg.n_mc
                 << " m_repeats=" << cfg.m_repeats << " eps=" << cfg.eps
                 << " max_iter=" << cfg.max_iter << " min_iter=" << cfg.min_iter;
        ModelMeta meta;
        meta.seed = cfg.seed;
        meta.loglik = res.loglik;
        meta.bic = res.bic;
        meta.config = cfg_echo.str();
        RunManifest manifest;
        manifest.command = "fit";
        manifest.config = cfg_echo.str();
        manifest.seed = cfg.seed;
        manifest.input_digest = file_digest(fit_input);
        write_model_json(fit_out, res.model, meta);
        manifest.outputs.push_back(fit_out);
        if (!fit_labels.empty()) {
            write_labels_csv(fit_labels, res.labels);
            manifest.outputs.push_back(fit_labels);
        }
        if (!fit_trace.empty()) {
            write_trace_csv(fit_trace, res.loglik_trace);
            manifest.outputs.push_back(fit_trace);
        }
        manifest.wall_seconds = timer.seconds();
        write_manifest(manifest);
        std::cout << "bic " << res.bic << "\n"
                  << "loglik " << res.loglik << "\n"
                  << "iterations " << res.n_iter << (res.converged ? "" : " (cap reached)")
                  << "\n";
        return 0;
    }

    if (sim_cmd->parsed()) {
        Timer timer;
        if (sim_preset == sim_model.empty())
            throw parse_error("simulate: give exactly one of --model or --preset");
        if (sim_n == 0) throw parse_error("simulate: --n must be positive");
        const MixtureModel model = sim_preset ? sim_study_preset() : read_model_json(sim_model);
        const LabeledSample sample = sample_mixture(sim_n, model, sim_seed);
        Matrix with_labels(sample.data.rows(), sample.data.cols() + 1);
        with_labels.leftCols(sample.data.cols()) = sample.data;
        for (Eigen::Index i = 0; i < sample.data.rows(); ++i)
            with_labels(i, sample.data.cols()) = sample.labels[static_cast<std::size_t>(i)];
        std::vector<std::string> header;
        for (int j = 1; j <= model.dim(); ++j) header.push_back("x" + std::to_string(j));
        header.push_back("label");
        write_matrix_csv(sim_out, with_labels, header);
        RunManifest manifest;
        manifest.command = "simulate";
        manifest.config = sim_preset ? "preset=sim-study" : "model=" + sim_model;
        manifest.config += " n=" + std::to_string(sim_n);
        manifest.seed = sim_seed;
        manifest.input_digest = sim_preset ? "none" : file_digest(sim_model);
        manifest.outputs.push_back(sim_out);
        manifest.wall_seconds = timer.seconds();
        write_manifest(manifest);
        return 0;
    }

    if (cls_cmd->parsed()) {
        Timer timer;
        const MixtureModel model = read_model_json(cls_model);
        const Matrix X = feature_matrix(read_csv(cls_input));
        if (X.cols() != model.dim())
            throw parse_error("classify: data dimension does not match the model");
        FitConfig ccfg;
        ccfg.seed = cls_seed;
        ccfg.threads = thread_count_from(cls_threads);
        const auto labels = classify(X, model, ccfg);
        write_labels_csv(cls_out, labels);
        RunManifest manifest;
        manifest.command = "classify";
        manifest.config = "model=" + cls_model;
        manifest.seed = cls_seed;
        manifest.input_digest = file_digest(cls_input);
        manifest.outputs.push_back(cls_out);
        manifest.wall_seconds = timer.seconds();
        write_manifest(manifest);
        return 0;
    }

    if (grid_cmd->parsed()) {
        Timer timer;
        const MixtureModel model = read_model_json(grid_model);
        if (model.dim() != 2) throw parse_error("density-grid: model must be 2-dimensional");
        if (grid_res < 1) throw parse_error("density-grid: --res must be at least 1");
        SeriesConfig scfg;
        std::vector<McPool> pools;
        for (int k = 0; k < model.k(); ++k)
            pools.push_back(draw_pool(model.components[static_cast<std::size_t>(k)].alpha,
                                      scfg.n_mc,
                                      substream_seed(grid_seed, Stream::classify,
                                                     static_cast<std::uint64_t>(k))));
        Matrix out(static_cast<Eigen::Index>(grid_res) * grid_res, 3);
        Eigen::Index row = 0;
        Vector y(2);
        for (int i = 0; i < grid_res; ++i) {
            const double x = grid_res == 1 ? xlim[0]
                                           : xlim[0] + (xlim[1] - xlim[0]) * i / (grid_res - 1.0);
            for (int j = 0; j < grid_res; ++j) {
                const double yy = grid_res == 1
                                      ? ylim[0]
                                      : ylim[0] + (ylim[1] - ylim[0]) * j / (grid_res - 1.0);
                y << x, yy;
                out(row, 0) = x;
                out(row, 1) = yy;
                out(row, 2) = mixture_pdf(y, model, pools, scfg);
                ++row;
            }
        }
        write_matrix_csv(grid_out, out, {"x", "y", "density"});
        RunManifest manifest;
        manifest.command = "density-grid";
        manifest.config = "res=" + std::to_string(grid_res);
        manifest.seed = grid_seed;
        manifest.input_digest = file_digest(grid_model);
        manifest.outputs.push_back(grid_out);
        manifest.wall_seconds = timer.seconds();
        write_manifest(manifest);
        return 0;
    }

    if (eval_cmd->parsed()) {
        if (!eval_labels.empty() && !eval_truth.empty()) {
            const CsvTable a = read_csv(eval_labels);
            const CsvTable b = read_csv(eval_truth);
            if (a.data.rows() != b.data.rows())
                throw parse_error("eval: label files have different lengths");
            // Accept either bare label columns or row_index,label files; the
            // label is always the last column.
            std::vector<int> la(static_cast<std::size_t>(a.data.rows()));
            std::vector<int> lb(static_cast<std::size_t>(b.data.rows()));
            for (Eigen::Index i = 0; i < a.data.rows(); ++i) {
                la[static_cast<std::size_t>(i)] =
                    static_cast<int>(std::lround(a.data(i, a.data.cols() - 1)));
                lb[static_cast<std::size_t>(i)] =
                    static_cast<int>(std::lround(b.data(i, b.data.cols() - 1)));
            }
            std::cout << "ari " << adjusted_rand_index(la, lb) << "\n";
            return 0;
        }
        if (!eval_model.empty() && !eval_data.empty()) {
            const MixtureModel model = read_model_json(eval_model);
            const Matrix X = feature_matrix(read_csv(eval_data));
            if (X.cols() != model.dim())
                throw parse_error("eval: data dimension does not match the model");
            FitConfig ccfg;
            ccfg.seed = eval_seed;
            const auto [labels, ll] = classify_loglik(X, model, ccfg);
            (void)labels;
            std::cout << "loglik " << ll << "\n"
                      << "bic "
                      << bic(ll, static_cast<std::size_t>(X.rows()), model.k(), model.dim())
                      << "\n";
            return 0;
        }
        throw parse_error("eval: give --labels with --truth, or --model with --data");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ssgmix::parse_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ssgmix::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
