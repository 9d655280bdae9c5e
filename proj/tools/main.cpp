// Command-line harness for compact bilinear pooling: pooling of
// descriptor files, kernel-approximation sweeps, gradient checks,
// timing benchmarks, synthetic data generation, few-shot runs, and a
// small train/eval pair over pooled files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cbp/bilinear.hpp"
#include "cbp/gradcheck.hpp"
#include "cbp/io.hpp"
#include "cbp/postproc.hpp"
#include "cbp/rm.hpp"
#include "cbp/rng.hpp"
#include "cbp/synth.hpp"
#include "cbp/ts.hpp"

using namespace cbp;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitThreshold = 3;

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix pooled_to_matrix(const Pooled& p) {
    Matrix m(p.n, p.dim);
    m.data = p.data;
    return m;
}

// ---- pool ----------------------------------------------------------------

int cmd_pool(const std::string& method, std::size_t dim, std::uint64_t seed,
             const std::string& input, const std::string& output, bool no_normalize) {
    if (method == "bilinear") {
        if (dim != 0) {
            std::cerr << "pool: --dim is forbidden for bilinear\n";
            return kExitUsage;
        }
    } else if (dim == 0) {
        std::cerr << "pool: --dim is required for " << method << "\n";
        return kExitUsage;
    }

    Grid grid = io::read_grid(input);
    SeededRng rng(seed);
    Pooled pooled;
    if (method == "bilinear") {
        pooled = bilinear_pool(grid);
    } else if (method == "rm") {
        pooled = rm_pool(grid, gen_rm(grid.c, dim, rng));
    } else {
        pooled = ts_pool(grid, gen_ts(grid.c, dim, rng));
    }
    if (!no_normalize) normalize_pooled(pooled);

    Grid out(pooled.n, 1, 1, pooled.dim);
    out.data = std::move(pooled.data);
    io::write_grid(output, out);
    return kExitOk;
}

// ---- kernel-sweep --------------------------------------------------------

int cmd_kernel_sweep(std::size_t c, std::vector<std::size_t> dims, std::size_t pairs,
                     std::size_t trials, std::uint64_t seed, const std::string& output) {
    for (std::size_t d : dims)
        if (d == 0) {
            std::cerr << "kernel-sweep: d must be >= 1\n";
            return kExitUsage;
        }
    std::sort(dims.begin(), dims.end());

    SeededRng rng(seed);
    auto data_rng = rng.child(0);
    struct Pair {
        Grid a, b;
        double exact;
    };
    std::vector<Pair> grid_pairs;
    for (std::size_t i = 0; i < pairs; ++i) {
        Grid a(1, 2, 2, c), b(1, 2, 2, c);
        for (auto& v : a.data) v = data_rng.normal();
        for (auto& v : b.data) v = data_rng.normal();
        const double exact = exact_kernel(a, b);
        grid_pairs.push_back({std::move(a), std::move(b), exact});
    }

    std::ofstream out(output);
    if (!out) throw IoError("kernel-sweep: cannot open " + output);
    out << "method,d,seeds,median_rel_err,mean_rel_err,std_rel_err\n";
    for (const std::string& method : {"rm", "ts"}) {
        for (std::size_t d : dims) {
            std::vector<double> errs;
            for (std::size_t t = 0; t < trials; ++t) {
                auto param_rng = rng.child(1 + t);
                RmParams rp;
                TsParams tp;
                if (method == "rm")
                    rp = gen_rm(c, d, param_rng);
                else
                    tp = gen_ts(c, d, param_rng);
                for (const auto& pr : grid_pairs) {
                    double est;
                    if (method == "rm")
                        est = dot(rm_pool(pr.a, rp).row(0), rm_pool(pr.b, rp).row(0));
                    else
                        est = dot(ts_pool(pr.a, tp).row(0), ts_pool(pr.b, tp).row(0));
                    const double denom = std::max(std::fabs(pr.exact), 1e-12);
                    errs.push_back(std::fabs(est - pr.exact) / denom);
                }
            }
            const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
            double var = 0.0;
            for (double e : errs) var += (e - mean) * (e - mean);
            const double sd = errs.size() > 1 ? std::sqrt(var / (errs.size() - 1)) : 0.0;
            out << method << ',' << d << ',' << trials << ',' << fmt9(median(errs)) << ','
                << fmt9(mean) << ',' << fmt9(sd) << '\n';
        }
    }
    return kExitOk;
}

// ---- gradcheck -----------------------------------------------------------

int cmd_gradcheck(const std::string& method, std::size_t c, std::size_t d, std::size_t h,
                  std::size_t w, std::uint64_t seed, double eps) {
    if (eps <= 0.0) {
        std::cerr << "gradcheck: --eps must be > 0\n";
        return kExitUsage;
    }
    SeededRng rng(seed);
    double worst = 0.0;

    if (method == "bilinear" || method == "rm" || method == "ts") {
        Grid g(2, h, w, c);
        for (auto& v : g.data) v = rng.normal();
        if (method == "bilinear") {
            Pooled go(2, c * c, PoolKind::FullBilinear);
            for (auto& v : go.data) v = rng.normal();
            auto analytic = bilinear_pool_backward(g, go);
            auto loss = [&] {
                auto p = bilinear_pool(g);
                return dot({p.data.data(), p.data.size()}, {go.data.data(), go.data.size()});
            };
            worst = max_rel_error(analytic.data, finite_diff(g.data, loss, eps));
        } else if (method == "rm") {
            auto p = gen_rm(c, d, rng);
            Pooled go(2, d, PoolKind::RandomMaclaurin);
            for (auto& v : go.data) v = rng.normal();
            auto analytic = rm_backward(g, p, go);
            auto loss = [&] {
                auto pooled = rm_pool(g, p);
                return dot({pooled.data.data(), pooled.data.size()},
                           {go.data.data(), go.data.size()});
            };
            worst = max_rel_error(analytic.grad_x.data, finite_diff(g.data, loss, eps));
            worst = std::max(worst, max_rel_error(analytic.grad_w1, finite_diff(p.w1, loss, eps)));
            worst = std::max(worst, max_rel_error(analytic.grad_w2, finite_diff(p.w2, loss, eps)));
        } else {
            auto p = gen_ts(c, d, rng);
            Pooled go(2, d, PoolKind::TensorSketch);
            for (auto& v : go.data) v = rng.normal();
            auto analytic = ts_backward(g, p, go);
            auto loss = [&] {
                auto pooled = ts_pool(g, p);
                return dot({pooled.data.data(), pooled.data.size()},
                           {go.data.data(), go.data.size()});
            };
            worst = max_rel_error(analytic.grad_x.data, finite_diff(g.data, loss, eps));
            worst = std::max(worst,
                             max_rel_error(analytic.grad_s1, finite_diff(p.sketch1.s, loss, eps)));
            worst = std::max(worst,
                             max_rel_error(analytic.grad_s2, finite_diff(p.sketch2.s, loss, eps)));
        }
    } else if (method == "signed_sqrt" || method == "l2norm") {
        Matrix m(2, c);
        for (auto& v : m.data) {
            v = rng.normal();
            if (method == "signed_sqrt" && std::fabs(v) < 1e-3) v = 0.5;
        }
        Matrix go(2, c);
        for (auto& v : go.data) v = rng.normal();
        Matrix analytic = method == "signed_sqrt" ? signed_sqrt_backward(m, go)
                                                  : l2_normalize_backward(m, go);
        auto loss = [&] {
            Matrix y = method == "signed_sqrt" ? signed_sqrt(m) : l2_normalize(m);
            return dot({y.data.data(), y.data.size()}, {go.data.data(), go.data.size()});
        };
        worst = max_rel_error(analytic.data, finite_diff(m.data, loss, eps));
    } else {
        std::cerr << "gradcheck: unknown method " << method << "\n";
        return kExitUsage;
    }

    std::cout << "max_rel_err=" << fmt9(worst) << "\n";
    return worst < 1e-5 ? kExitOk : kExitThreshold;
}

// ---- bench ---------------------------------------------------------------

int cmd_bench(const std::string& method, std::size_t c, std::size_t d, std::size_t h,
              std::size_t w, std::size_t reps) {
    if (reps < 5) {
        std::cerr << "bench: --reps must be >= 5\n";
        return kExitUsage;
    }
    SeededRng rng(1);
    Grid g(1, h, w, c);
    for (auto& v : g.data) v = rng.normal();

    RmParams rp;
    TsParams tp;
    std::size_t out_dim = 0;
    if (method == "bilinear") {
        out_dim = c * c;
    } else if (method == "rm") {
        rp = gen_rm(c, d, rng);
        out_dim = d;
    } else if (method == "ts") {
        tp = gen_ts(c, d, rng);
        out_dim = d;
    } else {
        std::cerr << "bench: unknown method " << method << "\n";
        return kExitUsage;
    }
    Pooled go(1, out_dim, PoolKind::FullBilinear);
    for (auto& v : go.data) v = rng.normal();

    auto forward = [&] {
        if (method == "bilinear")
            return bilinear_pool(g).data[0];
        else if (method == "rm")
            return rm_pool(g, rp).data[0];
        return ts_pool(g, tp).data[0];
    };
    auto backward = [&] {
        if (method == "bilinear")
            return bilinear_pool_backward(g, go).data[0];
        else if (method == "rm")
            return rm_backward(g, rp, go).grad_x.data[0];
        return ts_backward(g, tp, go).grad_x.data[0];
    };

    volatile double sink = 0.0;
    sink += forward();  // warm-up
    sink += backward();

    using clock = std::chrono::steady_clock;
    std::vector<double> fwd_times, bwd_times;
    for (std::size_t r = 0; r < reps; ++r) {
        auto t0 = clock::now();
        sink += forward();
        auto t1 = clock::now();
        sink += backward();
        auto t2 = clock::now();
        fwd_times.push_back(std::chrono::duration<double>(t1 - t0).count());
        bwd_times.push_back(std::chrono::duration<double>(t2 - t1).count());
    }
    (void)sink;

    std::cout << "method,c,d,h,w,reps,fwd_median_s,bwd_median_s\n";
    std::cout << method << ',' << c << ',' << (method == "bilinear" ? c * c : d) << ',' << h << ','
              << w << ',' << reps << ',' << fmt9(median(fwd_times)) << ','
              << fmt9(median(bwd_times)) << "\n";
    return kExitOk;
}

// ---- synth ---------------------------------------------------------------

int cmd_synth(std::size_t classes, std::size_t per_class, std::size_t c, std::size_t h,
              std::size_t w, double spread, std::uint64_t seed, const std::string& output,
              const std::string& labels_path) {
    SynthConfig cfg{classes, per_class, c, h, w, spread};
    SeededRng rng(seed);
    auto data = synth_data(cfg, rng);
    io::write_grid(output, data.grid);
    io::write_labels(labels_path, data.labels);
    return kExitOk;
}

// ---- fewshot -------------------------------------------------------------

// Per class, the first half of its samples (in index order) form the
// training pool; the rest are held out.
void split_half(const io::LabelTable& labels, std::vector<std::size_t>& train_idx,
                std::vector<std::size_t>& test_idx) {
    std::map<std::uint32_t, std::vector<std::size_t>> by_class;
    for (const auto& [idx, cls] : labels.rows) by_class[cls].push_back(idx);
    for (auto& [cls, members] : by_class) {
        std::sort(members.begin(), members.end());
        const std::size_t cut = (members.size() + 1) / 2;
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < cut ? train_idx : test_idx).push_back(members[i]);
    }
}

Pooled pool_with(const std::string& method, const Grid& grid, std::size_t dim,
                 SeededRng& rng) {
    if (method == "bilinear") return bilinear_pool(grid);
    if (method == "rm") return rm_pool(grid, gen_rm(grid.c, dim, rng));
    return ts_pool(grid, gen_ts(grid.c, dim, rng));
}

int cmd_fewshot(const std::string& input, const std::string& labels_path,
                const std::string& method, std::size_t dim, std::vector<std::size_t> shots,
                std::size_t trials, std::uint64_t seed) {
    if (method != "bilinear" && dim == 0) {
        std::cerr << "fewshot: --dim is required for " << method << "\n";
        return kExitUsage;
    }
    Grid grid = io::read_grid(input);
    auto labels = io::read_labels(labels_path, grid.n);
    if (labels.size() != grid.n) {
        std::cerr << "fewshot: label table does not cover every sample\n";
        return kExitUsage;
    }

    SeededRng rng(seed);
    auto param_rng = rng.child(0);
    Pooled pooled = pool_with(method, grid, dim, param_rng);
    normalize_pooled(pooled);

    std::vector<std::size_t> train_idx, test_idx;
    split_half(labels, train_idx, test_idx);

    auto eval_rng = rng.child(1);
    auto rows = fewshot_eval(pooled_to_matrix(pooled), labels, train_idx, test_idx, shots, trials,
                             eval_rng);
    std::cout << "shots,mean_accuracy,std_accuracy\n";
    for (const auto& row : rows)
        std::cout << row.shots << ',' << fmt9(row.mean_accuracy) << ',' << fmt9(row.std_accuracy)
                  << "\n";
    return kExitOk;
}

// ---- train / eval --------------------------------------------------------

Matrix load_features(const std::string& path) {
    Grid g = io::read_grid(path);
    Matrix m(g.n, g.h * g.w * g.c);
    m.data = std::move(g.data);
    return m;
}

int cmd_train(const std::string& input, const std::string& labels_path,
              const std::string& output, double lambda) {
    Matrix feats = load_features(input);
    auto labels = io::read_labels(labels_path, feats.rows);
    if (labels.size() != feats.rows) {
        std::cerr << "train: label table does not cover every sample\n";
        return kExitUsage;
    }
    const std::size_t k = static_cast<std::size_t>(labels.max_class()) + 1;
    TrainConfig cfg;
    cfg.lambda = lambda;
    auto model = train_logreg(feats, labels, k, cfg);

    json j;
    j["k"] = model.k;
    j["dim"] = model.dim;
    j["lambda"] = model.lambda;
    j["bias"] = model.bias;
    j["weights"] = model.weights.data;
    std::ofstream out(output);
    if (!out) throw IoError("train: cannot open " + output);
    out << j.dump() << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& input, const std::string& labels_path,
             const std::string& model_path) {
    Matrix feats = load_features(input);
    auto labels = io::read_labels(labels_path, feats.rows);

    std::ifstream in(model_path);
    if (!in) throw IoError("eval: cannot open " + model_path);
    json j = json::parse(in);
    LinearModel model;
    model.k = j.at("k").get<std::size_t>();
    model.dim = j.at("dim").get<std::size_t>();
    model.lambda = j.at("lambda").get<double>();
    model.bias = j.at("bias").get<std::vector<double>>();
    model.weights = Matrix(model.k, model.dim);
    model.weights.data = j.at("weights").get<std::vector<double>>();

    auto pred = predict(model, feats);
    std::cout << "accuracy," << fmt9(accuracy(pred, labels)) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compact bilinear pooling toolkit"};
    // --h is a real option (spatial rows), so help is --help only
    app.set_help_flag("--help", "Print help");
    app.require_subcommand(1);

    std::string method = "ts", input, output, labels_path, model_path;
    std::size_t dim = 0, c = 8, h = 2, w = 2, classes = 2, per_class = 10;
    std::size_t trials = 10, reps = 11, pairs = 5;
    std::uint64_t seed = 0;
    double eps = 1e-6, spread = 0.1, lambda = 0.001;
    bool no_normalize = false;
    std::vector<std::size_t> dims, shots;

    auto* pool = app.add_subcommand("pool", "Pool a descriptor grid file");
    pool->set_help_flag("--help", "Print help");
    pool->add_option("--method", method)->check(CLI::IsMember({"bilinear", "rm", "ts"}));
    pool->add_option("--dim", dim);
    pool->add_option("--seed", seed);
    pool->add_option("--input", input)->required();
    pool->add_option("--output", output)->required();
    pool->add_flag("--no-normalize", no_normalize);

    auto* sweep = app.add_subcommand("kernel-sweep", "Kernel approximation error vs dimension");
    sweep->set_help_flag("--help", "Print help");
    sweep->add_option("--c", c);
    sweep->add_option("--dim", dims)->required();
    sweep->add_option("--pairs", pairs);
    sweep->add_option("--trials", trials);
    sweep->add_option("--seed", seed);
    sweep->add_option("--output", output)->required();

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gc->set_help_flag("--help", "Print help");
    gc->add_option("--method", method)
        ->check(CLI::IsMember({"bilinear", "rm", "ts", "signed_sqrt", "l2norm"}));
    gc->add_option("--c", c);
    gc->add_option("--dim", dim);
    gc->add_option("--h", h);
    gc->add_option("--w", w);
    gc->add_option("--seed", seed);
    gc->add_option("--eps", eps);

    auto* bench = app.add_subcommand("bench", "Forward/backward timing");
    bench->set_help_flag("--help", "Print help");
    bench->add_option("--method", method)->check(CLI::IsMember({"bilinear", "rm", "ts"}));
    bench->add_option("--c", c);
    bench->add_option("--dim", dim);
    bench->add_option("--h", h);
    bench->add_option("--w", w);
    bench->add_option("--reps", reps);

    auto* synth = app.add_subcommand("synth", "Generate synthetic descriptor data");
    synth->set_help_flag("--help", "Print help");
    synth->add_option("--classes", classes);
    synth->add_option("--per-class", per_class);
    synth->add_option("--c", c);
    synth->add_option("--h", h);
    synth->add_option("--w", w);
    synth->add_option("--spread", spread);
    synth->add_option("--seed", seed);
    synth->add_option("--output", output)->required();
    synth->add_option("--labels", labels_path)->required();

    auto* fewshot = app.add_subcommand("fewshot", "Few-shot learning evaluation");
    fewshot->set_help_flag("--help", "Print help");
    fewshot->add_option("--input", input)->required();
    fewshot->add_option("--labels", labels_path)->required();
    fewshot->add_option("--method", method)->check(CLI::IsMember({"bilinear", "rm", "ts"}));
    fewshot->add_option("--dim", dim);
    fewshot->add_option("--shots", shots)->required();
    fewshot->add_option("--trials", trials);
    fewshot->add_option("--seed", seed);

    auto* train = app.add_subcommand("train", "Train logistic regression on pooled features");
    train->set_help_flag("--help", "Print help");
    train->add_option("--input", input)->required();
    train->add_option("--labels", labels_path)->required();
    train->add_option("--output", output)->required();
    train->add_option("--lambda", lambda);

    auto* eval = app.add_subcommand("eval", "Evaluate a trained model on pooled features");
    eval->set_help_flag("--help", "Print help");
    eval->add_option("--input", input)->required();
    eval->add_option("--labels", labels_path)->required();
    eval->add_option("--model", model_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (pool->parsed())
            return cmd_pool(method, dim, seed, input, output, no_normalize);
        if (sweep->parsed()) return cmd_kernel_sweep(c, dims, pairs, trials, seed, output);
        if (gc->parsed()) return cmd_gradcheck(method, c, dim == 0 ? 16 : dim, h, w, seed, eps);
        if (bench->parsed()) return cmd_bench(method, c, dim == 0 ? 16 : dim, h, w, reps);
        if (synth->parsed())
            return cmd_synth(classes, per_class, c, h, w, spread, seed, output, labels_path);
        if (fewshot->parsed())
            return cmd_fewshot(input, labels_path, method, dim, shots, trials, seed);
        if (train->parsed()) return cmd_train(input, labels_path, output, lambda);
        if (eval->parsed()) return cmd_eval(input, labels_path, model_path);
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
