#include "cbp/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace cbp {

Matrix signed_sqrt(const Matrix& v) {
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double x = v.data[i];
        out.data[i] = std::copysign(std::sqrt(std::fabs(x)), x);
    }
    return out;
}

Matrix signed_sqrt_backward(const Matrix& v, const Matrix& grad_out) {
    check_shape(v.rows == grad_out.rows && v.cols == grad_out.cols,
                "signed_sqrt_backward: shape mismatch");
    constexpr double eps = 1e-8;
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double root = std::sqrt(std::fabs(v.data[i]));
        out.data[i] = grad_out.data[i] / (2.0 * std::max(root, eps));
    }
    return out;
}

Matrix l2_normalize(const Matrix& v) {
    Matrix out(v.rows, v.cols);
    for (std::size_t r = 0; r < v.rows; ++r) {
        auto row = v.row(r);
        double norm = 0.0;
        for (double x : row) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        auto orow = out.row(r);
        for (std::size_t j = 0; j < v.cols; ++j) orow[j] = row[j] / norm;
    }
    return out;
}

Matrix l2_normalize_backward(const Matrix& v, const Matrix& grad_out) {
    check_shape(v.rows == grad_out.rows && v.cols == grad_out.cols,
                "l2_normalize_backward: shape mismatch");
    Matrix out(v.rows, v.cols);
    for (std::size_t r = 0; r < v.rows; ++r) {
        auto x = v.row(r);
        auto g = grad_out.row(r);
        double norm2 = 0.0;
        for (double xv : x) norm2 += xv * xv;
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) continue;  // zero rows stay zero, zero gradient
        double gdotx = 0.0;
        for (std::size_t j = 0; j < v.cols; ++j) gdotx += g[j] * x[j];
        auto orow = out.row(r);
        for (std::size_t j = 0; j < v.cols; ++j)
            orow[j] = g[j] / norm - x[j] * gdotx / (norm2 * norm);
    }
    return out;
}

void normalize_pooled(Pooled& p) {
    Matrix m(p.n, p.dim);
    m.data = p.data;
    m = l2_normalize(signed_sqrt(m));
    p.data = std::move(m.data);
}

namespace {

struct Objective {
    double loss = 0.0;
    Matrix grad_w;
    std::vector<double> grad_b;
};

// lambda*||w||^2 + sum_i -log softmax(x_i W^T + b)[y_i]
Objective eval_objective(const Matrix& x, const std::vector<std::uint32_t>& y, std::size_t k,
                         double lambda, const Matrix& w, const std::vector<double>& b,
                         bool with_grad) {
    const std::size_t n = x.rows, dim = x.cols;
    Objective obj;
    if (with_grad) {
        obj.grad_w = Matrix(k, dim);
        obj.grad_b.assign(k, 0.0);
    }
    std::vector<double> scores(k);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        double maxs = -1e300;
        for (std::size_t cls = 0; cls < k; ++cls) {
            double s = b[cls];
            auto wr = w.row(cls);
            for (std::size_t j = 0; j < dim; ++j) s += wr[j] * xi[j];
            scores[cls] = s;
            maxs = std::max(maxs, s);
        }
        double z = 0.0;
        for (std::size_t cls = 0; cls < k; ++cls) z += std::exp(scores[cls] - maxs);
        obj.loss += -(scores[y[i]] - maxs) + std::log(z);
        if (with_grad) {
            for (std::size_t cls = 0; cls < k; ++cls) {
                double p = std::exp(scores[cls] - maxs) / z;
                if (cls == y[i]) p -= 1.0;
                obj.grad_b[cls] += p;
                auto gr = obj.grad_w.row(cls);
                for (std::size_t j = 0; j < dim; ++j) gr[j] += p * xi[j];
            }
        }
    }
    for (double wv : w.data) obj.loss += lambda * wv * wv;
    if (with_grad)
        for (std::size_t i = 0; i < w.data.size(); ++i)
            obj.grad_w.data[i] += 2.0 * lambda * w.data[i];
    return obj;
}

}  // namespace

LinearModel train_logreg(const Matrix& features, const io::LabelTable& labels, std::size_t k,
                         const TrainConfig& config) {
    const std::size_t n = features.rows;
    check_shape(k >= 2, "train_logreg: need at least 2 classes");
    check_shape(labels.size() == n, "train_logreg: label count mismatch");
    for (double v : features.data)
        if (!std::isfinite(v)) throw std::invalid_argument("train_logreg: non-finite features");

    std::vector<std::uint32_t> y(n);
    std::vector<std::size_t> per_class(k, 0);
    for (const auto& [idx, cls] : labels.rows) {
        if (idx >= n || cls >= k) throw std::invalid_argument("train_logreg: label out of range");
        y[idx] = cls;
        ++per_class[cls];
    }
    for (std::size_t cls = 0; cls < k; ++cls)
        if (per_class[cls] == 0)
            throw std::invalid_argument("train_logreg: class " + std::to_string(cls) +
                                        " has no samples");

    LinearModel model;
    model.k = k;
    model.dim = features.cols;
    model.weights = Matrix(k, features.cols);
    model.bias.assign(k, 0.0);
    model.lambda = config.lambda;

    double step = 1.0;
    auto obj = eval_objective(features, y, k, config.lambda, model.weights, model.bias, true);
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        double ginf = 0.0;
        for (double v : obj.grad_w.data) ginf = std::max(ginf, std::fabs(v));
        for (double v : obj.grad_b) ginf = std::max(ginf, std::fabs(v));
        if (ginf < config.grad_tol) break;

        double g2 = 0.0;
        for (double v : obj.grad_w.data) g2 += v * v;
        for (double v : obj.grad_b) g2 += v * v;

        // Backtracking line search, Armijo condition.
        Matrix w_new;
        std::vector<double> b_new;
        Objective next;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            w_new = model.weights;
            b_new = model.bias;
            for (std::size_t i = 0; i < w_new.data.size(); ++i)
                w_new.data[i] -= step * obj.grad_w.data[i];
            for (std::size_t i = 0; i < b_new.size(); ++i) b_new[i] -= step * obj.grad_b[i];
            next = eval_objective(features, y, k, config.lambda, w_new, b_new, true);
            if (next.loss <= obj.loss - 1e-4 * step * g2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        model.weights = std::move(w_new);
        model.bias = std::move(b_new);
        obj = std::move(next);
        step *= 2.0;  // allow recovery after shrinking
    }
    return model;
}

Prediction predict(const LinearModel& model, const Matrix& features) {
    check_shape(features.cols == model.dim, "predict: feature dimension mismatch");
    const std::size_t n = features.rows, k = model.k;
    Prediction pred;
    pred.classes.resize(n);
    pred.probs = Matrix(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = features.row(i);
        auto prow = pred.probs.row(i);
        double maxs = -1e300;
        for (std::size_t cls = 0; cls < k; ++cls) {
            double s = model.bias[cls];
            auto wr = model.weights.row(cls);
            for (std::size_t j = 0; j < model.dim; ++j) s += wr[j] * xi[j];
            prow[cls] = s;
            maxs = std::max(maxs, s);
        }
        double z = 0.0;
        for (std::size_t cls = 0; cls < k; ++cls) {
            prow[cls] = std::exp(prow[cls] - maxs);
            z += prow[cls];
        }
        std::size_t best = 0;
        for (std::size_t cls = 0; cls < k; ++cls) {
            prow[cls] /= z;
            if (prow[cls] > prow[best]) best = cls;
        }
        pred.classes[i] = static_cast<std::uint32_t>(best);
    }
    return pred;
}

double accuracy(const Prediction& pred, const io::LabelTable& labels) {
    if (labels.rows.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.rows.size(); ++i)
        if (pred.classes[i] == labels.rows[i].second) ++hits;
    return static_cast<double>(hits) / static_cast<double>(labels.rows.size());
}

std::vector<FewShotRow> fewshot_eval(const Matrix& features, const io::LabelTable& labels,
                                     std::span<const std::size_t> train_indices,
                                     std::span<const std::size_t> test_indices,
                                     std::span<const std::size_t> shots, std::size_t trials,
                                     SeededRng& rng, const TrainConfig& config) {
    check_shape(trials >= 1, "fewshot_eval: trials must be >= 1");
    std::unordered_map<std::uint32_t, std::uint32_t> cls_of;
    for (const auto& [idx, cls] : labels.rows) cls_of[idx] = cls;
    const std::size_t k = static_cast<std::size_t>(labels.max_class()) + 1;

    // Train pool grouped by class.
    std::vector<std::vector<std::size_t>> pool(k);
    for (std::size_t idx : train_indices) pool[cls_of.at(static_cast<std::uint32_t>(idx))].push_back(idx);
    const std::size_t max_shot = *std::max_element(shots.begin(), shots.end());
    for (std::size_t cls = 0; cls < k; ++cls)
        if (pool[cls].size() < max_shot)
            throw std::invalid_argument("fewshot_eval: class " + std::to_string(cls) +
                                        " has fewer training samples than requested shots");

    Matrix test_feats(test_indices.size(), features.cols);
    io::LabelTable test_labels;
    for (std::size_t i = 0; i < test_indices.size(); ++i) {
        auto src = features.row(test_indices[i]);
        std::copy(src.begin(), src.end(), test_feats.row(i).begin());
        test_labels.rows.emplace_back(static_cast<std::uint32_t>(i),
                                      cls_of.at(static_cast<std::uint32_t>(test_indices[i])));
    }

    std::vector<std::vector<double>> accs(shots.size());
    for (std::size_t trial = 0; trial < trials; ++trial) {
        auto trial_rng = rng.child(trial);
        for (std::size_t si = 0; si < shots.size(); ++si) {
            const std::size_t shot = shots[si];
            // Per class, sample `shot` training examples without replacement.
            Matrix train_feats(shot * k, features.cols);
            io::LabelTable train_labels;
            std::size_t r = 0;
            for (std::size_t cls = 0; cls < k; ++cls) {
                std::vector<std::size_t> candidates = pool[cls];
                for (std::size_t j = 0; j < shot; ++j) {
                    const std::size_t pick =
                        j + static_cast<std::size_t>(trial_rng.uniform_index(candidates.size() - j));
                    std::swap(candidates[j], candidates[pick]);
                    auto src = features.row(candidates[j]);
                    std::copy(src.begin(), src.end(), train_feats.row(r).begin());
                    train_labels.rows.emplace_back(static_cast<std::uint32_t>(r),
                                                   static_cast<std::uint32_t>(cls));
                    ++r;
                }
            }
            auto model = train_logreg(train_feats, train_labels, k, config);
            accs[si].push_back(accuracy(predict(model, test_feats), test_labels));
        }
    }

    std::vector<FewShotRow> out;
    for (std::size_t si = 0; si < shots.size(); ++si) {
        FewShotRow row;
        row.shots = shots[si];
        const auto& a = accs[si];
        row.mean_accuracy = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
        double var = 0.0;
        for (double v : a) var += (v - row.mean_accuracy) * (v - row.mean_accuracy);
        row.std_accuracy = a.size() > 1 ? std::sqrt(var / (a.size() - 1)) : 0.0;
        out.push_back(row);
    }
    return out;
}

}  // namespace cbp
