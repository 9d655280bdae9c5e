#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbp/io.hpp"
#include "cbp/rng.hpp"
#include "cbp/types.hpp"

namespace cbp {

// Row-major dense matrix, the feature/label workhorse for the classifier.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

// Elementwise y = sign(x) * sqrt(|x|).
Matrix signed_sqrt(const Matrix& v);
// grad_in = grad_out / (2 * max(sqrt(|x|), eps)), eps = 1e-8.
Matrix signed_sqrt_backward(const Matrix& v, const Matrix& grad_out);

// Each row divided by its l2 norm; zero rows stay zero.
Matrix l2_normalize(const Matrix& v);
Matrix l2_normalize_backward(const Matrix& v, const Matrix& grad_out);

// Applies signed sqrt then row-wise l2 normalization in place on a
// pooled descriptor, the standard pre-classifier normalization.
void normalize_pooled(Pooled& p);

struct LinearModel {
    std::size_t k = 0;    // classes
    std::size_t dim = 0;  // feature dimension
    Matrix weights;       // k x dim
    std::vector<double> bias;
    double lambda = 0.0;
};

struct TrainConfig {
    double lambda = 0.001;
    std::size_t max_iters = 500;
    double grad_tol = 1e-6;  // stop when gradient inf-norm drops below
};

// Full-batch multinomial logistic regression with l2 penalty
// lambda*||w||^2, gradient descent with backtracking line search.
// Deterministic given inputs.
LinearModel train_logreg(const Matrix& features, const io::LabelTable& labels,
                         std::size_t k, const TrainConfig& config = {});

struct Prediction {
    std::vector<std::uint32_t> classes;
    Matrix probs;  // n x k softmax rows
};

Prediction predict(const LinearModel& model, const Matrix& features);

double accuracy(const Prediction& pred, const io::LabelTable& labels);

struct FewShotRow {
    std::size_t shots = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

// For each shot count: sample that many training examples per class
// from the train split, fit, score on the test split; repeat `trials`
// times with independent child seeds.
std::vector<FewShotRow> fewshot_eval(const Matrix& features, const io::LabelTable& labels,
                                     std::span<const std::size_t> train_indices,
                                     std::span<const std::size_t> test_indices,
                                     std::span<const std::size_t> shots, std::size_t trials,
                                     SeededRng& rng, const TrainConfig& config = {});

}  // namespace cbp
