#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cbp/bilinear.hpp"
#include "cbp/postproc.hpp"
#include "cbp/rm.hpp"
#include "cbp/rng.hpp"
#include "cbp/sketch.hpp"
#include "cbp/synth.hpp"
#include "cbp/ts.hpp"

namespace py = pybind11;
using namespace cbp;

namespace {

using Arr = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid to_grid(const Arr& a) {
    if (a.ndim() != 4) throw std::invalid_argument("expected a (n, h, w, c) array");
    Grid g(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
           static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3)));
    std::copy(a.data(), a.data() + a.size(), g.data.begin());
    return g;
}

py::array_t<double> from_grid(const Grid& g) {
    py::array_t<double> out({g.n, g.h, g.w, g.c});
    std::copy(g.data.begin(), g.data.end(), out.mutable_data());
    return out;
}

py::array_t<double> from_pooled(const Pooled& p) {
    py::array_t<double> out({p.n, p.dim});
    std::copy(p.data.begin(), p.data.end(), out.mutable_data());
    return out;
}

Pooled to_pooled(const Arr& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a (n, dim) array");
    Pooled p;
    p.n = static_cast<std::size_t>(a.shape(0));
    p.dim = static_cast<std::size_t>(a.shape(1));
    p.data.assign(a.data(), a.data() + a.size());
    return p;
}

Matrix to_matrix(const Arr& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    return m;
}

py::array_t<double> from_matrix(const Matrix& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vec(const Arr& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

template <typename T, typename It>
py::array_t<T> vec_to_array(It first, It last) {
    py::array_t<T> out({static_cast<std::size_t>(std::distance(first, last))});
    std::copy(first, last, out.mutable_data());
    return out;
}

io::LabelTable to_labels(const py::array_t<std::uint32_t>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("labels must be 1-d");
    io::LabelTable t;
    auto r = a.unchecked<1>();
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        t.rows.emplace_back(static_cast<std::uint32_t>(i), r(i));
    return t;
}

}  // namespace

PYBIND11_MODULE(_cbp, m) {
    m.doc() = "Compact bilinear pooling: exact and sketched second-order pooling";

    m.def(
        "bilinear_pool", [](const Arr& x) { return from_pooled(bilinear_pool(to_grid(x))); },
        py::arg("x"),
        "Exact second-order pooling of a (n, h, w, c) grid to (n, c*c) descriptors.");

    m.def(
        "bilinear_pool_backward",
        [](const Arr& x, const Arr& grad_out) {
            return from_grid(bilinear_pool_backward(to_grid(x), to_pooled(grad_out)));
        },
        py::arg("x"), py::arg("grad_out"));

    m.def(
        "rm_pool",
        [](const Arr& x, std::size_t d, std::uint64_t seed) {
            Grid g = to_grid(x);
            SeededRng rng(seed);
            return from_pooled(rm_pool(g, gen_rm(g.c, d, rng)));
        },
        py::arg("x"), py::arg("d"), py::arg("seed"),
        "Random Maclaurin pooling of a (n, h, w, c) grid to (n, d).");

    m.def(
        "ts_pool",
        [](const Arr& x, std::size_t d, std::uint64_t seed) {
            Grid g = to_grid(x);
            SeededRng rng(seed);
            return from_pooled(ts_pool(g, gen_ts(g.c, d, rng)));
        },
        py::arg("x"), py::arg("d"), py::arg("seed"),
        "Tensor Sketch pooling of a (n, h, w, c) grid to (n, d).");

    m.def(
        "exact_kernel",
        [](const Arr& x, const Arr& y) { return exact_kernel(to_grid(x), to_grid(y)); },
        py::arg("x"), py::arg("y"),
        "Sum over location pairs of squared inner products; both grids must have n=1.");

    m.def(
        "circ_conv",
        [](const Arr& a, const Arr& b) {
            auto out = circ_conv_fast(to_vec(a), to_vec(b));
            return vec_to_array<double>(out.begin(), out.end());
        },
        py::arg("a"), py::arg("b"), "Circular convolution via FFT.");

    m.def(
        "signed_sqrt", [](const Arr& v) { return from_matrix(signed_sqrt(to_matrix(v))); },
        py::arg("v"));

    m.def(
        "l2_normalize", [](const Arr& v) { return from_matrix(l2_normalize(to_matrix(v))); },
        py::arg("v"));

    m.def(
        "normalize",
        [](const Arr& v) {
            Pooled p = to_pooled(v);
            normalize_pooled(p);
            return from_pooled(p);
        },
        py::arg("v"), "Signed square root followed by row-wise l2 normalization.");

    m.def(
        "synth",
        [](std::size_t classes, std::size_t per_class, std::size_t c, std::size_t h,
           std::size_t w, double spread, std::uint64_t seed) {
            SynthConfig cfg{classes, per_class, c, h, w, spread};
            SeededRng rng(seed);
            auto data = synth_data(cfg, rng);
            std::vector<std::uint32_t> cls;
            for (const auto& row : data.labels.rows) cls.push_back(row.second);
            return py::make_tuple(from_grid(data.grid),
                                  vec_to_array<std::uint32_t>(cls.begin(), cls.end()));
        },
        py::arg("classes"), py::arg("per_class"), py::arg("c"), py::arg("h") = 2,
        py::arg("w") = 2, py::arg("spread") = 0.1, py::arg("seed") = 0,
        "Clustered synthetic descriptor grids; returns (grid, labels).");

    py::class_<LinearModel>(m, "LinearModel")
        .def_property_readonly("k", [](const LinearModel& mm) { return mm.k; })
        .def_property_readonly("dim", [](const LinearModel& mm) { return mm.dim; })
        .def_property_readonly("weights",
                               [](const LinearModel& mm) { return from_matrix(mm.weights); })
        .def_property_readonly("bias", [](const LinearModel& mm) { return mm.bias; });

    m.def(
        "train_logreg",
        [](const Arr& features, const py::array_t<std::uint32_t>& labels, std::size_t k,
           double lambda, std::size_t max_iters) {
            TrainConfig cfg;
            cfg.lambda = lambda;
            cfg.max_iters = max_iters;
            return train_logreg(to_matrix(features), to_labels(labels), k, cfg);
        },
        py::arg("features"), py::arg("labels"), py::arg("k"), py::arg("lam") = 0.001,
        py::arg("max_iters") = 500,
        "l2-regularized multinomial logistic regression, deterministic.");

    m.def(
        "predict",
        [](const LinearModel& model, const Arr& features) {
            auto pred = predict(model, to_matrix(features));
            return py::make_tuple(
                vec_to_array<std::uint32_t>(pred.classes.begin(), pred.classes.end()),
                from_matrix(pred.probs));
        },
        py::arg("model"), py::arg("features"), "Returns (classes, probabilities).");

    m.def(
        "read_grid", [](const std::string& path) { return from_grid(io::read_grid(path)); },
        py::arg("path"));

    m.def(
        "write_grid",
        [](const std::string& path, const Arr& x) { io::write_grid(path, to_grid(x)); },
        py::arg("path"), py::arg("x"));
}
