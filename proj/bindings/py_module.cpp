#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "fbdiff/cli_io.hpp"
#include "fbdiff/explicit_solver.hpp"
#include "fbdiff/rothe.hpp"

namespace py = pybind11;
using namespace fbdiff;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageGrid grid_from_array(const Array& a) {
    if (a.ndim() == 1) {
        ImageGrid g(1, static_cast<int>(a.shape(0)));
        std::memcpy(g.values.data(), a.data(), sizeof(double) * g.cells());
        return g;
    }
    if (a.ndim() != 2) throw std::invalid_argument("expected a 1D or 2D array");
    ImageGrid g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(g.values.data(), a.data(), sizeof(double) * g.cells());
    return g;
}

py::array_t<double> array_from_grid(const ImageGrid& g) {
    py::array_t<double> a({g.rows, g.cols});
    std::memcpy(a.mutable_data(), g.values.data(), sizeof(double) * g.cells());
    return a;
}

SolverConfig solver_config(double tau, double lambda, double p, double delta,
                           double epsilon, double sigma, double beta,
                           const std::string& stop, int fixed_iters, double tol,
                           int max_iters) {
    SolverConfig cfg;
    cfg.tau = tau;
    cfg.lambda = lambda;
    cfg.p = p;
    cfg.delta = delta;
    cfg.epsilon = epsilon;
    cfg.max_iters = max_iters;
    cfg.indicator = make_indicator_params(sigma, beta);
    if (stop == "max-psnr")
        cfg.stop.kind = StopKind::max_psnr_with_reference;
    else if (stop == "fixed")
        cfg.stop = {StopKind::fixed_iters, fixed_iters, 0.0};
    else if (stop == "relchange")
        cfg.stop = {StopKind::relative_change, 0, tol};
    else
        throw std::invalid_argument("stop must be max-psnr, fixed or relchange");
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "forward-backward diffusion denoiser for multiplicative Gamma noise";

    m.def(
        "potential_psi",
        [](double s, double p, double delta) { return potential_psi(s, {p, delta}); },
        py::arg("s"), py::arg("p") = 2.0, py::arg("delta") = 0.1);
    m.def(
        "scalar_flux",
        [](double s, double p, double delta) { return scalar_flux(s, {p, delta}); },
        py::arg("s"), py::arg("p") = 2.0, py::arg("delta") = 0.1);
    m.def(
        "flux_q",
        [](double x, double y, double p, double delta) {
            const Vec2 q = flux_q({x, y}, {p, delta});
            return py::make_tuple(q.x, q.y);
        },
        py::arg("x"), py::arg("y"), py::arg("p") = 2.0, py::arg("delta") = 0.1);
    m.def(
        "scalar_flux_min_slope",
        [](double p, double delta, double s_max, int n) {
            const MinSlopeResult r = scalar_flux_min_slope({p, delta}, s_max, n);
            return py::make_tuple(r.min_slope, r.argmin);
        },
        py::arg("p") = 2.0, py::arg("delta") = 0.1, py::arg("s_max") = 10.0,
        py::arg("n") = 100001);
    m.def("minmod", &minmod, py::arg("a"), py::arg("b"));

    py::class_<ConvexEnvelope>(m, "ConvexEnvelope")
        .def_property_readonly(
            "s", [](const ConvexEnvelope& e) { return py::cast(e.base.s_values); })
        .def_property_readonly(
            "psi", [](const ConvexEnvelope& e) { return py::cast(e.base.psi_values); })
        .def_property_readonly(
            "env", [](const ConvexEnvelope& e) { return py::cast(e.env_values); })
        .def_property_readonly(
            "slopes", [](const ConvexEnvelope& e) { return py::cast(e.slopes); })
        .def_property_readonly(
            "contact_mask",
            [](const ConvexEnvelope& e) { return py::cast(e.contact_mask); })
        .def_property_readonly(
            "affine_segments",
            [](const ConvexEnvelope& e) { return py::cast(e.affine_segments); })
        .def("value_at", &ConvexEnvelope::value_at, py::arg("s"))
        .def(
            "q_star", [](const ConvexEnvelope& e, double s) { return q_star(s, e); },
            py::arg("s"));

    m.def(
        "build_envelope",
        [](double p, double delta, double s_max, int n) {
            return convexify(sample_radial_profile({p, delta}, s_max, n));
        },
        py::arg("p") = 2.0, py::arg("delta") = 0.1, py::arg("s_max") = 50.0,
        py::arg("n") = 50001);
    m.def(
        "verify_structure",
        [](double p, double delta, double s_max, int n) {
            const FluxParams params{p, delta};
            const RadialProfile prof = sample_radial_profile(params, s_max, n);
            const ConvexEnvelope env = convexify(prof);
            const StructureReport rep = verify_structure(prof, env, params);
            py::dict d;
            d["gamma1"] = rep.gamma1;
            d["gamma2"] = rep.gamma2;
            d["holds"] = rep.holds;
            d["worst_point"] = rep.worst_point;
            d["lower_bound_psi_holds"] = rep.lower_bound_psi_holds;
            d["lower_bound_env_holds"] = rep.lower_bound_env_holds;
            return d;
        },
        py::arg("p") = 2.0, py::arg("delta") = 0.1, py::arg("s_max") = 50.0,
        py::arg("n") = 20001);

    m.def(
        "gaussian_kernel",
        [](double sigma, int radius) {
            IndicatorParams p = make_indicator_params(sigma, 1.0);
            if (radius > 0) p.radius = radius;
            return py::cast(gaussian_kernel(p));
        },
        py::arg("sigma") = 1.0, py::arg("radius") = 0);
    m.def(
        "convolve",
        [](const Array& f, double sigma, int radius) {
            IndicatorParams p = make_indicator_params(sigma, 1.0);
            if (radius > 0) p.radius = radius;
            return array_from_grid(convolve(grid_from_array(f), p));
        },
        py::arg("f"), py::arg("sigma") = 1.0, py::arg("radius") = 0);
    m.def(
        "gray_indicator",
        [](const Array& f, double sigma, double beta) {
            return array_from_grid(
                gray_indicator(grid_from_array(f), make_indicator_params(sigma, beta)));
        },
        py::arg("f"), py::arg("sigma") = 1.0, py::arg("beta") = 1.0);

    m.def(
        "gamma_noise_field",
        [](int rows, int cols, long looks, std::uint64_t seed) {
            return array_from_grid(gamma_noise_field(rows, cols, {looks, seed}));
        },
        py::arg("rows"), py::arg("cols"), py::arg("looks") = 4, py::arg("seed") = 0);
    m.def(
        "apply_multiplicative",
        [](const Array& u, const Array& eta) {
            return array_from_grid(
                apply_multiplicative(grid_from_array(u), grid_from_array(eta)));
        },
        py::arg("u"), py::arg("eta"));
    m.def(
        "psnr",
        [](const Array& u, const Array& ref) {
            return psnr(grid_from_array(u), grid_from_array(ref));
        },
        py::arg("u"), py::arg("ref"));
    m.def(
        "mae",
        [](const Array& u, const Array& ref) {
            return mae(grid_from_array(u), grid_from_array(ref));
        },
        py::arg("u"), py::arg("ref"));

    m.def(
        "make_synthetic",
        [](const std::string& kind, int rows, int cols, std::vector<double> levels) {
            SyntheticSpec spec;
            spec.kind = synthetic_kind_from_string(kind);
            spec.rows = rows;
            spec.cols = cols;
            if (!levels.empty()) spec.levels = std::move(levels);
            return array_from_grid(make_synthetic(spec));
        },
        py::arg("kind") = "step", py::arg("rows") = 64, py::arg("cols") = 64,
        py::arg("levels") = std::vector<double>{});

    m.def(
        "denoise",
        [](const Array& f, py::object reference, double tau, double lambda, double p,
           double delta, double epsilon, double sigma, double beta,
           const std::string& stop, int fixed_iters, double tol, int max_iters) {
            const SolverConfig cfg = solver_config(tau, lambda, p, delta, epsilon, sigma,
                                                   beta, stop, fixed_iters, tol,
                                                   max_iters);
            const ImageGrid grid = grid_from_array(f);
            ImageGrid ref;
            const ImageGrid* ref_ptr = nullptr;
            if (!reference.is_none()) {
                ref = grid_from_array(reference.cast<Array>());
                ref_ptr = &ref;
            }
            const RunResult r = run(grid, cfg, ref_ptr);
            py::array_t<double> hist({static_cast<int>(r.history.size()), 6});
            auto h = hist.mutable_unchecked<2>();
            for (std::size_t i = 0; i < r.history.size(); ++i) {
                const StepReport& s = r.history[i];
                h(i, 0) = s.iter;
                h(i, 1) = s.psnr;
                h(i, 2) = s.mae;
                h(i, 3) = s.min_u;
                h(i, 4) = s.max_u;
                h(i, 5) = s.mean_value;
            }
            return py::make_tuple(array_from_grid(r.u), hist);
        },
        py::arg("f"), py::arg("reference") = py::none(), py::arg("tau") = 0.05,
        py::arg("lam") = 1.0, py::arg("p") = 2.0, py::arg("delta") = 0.1,
        py::arg("epsilon") = 1e-8, py::arg("sigma") = 1.0, py::arg("beta") = 1.0,
        py::arg("stop") = "relchange", py::arg("fixed_iters") = 0,
        py::arg("tol") = 1e-5, py::arg("max_iters") = 500);

    m.def(
        "rothe_fixed_point",
        [](const Array& f_arr, double p, double delta, int m_slices, double T,
           double outer_tol, int outer_max) {
            const ImageGrid f = grid_from_array(f_arr);
            const FluxParams params{p, delta};
            const double span = 1.5 * (f.max() - f.min()) + 1.0;
            const ConvexEnvelope env = convexify(sample_radial_profile(params, span, 50001));
            const ImageGrid alpha = gray_indicator(f, make_indicator_params(1.0, 1.0));
            RotheConfig cfg;
            cfg.m = m_slices;
            cfg.T = T;
            const FixedPointResult r = fixed_point(f, alpha, env, cfg, outer_tol, outer_max);
            py::dict d;
            d["converged"] = r.converged;
            d["iterations"] = r.iterations;
            d["distances"] = py::cast(r.distances);
            d["final"] = array_from_grid(r.trajectory.slices.back());
            d["apriori_sum"] = r.trajectory.apriori_sum;
            return d;
        },
        py::arg("f"), py::arg("p") = 2.0, py::arg("delta") = 0.1, py::arg("m") = 8,
        py::arg("T") = 1.0, py::arg("outer_tol") = 1e-6, py::arg("outer_max") = 50);

    m.def("read_pgm",
          [](const std::string& path) { return array_from_grid(read_pgm(path)); },
          py::arg("path"));
    m.def(
        "write_pgm",
        [](const Array& g, const std::string& path, bool binary) {
            write_pgm(grid_from_array(g), path, binary);
        },
        py::arg("grid"), py::arg("path"), py::arg("binary") = true);

#ifdef FBDIFF_VERSION
    m.attr("__version__") = FBDIFF_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
