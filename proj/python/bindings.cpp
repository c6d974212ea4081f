#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wm/config.hpp"
#include "wm/errors.hpp"
#include "wm/fields.hpp"
#include "wm/modulation.hpp"
#include "wm/profiles.hpp"
#include "wm/reduced_ode.hpp"
#include "wm/solver.hpp"
#include "wm/verify.hpp"
#include "wm/virial.hpp"

namespace py = pybind11;
using namespace wm;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw DomainError("expected a one-dimensional array");
    return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Radial equivariant wave maps: profiles, solver, modulation and reduced dynamics";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    // profiles
    py::class_<BubbleConfig>(m, "BubbleConfig")
        .def(py::init([](int mm, std::vector<int> iota, std::vector<double> lambda) {
                 BubbleConfig c{mm, std::move(iota), std::move(lambda)};
                 c.validate();
                 return c;
             }),
             py::arg("m"), py::arg("iota"), py::arg("lambda_"))
        .def_readwrite("m", &BubbleConfig::m)
        .def_readwrite("iota", &BubbleConfig::iota)
        .def_readwrite("lambda_", &BubbleConfig::lambda)
        .def("__len__", &BubbleConfig::size)
        .def("__repr__", [](const BubbleConfig& c) {
            return "BubbleConfig(m=" + std::to_string(c.m) + ", " + std::to_string(c.size()) + " bubbles)";
        });
    m.def("sector_of_config", &sector_of_config);
    m.def("q_profile", py::vectorize(&q_profile), py::arg("k"), py::arg("lambda_"), py::arg("r"));
    m.def("lam_q", py::vectorize(&lam_q), py::arg("k"), py::arg("lambda_"), py::arg("r"));
    m.def("z_profile", py::vectorize(&z_profile), py::arg("k"), py::arg("x"));
    m.def("chi", py::vectorize(&chi), py::arg("x"));
    m.def(
        "multi_bubble", [](int k, const BubbleConfig& c, double r) { return multi_bubble(k, c, r); }, py::arg("k"),
        py::arg("config"), py::arg("r"));
    m.def("energy_Q", [](int k) { return energy_Q(k); }, py::arg("k"));
    m.def("exterior_energy_Q", &exterior_energy_Q, py::arg("k"), py::arg("r"));
    m.def("omega_sq", &omega_sq, py::arg("k"));
    m.def("omega_sq_quadrature", [](int k) { return omega_sq_quadrature(k); }, py::arg("k"));
    m.def("norm_lam_q_sq", [](int k, double R) { return norm_lam_q_sq(k, R); }, py::arg("k"), py::arg("R") = kInf);
    m.def("q3_integral", [](int k, int sign) { return q3_integral(k, sign); }, py::arg("k"), py::arg("sign"));
    m.def("multi_bubble_energy", [](int k, const BubbleConfig& c) { return multi_bubble_energy(k, c); });
    m.def("leading_order_energy", &leading_order_energy);

    // grids and fields
    py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "RadialGrid")
        .def_static("geometric", [](double a, double b, double ds) { return std::make_shared<RadialGrid>(RadialGrid::geometric(a, b, ds)); },
                    py::arg("r_min"), py::arg("r_max"), py::arg("ds"))
        .def_static("sinh", [](double a, double b, double ds) { return std::make_shared<RadialGrid>(RadialGrid::sinh(a, b, ds)); },
                    py::arg("a"), py::arg("r_max"), py::arg("ds"))
        .def_property_readonly("r", [](const RadialGrid& g) { return as_array(g.r()); })
        .def_property_readonly("weights", [](const RadialGrid& g) { return as_array(g.weights()); })
        .def("__len__", &RadialGrid::size);

    py::class_<FieldState>(m, "FieldState")
        .def_readonly("k", &FieldState::k)
        .def_property_readonly("r", [](const FieldState& f) { return as_array(f.grid->r()); })
        .def_property(
            "u", [](const FieldState& f) { return as_array(f.u); },
            [](FieldState& f, py::array_t<double> a) {
                auto v = as_vector(a);
                if (v.size() != f.u.size()) throw DomainError("length mismatch");
                f.u = std::move(v);
            })
        .def_property(
            "u_dot", [](const FieldState& f) { return as_array(f.u_dot); },
            [](FieldState& f, py::array_t<double> a) {
                auto v = as_vector(a);
                if (v.size() != f.u_dot.size()) throw DomainError("length mismatch");
                f.u_dot = std::move(v);
            })
        .def_property_readonly("sector", [](const FieldState& f) { return py::make_tuple(f.sector.ell, f.sector.m); })
        .def("__len__", &FieldState::size);
    m.def(
        "field_from_config",
        [](int k, const BubbleConfig& c, std::shared_ptr<RadialGrid> g, bool bg) { return field_from_config(k, c, g, bg); },
        py::arg("k"), py::arg("config"), py::arg("grid"), py::arg("attach_background") = true);
    m.def(
        "energy", [](const FieldState& f, double r1, double r2) { return energy(f, r1, r2); }, py::arg("field"),
        py::arg("r1") = 0.0, py::arg("r2") = kInf);
    m.def("jia_kenig_functional", [](const FieldState& f) { return jia_kenig_functional(f); });
    m.def("save_snapshot", &save_snapshot, py::arg("path"), py::arg("field"), py::arg("t") = 0.0);
    m.def("load_snapshot", [](const std::string& p) { return load_snapshot(p); });

    // solver
    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("T", &SolverConfig::T)
        .def_readwrite("cadence", &SolverConfig::cadence)
        .def_readwrite("c_cfl", &SolverConfig::c_cfl)
        .def_readwrite("dt", &SolverConfig::dt)
        .def_property(
            "scheme", [](const SolverConfig& c) { return scheme_name(c.scheme); },
            [](SolverConfig& c, const std::string& s) { c.scheme = scheme_from_name(s); })
        .def_readwrite("max_energy_growth", &SolverConfig::max_energy_growth);
    py::class_<Snapshot>(m, "Snapshot")
        .def_readonly("t", &Snapshot::t)
        .def_readonly("state", &Snapshot::state)
        .def_readonly("discrete_energy", &Snapshot::discrete_energy);
    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("snapshots", &Trajectory::snapshots)
        .def_readonly("dt", &Trajectory::dt)
        .def_property_readonly("times", [](const Trajectory& t) { return as_array(t.times()); })
        .def_property_readonly("manifest", [](const Trajectory& t) { return t.manifest.dump(); });
    m.def("evolve", &evolve, py::arg("state"), py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("save_trajectory", &save_trajectory);
    m.def("load_trajectory", &load_trajectory);

    // modulation
    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("tol", &FitOptions::tol)
        .def_readwrite("step_tol", &FitOptions::step_tol)
        .def_readwrite("max_iter", &FitOptions::max_iter);
    py::class_<ModulationFit>(m, "ModulationFit")
        .def_readonly("config", &ModulationFit::config)
        .def_property_readonly("g", [](const ModulationFit& f) { return as_array(f.g); })
        .def_property_readonly("g_dot", [](const ModulationFit& f) { return as_array(f.g_dot); })
        .def_readonly("ortho_residuals", &ModulationFit::ortho_residuals)
        .def_readonly("ratios", &ModulationFit::ratios)
        .def_readonly("g_energy_sq", &ModulationFit::g_energy_sq)
        .def_readonly("sandwich", &ModulationFit::sandwich)
        .def_readonly("iterations", &ModulationFit::iterations);
    m.def("fit_static", &fit_static, py::arg("field"), py::arg("guess"), py::arg("options") = FitOptions{});
    py::class_<DistanceReport>(m, "DistanceReport")
        .def_readonly("value", &DistanceReport::value)
        .def_readonly("value_sq", &DistanceReport::value_sq)
        .def_readonly("minimizer", &DistanceReport::minimizer)
        .def_readonly("certified", &DistanceReport::certified);
    m.def(
        "proximity_d",
        [](const FieldState& f, int mm, int N, double outer) { return proximity_d(f, nullptr, mm, N, outer); },
        py::arg("field"), py::arg("m"), py::arg("N"), py::arg("outer_scale") = kInf);
    m.def("mu_scale", &mu_scale, py::arg("field"), py::arg("N"), py::arg("K"), py::arg("E_star") = 0.0);
    py::class_<TrackOptions>(m, "TrackOptions")
        .def(py::init<>())
        .def_readwrite("eta0", &TrackOptions::eta0)
        .def_readwrite("L", &TrackOptions::L)
        .def_readwrite("max_jump", &TrackOptions::max_jump)
        .def_readwrite("with_distance", &TrackOptions::with_distance);
    py::class_<TrackedSeries>(m, "TrackedSeries")
        .def_property_readonly("times", [](const TrackedSeries& s) { return as_array(s.times); })
        .def("lambda_", [](const TrackedSeries& s, int j) { return as_array(s.lambda(j)); })
        .def_property_readonly("d", [](const TrackedSeries& s) { return as_array(s.d); })
        .def_property_readonly("mu", [](const TrackedSeries& s) { return as_array(s.mu); })
        .def_property_readonly("U", [](const TrackedSeries& s) { return as_array(s.U); })
        .def_readonly("beta", &TrackedSeries::beta)
        .def_readonly("terminated", &TrackedSeries::terminated)
        .def_readonly("termination_reason", &TrackedSeries::termination_reason)
        .def("__len__", &TrackedSeries::size);
    m.def("track", &track, py::arg("trajectory"), py::arg("guess"), py::arg("options") = TrackOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("detect_collision_intervals", [](const std::vector<double>& t, const std::vector<double>& d, double e,
                                           double h) {
        py::list out;
        for (const auto& iv : detect_collision_intervals(t, d, e, h)) out.append(py::make_tuple(iv.a, iv.b));
        return out;
    });
    m.def("partition_lipschitz", &partition_lipschitz, py::arg("mu"), py::arg("a"), py::arg("b"));

    // reduced ODE
    py::class_<OdeSeries>(m, "OdeSeries")
        .def_property_readonly("times", [](const OdeSeries& s) { return as_array(s.times); })
        .def("lambda_", [](const OdeSeries& s, int j) {
            std::vector<double> v;
            for (const auto& st : s.states) v.push_back(st.lambda.at(j));
            return as_array(v);
        })
        .def("lambda_at", &OdeSeries::lambda_at)
        .def_readonly("halted", &OdeSeries::halted)
        .def_readonly("halt_time", &OdeSeries::halt_time);
    m.def(
        "ode_rhs",
        [](std::vector<double> lambda, std::vector<double> beta, int k, std::vector<int> iota) {
            auto d = ode_rhs({std::move(lambda), std::move(beta)}, k, iota);
            return py::make_tuple(d.lambda, d.beta);
        },
        py::arg("lambda_"), py::arg("beta"), py::arg("k"), py::arg("iota"));
    m.def(
        "integrate_ode",
        [](std::vector<double> lambda, std::vector<double> beta, int k, std::vector<int> iota, double T, double dt) {
            return integrate_ode({std::move(lambda), std::move(beta)}, k, iota, T, dt);
        },
        py::arg("lambda_"), py::arg("beta"), py::arg("k"), py::arg("iota"), py::arg("T"), py::arg("dt"));
    m.def("early_acceleration", &early_acceleration, py::arg("times"), py::arg("values"), py::arg("window"));

    // virial and verification
    m.def(
        "verify_cutoff",
        [](double c, double R) {
            auto rep = verify_cutoff(build_cutoff(c, R));
            return py::make_tuple(rep.ok, rep.violations);
        },
        py::arg("c"), py::arg("R"));
    m.def("verify_constants", [](double tol) {
        VerifyOptions o;
        o.tolerance = tol;
        py::list out;
        for (const auto& r : verify_constants(o)) {
            py::dict d;
            d["check"] = r.check;
            d["k"] = r.k;
            d["param"] = r.param;
            d["value"] = r.value;
            d["reference"] = r.reference;
            d["error"] = r.error;
            d["pass"] = r.pass;
            d["failure"] = r.failure;
            out.append(d);
        }
        return out;
    }, py::arg("tolerance") = 0.0);

    // configs
    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("scenario", &RunConfig::scenario)
        .def_readwrite("k", &RunConfig::k)
        .def_readwrite("initial", &RunConfig::initial)
        .def_readwrite("solver", &RunConfig::solver)
        .def_readwrite("seed", &RunConfig::seed)
        .def("hash", &RunConfig::hash)
        .def("to_text", &RunConfig::to_text);
    m.def("parse_run_config", &parse_run_config, py::arg("text"));
    m.def("initial_field", &initial_field, py::arg("config"));
}
