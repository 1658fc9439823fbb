#include "fbethe/exact.hpp"
#include "fbethe/harness.hpp"
#include "fbethe/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fbethe;

namespace {

// α given as a scalar (all edges) or one value per edge.
AlphaAssignment alphas_of(const NormalizedModel& model, const py::object& alpha) {
  if (py::isinstance<py::float_>(alpha) || py::isinstance<py::int_>(alpha))
    return AlphaAssignment::uniform(model, alpha.cast<double>());
  AlphaAssignment a(alpha.cast<std::vector<double>>());
  a.check_matches(model.base());
  return a;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian MRF inference with mean-field, Bethe and fractional Bethe free energies";

  py::register_exception<InvalidModelError>(m, "InvalidModelError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<GaussianModel>(m, "GaussianModel")
      .def(py::init<Vector, Matrix>(), py::arg("h"), py::arg("J"))
      .def_property_readonly("n", &GaussianModel::n)
      .def_property_readonly("h", &GaussianModel::h)
      .def_property_readonly("J", &GaussianModel::J)
      .def_property_readonly("edges", [](const GaussianModel& g) {
        std::vector<std::pair<int, int>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.i, e.j);
        return out;
      });

  py::class_<NormalizedModel>(m, "NormalizedModel")
      .def_property_readonly("base", &NormalizedModel::base)
      .def_property_readonly("n", &NormalizedModel::n)
      .def_property_readonly("h", &NormalizedModel::h)
      .def_property_readonly("J", &NormalizedModel::J)
      .def_property_readonly("R", &NormalizedModel::R)
      .def_property_readonly("scale", &NormalizedModel::scale)
      .def_property_readonly("edges", [](const NormalizedModel& g) {
        std::vector<std::pair<int, int>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.i, e.j);
        return out;
      });

  py::class_<Moments>(m, "Moments")
      .def_readonly("m", &Moments::m)
      .def_readonly("sigma", &Moments::sigma)
      .def_readonly("sigma_pair", &Moments::sigma_pair);

  py::class_<ExactMarginals>(m, "ExactMarginals")
      .def_readonly("m", &ExactMarginals::m)
      .def_readonly("sigma", &ExactMarginals::sigma)
      .def_readonly("cov", &ExactMarginals::cov);

  py::class_<SpectralResult>(m, "SpectralResult")
      .def_readonly("lambda_max", &SpectralResult::lambda_max)
      .def_readonly("u_max", &SpectralResult::u_max)
      .def_readonly("iterations", &SpectralResult::iterations)
      .def_readonly("residual", &SpectralResult::residual)
      .def_readonly("components", &SpectralResult::components);

  // model
  m.def("validate", [](const GaussianModel& g) { return to_python(to_json(validate(g))); });
  m.def("normalize", &normalize, py::arg("model"));
  m.def("make_k_regular", py::overload_cast<int, int, double, const Vector&>(&make_k_regular), py::arg("n"),
        py::arg("K"), py::arg("r"), py::arg("h"));
  m.def("make_k_regular", py::overload_cast<int, int, double>(&make_k_regular), py::arg("n"), py::arg("K"),
        py::arg("r"));
  m.def("r_valid", &r_valid, py::arg("n"), py::arg("K"));
  m.def("random_model", &random_model, py::arg("n"), py::arg("density"), py::arg("target_lambda"), py::arg("seed"),
        py::arg("max_attempts") = 1000);
  m.def("random_tree_model", &random_tree_model, py::arg("n"), py::arg("target_lambda"), py::arg("seed"));
  m.def("generate", [](const std::string& spec) { return generate_model(GeneratorSpec::parse(spec)); },
        py::arg("spec"));
  m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));
  m.def("save_model", [](const GaussianModel& g, const std::string& path, bool sparse) { save_model(g, path, sparse); },
        py::arg("model"), py::arg("path"), py::arg("sparse") = true);
  m.def("parse_model_json", [](const std::string& text) { return parse_model_json(text); }, py::arg("text"));
  m.def("model_to_json", &model_to_json, py::arg("model"), py::arg("sparse") = true);

  // exact oracle
  m.def("exact_marginals", &exact_marginals, py::arg("model"));
  m.def("neg_log_partition", &neg_log_partition, py::arg("model"));
  m.def("sigma_error", &sigma_error, py::arg("sigma"), py::arg("exact"));

  // free energies
  m.def("sigma_star", &sigma_star, py::arg("alpha"), py::arg("coupling"), py::arg("sigma_i"), py::arg("sigma_j"));
  m.def("f_mean_field", [](const NormalizedModel& g, const Vector& mu, const Vector& s) {
    return f_mean_field(g, mu, s).value;
  }, py::arg("model"), py::arg("m"), py::arg("sigma"));
  m.def("f_lower_bound", [](const NormalizedModel& g, const Vector& mu, const Vector& s) {
    return f_lower_bound(g, mu, s).value;
  }, py::arg("model"), py::arg("m"), py::arg("sigma"));
  m.def("f_constrained", [](const NormalizedModel& g, const py::object& alpha, const Vector& mu, const Vector& s) {
    return f_constrained(g, alphas_of(g, alpha), mu, s).value;
  }, py::arg("model"), py::arg("alpha"), py::arg("m"), py::arg("sigma"));
  m.def("f_fractional", [](const NormalizedModel& g, const py::object& alpha, const Vector& mu, const Vector& s,
                           const std::vector<double>& sigma_pair) {
    return f_fractional(g, alphas_of(g, alpha), Moments{mu, s, sigma_pair}).value;
  }, py::arg("model"), py::arg("alpha"), py::arg("m"), py::arg("sigma"), py::arg("sigma_pair"));
  m.def("gradient_constrained", [](const NormalizedModel& g, const py::object& alpha, const Vector& mu, const Vector& s) {
    const ConstrainedGradient grad = gradient_constrained(g, alphas_of(g, alpha), mu, s);
    return py::make_tuple(grad.grad_m, grad.grad_sigma);
  }, py::arg("model"), py::arg("alpha"), py::arg("m"), py::arg("sigma"));
  m.def("ray_scan", [](const NormalizedModel& g, const py::object& alpha, const Vector& direction,
                       const std::vector<double>& t) {
    std::vector<double> values;
    for (const RayPoint& p : ray_scan(g, alphas_of(g, alpha), direction, t)) values.push_back(p.value);
    return values;
  }, py::arg("model"), py::arg("alpha"), py::arg("direction"), py::arg("t"));
  m.def("optimal_mean", &optimal_mean, py::arg("model"));

  // diagnostics
  m.def("spectral", [](const NormalizedModel& g) { return spectral(g); }, py::arg("model"));
  m.def("diagnose", [](const NormalizedModel& g, const py::object& alpha) {
    return to_python(to_json(diagnose(g, alphas_of(g, alpha))));
  }, py::arg("model"), py::arg("alpha") = 1.0);
  m.def("critical_r", &critical_r, py::arg("K"), py::arg("alpha"));
  m.def("critical_alpha", &critical_alpha, py::arg("K"), py::arg("r"));

  // minimizer and message passing
  m.def("minimize", [](const NormalizedModel& g, const py::object& alpha, std::optional<Vector> sigma0,
                       double tol, int max_iter) {
    NewtonOptions o;
    o.tolerance = tol;
    o.max_iterations = max_iter;
    const MinimizeResult r = newton_minimize(g, alphas_of(g, alpha), sigma0.value_or(Vector::Ones(g.n())), o);
    return py::make_tuple(to_python(to_json(r)), r.moments);
  }, py::arg("model"), py::arg("alpha"), py::arg("sigma0") = py::none(), py::arg("tol") = 1e-9,
     py::arg("max_iter") = 500);
  m.def("message_passing", [](const NormalizedModel& g, const py::object& alpha, double damping,
                              const std::string& schedule, double tol, int max_sweeps) {
    MPOptions o;
    o.damping = damping;
    o.tolerance = tol;
    o.max_sweeps = max_sweeps;
    if (schedule == "round-robin") o.schedule = Schedule::RoundRobin;
    else if (schedule != "synchronous") throw UsageError("unknown schedule \"" + schedule + "\"");
    const MPResult r = run_message_passing(g, alphas_of(g, alpha), o, spectral(g));
    return py::make_tuple(to_python(to_json(r)), r.beliefs);
  }, py::arg("model"), py::arg("alpha"), py::arg("damping") = 0.0, py::arg("schedule") = "synchronous",
     py::arg("tol") = 1e-10, py::arg("max_sweeps") = 10000);
}
