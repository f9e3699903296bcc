#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kam/diophantine.hpp"
#include "kam/errors.hpp"
#include "kam/generate.hpp"
#include "kam/io.hpp"
#include "kam/kam_constants.hpp"
#include "kam/scheduler.hpp"
#include "kam/spectral_field.hpp"

namespace py = pybind11;
using namespace kam;

PYBIND11_MODULE(_kam, m) {
  m.doc() = "Spectral KAM normal form: fields, rational approximation, iteration.";

  py::register_exception<Error>(m, "KamError", PyExc_RuntimeError);

  py::class_<FrequencyVector>(m, "FrequencyVector")
      .def(py::init([](std::vector<double> at, double tau, double gamma, double gamma_bar) {
             FrequencyVector f{std::move(at), tau, gamma, gamma_bar};
             f.validate();
             return f;
           }),
           py::arg("alpha_tilde"), py::arg("tau"), py::arg("gamma"), py::arg("gamma_bar"))
      .def_readonly("alpha_tilde", &FrequencyVector::alpha_tilde)
      .def_readonly("tau", &FrequencyVector::tau)
      .def_readonly("gamma", &FrequencyVector::gamma)
      .def_readonly("gamma_bar", &FrequencyVector::gamma_bar)
      .def_property_readonly("dim", &FrequencyVector::dim)
      .def("alpha", &FrequencyVector::alpha);

  py::class_<RationalApprox>(m, "RationalApprox")
      .def_readonly("q", &RationalApprox::q)
      .def_readonly("p", &RationalApprox::p)
      .def_readonly("Q", &RationalApprox::Q)
      .def_readonly("residual", &RationalApprox::residual)
      .def("omega", &RationalApprox::omega);

  py::class_<PsiResult>(m, "PsiResult")
      .def_readonly("value", &PsiResult::value)
      .def_readonly("argmax", &PsiResult::argmax);

  m.def("dirichlet_approx", &dirichlet_approx, py::arg("alpha"), py::arg("Q"));
  m.def("psi", &psi, py::arg("alpha"), py::arg("Q"));

  py::class_<KamConstants>(m, "KamConstants")
      .def_readonly("n", &KamConstants::n)
      .def_readonly("tau", &KamConstants::tau)
      .def_readonly("a", &KamConstants::a)
      .def_readonly("b", &KamConstants::b)
      .def_readonly("c", &KamConstants::c)
      .def_readonly("d", &KamConstants::d)
      .def_readonly("gamma_star", &KamConstants::gamma_star)
      .def_readonly("kappa", &KamConstants::kappa)
      .def_readonly("mid_constant", &KamConstants::mid_constant);
  m.def("constants", &constants, py::arg("n"), py::arg("tau"), py::arg("gamma"), py::arg("gamma_bar"));

  py::class_<Threshold>(m, "Threshold")
      .def_readonly("Q0", &Threshold::Q0)
      .def_readonly("eps_star", &Threshold::eps_star);
  m.def(
      "select_Q",
      [](const KamConstants& c, double s) { return select_Q(c, s, c.gamma_star); },
      py::arg("consts"), py::arg("s"));

  py::class_<FourierField>(m, "FourierField")
      .def(py::init<int, double, int>(), py::arg("dim"), py::arg("width"), py::arg("kmax"))
      .def_property_readonly("dim", &FourierField::dim)
      .def_property_readonly("width", &FourierField::width)
      .def_property_readonly("kmax", &FourierField::kmax)
      .def("coeff", [](const FourierField& f, std::vector<int> k, int j) { return f.coeff(k, j); })
      .def("set_mode",
           [](FourierField& f, std::vector<int> k, std::vector<Complex> v) { f.set_mode(k, v); })
      .def("mean", &FourierField::mean)
      .def("norm", [](const FourierField& f, double s) { return norm(f, s); }, py::arg("s"))
      .def("__call__",
           [](const FourierField& f, std::vector<double> theta) { return eval(f, std::span<const double>(theta)); })
      .def("__add__", [](const FourierField& a, const FourierField& b) { return a + b; })
      .def("__sub__", [](const FourierField& a, const FourierField& b) { return a - b; })
      .def("__rmul__", [](const FourierField& a, double c) { return c * a; })
      .def("__mul__", [](const FourierField& a, double c) { return c * a; });

  m.def("lie_bracket", &lie_bracket, py::arg("x"), py::arg("v"));
  m.def("random_field", &random_field, py::arg("n"), py::arg("s"), py::arg("eps"), py::arg("kmax"),
        py::arg("seed"));
  m.def("load_field", &load_field, py::arg("path"));
  m.def("save_field", &save_field, py::arg("path"), py::arg("field"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("beta", &RunResult::beta)
      .def_readonly("P_final", &RunResult::P_final)
      .def_readonly("displacement_sum", &RunResult::displacement_sum)
      .def_readonly("warnings", &RunResult::warnings)
      .def_property_readonly("steps", [](const RunResult& r) { return r.trace.size(); })
      .def_property_readonly("residuals",
                             [](const RunResult& r) {
                               std::vector<double> out;
                               for (const auto& t : r.trace) out.push_back(t.norm_P_next);
                               return out;
                             })
      .def_property_readonly("eps_star", [](const RunResult& r) { return r.threshold.eps_star; })
      .def("phi", [](const RunResult& r, std::vector<double> theta) { return r.phi.apply(theta); });

  m.def(
      "run",
      [](const FrequencyVector& alpha, const FourierField& P, double s, double tol, int max_steps, bool force) {
        RunOptions o;
        o.tol = tol;
        o.max_steps = max_steps;
        o.force = force;
        py::gil_scoped_release nogil;
        return run(alpha, P, s, o);
      },
      py::arg("alpha"), py::arg("P"), py::arg("s"), py::arg("tol") = -1.0, py::arg("max_steps") = 64,
      py::arg("force") = false);
}
