#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "beckman/error.hpp"
#include "beckman/grid.hpp"
#include "beckman/image.hpp"
#include "beckman/info.hpp"
#include "beckman/marginals.hpp"
#include "beckman/oracle.hpp"
#include "beckman/prox.hpp"
#include "beckman/solver.hpp"

namespace py = pybind11;
using namespace beckman;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField to_field(const Array& a) {
  if (a.ndim() == 1) {
    return ScalarField(1, a.shape(0), std::vector<double>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw InputError("expected a 1-D or 2-D array");
  return ScalarField(a.shape(0), a.shape(1),
                     std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const ScalarField& f) {
  Array out({f.height(), f.width()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

SolverConfig make_config(double tau1, double tau2, std::size_t iterations) {
  SolverConfig c;
  c.tau1 = tau1;
  c.tau2 = tau2;
  c.iterations = iterations;
  return c;
}

ImageTensor to_image(const Array& a) {
  if (a.ndim() == 2) return ImageTensor(std::vector<ScalarField>{to_field(a)});
  if (a.ndim() != 3) throw InputError("expected (H, W) or (C, H, W)");
  const std::size_t c = a.shape(0), h = a.shape(1), w = a.shape(2);
  return ImageTensor::from_flat(c, h, w, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_image(const ImageTensor& img) {
  if (img.channels() == 1) return to_array(img.channel(0));
  Array out({img.channels(), img.height(), img.width()});
  const auto flat = img.flatten();
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

PredictionSet to_predictions(const Array& a) {
  if (a.ndim() != 2) throw InputError("predictions must be a 2-D array");
  return PredictionSet(a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unbalanced Beckman transport barycenters on pixel grids";

  // Translators registered later are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("divergence", [](const Array& fx, const Array& fy) {
    return to_array(divergence(FluxField(to_field(fx), to_field(fy))));
  }, py::arg("fx"), py::arg("fy"));
  m.def("divergence_adjoint", [](const Array& lambda) {
    const FluxField f = divergence_adjoint(to_field(lambda));
    return py::make_tuple(to_array(f.x), to_array(f.y));
  }, py::arg("lam"));
  m.def("laplacian_max_eig", [](std::size_t h, std::size_t w) {
    return laplacian_max_eig(h, w);
  }, py::arg("height"), py::arg("width"));

  m.def("shrink_l1", [](const Array& x, double t) { return to_array(shrink_l1(to_field(x), t)); },
        py::arg("x"), py::arg("t"));
  m.def("shrink_l21", [](const Array& fx, const Array& fy, double t) {
    const FluxField f = shrink_l21(FluxField(to_field(fx), to_field(fy)), t);
    return py::make_tuple(to_array(f.x), to_array(f.y));
  }, py::arg("fx"), py::arg("fy"), py::arg("t"));

  m.def("check_step_sizes", [](double tau1, double tau2, std::size_t h, std::size_t w) {
    const StepSizeReport r = check_step_sizes(make_config(tau1, tau2, 1), h, w);
    py::dict d;
    d["lambda_max"] = r.lambda_max;
    d["product"] = r.product;
    d["coupled_product"] = r.coupled_product;
    d["satisfied"] = r.satisfied;
    return d;
  }, py::arg("tau1"), py::arg("tau2"), py::arg("height"), py::arg("width"));

  m.def("solve_barycenter", [](const std::vector<Array>& marginals, double alpha, double beta,
                               double rho, double tau1, double tau2, std::size_t iterations) {
    BarycenterProblem p;
    for (const auto& a : marginals) p.marginals.emplace_back(to_field(a));
    p.alpha = alpha;
    p.beta = beta;
    p.rho = rho;
    const BarycenterResult r = solve_barycenter(p, make_config(tau1, tau2, iterations));
    py::dict d;
    d["barycenter"] = to_array(r.barycenter);
    d["objective"] = objective_value(r.state, p);
    d["warnings"] = r.trace.warnings;
    return d;
  }, py::arg("marginals"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("rho") = 0.5,
     py::arg("tau1") = 0.1, py::arg("tau2") = 1.0, py::arg("iterations") = 200);

  m.def("solve_distance", [](const Array& a, const Array& b, double tau1, double tau2,
                             std::size_t iterations) {
    return solve_distance(DensityGrid(to_field(a)), DensityGrid(to_field(b)),
                          make_config(tau1, tau2, iterations)).value;
  }, py::arg("mu1"), py::arg("mu2"), py::arg("tau1") = 0.1, py::arg("tau2") = 1.0,
     py::arg("iterations") = 2000);

  m.def("emd_1d", [](const Array& a, const Array& b) {
    return emd_1d(DensityGrid(to_field(a)), DensityGrid(to_field(b)));
  }, py::arg("mu1"), py::arg("mu2"));

  m.def("barycentric_transform", [](const Array& image, double theta, double alpha, double beta,
                                    double rho, double tau1, double tau2, std::size_t iterations) {
    BarycentricParams p;
    p.theta = theta;
    p.alpha = alpha;
    p.beta = beta;
    p.rho = rho;
    return from_image(barycentric_transform(to_image(image), p,
                                            make_config(tau1, tau2, iterations)));
  }, py::arg("image"), py::arg("theta") = 4.0, py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
     py::arg("rho") = 0.5, py::arg("tau1") = 0.1, py::arg("tau2") = 1.0,
     py::arg("iterations") = 200);

  m.def("rotate_bilinear", [](const Array& image, double degrees) {
    return from_image(rotate_bilinear(to_image(image), degrees));
  }, py::arg("image"), py::arg("degrees"));

  m.def("mi_param_output", [](const Array& p) { return mi_param_output(to_predictions(p)); },
        py::arg("predictions"));
  m.def("mi_pairwise", [](const Array& a, const Array& b) {
    return mi_pairwise(to_predictions(a), to_predictions(b));
  }, py::arg("a"), py::arg("b"));

  m.def("read_pnm", [](const std::string& path) { return from_image(read_pnm(path)); },
        py::arg("path"));
  m.def("write_pnm", [](const std::string& path, const Array& image) {
    write_pnm(path, to_image(image));
  }, py::arg("path"), py::arg("image"));
}
