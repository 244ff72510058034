#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsys/ctmc.hpp"
#include "nsys/exact.hpp"
#include "nsys/fluid.hpp"
#include "nsys/matching.hpp"
#include "nsys/model.hpp"
#include "nsys/simulate.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Many-server N-system queue under FCFS-ALIS: fluid, exact, "
            "simulation and matching computations.";

  py::class_<nsys::SystemParams>(m, "SystemParams")
      .def(py::init([](double lambda1, double lambda2, int n1, int n2, double mu1,
                       double mu2) {
             nsys::SystemParams p{lambda1, lambda2, n1, n2, mu1, mu2};
             nsys::validate(p);
             return p;
           }),
           py::arg("lambda1"), py::arg("lambda2"), py::arg("n1"), py::arg("n2"),
           py::arg("mu1"), py::arg("mu2"))
      .def_readonly("lambda1", &nsys::SystemParams::lambda1)
      .def_readonly("lambda2", &nsys::SystemParams::lambda2)
      .def_readonly("n1", &nsys::SystemParams::n1)
      .def_readonly("n2", &nsys::SystemParams::n2)
      .def_readonly("mu1", &nsys::SystemParams::mu1)
      .def_readonly("mu2", &nsys::SystemParams::mu2)
      .def("__repr__", [](const nsys::SystemParams& p) { return nsys::params_to_json(p); });

  py::class_<nsys::DerivedRatios>(m, "DerivedRatios")
      .def_readonly("lam", &nsys::DerivedRatios::lambda)
      .def_readonly("n", &nsys::DerivedRatios::n)
      .def_readonly("alpha", &nsys::DerivedRatios::alpha)
      .def_readonly("theta", &nsys::DerivedRatios::theta)
      .def_readonly("rho", &nsys::DerivedRatios::rho)
      .def_readonly("delta", &nsys::DerivedRatios::delta)
      .def_readonly("kappa", &nsys::DerivedRatios::kappa);

  py::class_<nsys::StabilityReport>(m, "StabilityReport")
      .def_readonly("stable", &nsys::StabilityReport::stable)
      .def_readonly("pooled_prerequisite", &nsys::StabilityReport::pooled_prerequisite);

  py::class_<nsys::ShapeSpec>(m, "ShapeSpec")
      .def(py::init([](double alpha, double theta, double rho, double mu1, double mu2) {
             return nsys::ShapeSpec{alpha, theta, rho, mu1, mu2};
           }),
           py::arg("alpha"), py::arg("theta"), py::arg("rho"), py::arg("mu1"),
           py::arg("mu2"))
      .def_readonly("alpha", &nsys::ShapeSpec::alpha)
      .def_readonly("theta", &nsys::ShapeSpec::theta)
      .def_readonly("rho", &nsys::ShapeSpec::rho)
      .def_readonly("mu1", &nsys::ShapeSpec::mu1)
      .def_readonly("mu2", &nsys::ShapeSpec::mu2);

  m.def("derive", &nsys::derive, py::arg("params"));
  m.def("stability", &nsys::stability, py::arg("params"));
  m.def("scale", &nsys::scale, py::arg("shape"), py::arg("n"));
  m.def("params_from_json", &nsys::params_from_json, py::arg("text"));
  m.def("params_to_json", &nsys::params_to_json, py::arg("params"));

  py::class_<nsys::FluidSolution>(m, "FluidSolution")
      .def_readonly("T", &nsys::FluidSolution::T)
      .def_readonly("beta", &nsys::FluidSolution::beta)
      .def_readonly("m1", &nsys::FluidSolution::m1)
      .def_readonly("m2", &nsys::FluidSolution::m2)
      .def_readonly("f1", &nsys::FluidSolution::f1)
      .def_readonly("f2", &nsys::FluidSolution::f2);

  py::class_<nsys::CltParams>(m, "CltParams")
      .def_readonly("sigma1", &nsys::CltParams::sigma1)
      .def_readonly("sigma2", &nsys::CltParams::sigma2)
      .def_readonly("corr", &nsys::CltParams::corr);

  py::class_<nsys::ImprovedTheta>(m, "ImprovedTheta")
      .def_readonly("theta_star", &nsys::ImprovedTheta::theta_star)
      .def_readonly("e_i1_approx", &nsys::ImprovedTheta::e_i1_approx);

  m.def("fluid_solve", &nsys::fluid_solve, py::arg("params"));
  m.def("pooling", &nsys::pooling, py::arg("params"));
  m.def("clt_params", &nsys::clt_params, py::arg("params"));
  m.def("k_geometric", &nsys::k_geometric, py::arg("alpha"), py::arg("beta"),
        py::arg("tail_eps") = 1e-15);
  m.def("improved_theta", &nsys::improved_theta, py::arg("params"));

  py::class_<nsys::Moments>(m, "Moments")
      .def_readonly("mean_i1", &nsys::Moments::mean_i1)
      .def_readonly("mean_i2", &nsys::Moments::mean_i2)
      .def_readonly("var_i1", &nsys::Moments::var_i1)
      .def_readonly("var_i2", &nsys::Moments::var_i2)
      .def_readonly("cov", &nsys::Moments::cov)
      .def_readonly("p_i1_zero", &nsys::Moments::p_i1_zero)
      .def_readonly("k_pmf", &nsys::Moments::k_pmf)
      .def_readonly("i1_pmf", &nsys::Moments::i1_pmf)
      .def_readonly("i2_pmf", &nsys::Moments::i2_pmf);

  m.def("exact_moments",
        [](const nsys::SystemParams& p) { return nsys::moments(nsys::build_table(p)); },
        py::arg("params"),
        "Exact stationary moments of the aggregated (K, I1, I2) law.");
  m.def("exact_log_prob",
        [](const nsys::SystemParams& p, int k, int i1, int i2) {
          return nsys::build_table(p).log_prob({k, i1, i2});
        },
        py::arg("params"), py::arg("k"), py::arg("i1"), py::arg("i2"));
  m.def("p_i1_zero_closed_form",
        [](const nsys::SystemParams& p) {
          const auto z = nsys::p_i1_zero_closed_form(p);
          return py::make_tuple(z.log_rel_00, z.log_rel_0pos);
        },
        py::arg("params"),
        "Log relative masses of the i1 = 0 regions: (log P(I1=0,I2=0)*Z', "
        "log P(I1=0,I2>0)*Z'), normalizer-free.");

  py::class_<nsys::CtmcResult>(m, "CtmcResult")
      .def_readonly("mean_i1", &nsys::CtmcResult::mean_i1)
      .def_readonly("mean_i2", &nsys::CtmcResult::mean_i2)
      .def_readonly("var_i1", &nsys::CtmcResult::var_i1)
      .def_readonly("var_i2", &nsys::CtmcResult::var_i2)
      .def_readonly("p_i1_zero", &nsys::CtmcResult::p_i1_zero)
      .def_readonly("k_pmf", &nsys::CtmcResult::k_pmf)
      .def_readonly("truncation_mass", &nsys::CtmcResult::truncation_mass)
      .def_readonly("state_count", &nsys::CtmcResult::state_count);

  m.def("ctmc_solve", &nsys::ctmc_solve, py::arg("params"), py::arg("qmax"));

  py::class_<nsys::SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &nsys::SimConfig::horizon)
      .def_readwrite("warmup_fraction", &nsys::SimConfig::warmup_fraction)
      .def_readwrite("seed", &nsys::SimConfig::seed)
      .def_readwrite("replications", &nsys::SimConfig::replications)
      .def_readwrite("batch_count", &nsys::SimConfig::batch_count)
      .def_readwrite("allow_unstable", &nsys::SimConfig::allow_unstable)
      .def_readwrite("check_invariants", &nsys::SimConfig::check_invariants)
      .def_readwrite("trace_path", &nsys::SimConfig::trace_path);

  py::class_<nsys::ErrorBand>(m, "ErrorBand")
      .def_readonly("se", &nsys::ErrorBand::se)
      .def_readonly("ci_halfwidth", &nsys::ErrorBand::ci_halfwidth);

  py::class_<nsys::SimStats>(m, "SimStats")
      .def_readonly("mean_i1", &nsys::SimStats::mean_i1)
      .def_readonly("mean_i2", &nsys::SimStats::mean_i2)
      .def_readonly("var_i1", &nsys::SimStats::var_i1)
      .def_readonly("var_i2", &nsys::SimStats::var_i2)
      .def_readonly("k_pmf_hat", &nsys::SimStats::k_pmf_hat)
      .def_readonly("r_hat", &nsys::SimStats::r_hat)
      .def_readonly("beta_hat", &nsys::SimStats::beta_hat)
      .def_readonly("throughput", &nsys::SimStats::throughput)
      .def_readonly("mean_i1_err", &nsys::SimStats::mean_i1_err)
      .def_readonly("mean_i2_err", &nsys::SimStats::mean_i2_err)
      .def_readonly("beta_hat_err", &nsys::SimStats::beta_hat_err)
      .def_readonly("throughput_err", &nsys::SimStats::throughput_err)
      .def_readonly("events", &nsys::SimStats::events)
      .def_readonly("time_simulated", &nsys::SimStats::time_simulated);

  m.def("simulate", &nsys::simulate, py::arg("params"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<nsys::MatchRunResult>(m, "MatchRunResult")
      .def_readonly("k_pmf", &nsys::MatchRunResult::k_pmf)
      .def_readonly("steps", &nsys::MatchRunResult::steps);

  m.def("match_run", &nsys::match_run, py::arg("alpha"), py::arg("beta"),
        py::arg("steps"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
}
