#include "cli.hpp"

#include "bridgeord/bridge.hpp"
#include "bridgeord/errors.hpp"
#include "bridgeord/model.hpp"
#include "bridgeord/random.hpp"
#include "bridgeord/selection.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace bridgeord;

namespace {

py::dict criteria_dict(const Eigen::MatrixXd& draws, std::optional<Eigen::RowVectorXd> plugin) {
  PointwiseLogLik pll;
  pll.draws = draws;
  pll.plugin = std::move(plugin);
  py::dict out;
  const auto w = waic(pll);
  out["waic"] = w.waic;
  out["lppd"] = w.lppd;
  out["p_waic"] = w.rho;
  out["lpml"] = lpml(pll).lpml;
  if (pll.plugin) {
    const auto d = dic(pll);
    out["dic"] = d.dic;
    out["dbar"] = d.dbar;
    out["dhat"] = d.dhat;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cumulative-logit models with Bridge random effects";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("bridge_log_pdf", [](double x, double phi) { return bridge_log_pdf(x, BridgeParam(phi)); },
        py::arg("x"), py::arg("phi"));
  m.def("bridge_cdf", [](double x, double phi) { return bridge_cdf(x, BridgeParam(phi)); }, py::arg("x"),
        py::arg("phi"));
  m.def("bridge_quantile", [](double u, double phi) { return bridge_quantile(u, BridgeParam(phi)); },
        py::arg("u"), py::arg("phi"));
  m.def("bridge_variance", [](double phi) { return bridge_variance(BridgeParam(phi)); }, py::arg("phi"));
  m.def("bridge_sample",
        [](double phi, std::size_t n, std::uint64_t seed) {
          RandomStream rng(seed, 0);
          std::vector<double> out(n);
          for (auto& x : out) x = bridge_sample(BridgeParam(phi), rng);
          return out;
        },
        py::arg("phi"), py::arg("n"), py::arg("seed") = 1);
  m.def("modified_bridge_log_pdf",
        [](double x, double phi_y, double phi_z) {
          return modified_bridge_log_pdf(x, ModifiedBridgeParam(phi_y, phi_z));
        },
        py::arg("x"), py::arg("phi_y"), py::arg("phi_z"));
  m.def("modified_bridge_variance",
        [](double phi_y, double phi_z) { return modified_bridge_variance(ModifiedBridgeParam(phi_y, phi_z)); },
        py::arg("phi_y"), py::arg("phi_z"));
  m.def("logistic", &logistic, py::arg("x"));

  m.def("marginalize",
        [](const Eigen::VectorXd& alpha_c, const Eigen::VectorXd& beta_c, double phi_ustar, double phi_v) {
          const auto r = marginalize(alpha_c, beta_c, phi_ustar, phi_v);
          return py::make_tuple(r.alpha_m, r.beta_m);
        },
        py::arg("alpha_c"), py::arg("beta_c"), py::arg("phi_ustar") = 1.0, py::arg("phi_v") = 1.0);
  m.def("category_probs", &category_probs, py::arg("eta"), py::arg("alpha"));
  m.def("effect_interpretation",
        [](double beta_m, std::optional<double> log_multiplier) {
          return effect_interpretation(beta_m, log_multiplier ? EffectKind::log_covariate_percent(*log_multiplier)
                                                              : EffectKind::odds_percent());
        },
        py::arg("beta_m"), py::arg("log_multiplier") = py::none(),
        "Percent change in the odds of a higher category. Pass log_multiplier for a log-scale covariate.");

  m.def("criteria", &criteria_dict, py::arg("pointwise"), py::arg("plugin") = py::none(),
        "WAIC, LPML and (with a plug-in row) DIC from a draws-by-observations log-likelihood matrix.");

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "bridgeord");
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a command-line invocation in-process; returns (exit_code, stdout, stderr).");
}
