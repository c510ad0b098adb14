#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fscbound/experiment.hpp"

namespace py = pybind11;
using namespace fscbound;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bounds on the capacity of non-controllable finite-state channels";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<GridTooLarge>(m, "GridTooLarge");
  py::register_exception<PolicySpaceTooLarge>(m, "PolicySpaceTooLarge");

  py::class_<ChannelSpec>(m, "Channel")
      .def(py::init([](int num_states, int num_inputs, int num_outputs,
                       std::vector<double> state_transition,
                       std::vector<double> output_kernel,
                       const std::string& constraint) {
             return new_fsc(num_states, num_inputs, num_outputs,
                            std::move(state_transition),
                            std::move(output_kernel),
                            constraint_by_name(constraint));
           }),
           py::arg("num_states"), py::arg("num_inputs"), py::arg("num_outputs"),
           py::arg("state_transition"), py::arg("output_kernel"),
           py::arg("constraint") = "none")
      .def_property_readonly("num_states", &ChannelSpec::num_states)
      .def_property_readonly("num_inputs", &ChannelSpec::num_inputs)
      .def_property_readonly("num_outputs", &ChannelSpec::num_outputs)
      .def_property_readonly("digest", &ChannelSpec::digest)
      .def("stationary_state_dist", &ChannelSpec::stationary_state_dist)
      .def("p_state", &ChannelSpec::p_state)
      .def("p_output", &ChannelSpec::p_output);

  m.def(
      "gilbert_elliott",
      [](double p_b_given_g, double p_g_given_b, double eps_g, double eps_b,
         const std::string& constraint) {
        return gilbert_elliott(p_b_given_g, p_g_given_b, eps_g, eps_b,
                               constraint_by_name(constraint));
      },
      py::arg("p_b_given_g"), py::arg("p_g_given_b"), py::arg("eps_g"),
      py::arg("eps_b"), py::arg("constraint") = "none");

  m.def(
      "bsc",
      [](double eps) {
        return new_fsc(1, 2, 2, {1.0}, {1.0 - eps, eps, eps, 1.0 - eps},
                       no_constraint());
      },
      py::arg("eps"));

  m.def(
      "context_counts",
      [](const ChannelSpec& ch, int m, int u) {
        ContextSpace space(ch, m, u);
        return py::make_tuple(space.size(), space.admissible_count());
      },
      py::arg("channel"), py::arg("m"), py::arg("u"),
      "Total and admissible context counts for window length m and delay u");

  m.def(
      "grid_size",
      [](const ChannelSpec& ch, int m, int u, double delta, long budget) {
        ContextSpace space(ch, m, u);
        return SimplexGrid(space, delta, budget).num_points();
      },
      py::arg("channel"), py::arg("m"), py::arg("u"), py::arg("delta"),
      py::arg("budget") = 10000000L);

  m.def(
      "quantize",
      [](const ChannelSpec& ch, int m, int u, const AlphaVector& alpha,
         double delta) {
        ContextSpace space(ch, m, u);
        return quantize(alpha, space, delta);
      },
      py::arg("channel"), py::arg("m"), py::arg("u"), py::arg("alpha"),
      py::arg("delta"));

  py::class_<DpResult>(m, "DpResult")
      .def_readonly("sigma", &DpResult::sigma)
      .def_readonly("span", &DpResult::span)
      .def_readonly("num_grid_points", &DpResult::num_grid_points)
      .def_readonly("num_candidates", &DpResult::num_candidates);

  m.def(
      "value_iteration",
      [](const ChannelSpec& ch, int u, int v, int m, double delta, double eta,
         int n, int threads) {
        DpOptions opt;
        opt.num_threads = threads;
        return value_iteration(ch, u, v, m, delta, eta, n, opt);
      },
      py::arg("channel"), py::arg("u"), py::arg("v"), py::arg("m"),
      py::arg("delta"), py::arg("eta"), py::arg("n"), py::arg("threads") = 1);

  py::class_<RateEstimate>(m, "RateEstimate")
      .def_readonly("mean", &RateEstimate::mean)
      .def_readonly("std_error", &RateEstimate::std_error)
      .def_readonly("samples", &RateEstimate::samples)
      .def_readonly("burn_in", &RateEstimate::burn_in)
      .def_readonly("seed", &RateEstimate::seed);

  m.def(
      "directed_info_rate",
      [](const ChannelSpec& ch, int m, int u, int v,
         const std::vector<double>& rows, long num_samples, long burn_in,
         std::uint64_t seed) {
        PolicyRows pr;
        pr.p = rows;
        FixedSource src(ch, m, u, std::move(pr));
        return directed_info_rate(ch, src, u, v, num_samples, burn_in, seed);
      },
      py::arg("channel"), py::arg("m"), py::arg("u"), py::arg("v"),
      py::arg("rows"), py::arg("num_samples"), py::arg("burn_in") = 1000L,
      py::arg("seed") = 1,
      "Simulation estimate of the rate for a fixed contextual source; rows is "
      "flat [context * num_inputs + x]");

  m.def(
      "exact_directed_info",
      [](const ChannelSpec& ch, int m, int u, int v,
         const std::vector<double>& rows, int horizon) {
        PolicyRows pr;
        pr.p = rows;
        FixedSource src(ch, m, u, std::move(pr));
        return exact_directed_info(ch, src, u, v, horizon);
      },
      py::arg("channel"), py::arg("m"), py::arg("u"), py::arg("v"),
      py::arg("rows"), py::arg("horizon"));

  m.def(
      "markov_lower_bound",
      [](const ChannelSpec& ch, int order, double step, long num_samples,
         long burn_in, std::uint64_t seed) {
        const LowerBoundResult r =
            markov_lower_bound(ch, order, step, num_samples, burn_in, seed);
        return py::make_tuple(r.estimate, r.rows);
      },
      py::arg("channel"), py::arg("order"), py::arg("step"),
      py::arg("num_samples"), py::arg("burn_in") = 1000L, py::arg("seed") = 1);

  m.def(
      "run_oracle_checks",
      [](std::uint64_t seed, bool corrupt) {
        const OracleReport rep = run_oracle_checks(seed, corrupt);
        py::list items;
        for (const auto& it : rep.items)
          items.append(py::make_tuple(it.name, it.max_dev, it.tol, it.pass));
        return py::make_tuple(rep.all_pass(), items);
      },
      py::arg("seed") = 1, py::arg("corrupt") = false);

  m.def("parse_config", [](const std::string& text) {
    const ExperimentConfig cfg = parse_config_text(text);
    return serialize_config(cfg);
  });
}
