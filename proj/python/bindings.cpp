#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "bayesmc/bayesopt.hpp"
#include "bayesmc/errors.hpp"
#include "bayesmc/gp.hpp"
#include "bayesmc/harness.hpp"
#include "bayesmc/io.hpp"
#include "bayesmc/model.hpp"
#include "bayesmc/objective.hpp"
#include "bayesmc/policy.hpp"
#include "bayesmc/rng.hpp"
#include "bayesmc/samplers.hpp"

namespace py = pybind11;
using namespace bayesmc;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw InvalidArgument("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

// JSON crosses the boundary as text; the Python layer wraps it with json.loads.
nlohmann::json parse(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("invalid JSON: ") + e.what());
  }
}

py::dict trace_dict(const SamplingTrace& t) {
  py::dict d;
  d["energies"] = to_array(t.energies);
  d["accepted"] = to_array(t.accepted);
  d["k_used"] = to_array(t.k_used);
  d["gamma_used"] = to_array(t.gamma_used);
  d["acceptance_rate"] = t.energies.empty() ? 0.0 : t.acceptance_rate();
  return d;
}

}  // namespace

PYBIND11_MODULE(_bayesmc, m) {
  m.doc() = "Bayesian-optimised adaptive MCMC for constrained Boltzmann machines";
  m.attr("__version__") = BAYESMC_VERSION;

  auto error = py::register_exception<Error>(m, "BayesmcError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<InfeasibleWalk>(m, "InfeasibleWalk", error);
  py::register_exception<TraceTooShort>(m, "TraceTooShort", error);
  py::register_exception<StateSpaceTooLarge>(m, "StateSpaceTooLarge", error);
  py::register_exception<NumericalError>(m, "NumericalError", error);

  // -- rng -------------------------------------------------------------------
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_property_readonly("seed", &Rng::seed)
      .def("split", py::overload_cast<std::string_view>(&Rng::split, py::const_), py::arg("tag"))
      .def("split_index", py::overload_cast<std::uint64_t>(&Rng::split, py::const_), py::arg("stream"))
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal);
  m.def("derive_seed", py::overload_cast<std::uint64_t, std::string_view>(&derive_seed),
        py::arg("seed"), py::arg("tag"));

  // -- model -----------------------------------------------------------------
  py::class_<BoltzmannModel>(m, "BoltzmannModel")
      .def_property_readonly("num_sites", &BoltzmannModel::num_sites)
      .def_property_readonly("num_edges", &BoltzmannModel::num_edges)
      .def_property_readonly("beta", &BoltzmannModel::beta)
      .def_property_readonly("topology",
                             [](const BoltzmannModel& self) { return std::string(to_string(self.topology())); })
      .def("coupling", &BoltzmannModel::coupling, py::arg("i"), py::arg("j"))
      .def("with_beta", &BoltzmannModel::with_beta, py::arg("beta"))
      .def("energy", [](const BoltzmannModel& self, const Bits& bits) { return energy(self, bits); },
           py::arg("bits"))
      .def("to_json", [](const BoltzmannModel& self) { return model_to_json(self).dump(); })
      .def_static("from_json", [](const std::string& text) { return model_from_json(parse(text)); },
                  py::arg("text"));
  m.def("build_grid2d", &build_grid2d, py::arg("width"), py::arg("height"), py::arg("coupling"),
        py::arg("bias"), py::arg("beta"));
  m.def("build_cube3d", &build_cube3d, py::arg("side"), py::arg("beta"), py::arg("seed"));
  m.def("build_rbm", &build_rbm, py::arg("num_visible"), py::arg("num_hidden"), py::arg("beta"),
        py::arg("seed"));

  py::class_<ConstraintSpec>(m, "ConstraintSpec")
      .def_static("ones_count", &ConstraintSpec::ones_count, py::arg("num_sites"), py::arg("n"))
      .def_readonly("hamming_distance", &ConstraintSpec::hamming_distance)
      .def("satisfied_by", [](const ConstraintSpec& self, const Bits& bits) { return satisfies_constraint(bits, self); },
           py::arg("bits"));

  py::class_<BitState>(m, "BitState")
      .def(py::init<const BoltzmannModel&, Bits>(), py::arg("model"), py::arg("bits"))
      .def_property_readonly("bits", &BitState::bits)
      .def_property_readonly("energy", &BitState::energy)
      .def("__len__", &BitState::size);

  // -- samplers --------------------------------------------------------------
  py::class_<SamplerParams>(m, "SamplerParams")
      .def(py::init([](int k, double gamma) { return SamplerParams{k, gamma}; }), py::arg("k"),
           py::arg("gamma"))
      .def_readwrite("k", &SamplerParams::saw_length)
      .def_readwrite("gamma", &SamplerParams::energy_bias)
      .def("__eq__", [](const SamplerParams& a, const SamplerParams& b) { return a == b; })
      .def("__repr__", [](const SamplerParams& p) {
        return "SamplerParams(k=" + std::to_string(p.saw_length) + ", gamma=" + format_double(p.energy_bias) + ")";
      });
  py::class_<ParamBox>(m, "ParamBox")
      .def(py::init([](int k_max, double gamma_max) { return ParamBox{k_max, gamma_max}; }),
           py::arg("k_max"), py::arg("gamma_max"))
      .def_readwrite("k_max", &ParamBox::k_max)
      .def_readwrite("gamma_max", &ParamBox::gamma_max)
      .def("contains", &ParamBox::contains, py::arg("params"));

  m.def("kawasaki_step",
        [](const BoltzmannModel& model, const ConstraintSpec& spec, BitState& state, Rng& rng) {
          return kawasaki_step(model, spec, state, rng).accepted;
        },
        py::arg("model"), py::arg("spec"), py::arg("state"), py::arg("rng"),
        "Advance `state` in place; returns whether the move was accepted.");
  m.def("im_step",
        [](const BoltzmannModel& model, const ConstraintSpec& spec, BitState& state,
           const SamplerParams& params, Rng& rng) { return im_step(model, spec, state, params, rng).accepted; },
        py::arg("model"), py::arg("spec"), py::arg("state"), py::arg("params"), py::arg("rng"),
        "Advance `state` in place; returns whether the move was accepted.");
  m.def("im_propose",
        [](const BoltzmannModel& model, const ConstraintSpec& spec, const BitState& state,
           const SamplerParams& params, Rng& rng) {
          auto out = im_propose(model, spec, state, params, rng);
          py::list walk;
          for (const auto& e : out.walk) walk.append(py::make_tuple(e.down_site, e.up_site));
          return py::make_tuple(out.proposal, out.log_q_forward, out.log_q_reverse, walk);
        },
        py::arg("model"), py::arg("spec"), py::arg("state"), py::arg("params"), py::arg("rng"),
        "Returns (proposal, log_q_forward, log_q_reverse, [(down, up), ...]).");

  // -- objective -------------------------------------------------------------
  m.def("autocorr", [](py::array_t<double> x, long lag) { return autocorr(to_vector(x), lag); },
        py::arg("trace"), py::arg("lag"));
  m.def("autocorr_curve",
        [](py::array_t<double> x, std::size_t max_lag) { return to_array(autocorr_curve(to_vector(x), max_lag)); },
        py::arg("trace"), py::arg("max_lag"));
  m.def("acf_area_score", [](py::array_t<double> x, long l_max) { return acf_area_score(to_vector(x), l_max); },
        py::arg("trace"), py::arg("l_max"));
  m.def("performance_criterion", [](py::array_t<double> x) { return performance_criterion(to_vector(x)).value; },
        py::arg("trace"));

  // -- gp --------------------------------------------------------------------
  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init([](Eigen::VectorXd ls, double noise) { return Hyperparams{std::move(ls), noise}; }),
           py::arg("lengthscales"), py::arg("noise_std"))
      .def_static("defaults", &Hyperparams::defaults, py::arg("dim"))
      .def_readwrite("lengthscales", &Hyperparams::lengthscales)
      .def_readwrite("noise_std", &Hyperparams::noise_std);
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def("add", &Dataset::add, py::arg("location"), py::arg("value"))
      .def("__len__", &Dataset::size);
  py::class_<GPPosterior>(m, "GPPosterior")
      .def(py::init<Dataset, Hyperparams>(), py::arg("data"), py::arg("hyper"))
      .def("predict",
           [](const GPPosterior& self, const Eigen::VectorXd& x) {
             const auto p = self.predict(x);
             return py::make_tuple(p.mean, p.variance);
           },
           py::arg("theta"), "Returns (mean, variance).")
      .def("log_marginal_likelihood", &GPPosterior::log_marginal_likelihood)
      .def_property_readonly("hyper", &GPPosterior::hyper)
      .def_property_readonly("jitter", &GPPosterior::jitter)
      .def("to_json", [](const GPPosterior& self) { return gp_to_json(self).dump(); })
      .def_static("from_json", [](const std::string& text) { return gp_from_json(parse(text)); },
                  py::arg("text"));
  m.def("fit_hyperparams",
        [](const Dataset& data, Rng& rng) { return fit_hyperparams(data, HyperBounds{}, rng); },
        py::arg("data"), py::arg("rng"));

  // -- bayesopt --------------------------------------------------------------
  m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("std"), py::arg("best"),
        py::arg("xi"));
  m.def("direct_maximize",
        [](const std::function<double(const Eigen::VectorXd&)>& f, std::size_t dim, std::size_t budget) {
          const auto r = direct_maximize(f, dim, budget);
          return py::make_tuple(r.point, r.value, r.evaluations);
        },
        py::arg("f"), py::arg("dim"), py::arg("budget"),
        "Maximise f over [0, 1]^dim; returns (point, value, evaluations).");
  py::class_<AdaptationConfig>(m, "AdaptationConfig")
      .def(py::init<>())
      .def_readwrite("num_adaptations", &AdaptationConfig::num_adaptations)
      .def_readwrite("steps_per_adaptation", &AdaptationConfig::steps_per_adaptation)
      .def_readwrite("init_design_size", &AdaptationConfig::init_design_size)
      .def_readwrite("param_box", &AdaptationConfig::param_box)
      .def_readwrite("ei_exploration", &AdaptationConfig::ei_exploration)
      .def_readwrite("direct_budget", &AdaptationConfig::direct_budget)
      .def_readwrite("refit_every", &AdaptationConfig::refit_every);
  m.def("adapt",
        [](const BoltzmannModel& model, const ConstraintSpec& spec, const AdaptationConfig& config,
           const BitState& start, Rng& rng) {
          const auto rec = adapt(model, spec, config, start, rng);
          py::list history;
          for (const auto& s : rec.history) {
            py::dict d;
            d["params"] = s.params;
            d["score"] = s.score;
            d["accept_rate"] = s.accept_rate;
            d["acquisition"] = s.acquisition ? py::cast(*s.acquisition) : py::none();
            history.append(d);
          }
          py::dict out;
          out["history"] = history;
          out["gp"] = *rec.gp_snapshot;
          out["final_state"] = *rec.final_state;
          return out;
        },
        py::arg("model"), py::arg("spec"), py::arg("config"), py::arg("start"), py::arg("rng"));

  // -- policy ----------------------------------------------------------------
  py::class_<MixturePolicy>(m, "MixturePolicy")
      .def_readonly("support", &MixturePolicy::support)
      .def_readonly("weights", &MixturePolicy::weights)
      .def_readonly("draws", &MixturePolicy::draws);
  m.def("boltzmann_policy",
        [](const GPPosterior& gp, const ParamBox& box, std::size_t grid_gamma, std::size_t draws, Rng& rng) {
          auto grid = build_boltzmann_policy(gp, box, grid_gamma);
          return draw_policy(std::move(grid.support), std::move(grid.weights), draws, rng);
        },
        py::arg("gp"), py::arg("box"), py::arg("grid_gamma") = kDefaultGammaGrid,
        py::arg("draws") = kDefaultPolicyDraws, py::arg("rng"));
  m.def("sampling_phase",
        [](const BoltzmannModel& model, const ConstraintSpec& spec, const MixturePolicy& policy,
           BitState& state, std::size_t steps, Rng& rng) {
          return trace_dict(sampling_phase(model, spec, policy, state, steps, rng));
        },
        py::arg("model"), py::arg("spec"), py::arg("policy"), py::arg("state"), py::arg("steps"),
        py::arg("rng"));

  // -- harness ---------------------------------------------------------------
  m.def("exact_distribution",
        [](const BoltzmannModel& model, const ConstraintSpec& spec) {
          const auto d = exact_distribution(model, spec);
          return py::make_tuple(to_array(d.keys()), to_array(d.probs()));
        },
        py::arg("model"), py::arg("spec"), "Returns (packed state keys, probabilities).");
  m.def("pack_state", [](const Bits& bits) { return pack_state(bits); }, py::arg("bits"));
  m.def("chain_vs_oracle",
        [](const BoltzmannModel& model, const ConstraintSpec& spec, std::optional<SamplerParams> params,
           const BitState& start, std::size_t steps, std::size_t burn_in, Rng& rng) {
          Kernel kernel;
          if (params) {
            kernel = [&](BitState& s) { im_step(model, spec, s, *params, rng); };
          } else {
            kernel = [&](BitState& s) { kawasaki_step(model, spec, s, rng); };
          }
          py::gil_scoped_release release;
          return chain_vs_oracle(model, spec, kernel, start, steps, burn_in);
        },
        py::arg("model"), py::arg("spec"), py::arg("params"), py::arg("start"), py::arg("steps"),
        py::arg("burn_in"), py::arg("rng"),
        "Total variation to the exact distribution; params=None runs the Kawasaki sampler.");

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("num_runs", &ExperimentConfig::num_runs)
      .def_readwrite("steps_per_run", &ExperimentConfig::steps_per_run)
      .def_readwrite("burn_in", &ExperimentConfig::burn_in)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("max_lag", &ExperimentConfig::max_lag)
      .def("validate", &ExperimentConfig::validate)
      .def("to_json", [](const ExperimentConfig& self) { return config_to_json(self).dump(); })
      .def_static("from_json", [](const std::string& text) { return config_from_json(parse(text)); },
                  py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("preset_path", &preset_path, py::arg("name"));
  m.def("list_presets", &list_presets);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("arm", &RunRecord::arm)
      .def_readonly("run", &RunRecord::run)
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("wall_seconds", &RunRecord::wall_seconds)
      .def_property_readonly("trace", [](const RunRecord& self) { return trace_dict(self.trace); });
  m.def("run_experiment",
        [](const ExperimentConfig& config, std::size_t jobs) {
          py::gil_scoped_release release;
          return run_experiment(config, jobs);
        },
        py::arg("config"), py::arg("jobs") = 1);
  m.def("write_experiment", &write_experiment, py::arg("out_dir"), py::arg("config"), py::arg("records"));
  m.def("experiment_manifest",
        [](const ExperimentConfig& config, const std::vector<RunRecord>& records) {
          return experiment_manifest(config, records).dump();
        },
        py::arg("config"), py::arg("records") = std::vector<RunRecord>{});
}
