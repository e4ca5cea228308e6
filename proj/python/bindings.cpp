#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shiftbai/config.hpp"
#include "shiftbai/diagnostics.hpp"
#include "shiftbai/env.hpp"
#include "shiftbai/errors.hpp"
#include "shiftbai/harness.hpp"
#include "shiftbai/ols.hpp"
#include "shiftbai/ols_separated.hpp"
#include "shiftbai/policies.hpp"
#include "shiftbai/rng.hpp"
#include "shiftbai/stats.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace shiftbai;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Best-arm identification under global environment shifts";

  py::register_exception<config_error>(m, "ConfigError");
  py::register_exception<disconnected_design_error>(m, "DisconnectedDesignError");
  py::register_exception<singular_gram_error>(m, "SingularGramError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("normal", &Rng::normal)
      .def("uniform_int", &Rng::uniform_int, py::arg("lo"), py::arg("hi"));
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("tag"), py::arg("index") = 0);

  py::class_<ShiftSpec>(m, "ShiftSpec")
      .def_static("zero", &ShiftSpec::zero)
      .def_static("uniform", &ShiftSpec::uniform, py::arg("lo"), py::arg("hi"))
      .def_static("fixed", &ShiftSpec::fixed, py::arg("values"));

  py::class_<ChangePointSpec>(m, "ChangePointSpec")
      .def_static("uniform", &ChangePointSpec::uniform, py::arg("cp_min"), py::arg("cp_max"))
      .def_static("fixed", &ChangePointSpec::fixed, py::arg("lengths"));

  py::class_<BanditInstance>(m, "BanditInstance")
      .def(py::init([](std::vector<double> means, double noise_sd, ShiftSpec shift,
                       ChangePointSpec cps) {
             BanditInstance b;
             b.arm_means = std::move(means);
             b.noise_sd = noise_sd;
             b.shift = std::move(shift);
             b.changepoints = std::move(cps);
             return b;
           }),
           py::arg("arm_means"), py::arg("noise_sd"), py::arg("shift") = ShiftSpec::zero(),
           py::arg("changepoints") = ChangePointSpec::uniform(2, 2))
      .def_readwrite("arm_means", &BanditInstance::arm_means)
      .def_readwrite("noise_sd", &BanditInstance::noise_sd)
      .def_property_readonly("num_arms", &BanditInstance::num_arms);

  py::enum_<Configuration>(m, "Configuration")
      .value("MDM", Configuration::MDM)
      .value("SC", Configuration::SC);

  py::class_<InstanceConfig>(m, "InstanceConfig")
      .def(py::init<>())
      .def_readwrite("configuration", &InstanceConfig::configuration)
      .def_readwrite("K", &InstanceConfig::K)
      .def_readwrite("delta", &InstanceConfig::delta)
      .def_readwrite("sigma", &InstanceConfig::sigma)
      .def_readwrite("shift", &InstanceConfig::shift)
      .def_readwrite("changepoints", &InstanceConfig::changepoints);

  m.def("make_instance", &make_instance, py::arg("config"));
  m.def("true_best", &true_best, py::arg("instance"));

  py::class_<TraceEntry>(m, "TraceEntry")
      .def(py::init([](long t, int env, int arm, double reward) {
             return TraceEntry{t, env, arm, reward};
           }),
           py::arg("t"), py::arg("env"), py::arg("arm"), py::arg("reward"))
      .def_readonly("t", &TraceEntry::t)
      .def_readonly("env", &TraceEntry::env)
      .def_readonly("arm", &TraceEntry::arm)
      .def_readonly("reward", &TraceEntry::reward)
      .def("__repr__", [](const TraceEntry& e) {
        return "TraceEntry(t=" + std::to_string(e.t) + ", env=" + std::to_string(e.env) +
               ", arm=" + std::to_string(e.arm) + ", reward=" + std::to_string(e.reward) + ")";
      });

  py::class_<ObservationStream>(m, "ObservationStream")
      .def(py::init<BanditInstance, std::uint64_t>(), py::arg("instance"),
           py::arg("replication_seed"))
      .def("env_of", &ObservationStream::env_of, py::arg("t"))
      .def("observe", &ObservationStream::observe, py::arg("arm"), py::arg("t"))
      .def("shift_of_env", &ObservationStream::shift_of_env, py::arg("env_ordinal"))
      .def("pulls", &ObservationStream::pulls, py::arg("arm"))
      .def_property_readonly("trace", &ObservationStream::trace)
      .def_property_readonly("realized_shifts", &ObservationStream::realized_shifts)
      .def_property_readonly("realized_changepoints", &ObservationStream::realized_changepoints);

  py::class_<SufficientStats>(m, "SufficientStats")
      .def(py::init<int>(), py::arg("num_arms"))
      .def("record", &SufficientStats::record, py::arg("env_ordinal"), py::arg("arm"),
           py::arg("reward"))
      .def("count", &SufficientStats::count, py::arg("arm"), py::arg("env_ordinal"))
      .def("cell_sum", &SufficientStats::cell_sum, py::arg("arm"), py::arg("env_ordinal"))
      .def("arm_count", &SufficientStats::arm_count, py::arg("arm"))
      .def("arm_total", &SufficientStats::arm_total, py::arg("arm"))
      .def("env_count", &SufficientStats::env_count, py::arg("env_ordinal"))
      .def("env_total", &SufficientStats::env_total, py::arg("env_ordinal"))
      .def("arm_mean", &SufficientStats::arm_mean, py::arg("arm"))
      .def("is_connected", &SufficientStats::is_connected)
      .def_property_readonly("num_arms", &SufficientStats::num_arms)
      .def_property_readonly("num_envs", &SufficientStats::num_envs)
      .def_property_readonly("total_count", &SufficientStats::total_count)
      .def_property_readonly("sq_sum", &SufficientStats::sq_sum);

  py::class_<OlsFit>(m, "OlsFit")
      .def_readonly("mu_hat", &OlsFit::mu_hat)
      .def_readonly("s_hat", &OlsFit::s_hat)
      .def_readonly("arm_cov_unit", &OlsFit::arm_cov_unit)
      .def_readonly("theta_cov_unit", &OlsFit::theta_cov_unit)
      .def_readonly("sigma2_hat", &OlsFit::sigma2_hat)
      .def_readonly("rss", &OlsFit::rss)
      .def_readonly("dof", &OlsFit::dof);

  m.def("fit_ols", &fit_ols, py::arg("stats"), py::arg("known_sigma2") = std::nullopt,
        py::arg("with_full_covariance") = true);
  m.def("mean_covariance", &mean_covariance, py::arg("fit"), py::arg("sigma2"));
  m.def("ucb", &ucb, py::arg("fit"), py::arg("cov"), py::arg("arm"), py::arg("t"),
        py::arg("per_arm_counts"));

  py::class_<SeparatedFit>(m, "SeparatedFit")
      .def_readonly("mu_hat", &SeparatedFit::mu_hat)
      .def_readonly("s_hat", &SeparatedFit::s_hat);
  m.def("fit_ols_separated", &fit_ols_separated, py::arg("log"), py::arg("num_arms"));
  m.def("mean_covariance_hat_form", &mean_covariance_hat_form, py::arg("log"),
        py::arg("num_arms"), py::arg("sigma2"));

  py::enum_<SigmaMode>(m, "SigmaMode")
      .value("Known", SigmaMode::Known)
      .value("Estimated", SigmaMode::Estimated);

  py::class_<PolicySpec>(m, "PolicySpec")
      .def(py::init([](const std::string& kind, int n0, SigmaMode mode) {
             PolicySpec spec = parse_policy_kind(kind);
             spec.n0 = n0;
             spec.sigma_mode = mode;
             return spec;
           }),
           py::arg("kind"), py::arg("n0") = 6, py::arg("sigma_mode") = SigmaMode::Estimated)
      .def_property_readonly("kind", [](const PolicySpec& s) { return policy_kind_string(s); })
      .def_readwrite("n0", &PolicySpec::n0)
      .def_readwrite("sigma_mode", &PolicySpec::sigma_mode);

  m.def("list_policy_kinds", &list_policy_kinds);
  m.def("select_best", &select_best, py::arg("fit"), py::arg("rng"));
  m.def("select_best_sample_mean", &select_best_sample_mean, py::arg("stats"), py::arg("rng"));

  py::enum_<Scenario>(m, "Scenario")
      .value("WorstCase", Scenario::WorstCase)
      .value("CannotSampleAllArms", Scenario::CannotSampleAllArms)
      .value("Sample1To10PerArm", Scenario::Sample1To10PerArm)
      .value("General", Scenario::General)
      .value("Custom", Scenario::Custom);

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def_static("named", &ScenarioSpec::named, py::arg("scenario"))
      .def_static("custom", &ScenarioSpec::custom, py::arg("cp_min"), py::arg("cp_max"))
      .def("__repr__", [](const ScenarioSpec& s) { return scenario_string(s); });
  m.def("scenario_bounds", &scenario_bounds, py::arg("scenario"), py::arg("K"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("configuration", &ExperimentConfig::configuration)
      .def_readwrite("K", &ExperimentConfig::K)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("shift", &ExperimentConfig::shift)
      .def_readwrite("scenario", &ExperimentConfig::scenario)
      .def_readwrite("budgets", &ExperimentConfig::budgets)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("base_seed", &ExperimentConfig::base_seed)
      .def_readwrite("policies", &ExperimentConfig::policies);

  m.def("parse_experiment_config", &parse_experiment_config, py::arg("json_text"));
  m.def("load_experiment_config", &load_experiment_config, py::arg("path"));
  m.def("experiment_config_to_json", &experiment_config_to_json, py::arg("config"));

  py::class_<ReplicationResult>(m, "ReplicationResult")
      .def_readonly("recommendation", &ReplicationResult::recommendation)
      .def_readonly("incorrect", &ReplicationResult::incorrect)
      .def_readonly("opportunity_cost", &ReplicationResult::opportunity_cost)
      .def_readonly("environments_seen", &ReplicationResult::environments_seen)
      .def_readonly("warnings", &ReplicationResult::warnings)
      .def_readonly("trace", &ReplicationResult::trace)
      .def_readonly("realized_shifts", &ReplicationResult::realized_shifts)
      .def_readonly("realized_changepoints", &ReplicationResult::realized_changepoints);

  py::class_<SigmaConfig>(m, "SigmaConfig")
      .def(py::init<>())
      .def_readwrite("mode", &SigmaConfig::mode)
      .def_readwrite("known_sigma2", &SigmaConfig::known_sigma2)
      .def_readwrite("prior_sigma2", &SigmaConfig::prior_sigma2);

  m.def("run_policy", &run_policy, py::arg("instance"), py::arg("policy"), py::arg("sigma"),
        py::arg("replication_seed"), py::arg("budgets"), py::arg("keep_trace") = false);
  m.def("run_replication", &run_replication, py::arg("config"), py::arg("policy"),
        py::arg("rep_index"), py::arg("keep_trace") = false);

  py::class_<MetricRow>(m, "MetricRow")
      .def_readonly("policy", &MetricRow::policy)
      .def_readonly("budget", &MetricRow::budget)
      .def_readonly("replications", &MetricRow::replications)
      .def_readonly("pics", &MetricRow::pics)
      .def_readonly("pics_stderr", &MetricRow::pics_stderr)
      .def_readonly("eoc", &MetricRow::eoc)
      .def_readonly("eoc_stderr", &MetricRow::eoc_stderr);

  py::class_<MetricSeries>(m, "MetricSeries")
      .def_readonly("config_name", &MetricSeries::config_name)
      .def_readonly("scenario_name", &MetricSeries::scenario_name)
      .def_readonly("base_seed", &MetricSeries::base_seed)
      .def_readonly("rows", &MetricSeries::rows);

  py::class_<PairedDiff>(m, "PairedDiff")
      .def_readonly("diff", &PairedDiff::diff)
      .def_readonly("paired_stderr", &PairedDiff::paired_stderr)
      .def_readonly("combined_stderr", &PairedDiff::combined_stderr);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("series", &ExperimentResult::series)
      .def_readonly("sr_fallback_replications", &ExperimentResult::sr_fallback_replications)
      .def("losses", [](const ExperimentResult& r, std::size_t policy, std::size_t budget) {
        return r.incorrect.at(policy).at(budget);
      }, py::arg("policy_idx"), py::arg("budget_idx"));

  m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("paired_pics_diff", &paired_pics_diff, py::arg("result"), py::arg("policy_a"),
        py::arg("policy_b"), py::arg("budget_idx"));
  m.def("write_csv", &write_csv, py::arg("series"), py::arg("path"));

  py::class_<MomentReport>(m, "MomentReport")
      .def_readonly("param_names", &MomentReport::param_names)
      .def_readonly("truth", &MomentReport::truth)
      .def_readonly("mc_mean", &MomentReport::mc_mean)
      .def_readonly("mc_cov", &MomentReport::mc_cov)
      .def_readonly("analytic_cov", &MomentReport::analytic_cov)
      .def_readonly("max_rel_cov_err", &MomentReport::max_rel_cov_err)
      .def_readonly("max_bias_in_se", &MomentReport::max_bias_in_se)
      .def_readonly("sigma2_mc_mean", &MomentReport::sigma2_mc_mean)
      .def_readonly("sigma2_truth", &MomentReport::sigma2_truth)
      .def_readonly("sigma2_bias_in_se", &MomentReport::sigma2_bias_in_se)
      .def_readonly("replications", &MomentReport::replications)
      .def_readonly("seed", &MomentReport::seed);

  m.def("estimator_moments", &estimator_moments, py::arg("counts"), py::arg("mu"), py::arg("s"),
        py::arg("sigma"), py::arg("replications"), py::arg("seed"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<ConsistencyProbeConfig>(m, "ConsistencyProbeConfig")
      .def(py::init<>())
      .def_readwrite("delta", &ConsistencyProbeConfig::delta)
      .def_readwrite("sigma", &ConsistencyProbeConfig::sigma)
      .def_readwrite("shift", &ConsistencyProbeConfig::shift)
      .def_readwrite("cp_min", &ConsistencyProbeConfig::cp_min)
      .def_readwrite("cp_max", &ConsistencyProbeConfig::cp_max)
      .def_readwrite("n_grid", &ConsistencyProbeConfig::n_grid)
      .def_readwrite("replications", &ConsistencyProbeConfig::replications)
      .def_readwrite("seed", &ConsistencyProbeConfig::seed);

  py::class_<ConsistencyReport>(m, "ConsistencyReport")
      .def_readonly("n_grid", &ConsistencyReport::n_grid)
      .def_readonly("var_mu1", &ConsistencyReport::var_mu1)
      .def_readonly("var_mu_diff", &ConsistencyReport::var_mu_diff)
      .def_readonly("replications", &ConsistencyReport::replications)
      .def_readonly("seed", &ConsistencyReport::seed);

  m.def("consistency_probe", &consistency_probe, py::arg("config"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<ConjectureProbeConfig>(m, "ConjectureProbeConfig")
      .def(py::init<>())
      .def_readwrite("K", &ConjectureProbeConfig::K)
      .def_readwrite("env_length", &ConjectureProbeConfig::env_length)
      .def_readwrite("J", &ConjectureProbeConfig::J)
      .def_readwrite("sigma", &ConjectureProbeConfig::sigma)
      .def_readwrite("replications", &ConjectureProbeConfig::replications)
      .def_readwrite("seed", &ConjectureProbeConfig::seed);

  py::class_<ConjecturePair>(m, "ConjecturePair")
      .def_readonly("j", &ConjecturePair::j)
      .def_readonly("m", &ConjecturePair::m)
      .def_readonly("mc_cov", &ConjecturePair::mc_cov)
      .def_readonly("analytic_cov", &ConjecturePair::analytic_cov);

  py::class_<ConjectureReport>(m, "ConjectureReport")
      .def_readonly("conjecture_value", &ConjectureReport::conjecture_value)
      .def_readonly("pairs", &ConjectureReport::pairs)
      .def_readonly("replications", &ConjectureReport::replications)
      .def_readonly("seed", &ConjectureReport::seed);

  m.def("covariance_conjecture_probe", &covariance_conjecture_probe, py::arg("config"),
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

  m.def("bias_decomposition", &bias_decomposition, py::arg("stats"), py::arg("shifts"),
        py::arg("arm_a"), py::arg("arm_b"));

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
