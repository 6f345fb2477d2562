#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <optional>

#include "jhgp/data_model.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/forecast.hpp"
#include "jhgp/kernels.hpp"
#include "jhgp/metrics.hpp"
#include "jhgp/persistence.hpp"
#include "jhgp/priors.hpp"
#include "jhgp/sampler.hpp"
#include "jhgp/simulate.hpp"
#include "jhgp/survival.hpp"

namespace py = pybind11;
using namespace jhgp;

namespace {

py::dict summary_row(const SummaryRow& r) {
  py::dict d;
  d["name"] = r.name;
  d["mean"] = r.mean;
  d["sd"] = r.sd;
  d["q025"] = r.q025;
  d["q975"] = r.q975;
  return d;
}

py::dict truth_columns(const SimTruth& t) {
  std::vector<std::string> id;
  std::vector<Tick> tick;
  std::vector<double> mu_y, mu_h, psi, lambda, y_true, h_true;
  for (const auto& r : t.rows) {
    id.push_back(r.subject_id);
    tick.push_back(r.tick);
    mu_y.push_back(r.mu_y);
    mu_h.push_back(r.mu_h);
    psi.push_back(r.psi);
    lambda.push_back(r.lambda);
    y_true.push_back(r.y_true);
    h_true.push_back(r.h_true);
  }
  py::dict d;
  d["subject_id"] = id;
  d["tick"] = py::array(py::cast(tick));
  d["mu_y"] = py::array(py::cast(mu_y));
  d["mu_h"] = py::array(py::cast(mu_h));
  d["psi"] = py::array(py::cast(psi));
  d["lambda"] = py::array(py::cast(lambda));
  d["y_true"] = py::array(py::cast(y_true));
  d["h_true"] = py::array(py::cast(h_true));
  return d;
}

py::dict forecast_dict(const ForecastResult& f) {
  py::dict d;
  d["subject_id"] = f.subject_id;
  d["tick"] = py::array(py::cast(f.ticks));
  auto put = [&](const char* k, const std::vector<double>& v, bool present) {
    d[k] = present ? py::object(py::array(py::cast(v))) : py::object(py::none());
  };
  put("y_mean", f.y_mean, f.has_y);
  put("y_lo", f.y_lo, f.has_y);
  put("y_hi", f.y_hi, f.has_y);
  put("y_sd", f.y_sd, f.has_y);
  put("lambda_mean", f.lambda_mean, f.has_lambda);
  put("lambda_lo", f.lambda_lo, f.has_lambda);
  put("lambda_hi", f.lambda_hi, f.has_lambda);
  put("lambda_sd", f.lambda_sd, f.has_lambda);
  put("pop_mean", f.pop_mean, f.has_y);
  return d;
}

Eigen::MatrixXd draw_matrix(const PosteriorDraws& d) {
  const auto names = state_column_names(d.layout);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < d.size(); ++r) {
    const auto flat = flatten_state(d.states[r], d.layout);
    for (std::size_t c = 0; c < flat.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[c].second;
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_jhgp, m) {
  m.doc() = "Joint hierarchical Gaussian process models for longitudinal and recurrent-event data";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<SubjectSeries>(m, "Subject")
      .def(py::init([](std::string id, std::vector<Tick> obs_ticks, std::vector<double> y,
                       std::vector<Tick> event_ticks, std::vector<int> r) {
             SubjectSeries s{std::move(id), std::move(obs_ticks), std::move(y), std::move(event_ticks), std::move(r)};
             s.validate();
             return s;
           }),
           py::arg("subject_id"), py::arg("obs_ticks") = std::vector<Tick>{}, py::arg("y") = std::vector<double>{},
           py::arg("event_ticks") = std::vector<Tick>{}, py::arg("r") = std::vector<int>{})
      .def_readwrite("subject_id", &SubjectSeries::subject_id)
      .def_readwrite("obs_ticks", &SubjectSeries::obs_ticks)
      .def_readwrite("y", &SubjectSeries::y)
      .def_readwrite("event_ticks", &SubjectSeries::event_ticks)
      .def_readwrite("r", &SubjectSeries::r)
      .def("__repr__", [](const SubjectSeries& s) {
        return "<Subject " + s.subject_id + ": " + std::to_string(s.obs_ticks.size()) + " obs, " +
               std::to_string(s.event_ticks.size()) + " event slots>";
      });

  m.def("read_csv", &ingest_csv, py::arg("longitudinal"), py::arg("events") = std::filesystem::path{},
        "Subjects from a longitudinal CSV and an optional events CSV.");

  m.def(
      "simulate",
      [](const std::string& preset, std::uint64_t seed, std::optional<int> n_subjects, std::optional<double> phi,
         double noise_ratio, bool censor, double mask_fraction) {
        SimConfig c = SimConfig::preset(preset);
        if (n_subjects) c.n_subjects = *n_subjects;
        if (phi) c.phi = *phi;
        c.noise_ratio = noise_ratio;
        c.censor = censor;
        c.mask_fraction = mask_fraction;
        c.seed = seed;
        c.validate();
        Rng rng(seed);
        SimDataset ds = simulate_dataset(c, rng);
        py::dict out;
        out["truth"] = truth_columns(ds.truth);
        if (mask_fraction > 0.0) {
          MaskSplit split = mask_second_half(ds.data, mask_fraction, rng);
          out["data"] = split.train;
          out["heldout"] = split.heldout;
          out["masked_ids"] = split.masked_ids;
        } else {
          out["data"] = ds.data;
        }
        return out;
      },
      py::arg("preset") = "sim1", py::arg("seed") = 1, py::arg("n_subjects") = py::none(), py::arg("phi") = py::none(),
      py::arg("noise_ratio") = 0.0, py::arg("censor") = false, py::arg("mask_fraction") = 0.0,
      "Simulated dataset: {'data': [Subject], 'truth': columns, ...}.");

  py::class_<PosteriorDraws>(m, "Draws")
      .def("__len__", &PosteriorDraws::size)
      .def_property_readonly("columns", [](const PosteriorDraws& d) { return state_column_names(d.layout); })
      .def_property_readonly("subject_ids", [](const PosteriorDraws& d) { return d.layout.subject_ids; })
      .def_property_readonly("mode", [](const PosteriorDraws& d) { return to_string(d.layout.mode); })
      .def_property_readonly("chain", [](const PosteriorDraws& d) { return d.chain_of; })
      .def_property_readonly("iteration", [](const PosteriorDraws& d) { return d.iteration_of; })
      .def_property_readonly("acceptance",
                             [](const PosteriorDraws& d) {
                               std::vector<std::map<std::string, double>> out;
                               for (const auto& c : d.chains) out.push_back(c.acceptance);
                               return out;
                             })
      .def("matrix", &draw_matrix, "Draws x columns array in column order.")
      .def(
          "column",
          [](const PosteriorDraws& d, const std::string& name) {
            const auto names = state_column_names(d.layout);
            const auto it = std::find(names.begin(), names.end(), name);
            if (it == names.end()) throw py::key_error(name);
            return Eigen::VectorXd(draw_matrix(d).col(it - names.begin()));
          },
          py::arg("name"))
      .def("summary",
           [](const PosteriorDraws& d) {
             py::list out;
             for (const auto& r : summarize(d)) out.append(summary_row(r));
             return out;
           })
      .def(
          "save",
          [](const PosteriorDraws& d, const std::filesystem::path& dir, std::uint64_t seed) {
            RunManifest man;
            man.command = "fit";
            man.seed = seed;
            write_draws(d, dir, man);
            write_manifest(man, dir);
          },
          py::arg("directory"), py::arg("seed") = 0, "Writes draw CSVs and a manifest into an existing directory.")
      .def_static("load", &read_draws, py::arg("directory"));

  m.def(
      "fit",
      [](const std::vector<SubjectSeries>& data, std::uint64_t seed, const std::string& mode, int iterations,
         int burn_in, int thin, int chains, const std::string& psi_kernel, const std::string& psi_prior,
         bool keep_omega) {
        SamplerConfig c;
        c.mode = model_mode_from_string(mode);
        c.iterations = iterations;
        c.burn_in = burn_in;
        c.thin = thin;
        c.psi_kernel = KernelSpec::from_text(psi_kernel);
        if (psi_prior == "jeffreys") c.psi_hyper_prior = PsiHyperPrior::Jeffreys;
        else if (psi_prior == "uniform") c.psi_hyper_prior = PsiHyperPrior::Uniform;
        else throw UsageError("psi_prior: expected jeffreys or uniform");
        c.keep_omega = keep_omega;
        c.validate();
        py::gil_scoped_release release;
        return run_chains(data, c, seed, chains);
      },
      py::arg("data"), py::arg("seed"), py::arg("mode") = "jhgp", py::arg("iterations") = 10000,
      py::arg("burn_in") = 5000, py::arg("thin") = 5, py::arg("chains") = 1, py::arg("psi_kernel") = "ar1:-0.5",
      py::arg("psi_prior") = "jeffreys", py::arg("keep_omega") = false);

  m.def(
      "forecast",
      [](const PosteriorDraws& d, const SubjectSeries& s, const std::vector<Tick>& ticks, std::uint64_t seed,
         bool population_only) {
        return forecast_dict(population_only ? population_only_forecast(d, s, ticks, seed)
                                             : forecast_subject(d, s, ticks, seed));
      },
      py::arg("draws"), py::arg("subject"), py::arg("ticks"), py::arg("seed") = 1, py::arg("population_only") = false);

  m.def(
      "fitted_hazard",
      [](const PosteriorDraws& d, const std::vector<SubjectSeries>& data) {
        const FittedHazard h = fitted_hazard(d, data);
        py::dict out;
        out["subject_id"] = h.subject_id;
        out["tick"] = py::array(py::cast(h.tick));
        out["lambda_mean"] = py::array(py::cast(h.lambda_mean));
        out["r"] = py::array(py::cast(h.r));
        out["y"] = py::array(py::cast(h.y));
        return out;
      },
      py::arg("draws"), py::arg("data"));

  m.def(
      "score",
      [](const std::vector<double>& pred, const std::vector<double>& sd, const std::vector<double>& truth,
         bool relative) {
        const ScoreReport r = score(pred, sd, truth, relative ? ScoreMode::Relative : ScoreMode::Absolute);
        py::dict d;
        d["mpsd"] = r.mpsd;
        d["mad"] = r.mad;
        d["rmse"] = r.rmse;
        d["cor"] = r.cor;
        d["n"] = r.n;
        return d;
      },
      py::arg("pred_mean"), py::arg("pred_sd"), py::arg("truth"), py::arg("relative") = false);

  m.def(
      "roc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        const RocCurve c = roc(scores, labels);
        py::dict d;
        d["fpr"] = py::array(py::cast(c.fpr));
        d["tpr"] = py::array(py::cast(c.tpr));
        d["threshold"] = py::array(py::cast(c.threshold));
        d["auc"] = c.auc;
        return d;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "logistic_baseline",
      [](const std::vector<double>& x, const std::vector<int>& y) {
        const LogisticFit f = logistic_baseline(x, y);
        py::dict d;
        d["intercept"] = f.intercept;
        d["slope"] = f.slope;
        d["fitted"] = py::array(py::cast(f.fitted));
        d["converged"] = f.converged;
        d["separation"] = f.separation;
        return d;
      },
      py::arg("x"), py::arg("labels"));

  m.def(
      "kernel_matrix",
      [](const std::string& spec, const std::vector<Tick>& grid) { return realize(KernelSpec::from_text(spec), grid); },
      py::arg("spec"), py::arg("grid"), "Covariance on a grid, e.g. kernel_matrix('ar1:-0.5', [1, 2, 3]).");
  m.def(
      "kernel_derivative",
      [](const std::string& spec, const std::vector<Tick>& grid, std::size_t index) {
        return d_realize(KernelSpec::from_text(spec), grid, index);
      },
      py::arg("spec"), py::arg("grid"), py::arg("index") = 0);

  m.def(
      "pg_sample",
      [](double c, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        Eigen::VectorXd out(static_cast<Eigen::Index>(n));
        for (auto& v : out) v = pg_sample(c, rng);
        return out;
      },
      py::arg("c"), py::arg("n"), py::arg("seed") = 1, "n draws from PG(1, c).");
  m.def("pg_mean", &pg_mean, py::arg("c"));
  m.def("pg_variance", &pg_variance, py::arg("c"));

  m.def(
      "episode_loglik",
      [](const std::vector<int>& r, const std::vector<double>& lambda) {
        SubjectSeries s;
        s.subject_id = "x";
        for (std::size_t k = 0; k < r.size(); ++k) s.event_ticks.push_back(static_cast<Tick>(k));
        s.r = r;
        return episode_loglik(build_event_grid(s), lambda);
      },
      py::arg("r"), py::arg("lambda_"), "Discrete-hazard log-likelihood of consecutive event slots.");

  m.def(
      "ar_forecast_check",
      [](double rho, const std::vector<double>& series, int steps) {
        const ArPaths p = ar_equivalence_check(rho, series, steps);
        return py::make_tuple(py::array(py::cast(p.krige)), py::array(py::cast(p.recursion)));
      },
      py::arg("rho"), py::arg("series"), py::arg("steps"),
      "Kriging and recursion forecasts of a unit-variance AR(1), returned as a pair.");
}
