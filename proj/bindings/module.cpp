// Python face of the library: the distribution catalog, MLE + KS ranking,
// rate surfaces, contract pricing and the pipeline driver, all exchanged as
// plain python types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "epicap/contract.hpp"
#include "epicap/corpus.hpp"
#include "epicap/distributions.hpp"
#include "epicap/error.hpp"
#include "epicap/fitting.hpp"
#include "epicap/pipeline.hpp"
#include "epicap/rates.hpp"

namespace py = pybind11;
using namespace epicap;

namespace {

Distribution make_dist(const std::string& family,
                       const std::vector<double>& params) {
  Distribution d{family_from_name(family), params};
  validate_params(d);
  return d;
}

py::dict fit_to_dict(const FitResult& f) {
  py::dict out;
  out["family"] = std::string(family_name(f.id));
  py::dict params;
  const auto& names = param_names(f.id);
  for (std::size_t i = 0; i < names.size() && i < f.params.size(); ++i)
    params[py::str(names[i])] = f.params[i];
  out["params"] = params;
  out["log_likelihood"] = f.log_likelihood;
  out["ks"] = f.ks;
  out["n"] = f.n;
  out["converged"] = f.converged;
  return out;
}

FitOptions options_from(int restarts, int max_iters) {
  FitOptions o;
  if (restarts > 0) o.restarts = restarts;
  if (max_iters > 0) o.max_iters = max_iters;
  return o;
}

nlohmann::json to_json(const py::object& obj) {
  return nlohmann::json::parse(
      py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

ContractSpec spec_from(const py::object& contract) {
  return ContractSpec::from_json(to_json(contract));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "epidemic risk pipeline core";

  py::register_exception<Error>(m, "EpicapError");

  m.def("families", [] {
    std::vector<std::string> out;
    for (auto id : default_catalog()) out.emplace_back(family_name(id));
    return out;
  }, "Family names of the default fitting catalog.");

  m.def("param_names", [](const std::string& family) {
    return param_names(family_from_name(family));
  }, py::arg("family"));

  m.def("pdf", [](const std::string& family, const std::vector<double>& p,
                  double x) { return pdf(make_dist(family, p), x); },
        py::arg("family"), py::arg("params"), py::arg("x"));
  m.def("cdf", [](const std::string& family, const std::vector<double>& p,
                  double x) { return cdf(make_dist(family, p), x); },
        py::arg("family"), py::arg("params"), py::arg("x"));
  m.def("quantile", [](const std::string& family, const std::vector<double>& p,
                       double q) { return quantile(make_dist(family, p), q); },
        py::arg("family"), py::arg("params"), py::arg("q"));
  m.def("sample",
        [](const std::string& family, const std::vector<double>& p,
           std::size_t n, std::uint64_t seed) {
          return sample_n(make_dist(family, p), n, seed);
        },
        py::arg("family"), py::arg("params"), py::arg("n"), py::arg("seed"));

  m.def("fit_mle",
        [](const std::string& family, const std::vector<double>& data,
           int restarts, int max_iters) {
          return fit_to_dict(fit_mle(family_from_name(family), data,
                                     options_from(restarts, max_iters)));
        },
        py::arg("family"), py::arg("data"), py::arg("restarts") = 0,
        py::arg("max_iters") = 0,
        "Maximum-likelihood fit; returns family, params, ks, log_likelihood "
        "and the convergence flag.");

  m.def("ks_statistic",
        [](const std::string& family, const std::vector<double>& params,
           const std::vector<double>& data) {
          return ks_statistic(family_from_name(family), params, data);
        },
        py::arg("family"), py::arg("params"), py::arg("data"));

  m.def("rank_candidates",
        [](const std::vector<double>& data,
           const std::vector<std::string>& catalog, int restarts,
           int max_iters) {
          std::vector<DistributionId> ids;
          if (catalog.empty())
            ids = default_catalog();
          else
            for (const auto& f : catalog) ids.push_back(family_from_name(f));
          py::list out;
          for (const auto& f :
               rank_candidates(data, ids, options_from(restarts, max_iters)))
            out.append(fit_to_dict(f));
          return out;
        },
        py::arg("data"), py::arg("catalog") = std::vector<std::string>{},
        py::arg("restarts") = 0, py::arg("max_iters") = 0,
        "Fit every family and sort by ascending KS distance.");

  m.def("rate_surface",
        [](const std::string& data_csv, const std::string& population_csv,
           const std::string& kind, const std::string& start,
           const std::string& end) {
          auto corpus = load_cumulative(data_csv);
          auto pop = load_population(population_csv);
          check_population_coverage(corpus, pop);
          auto surface =
              rate_surface(corpus, pop, rate_kind_from_name(kind),
                           DateRange{Date::parse(start), Date::parse(end)});
          py::dict out;
          out["kind"] = std::string(rate_kind_name(surface.kind));
          out["cities"] = surface.cities;
          py::list dates, rows;
          for (auto d : surface.dates) dates.append(d.to_string());
          for (std::size_t c = 0; c < surface.cities.size(); ++c) {
            py::list row;
            for (std::size_t t = 0; t < surface.dates.size(); ++t) {
              const auto& cell = surface.at(c, t);
              if (cell.missing)
                row.append(py::none());
              else
                row.append(cell.value);
            }
            rows.append(row);
          }
          out["dates"] = dates;
          out["values"] = rows;
          return out;
        },
        py::arg("data_csv"), py::arg("population_csv"), py::arg("kind"),
        py::arg("start"), py::arg("end"),
        "City-by-day rate matrix for kind 'speed', 'death' or 'fatality'.");

  m.def("payout",
        [](const py::object& contract, const std::vector<double>& theta) {
          auto res = payout(spec_from(contract), theta);
          py::dict out;
          out["triggered"] = res.triggered;
          out["capped"] = res.capped;
          out["amount"] = res.amount;
          out["evaluated_at"] = res.evaluated_at;
          return out;
        },
        py::arg("contract"), py::arg("theta"),
        "Parametric payout of a contract (dict in the contract JSON shape) "
        "at an event-parameter vector.");

  m.def("expected_payout",
        [](const py::object& contract, const py::list& components,
           std::uint64_t n, std::uint64_t seed, int workers) {
          std::vector<Distribution> comps;
          for (const auto& item : components) {
            auto pair = item.cast<py::tuple>();
            comps.push_back(make_dist(pair[0].cast<std::string>(),
                                      pair[1].cast<std::vector<double>>()));
          }
          auto mc = expected_payout_mc(spec_from(contract), comps, n, seed,
                                       workers);
          py::dict out;
          out["estimate"] = mc.estimate;
          out["std_error"] = mc.std_error;
          out["n"] = mc.n;
          out["seed"] = mc.seed;
          return out;
        },
        py::arg("contract"), py::arg("components"), py::arg("n") = 100000,
        py::arg("seed") = 2020, py::arg("workers") = 0,
        "Monte Carlo expected payout; components are (family, params) pairs "
        "per event parameter.");

  m.def("expected_shortfall",
        [](std::vector<double> samples, double level) {
          return expected_shortfall(std::move(samples), level);
        },
        py::arg("samples"), py::arg("level"));

  m.def("run_pipeline",
        [](const std::string& command, const py::object& config) {
          return run_pipeline(command,
                              PipelineConfig::from_json(to_json(config)));
        },
        py::arg("command"), py::arg("config"),
        "Run one pipeline command (ingest|rates|fit|meta|contract|all|"
        "schema-check) with a config dict; returns the exit status.");

  m.def("check_schemas", &check_schemas, py::arg("out_dir"),
        "Validate every report in an output directory; returns problems, "
        "empty when clean.");
}
