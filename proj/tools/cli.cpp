#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "rgtlps/errors.hpp"
#include "rgtlps/gof.hpp"

namespace rgtlps::cli {

namespace {

using nlohmann::ordered_json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<double> parse_number(std::string_view token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == ';'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Settings {
  std::string model = "rgtl-geo";
  std::optional<int> m;
  std::string method = "ml";
  std::uint64_t seed = 0;
  int starts = 8;
  double tol = 0.0;
  int max_iter = 0;
  double clamp_eps = 0.0;
  int ks_bootstrap = 0;
  std::string format = "json";
  std::optional<double> alpha, nu, theta, a, b;
};

ModelSpec spec_for(const std::string& name, const std::optional<int>& m, bool m_allowed_elsewhere = false) {
  ModelSpec spec{parse_model(name), 0};
  if (spec.kind == ModelKind::RgtlBin) {
    spec.m = m.value_or(2);
    if (spec.m < 1) throw InputError("--m must be a positive integer");
  } else if (m && !m_allowed_elsewhere) {
    throw InputError("--m applies only to rgtl-bin");
  }
  return spec;
}

GofOptions gof_options(const Settings& s) {
  GofOptions o;
  o.fit.starts = s.starts;
  o.fit.seed = s.seed;
  o.fit.tol = s.tol;
  o.fit.max_iter = s.max_iter;
  if (s.method == "em")
    o.method = FitMethod::EM;
  else if (s.method != "ml")
    throw InputError("--method must be ml or em");
  o.ks_bootstrap = s.ks_bootstrap;
  return o;
}

std::vector<double> distribution_params(const ModelSpec& spec, const Settings& s) {
  auto need = [](const std::optional<double>& v, const char* flag) {
    if (!v) throw InputError(std::string("missing ") + flag);
    return *v;
  };
  if (is_compound(spec.kind)) return {need(s.alpha, "--alpha"), need(s.nu, "--nu"), need(s.theta, "--theta")};
  switch (spec.kind) {
    case ModelKind::Rgtl: return {need(s.alpha, "--alpha"), need(s.nu, "--nu")};
    case ModelKind::TL: return {need(s.nu, "--nu")};
    default: return {need(s.a, "--a"), need(s.b, "--b")};
  }
}

ordered_json parameters_json(const FitResult& f) {
  ordered_json arr = ordered_json::array();
  for (std::size_t j = 0; j < f.estimates.size(); ++j) {
    ordered_json p;
    p["name"] = f.names[j];
    p["estimate"] = f.estimates[j];
    p["std_error"] = j < f.std_errors.size() ? ordered_json(f.std_errors[j]) : ordered_json(nullptr);
    arr.push_back(p);
  }
  return arr;
}

ordered_json report_json(const GofReport& r) {
  const FitResult& f = r.fit;
  ordered_json j;
  j["model"] = f.model.empty() ? r.model_name : f.model;
  j["m"] = f.m > 0 ? ordered_json(f.m) : ordered_json(nullptr);
  j["method"] = f.method == FitMethod::EM ? "em" : "ml";
  j["n"] = f.n;
  j["k"] = r.k;
  j["parameters"] = parameters_json(f);
  j["std_error_note"] = f.std_error_note.empty() ? ordered_json(nullptr) : ordered_json(f.std_error_note);
  j["loglik"] = r.loglik;
  j["aic"] = r.aic;
  j["ks"] = {{"statistic", r.ks_statistic},
             {"pvalue", r.ks_pvalue},
             {"bootstrap_pvalue", r.ks_bootstrap_pvalue ? ordered_json(*r.ks_bootstrap_pvalue)
                                                        : ordered_json(nullptr)}};
  j["convergence"] = {{"converged", f.converged},
                      {"iterations", f.iterations},
                      {"starts_tried", f.starts_tried},
                      {"starts_converged", f.starts_converged},
                      {"best_start", f.best_start},
                      {"gradient_norm", f.gradient_norm},
                      {"stop_reason", f.stop_reason},
                      {"boundary", f.boundary}};
  if (!f.loglik_trace.empty()) j["loglik_trace"] = f.loglik_trace;
  j["note"] = r.note.empty() ? ordered_json(nullptr) : ordered_json(r.note);
  return j;
}

void report_tsv(const GofReport& r, std::ostream& out) {
  const FitResult& f = r.fit;
  out << "model\t" << r.model_name << "\n";
  out << "method\t" << (f.method == FitMethod::EM ? "em" : "ml") << "\n";
  out << "n\t" << f.n << "\n";
  for (std::size_t j = 0; j < f.estimates.size(); ++j)
    out << "param\t" << f.names[j] << "\t" << fmt(f.estimates[j]) << "\t"
        << (j < f.std_errors.size() ? fmt(f.std_errors[j]) : "NA") << "\n";
  if (!f.std_error_note.empty()) out << "std_error_note\t" << f.std_error_note << "\n";
  out << "loglik\t" << fmt(r.loglik) << "\n";
  out << "aic\t" << fmt(r.aic) << "\n";
  out << "ks_statistic\t" << fmt(r.ks_statistic) << "\n";
  out << "ks_pvalue\t" << fmt(r.ks_pvalue) << "\n";
  if (r.ks_bootstrap_pvalue) out << "ks_bootstrap_pvalue\t" << fmt(*r.ks_bootstrap_pvalue) << "\n";
  out << "converged\t" << (f.converged ? "true" : "false") << "\n";
  out << "iterations\t" << f.iterations << "\n";
  out << "starts\t" << f.starts_converged << "/" << f.starts_tried << "\n";
  out << "gradient_norm\t" << fmt(f.gradient_norm) << "\n";
  out << "stop_reason\t" << f.stop_reason << "\n";
  std::string bounds;
  for (const auto& b : f.boundary) bounds += (bounds.empty() ? "" : ",") + b;
  out << "boundary\t" << (bounds.empty() ? "none" : bounds) << "\n";
  if (!r.note.empty()) out << "note\t" << r.note << "\n";
}

int cmd_fit(const Settings& s, const std::string& path, std::ostream& out) {
  const ModelSpec spec = spec_for(s.model, s.m);
  const Dataset data = load_dataset(path, s.clamp_eps);
  const GofReport rep = assess(spec, data.values, gof_options(s));
  if (s.format == "json")
    out << report_json(rep).dump(2) << "\n";
  else
    report_tsv(rep, out);
  return rep.fit.converged ? kSuccess : kNotConverged;
}

int cmd_sample(const Settings& s, std::size_t n, const std::string& out_path, std::ostream& out) {
  const ModelSpec spec = spec_for(s.model, s.m);
  const UnitDistribution dist(spec, distribution_params(spec, s));
  Rng rng(s.seed);
  const std::vector<double> draws = dist.sample(n, rng);
  std::ofstream file;
  std::ostream* sink = &out;
  if (out_path != "-") {
    file.open(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw InputError("cannot write '" + out_path + "'");
    sink = &file;
  }
  for (double v : draws) *sink << fmt(v) << "\n";
  sink->flush();
  if (!*sink) throw InputError("write to '" + out_path + "' failed");
  return kSuccess;
}

int cmd_eval(const Settings& s, const std::string& what, std::vector<double> grid, double from, double to,
             int points, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = spec_for(s.model, s.m);
  const UnitDistribution dist(spec, distribution_params(spec, s));
  if (grid.empty()) {
    if (points < 1) throw InputError("--points must be positive");
    for (int i = 0; i < points; ++i)
      grid.push_back(points == 1 ? from : from + (to - from) * i / (points - 1));
  }
  if (what == "hazard") std::erase_if(grid, [](double x) { return x >= 1.0; });
  std::function<double(double)> f;
  if (what == "pdf")
    f = [&](double x) { return dist.pdf(x); };
  else if (what == "cdf")
    f = [&](double x) { return dist.cdf(x); };
  else if (what == "hazard")
    f = [&](double x) { return dist.hazard(x); };
  else if (what == "quantile")
    f = [&](double x) { return dist.quantile(x); };
  else
    throw InputError("--what must be pdf, cdf, hazard or quantile");

  int status = kSuccess;
  ordered_json rows = ordered_json::array();
  if (s.format != "json") out << "x\t" << what << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::optional<double> v;
    std::string problem;
    try {
      v = f(grid[i]);
    } catch (const DomainError& e) {
      problem = e.what();
      err << "row " << i << ": " << problem << "\n";
      status = kInputError;
    }
    if (s.format == "json") {
      ordered_json row{{"x", grid[i]}, {"value", v ? ordered_json(*v) : ordered_json(nullptr)}};
      if (!problem.empty()) row["error"] = problem;
      rows.push_back(row);
    } else {
      out << fmt(grid[i]) << "\t" << (v ? fmt(*v) : "NA") << "\n";
    }
  }
  if (s.format == "json") {
    ordered_json doc{{"model", std::string(model_name(spec.kind))},
                     {"parameters", distribution_params(spec, s)},
                     {"what", what},
                     {"rows", rows}};
    out << doc.dump(2) << "\n";
  }
  return status;
}

std::string estimates_cell(const FitResult& f) {
  std::string cell;
  for (std::size_t j = 0; j < f.estimates.size(); ++j) {
    if (j) cell += ", ";
    cell += f.names[j] + "=" + fmt(f.estimates[j]) + " (" +
            (j < f.std_errors.size() ? fmt(f.std_errors[j]) : std::string("NA")) + ")";
  }
  return cell;
}

int cmd_compare(const Settings& s, const std::string& path, const std::string& model_list,
                std::ostream& out) {
  std::vector<ModelSpec> specs;
  bool has_bin = false;
  for (std::string_view name : tokens(model_list)) {
    specs.push_back(spec_for(std::string(name), s.m, true));
    has_bin = has_bin || specs.back().kind == ModelKind::RgtlBin;
  }
  if (specs.empty()) throw InputError("--models is empty");
  if (s.m && !has_bin) throw InputError("--m applies only to rgtl-bin");
  const Dataset data = load_dataset(path, s.clamp_eps);
  const std::vector<GofReport> reports = compare_models(data.values, specs, gof_options(s));
  if (s.format == "json") {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      ordered_json j = report_json(reports[i]);
      j["rank"] = i + 1;
      arr.push_back(j);
    }
    out << ordered_json{{"n", data.values.size()}, {"ranking", arr}}.dump(2) << "\n";
  } else {
    out << "rank\tmodel\tk\testimates\tloglik\taic\tks_statistic\tks_pvalue\tnote\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const GofReport& r = reports[i];
      out << i + 1 << "\t" << r.model_name << "\t" << r.k << "\t" << estimates_cell(r.fit) << "\t"
          << fmt(r.loglik) << "\t" << fmt(r.aic) << "\t" << fmt(r.ks_statistic) << "\t"
          << fmt(r.ks_pvalue) << "\t" << (r.note.empty() ? "-" : r.note) << "\n";
    }
  }
  return kSuccess;
}

void add_fit_flags(CLI::App* app, Settings& s) {
  app->add_option("--method", s.method, "ml or em")->check(CLI::IsMember({"ml", "em"}));
  app->add_option("--seed", s.seed, "seed for starting points and bootstrap");
  app->add_option("--starts", s.starts, "number of low-discrepancy starts")->check(CLI::PositiveNumber);
  app->add_option("--tol", s.tol, "convergence tolerance (0 = method default)")->check(CLI::NonNegativeNumber);
  app->add_option("--max-iter", s.max_iter, "iteration cap (0 = method default)")->check(CLI::NonNegativeNumber);
  app->add_option("--clamp-eps", s.clamp_eps, "move values within eps of 0 or 1 inside")
      ->check(CLI::Range(0.0, 0.5));
  app->add_option("--ks-bootstrap", s.ks_bootstrap, "parametric bootstrap replicates for the KS p-value")
      ->check(CLI::NonNegativeNumber);
}

void add_common_flags(CLI::App* app, Settings& s) {
  app->add_option("--model", s.model,
                  "rgtl-log, rgtl-geo, rgtl-poi, rgtl-bin, rgtl, tl, beta or kumaraswamy");
  app->add_option("--m", s.m, "binomial size (rgtl-bin only, default 2)");
  app->add_option("--output-format", s.format, "json or tsv")->check(CLI::IsMember({"json", "tsv"}));
}

void add_param_flags(CLI::App* app, Settings& s) {
  app->add_option("--alpha", s.alpha);
  app->add_option("--nu", s.nu);
  app->add_option("--theta", s.theta);
  app->add_option("--a", s.a);
  app->add_option("--b", s.b);
}

}  // namespace

Dataset load_dataset(const std::string& path, double clamp_eps) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  Dataset d;
  d.source_path = path;
  std::string line;
  std::size_t lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = tokens(line);
    if (toks.empty()) continue;
    const bool first = !seen_content;
    seen_content = true;
    if (first && !parse_number(toks.front())) continue;  // header
    for (std::string_view t : toks) {
      const std::optional<double> v = parse_number(t);
      if (!v) throw InputError(path + ":" + std::to_string(lineno) + ": malformed value '" + std::string(t) + "'");
      double y = *v;
      if (clamp_eps > 0.0 && y >= 0.0 && y <= 1.0) {
        if (y < clamp_eps) {
          y = clamp_eps;
          ++d.clamped;
        } else if (y > 1.0 - clamp_eps) {
          y = 1.0 - clamp_eps;
          ++d.clamped;
        }
      }
      if (!(y > 0.0 && y < 1.0))
        throw InputError(path + ":" + std::to_string(lineno) + ": value " + std::string(t) +
                         " is outside (0, 1)" + (clamp_eps > 0.0 ? "" : "; see --clamp-eps"));
      d.values.push_back(y);
      d.lines.push_back(lineno);
    }
  }
  if (d.values.empty()) throw InputError(path + ": no observations");
  return d;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fitting, sampling and evaluation for rGTL power-series laws on (0, 1)", "rgtlps"};
  app.require_subcommand(1);
  Settings s;

  std::string data_path;
  CLI::App* fit = app.add_subcommand("fit", "fit a model to a data file");
  add_common_flags(fit, s);
  add_fit_flags(fit, s);
  fit->add_option("data", data_path, "data file")->required();

  std::size_t n = 0;
  std::string out_path = "-";
  CLI::App* sample = app.add_subcommand("sample", "draw a sample");
  add_common_flags(sample, s);
  add_param_flags(sample, s);
  sample->add_option("--seed", s.seed);
  sample->add_option("--n", n, "number of draws")->required();
  sample->add_option("--out", out_path, "output file, - for stdout");

  std::string what = "pdf";
  std::vector<double> grid;
  double from = 0.0, to = 1.0;
  int points = 101;
  CLI::App* eval = app.add_subcommand("eval", "evaluate pdf, cdf, hazard or quantile on a grid");
  add_common_flags(eval, s);
  add_param_flags(eval, s);
  eval->add_option("--what", what, "pdf, cdf, hazard or quantile");
  eval->add_option("--x", grid, "explicit grid points")->delimiter(',');
  eval->add_option("--from", from, "grid start");
  eval->add_option("--to", to, "grid end");
  eval->add_option("--points", points, "grid size");

  std::string models = "rgtl-log,rgtl-geo,rgtl-poi,rgtl,tl,beta,kumaraswamy";
  CLI::App* compare = app.add_subcommand("compare", "fit several models and rank them by AIC");
  add_common_flags(compare, s);
  add_fit_flags(compare, s);
  compare->add_option("--models", models, "comma-separated model list");
  compare->add_option("data", data_path, "data file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*fit) return cmd_fit(s, data_path, out);
    if (*sample) return cmd_sample(s, n, out_path, out);
    if (*eval) return cmd_eval(s, what, grid, from, to, points, out, err);
    return cmd_compare(s, data_path, models, out);
  } catch (const ConvergenceError& e) {
    err << "rgtlps: " << e.what() << "\n";
    return kNotConverged;
  } catch (const InternalError& e) {
    err << "rgtlps: internal error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "rgtlps: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace rgtlps::cli
