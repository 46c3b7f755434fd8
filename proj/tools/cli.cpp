#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "esn2/errors.hpp"
#include "esn2/esn_model.hpp"
#include "esn2/expected_info.hpp"
#include "esn2/fit.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/validation.hpp"

namespace esn2::cli {

namespace {

using nlohmann::json;

// --dp plus one optional flag per component; merged by resolve().
struct DpFlags {
  std::string tuple;
  std::array<std::optional<double>, kNumParams> named;

  void add_to(CLI::App* app) {
    app->add_option("--dp", tuple, "Direct parameters xi1,xi2,Omega11,Omega12,Omega22,alpha1,alpha2,tau");
    for (std::size_t i = 0; i < kNumParams; ++i) {
      app->add_option(std::string("--") + param_names()[i], named[i]);
    }
  }

  bool any() const {
    if (!tuple.empty()) return true;
    for (const auto& v : named) {
      if (v) return true;
    }
    return false;
  }

  DpParams resolve(DpParams base = {}) const {
    auto values = base.to_array();
    if (!tuple.empty()) {
      std::vector<double> parsed;
      std::stringstream ss(tuple);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        const auto v = parse_number(cell);
        if (!v) throw UsageError("--dp: '" + cell + "' is not a number");
        parsed.push_back(*v);
      }
      if (parsed.size() != kNumParams || tuple.back() == ',') {
        throw UsageError("--dp: expected 8 comma-separated numbers");
      }
      std::copy(parsed.begin(), parsed.end(), values.begin());
    }
    for (std::size_t i = 0; i < kNumParams; ++i) {
      if (!named[i]) continue;
      if (!tuple.empty() && *named[i] != values[i]) {
        throw UsageError(std::string("--") + param_names()[i] + " conflicts with --dp");
      }
      values[i] = *named[i];
    }
    const DpParams dp = DpParams::from_array(values);
    try {
      return validate(dp);
    } catch (const Error& e) {
      throw UsageError(std::string("--dp: ") + e.what());
    }
  }
};

struct CubatureFlags {
  CubatureControls controls;

  void add_to(CLI::App* app) {
    app->add_option("--rel-tol", controls.rel_tol, "Cubature relative tolerance")->capture_default_str();
    app->add_option("--abs-tol", controls.abs_tol, "Cubature absolute tolerance")->capture_default_str();
    app->add_option("--max-evals", controls.max_evals, "Cubature evaluation budget per integral")
        ->capture_default_str();
  }

  CubatureControls checked() const {
    try {
      validate(controls);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return controls;
  }
};

json to_json(const Matrix8& m) {
  json rows = json::array();
  for (int i = 0; i < 8; ++i) {
    json row = json::array();
    for (int j = 0; j < 8; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json named_json(const ParamVector& v) {
  json out = json::object();
  for (std::size_t i = 0; i < kNumParams; ++i) out[param_names()[i]] = v(static_cast<int>(i));
  return out;
}

void write_csv_row(std::ostream& out, const double* values, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out << ',';
    out << format_number(values[i]);
  }
  out << '\n';
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Eigen::RowVectorXd row = m.row(i);
    write_csv_row(out, row.data(), static_cast<std::size_t>(row.size()));
  }
}

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

enum class Format { json, csv };

Precision precision_of(const std::string& name) {
  return name == "extended" ? Precision::extended : Precision::standard;
}

struct EvalOptions {
  DpFlags dp;
  CubatureFlags cubature;
  std::string precision = "standard";
  std::string data_path;
  std::string point;
  std::string format = "json";
};

Format format_of(const EvalOptions& o) { return o.format == "csv" ? Format::csv : Format::json; }

Dataset require_data(const EvalOptions& o, const char* what) {
  if (o.data_path.empty()) throw UsageError(std::string(what) + ": --data is required");
  return read_table_file(o.data_path);
}

int eval_density(const EvalOptions& o, std::ostream& out) {
  const DpParams dp = o.dp.resolve();
  std::vector<double> y1, y2;
  if (!o.point.empty()) {
    const auto comma = o.point.find(',');
    const auto a = comma == std::string::npos ? std::nullopt : parse_number(o.point.substr(0, comma));
    const auto b = comma == std::string::npos ? std::nullopt : parse_number(o.point.substr(comma + 1));
    if (!a || !b) throw UsageError("--point: expected y1,y2");
    y1.push_back(*a);
    y2.push_back(*b);
  } else {
    const Dataset d = require_data(o, "density");
    y1.assign(d.y1().begin(), d.y1().end());
    y2.assign(d.y2().begin(), d.y2().end());
  }
  std::vector<double> f(y1.size());
  for (std::size_t i = 0; i < y1.size(); ++i) f[i] = density_esn2(y1[i], y2[i], dp);
  if (format_of(o) == Format::csv) {
    for (double v : f) out << format_number(v) << '\n';
  } else {
    write_json(out, json{{"density", f}});
  }
  return kExitOk;
}

int eval_loglik(const EvalOptions& o, std::ostream& out) {
  const DpParams dp = o.dp.resolve();
  const Dataset data = require_data(o, "loglik");
  const double v = loglik(dp, data);
  if (format_of(o) == Format::csv) {
    out << format_number(v) << '\n';
  } else {
    write_json(out, json{{"loglik", v}, {"n", data.size()}});
  }
  return kExitOk;
}

int eval_score(const EvalOptions& o, std::ostream& out) {
  const DpParams dp = o.dp.resolve();
  const ScoreVector s = score(dp, require_data(o, "score"));
  if (format_of(o) == Format::csv) {
    write_csv_row(out, s.data(), kNumParams);
  } else {
    write_json(out, json{{"score", std::vector<double>(s.data(), s.data() + kNumParams)}});
  }
  return kExitOk;
}

int eval_oinfo(const EvalOptions& o, std::ostream& out) {
  const DpParams dp = o.dp.resolve();
  const Matrix8 m = observed_info(dp, require_data(o, "oinfo")).values;
  if (format_of(o) == Format::csv) {
    write_csv(out, m);
  } else {
    write_json(out, json{{"observed_info", to_json(m)}});
  }
  return kExitOk;
}

int eval_einfo(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const DpParams dp = o.dp.resolve();
  if (precision_of(o.precision) == Precision::extended) {
    const ExtendedInfoResult r = expected_info_extended(dp);
    if (!r.converged) {
      err << "einfo: quadrature did not reach the tolerance\n";
      return kExitCubature;
    }
    if (format_of(o) == Format::csv) {
      write_csv(out, r.info.values);
    } else {
      write_json(out, json{{"expected_info", to_json(r.info.values)},
                           {"det", r.spectrum.det},
                           {"min_eig", r.spectrum.min_eigenvalue},
                           {"converged", true}});
    }
    return kExitOk;
  }
  const ExpectedInfoResult r = expected_info_detailed(dp, o.cubature.checked());
  if (!r.converged) {
    err << "einfo: cubature did not reach the tolerance; raise --max-evals or loosen --rel-tol\n";
    return kExitCubature;
  }
  const Matrix8& m = r.info.values;
  if (format_of(o) == Format::csv) {
    write_csv(out, m);
  } else {
    const Spectrum sp = spectrum(m);
    write_json(out, json{{"expected_info", to_json(m)},
                         {"det", sp.det},
                         {"min_eig", sp.min_eigenvalue},
                         {"converged", true}});
  }
  return kExitOk;
}

int eval_moments(const EvalOptions& o, std::ostream& out) {
  const Moments2 m = moments_esn2(o.dp.resolve());
  if (format_of(o) == Format::csv) {
    write_csv_row(out, m.mean.data(), 2);
    write_csv(out, m.covariance);
  } else {
    write_json(out, json{{"mean", {m.mean(0), m.mean(1)}},
                         {"covariance",
                          {{m.covariance(0, 0), m.covariance(0, 1)},
                           {m.covariance(1, 0), m.covariance(1, 1)}}}});
  }
  return kExitOk;
}

struct ScanOptions {
  DpFlags dp;
  CubatureFlags cubature;
  std::string sweep;
  double from = 0.0;
  double to = 0.0;
  std::size_t points = 0;
  std::string out_path;
  std::string precision = "standard";
};

int det_scan_command(const ScanOptions& o, std::ostream& out) {
  SweepSpec spec;
  try {
    spec.sweep_param = parse_sweep_param(o.sweep);
  } catch (const PreconditionError&) {
    throw UsageError("--sweep: only alpha1, alpha2 and tau can be swept");
  }
  if (o.points == 0) throw UsageError("--points: must be at least 1");
  if (!std::isfinite(o.from) || !std::isfinite(o.to)) throw UsageError("--from/--to: must be finite");
  if (o.points > 1 && !(o.from < o.to)) throw UsageError("--from must be below --to");
  spec.grid = linear_grid(o.from, o.to, o.points);
  spec.base = o.dp.resolve();
  try {
    validate(spec);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const std::vector<SweepRow> rows = det_scan(spec, o.cubature.checked(), precision_of(o.precision));

  std::ofstream file;
  std::ostream* sink = &out;
  if (!o.out_path.empty()) {
    file.open(o.out_path);
    if (!file) throw UsageError("--out: cannot write " + o.out_path);
    sink = &file;
  }
  *sink << "param,value,det,min_eig,converged\n";
  for (const SweepRow& r : rows) {
    *sink << sweep_param_name(spec.sweep_param) << ',' << format_number(r.param_value) << ','
          << format_number(r.det) << ',' << format_number(r.min_eigenvalue) << ','
          << (r.converged ? "true" : "false") << '\n';
  }
  return kExitOk;
}

struct FitOptions {
  DpFlags dp;
  CubatureFlags cubature;
  std::string data_path;
  FitControls controls;
};

int fit_command(const FitOptions& o, std::ostream& out) {
  const Dataset data = read_table_file(o.data_path);
  if (data.size() < kMinFitObservations) {
    throw UsageError("fit: at least " + std::to_string(kMinFitObservations) + " rows are required");
  }
  if (!(o.controls.grad_tol > 0.0)) throw UsageError("--grad-tol: must be positive");
  const DpParams init = o.dp.any() ? o.dp.resolve(moment_start(data)) : moment_start(data);
  const FitResult fit = fit_mle(data, init, o.controls);

  json j;
  j["dp_hat"] = named_json(fit.dp_hat.to_vector());
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["score_norm"] = fit.final_score_norm;
  j["iterations"] = fit.iterations;
  j["n"] = data.size();
  std::optional<ParamVector> se;
  std::string warning;
  try {
    const ExpectedInfoResult info = expected_info_detailed(fit.dp_hat, o.cubature.checked());
    if (info.converged) {
      se = standard_errors(info.info.values, data.size());
      if (!se) warning = "expected information is singular at dp_hat; standard errors unavailable";
    } else {
      warning = "expected information cubature did not converge; standard errors unavailable";
    }
  } catch (const Error& e) {
    warning = std::string("expected information failed: ") + e.what();
  }
  j["std_errors"] = se ? named_json(*se) : json(nullptr);
  if (!warning.empty()) j["warning"] = warning;
  write_json(out, j);
  return fit.converged ? kExitOk : kExitNotConverged;
}

struct CheckOptions {
  std::string level = "fast";
  std::uint64_t seed = RngSeed{}.seed;
  std::string format = "text";
  double perturb_i67 = 1.0;
  CubatureFlags cubature;
};

int check_command(const CheckOptions& o, std::ostream& out) {
  ValidationConfig config;
  config.level = o.level == "full" ? CheckLevel::full : CheckLevel::fast;
  config.dp_set = default_validation_dps();
  config.seed = RngSeed{o.seed};
  config.cubature = o.cubature.checked();
  if (o.perturb_i67 != 1.0) {
    const double factor = o.perturb_i67;
    config.expected_info_fn = [factor](const DpParams& dp, const CubatureControls& c) {
      InfoMatrix m = expected_info(dp, c);
      m.values(5, 6) *= factor;
      m.values(6, 5) *= factor;
      return m;
    };
  }
  const ValidationReport report = run_validation_suite(config);
  const bool ok = report.all_passed();
  if (o.format == "json") {
    json checks = json::array();
    for (const CheckResult& c : report.checks) {
      checks.push_back({{"name", c.name},
                        {"dp_index", c.dp_index},
                        {"passed", c.passed},
                        {"measured", c.measured},
                        {"threshold", c.threshold},
                        {"detail", c.detail}});
    }
    write_json(out, json{{"passed", ok}, {"checks", checks}});
  } else {
    for (const CheckResult& c : report.checks) {
      out << (c.passed ? "PASS " : "FAIL ") << c.name << " dp=" << c.dp_index
          << " measured=" << format_number(c.measured) << " threshold=" << format_number(c.threshold);
      if (!c.detail.empty()) out << " (" << c.detail << ')';
      out << '\n';
    }
    out << (ok ? "all checks passed" : "some checks failed") << '\n';
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

std::optional<ParamVector> standard_errors(const Matrix8& info, std::size_t n) {
  if (n == 0 || !info.allFinite()) return std::nullopt;
  const Eigen::SelfAdjointEigenSolver<Matrix8> eig(info);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const auto& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (!(ev(0) > 1e-10 * largest)) return std::nullopt;
  const Matrix8 inv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose();
  return (inv.diagonal() / static_cast<double>(n)).cwiseSqrt().eval();
}

DpParams moment_start(const Dataset& data) {
  const SampleMoments m = sample_moments(data);
  const double b = std::sqrt(2.0 / std::numbers::pi);
  const double c = std::pow((4.0 - std::numbers::pi) / 2.0, 2.0 / 3.0);
  const std::span<const double> cols[2] = {data.y1(), data.y2()};
  double omega[2], delta[2], xi[2];
  for (int j = 0; j < 2; ++j) {
    const double mean = m.mean(j);
    const double sd = std::sqrt(m.covariance(j, j));
    double m3 = 0.0;
    for (double y : cols[j]) m3 += std::pow((y - mean) / sd, 3);
    m3 /= static_cast<double>(cols[j].size());
    // Largest skewness a skew-normal can have is about 0.9953.
    const double g = std::min(std::fabs(m3), 0.99);
    const double g23 = std::pow(g, 2.0 / 3.0);
    const double d = std::min(std::sqrt(std::numbers::pi / 2.0 * g23 / (g23 + c)), 0.95);
    delta[j] = std::copysign(std::max(d, 0.05), m3);
    omega[j] = sd / std::sqrt(1.0 - b * b * delta[j] * delta[j]);
    xi[j] = mean - omega[j] * b * delta[j];
  }
  const double r = std::clamp(m.covariance(0, 1) / std::sqrt(m.covariance(0, 0) * m.covariance(1, 1)),
                              -0.9, 0.9);
  // alpha = Omegabar^-1 delta / sqrt(1 - delta' Omegabar^-1 delta), when that is defined.
  const double det = 1.0 - r * r;
  const double w1 = (delta[0] - r * delta[1]) / det;
  const double w2 = (delta[1] - r * delta[0]) / det;
  const double q = delta[0] * w1 + delta[1] * w2;
  DpParams dp;
  dp.xi1 = xi[0];
  dp.xi2 = xi[1];
  dp.omega11 = omega[0] * omega[0];
  dp.omega22 = omega[1] * omega[1];
  dp.omega12 = r * omega[0] * omega[1];
  if (q < 0.95) {
    dp.alpha1 = w1 / std::sqrt(1.0 - q);
    dp.alpha2 = w2 / std::sqrt(1.0 - q);
  } else {
    dp.alpha1 = delta[0] / std::sqrt(1.0 - delta[0] * delta[0]);
    dp.alpha2 = delta[1] / std::sqrt(1.0 - delta[1] * delta[1]);
  }
  return dp;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bivariate extended skew-normal: likelihood, information matrices and checks", "esn2"};
  app.require_subcommand(1);

  EvalOptions eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a quantity at given parameters");
  eval->require_subcommand(1);
  const char* kinds[] = {"density", "loglik", "score", "oinfo", "einfo", "moments"};
  for (const char* kind : kinds) {
    CLI::App* sub = eval->add_subcommand(kind);
    eval_opts.dp.add_to(sub);
    sub->add_option("--format", eval_opts.format)->check(CLI::IsMember({"json", "csv"}));
    if (std::string(kind) == "einfo") {
      eval_opts.cubature.add_to(sub);
      sub->add_option("--precision", eval_opts.precision, "standard (cubature) or extended (quadruple)")
          ->check(CLI::IsMember({"standard", "extended"}));
    }
    if (std::string(kind) != "einfo" && std::string(kind) != "moments") {
      sub->add_option("--data", eval_opts.data_path, "CSV with columns y1,y2");
    }
    if (std::string(kind) == "density") {
      sub->add_option("--point", eval_opts.point, "Single point y1,y2 instead of --data");
    }
  }

  ScanOptions scan_opts;
  CLI::App* scan = app.add_subcommand("det-scan", "Determinant of the expected information over a grid");
  scan->add_option("--sweep", scan_opts.sweep, "alpha1, alpha2 or tau")->required();
  scan->add_option("--from", scan_opts.from)->required();
  scan->add_option("--to", scan_opts.to)->required();
  scan->add_option("--points", scan_opts.points)->required();
  scan->add_option("--out", scan_opts.out_path, "Output CSV (default: standard output)");
  scan->add_option("--precision", scan_opts.precision, "standard (cubature) or extended (quadruple)")
      ->check(CLI::IsMember({"standard", "extended"}));
  scan_opts.dp.add_to(scan);
  scan_opts.cubature.add_to(scan);

  FitOptions fit_opts;
  CLI::App* fit = app.add_subcommand("fit", "Maximum likelihood fit");
  fit->add_option("--data", fit_opts.data_path, "CSV with columns y1,y2")->required();
  fit->add_option("--grad-tol", fit_opts.controls.grad_tol)->capture_default_str();
  fit->add_option("--max-iter", fit_opts.controls.max_iter)->capture_default_str();
  fit_opts.dp.add_to(fit);
  fit_opts.cubature.add_to(fit);

  CheckOptions check_opts;
  CLI::App* check = app.add_subcommand("check", "Run the validation suite");
  check->add_option("--level", check_opts.level)->check(CLI::IsMember({"fast", "full"}));
  check->add_option("--seed", check_opts.seed)->capture_default_str();
  check->add_option("--format", check_opts.format)->check(CLI::IsMember({"text", "json"}));
  check->add_option("--perturb-i67", check_opts.perturb_i67,
                    "Scale the alpha1-alpha2 entry of the expected information (mutation self-test)");
  check_opts.cubature.add_to(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "esn2: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (eval->parsed()) {
      if (eval->got_subcommand("density")) return eval_density(eval_opts, out);
      if (eval->got_subcommand("loglik")) return eval_loglik(eval_opts, out);
      if (eval->got_subcommand("score")) return eval_score(eval_opts, out);
      if (eval->got_subcommand("oinfo")) return eval_oinfo(eval_opts, out);
      if (eval->got_subcommand("einfo")) return eval_einfo(eval_opts, out, err);
      return eval_moments(eval_opts, out);
    }
    if (scan->parsed()) return det_scan_command(scan_opts, out);
    if (fit->parsed()) return fit_command(fit_opts, out);
    return check_command(check_opts, out);
  } catch (const UsageError& e) {
    err << "esn2: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CubatureNonConvergence& e) {
    err << "esn2: " << e.what() << '\n';
    return kExitCubature;
  } catch (const PreconditionError& e) {
    err << "esn2: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DatasetError& e) {
    err << "esn2: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace esn2::cli
