#include "vlab/cli.hpp"

#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "vlab/report_io.hpp"

namespace vlab {

namespace {

using nlohmann::json;

real number_or(const json& j, const char* key, real fallback) {
  return j.contains(key) ? j.at(key).get<real>() : fallback;
}

cplx complex_field(const json& j) {
  if (j.is_string()) return parse_complex(j.get<std::string>());
  return complex_from_json(j);
}

std::vector<PoleSpec> poles_from_json(const json& j) {
  std::vector<PoleSpec> out;
  for (const auto& p : j) {
    PoleSpec ps;
    ps.location = p.contains("at") ? complex_field(p.at("at")) : cplx(p.at("re").get<real>(), number_or(p, "im", 0.0));
    ps.order = p.value("order", 1);
    if (ps.order < 1) throw ConfigError("pole order must be >= 1");
    ps.source = PoleSource::series_declared;
    out.push_back(ps);
  }
  return out;
}

// Ladder: "n" (lambda_n = n), {"scale": c} (lambda_n = c n) or an explicit array.
std::vector<real> ladder_from_json(const json& j, long n_max) {
  std::vector<real> v;
  if (j.is_array()) {
    for (const auto& e : j) v.push_back(e.get<real>());
    return v;
  }
  real c = 1.0;
  if (j.is_object()) c = j.at("scale").get<real>();
  else if (!(j.is_string() && j.get<std::string>() == "n")) throw ConfigError("ladder must be \"n\", {\"scale\": c} or an array");
  for (long n = 1; n <= n_max; ++n) v.push_back(c * static_cast<real>(n));
  return v;
}

// Coefficients: explicit array or {"generator": name, ...}.
std::vector<cplx> coefficients_from_json(const json& j, long n_max) {
  std::vector<cplx> v;
  if (j.is_array()) {
    for (const auto& e : j) v.push_back(complex_field(e));
    return v;
  }
  std::string g = j.at("generator").get<std::string>();
  if (g == "ones") {
    v.assign(n_max, 1.0);
  } else if (g == "divisor") {
    for (long n = 1; n <= n_max; ++n) v.push_back(static_cast<real>(coeff_divisor(n)));
  } else if (g == "r2") {
    for (long n = 1; n <= n_max; ++n) v.push_back(static_cast<real>(coeff_r2(n)));
  } else if (g == "tau") {
    for (auto t : coeff_tau(n_max)) v.push_back(static_cast<real>(t));
  } else if (g == "sigma_zk") {
    cplx z = j.contains("z") ? complex_field(j.at("z")) : cplx(0.0, 0.0);
    int k = j.value("k", 2);
    for (long n = 1; n <= n_max; ++n) v.push_back(coeff_sigma_zk(n, z, k));
  } else {
    throw ConfigError("unknown coefficient generator: " + g);
  }
  return v;
}

const char* usage_note =
    "Exit status: 0 all identities passed, 2 an identity failed, 1 configuration or numerical error.";

}  // namespace

cplx parse_complex(const std::string& text) {
  static const std::regex re(
      R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*i)?\s*$)");
  static const std::regex pure(R"(^\s*([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*i\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, pure)) {
    real im = m[2].matched ? std::stod(m[2].str()) : 1.0;
    return {0.0, m[1].str() == "-" ? -im : im};
  }
  if (std::regex_match(text, m, re) && (m[1].matched || m[2].matched)) {
    real re_part = m[1].matched ? std::stod(m[1].str()) : 0.0;
    real im = 0.0;
    if (m[2].matched) {
      im = m[3].matched ? std::stod(m[3].str()) : 1.0;
      if (m[2].str() == "-") im = -im;
    }
    return {re_part, im};
  }
  throw ConfigError("cannot parse complex number: '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

FunctionalEquationData custom_series(const json& j) {
  for (const char* key : {"sigma_a", "sigma_b", "poles"})
    if (!j.contains(key)) throw ConfigError(std::string("custom series must declare ") + key);
  FunctionalEquationData fe;
  fe.delta = j.at("delta").get<real>();
  fe.bigQ = j.at("Q").get<real>();
  fe.omega = j.contains("omega") ? complex_field(j.at("omega")) : cplx(1.0, 0.0);
  std::vector<real> al;
  std::vector<cplx> be;
  for (const auto& e : j.at("alphas")) al.push_back(e.get<real>());
  for (const auto& e : j.at("betas")) be.push_back(complex_field(e));
  fe.sig = GammaSignature::make(al, be, j.value("allow_negative_beta", false));
  fe.sig_conj = fe.sig.conjugate();
  long n_max = j.value("n_max", 2000L);
  auto lam = ladder_from_json(j.value("lambda", json("n")), n_max);
  auto a = coefficients_from_json(j.at("a"), static_cast<long>(lam.size()));
  bool self_dual = !j.contains("b") || (j.at("b").is_string() && j.at("b").get<std::string>() == "same");
  std::vector<real> mu = self_dual ? lam : ladder_from_json(j.value("mu", json("n")), n_max);
  std::vector<cplx> b = self_dual ? a : coefficients_from_json(j.at("b"), static_cast<long>(mu.size()));
  fe.series = ArithmeticSeriesPair(lam, a, mu, b);
  fe.sigma_a = j.at("sigma_a").get<real>();
  fe.sigma_b = j.at("sigma_b").get<real>();
  fe.declared_poles = poles_from_json(j.at("poles"));
  fe.dual_declared_poles = j.contains("dual_poles") ? poles_from_json(j.at("dual_poles")) : fe.declared_poles;
  if (j.contains("continuation")) {
    // borrow the continuation of a preset with the same Dirichlet series
    auto p = preset(j.at("continuation").get<std::string>());
    fe.phi = p.fe.phi;
    fe.psi = p.fe.psi;
  }
  fe.validate();
  return fe;
}

void RunConfig::validate() const {
  if (preset.empty() && !custom) throw ConfigError("config: a preset or a custom series is required");
  if (identity == IdentityTag::functional_eq ? ss.empty() : xs.empty())
    throw ConfigError("config: at least one evaluation point is required");
  if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");
  for (real x : xs)
    if (!(x > 0.0)) throw ConfigError("config: x must be positive");
  if (format != "json" && format != "csv") throw ConfigError("config: output format must be json or csv");
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  const auto& s = j.at("series");
  if (s.contains("preset")) {
    c.preset = s.at("preset").get<std::string>();
    if (s.contains("params")) {
      const auto& p = s.at("params");
      c.params.z = number_or(p, "z", c.params.z);
      c.params.k = p.value("k", c.params.k);
      c.params.n_max = p.value("n_max", c.params.n_max);
    }
  } else if (s.contains("custom")) {
    c.custom = s.at("custom");
  } else {
    throw ConfigError("config: series needs 'preset' or 'custom'");
  }
  c.identity = identity_tag_from_string(j.at("identity").get<std::string>());
  for (const auto& p : j.at("points")) {
    if (c.identity == IdentityTag::functional_eq) c.ss.push_back(complex_field(p));
    else c.xs.push_back(p.get<real>());
  }
  c.rho = number_or(j, "rho", c.identity == IdentityTag::riesz && !c.preset.empty() ? preset(c.preset, c.params).riesz_rho : 0.0);
  if (j.contains("a")) c.a = j.at("a").get<real>();
  c.tol = number_or(j, "tol", c.identity == IdentityTag::riesz ? 1e-4 : 1e-8);
  if (j.contains("output")) {
    c.format = j.at("output").value("format", c.format);
    c.path = j.at("output").value("path", c.path);
  }
  c.validate();
  return c;
}

int run(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  FunctionalEquationData fe = cfg.custom ? custom_series(*cfg.custom) : preset(cfg.preset, cfg.params).fe;
  std::vector<IdentityReport> reports;
  switch (cfg.identity) {
    case IdentityTag::modular:
      for (real x : cfg.xs) reports.push_back(modular_report(fe, x, cfg.tol, cfg.a));
      break;
    case IdentityTag::aux_modular:
      for (real x : cfg.xs) reports.push_back(aux_modular_report(fe, x, cfg.tol, cfg.a));
      break;
    case IdentityTag::riesz:
      for (real x : cfg.xs) reports.push_back(riesz_report(fe, x, cfg.rho, cfg.a, cfg.tol));
      break;
    case IdentityTag::functional_eq:
      for (cplx s : cfg.ss) reports.push_back(functional_equation_report(fe, s, cfg.tol));
      break;
  }
  std::ofstream file;
  std::ostream* os = &out;
  if (!cfg.path.empty()) {
    file.open(cfg.path);
    if (!file) throw ConfigError("cannot open output file " + cfg.path);
    os = &file;
  }
  if (cfg.format == "csv") write_csv(*os, reports);
  else write_json(*os, reports);
  bool ok = std::all_of(reports.begin(), reports.end(), [](const IdentityReport& r) { return r.passed; });
  return ok ? exit_pass : exit_identity_failure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks of functional equations, modular relations and Riesz-sum identities"};
  app.footer(usage_note);
  app.require_subcommand(1);

  // kernel
  auto* kernel = app.add_subcommand("kernel", "evaluate Z, Y or X at x");
  std::string kind = "Z", alphas_s, betas_s, kx_s, kout = "text";
  real kdelta = 1.0, ktol = 1e-13;
  kernel->add_option("--kind", kind, "Z, Y or X")->check(CLI::IsMember({"Z", "Y", "X"}));
  kernel->add_option("--alphas", alphas_s, "comma-separated alpha_i")->required();
  kernel->add_option("--betas", betas_s, "comma-separated beta_i, complex as a+bi")->required();
  kernel->add_option("--x", kx_s, "comma-separated arguments")->required();
  kernel->add_option("--delta", kdelta, "delta for X");
  kernel->add_option("--tol", ktol, "absolute tolerance");
  kernel->add_option("--out", kout, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

  // identity
  auto* ident = app.add_subcommand("identity", "check an identity at one or more points");
  std::string which, preset_s, x_s, s_s, iout = "json", ipath, config_path, n_str;
  std::optional<real> irho, ia, itol;
  PresetParams prm;
  ident->add_option("which", which, "modular, aux, riesz or fe")
      ->check(CLI::IsMember({"modular", "aux", "riesz", "fe"}));
  ident->add_option("--preset", preset_s, "catalog preset");
  ident->add_option("--x", x_s, "comma-separated x values");
  ident->add_option("--s", s_s, "comma-separated s values (fe)");
  ident->add_option("--rho", irho, "Riesz order");
  ident->add_option("--a", ia, "contour abscissa override");
  ident->add_option("--tol", itol, "tolerance (riesz: relative to max(1,|lhs|))");
  ident->add_option("--out", iout, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  ident->add_option("--output", ipath, "output file (default: standard output)");
  ident->add_option("--config", config_path, "JSON config file");
  ident->add_option("--z", prm.z, "sigma-z parameter");
  ident->add_option("--k", prm.k, "sigma-k parameter");
  ident->add_option("--n-max", prm.n_max, "series length");

  // asympt
  auto* asympt = app.add_subcommand("asympt", "asymptotic expansion of the Riesz kernel integral");
  std::string apreset = "r2", ax_s = "50,100,200,400,800", aout = "csv";
  real arho = 1.0;
  int am = 0;
  std::optional<real> aa;
  asympt->add_option("--preset", apreset, "catalog preset");
  asympt->add_option("--rho", arho, "Riesz order");
  asympt->add_option("--x", ax_s, "comma-separated arguments of the integral");
  asympt->add_option("--m", am, "expansion order (0..2)");
  asympt->add_option("--a", aa, "contour abscissa");
  asympt->add_option("--out", aout, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // catalog
  auto* catalog = app.add_subcommand("catalog", "preset catalog");
  auto* clist = catalog->add_subcommand("list", "list presets");
  catalog->require_subcommand(1);
  std::string cout_fmt = "text";
  clist->add_option("--out", cout_fmt, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? exit_pass : exit_error;
  }

  try {
    if (*kernel) {
      std::vector<real> al;
      std::vector<cplx> be;
      for (const auto& t : split_list(alphas_s)) al.push_back(std::stod(t));
      for (const auto& t : split_list(betas_s)) be.push_back(parse_complex(t));
      auto sig = GammaSignature::make(al, be);
      KernelKind kk = kind == "Z" ? KernelKind::Z() : kind == "Y" ? KernelKind::Y() : KernelKind::X(kdelta);
      json arr = json::array();
      if (kout == "csv") out << "kind,x,value_re,value_im,error\n";
      for (const auto& t : split_list(kx_s)) {
        real x = std::stod(t);
        KernelValue v = eval_kernel(kk, sig, x, ktol);
        if (kout == "json") {
          arr.push_back({{"kind", kind}, {"x", x}, {"value", complex_to_json(v.value)}, {"error", v.error}});
        } else if (kout == "csv") {
          out << kind << ',' << detail::fmt17(x) << ',' << detail::fmt17(v.value.real()) << ','
              << detail::fmt17(v.value.imag()) << ',' << detail::fmt17(v.error) << '\n';
        } else {
          out << detail::fmt17(v.value.real());
          if (v.value.imag() != 0.0) out << (v.value.imag() < 0 ? "" : "+") << detail::fmt17(v.value.imag()) << "i";
          out << '\n';
        }
      }
      if (kout == "json") out << arr.dump(2) << '\n';
      return exit_pass;
    }
    if (*ident) {
      RunConfig cfg;
      if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw ConfigError("cannot read config " + config_path);
        cfg = config_from_json(json::parse(f));
      } else {
        if (which.empty()) throw ConfigError("identity: choose modular, aux, riesz or fe");
        cfg.identity = identity_tag_from_string(which);
        cfg.preset = preset_s;
        cfg.params = prm;
        if (preset_s.empty()) throw ConfigError("identity: --preset or --config is required");
        for (const auto& t : split_list(x_s)) cfg.xs.push_back(std::stod(t));
        for (const auto& t : split_list(s_s)) cfg.ss.push_back(parse_complex(t));
        if (cfg.identity == IdentityTag::functional_eq && cfg.ss.empty())
          for (real x : cfg.xs) cfg.ss.push_back(x);
        cfg.rho = irho.value_or(cfg.identity == IdentityTag::riesz ? preset(preset_s, prm).riesz_rho : 0.0);
        cfg.a = ia;
        cfg.tol = itol.value_or(cfg.identity == IdentityTag::riesz ? 1e-4 : 1e-8);
        cfg.format = iout;
        cfg.path = ipath;
      }
      return run(cfg, out);
    }
    if (*asympt) {
      auto fe = preset(apreset).fe;
      real a = aa.value_or(default_identity_abscissa(fe));
      std::optional<AsymptoticFit> fit;
      if (am >= 1) fit = fit_asymptotic_coefficients(fe, arho, a);
      IRhoEvaluator ev(fe, arho, a);
      json arr = json::array();
      if (aout == "csv") out << "x,quad_re,quad_im,asym_re,asym_im,window_rel_error\n";
      for (const auto& t : split_list(ax_s)) {
        real y = std::stod(t);
        cplx q = std::exp((arho + fe.delta) * std::log(y)) * (ev(y).value - ev.nonoscillatory(y));
        cplx e = i_rho_asymptotic(fe, arho, y, am, fit ? &*fit : nullptr).value;
        real w = asymptotic_window_error(fe, arho, a, y, am, fit ? &*fit : nullptr);
        if (aout == "json") {
          arr.push_back({{"x", y}, {"quadrature", complex_to_json(q)}, {"asymptotic", complex_to_json(e)},
                         {"window_rel_error", w}});
        } else {
          out << detail::fmt17(y) << ',' << detail::fmt17(q.real()) << ',' << detail::fmt17(q.imag()) << ','
              << detail::fmt17(e.real()) << ',' << detail::fmt17(e.imag()) << ',' << detail::fmt17(w) << '\n';
        }
      }
      if (aout == "json") out << arr.dump(2) << '\n';
      return exit_pass;
    }
    if (*clist) {
      json arr = json::array();
      for (const auto& name : preset_names()) {
        auto p = preset(name);
        json al = json::array(), be = json::array();
        for (auto v : p.fe.sig.alphas) al.push_back(v);
        for (auto v : p.fe.sig.betas) be.push_back(complex_to_json(v));
        json e = {{"name", name},          {"delta", p.fe.delta},         {"Q", p.fe.bigQ},
                  {"alphas", al},          {"betas", be},                 {"lattice", p.lattice},
                  {"sigma_a", p.fe.sigma_a}, {"sigma_b", p.fe.sigma_b},   {"riesz_rho", p.riesz_rho},
                  {"riesz_tol", p.riesz_tol}, {"n_max", p.fe.series.n_max()}};
        if (cout_fmt == "json") {
          arr.push_back(e);
        } else {
          out << name << "  delta=" << p.fe.delta << "  Q=" << p.fe.bigQ << "  r=" << p.fe.sig.r()
              << "  " << p.lattice << '\n';
        }
      }
      if (cout_fmt == "json") out << arr.dump(2) << '\n';
      return exit_pass;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}

}  // namespace vlab
