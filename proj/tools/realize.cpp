// Batch front-end: loads realization or filter JSON, runs one computation and
// writes CSV or JSON. Exit codes: 0 success, 1 invariant failure or
// non-contractive input, 2 malformed input or configuration.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "realize/infinite_product.hpp"
#include "realize/json_io.hpp"
#include "realize/markov.hpp"
#include "realize/ruelle.hpp"
#include "realize/wavelet.hpp"

namespace {

using namespace realize;
using nlohmann::json;

constexpr int kExitInvariant = 1;
constexpr int kExitMalformed = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string input;
  std::string output;
  std::string preset;
  std::string convention;
  std::string grid;
  std::string window = "0,4,0,8";
  std::string format = "csv";
  std::optional<int> n;
  double tol = 1e-9;
  std::size_t nmax = 10;
  std::size_t kmax = 4;
  std::size_t quad = 64;
  std::size_t samples = 256;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

/// JSON text with every floating-point value printed to 17 significant digits.
void put_json(std::string& out, const json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        put_json(out, it.value());
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        put_json(out, j[i]);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? num(x) : "null";
      break;
    }
    default:
      out += j.dump();
  }
}

std::string json_text(const json& j) {
  std::string out;
  put_json(out, j);
  return out;
}

std::vector<double> split_numbers(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": cannot parse \"" + item + "\"");
    }
  }
  if (values.size() != expected)
    throw UsageError(std::string(what) + ": expected " + std::to_string(expected) + " comma-separated numbers");
  return values;
}

Window parse_window(const std::string& text) {
  const auto v = split_numbers(text, 4, "--window");
  for (double x : v)
    if (x != std::floor(x)) throw UsageError("--window: indices must be integers");
  Window w{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
  if (w.row_min > w.row_max || w.col_min > w.col_max) throw UsageError("--window: empty range");
  return w;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto v = split_numbers(text.empty() ? "-4,4,0.015625" : text, 3, "--grid");
  if (!(v[2] > 0) || v[1] < v[0]) throw UsageError("--grid: expects lo,hi,step with lo <= hi and step > 0");
  const auto count = static_cast<std::size_t>(std::llround((v[1] - v[0]) / v[2])) + 1;
  if (count > 10'000'000) throw UsageError("--grid: too many points");
  std::vector<double> ws(count);
  for (std::size_t i = 0; i < count; ++i) ws[i] = v[0] + static_cast<double>(i) * v[2];
  return ws;
}

std::optional<Convention> convention_of(const Config& cfg, bool required) {
  if (cfg.convention.empty()) {
    if (required) throw UsageError("--convention is required (unit-dc or paper-polyphase)");
    return std::nullopt;
  }
  const auto c = parse_convention(cfg.convention);
  if (!c) throw UsageError("--convention must be unit-dc or paper-polyphase, got \"" + cfg.convention + "\"");
  return c;
}

std::uint64_t seed_from_env() {
  const char* s = std::getenv("RUELLE_REALIZE_SEED");
  if (!s || !*s) return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("RUELLE_REALIZE_SEED must be a non-negative integer, got \"") + s + "\"");
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

bool is_filter(const json& j) {
  return j.is_object() && !j.contains("A") && (j.contains("N") || j.contains("factors") || j.contains("leftConstant"));
}

/// Input as either a filter or a realization. Exactly one is set.
struct Input {
  std::optional<RationalInner> filter;
  std::optional<Realization> realization;
  bool from_preset = false;
};

Input load_input(const Config& cfg) {
  Input in;
  if (!cfg.preset.empty()) {
    if (!cfg.input.empty()) throw UsageError("--input and --preset are mutually exclusive");
    in.from_preset = true;
    if (cfg.preset == "haar") in.realization = preset_haar();
    else if (cfg.preset == "daubechies4") in.realization = preset_daubechies4();
    else if (cfg.preset == "identity") {
      if (!cfg.n) throw UsageError("--preset identity needs --N");
      if (*cfg.n < 1) throw UsageError("--N must be positive");
      in.filter = RationalInner::identity(static_cast<std::size_t>(*cfg.n));
    } else {
      throw UsageError("unknown preset \"" + cfg.preset + "\" (haar, daubechies4, identity)");
    }
    return in;
  }
  if (cfg.input.empty()) throw UsageError("--input or --preset is required");
  const json j = load_json(cfg.input);
  if (is_filter(j)) in.filter = rational_inner_from_json(j);
  else in.realization = realization_from_json(j);
  return in;
}

int scale_of(const Config& cfg, const Input& in) {
  if (in.filter) {
    const auto n = static_cast<int>(in.filter->size());
    if (cfg.n && *cfg.n != n) throw UsageError("--N disagrees with the filter's N");
    return n;
  }
  if (!cfg.n) throw UsageError("--N is required");
  return *cfg.n;
}

/// Low-pass symbol in the requested convention. Presets are defined with
/// m(1) = 1 and are rescaled by sqrt(N) for paper-polyphase.
Realization symbol_of(const Input& in, std::optional<Convention> conv, int n) {
  if (in.filter) {
    if (!conv) throw UsageError("--convention is required for filter input");
    return lowpass_symbol(build_filter(*in.filter, in.filter->size()), *conv);
  }
  if (in.from_preset) {
    if (!conv) throw UsageError("--convention is required with --preset");
    if (*conv == Convention::paper_polyphase) return scaled(*in.realization, std::sqrt(static_cast<double>(n)));
  }
  return *in.realization;
}

Realization unit_dc_symbol(const Config& cfg, const Input& in, int n) {
  const Convention conv = *convention_of(cfg, true);
  const Realization given = symbol_of(in, conv, n);
  if (!given.is_scalar()) return given;
  const double expected = conv == Convention::paper_polyphase ? std::sqrt(static_cast<double>(n)) : 1.0;
  const Complex at_one = eval_scalar(given, 1.0);
  if (std::abs(at_one - expected) > 1e-10 * expected)
    throw ConventionError("symbol does not match --convention " + to_string(conv) + ": m(1) = " +
                          num(at_one.real()) + (at_one.imag() == 0 ? "" : " + " + num(at_one.imag()) + "i") +
                          ", expected " + num(expected));
  return conv == Convention::paper_polyphase ? scaled(given, 1.0 / expected) : given;
}

void require_scale(int n) {
  if (n < 2) throw UsageError("--N must be at least 2");
}

int cmd_filter_check(const Config& cfg, std::string& out) {
  const Convention conv = *convention_of(cfg, true);
  const Input in = load_input(cfg);
  if (!in.filter) throw FormatError("filter-check expects filter JSON with an \"N\" field");
  const int n = scale_of(cfg, in);
  require_scale(n);
  const WaveletFilter wf = build_filter(*in.filter, in.filter->size());
  const Realization m = lowpass_symbol(wf, conv);
  const double target = r1_target(conv, n);
  json report;
  report["N"] = n;
  report["convention"] = to_string(conv);
  report["tol"] = cfg.tol;
  report["unitarity_residual"] = unitarity_residual(wf, cfg.samples);
  report["inner_unitarity_residual"] = inner_unitarity_residual(wf.inner(), cfg.samples);
  report["normalization_residual"] = normalization_residual(wf);
  report["r1_target"] = target;
  report["r1_deviation"] = r1_deviation(m, n, target, 32);
  report["symbol"] = realization_to_json(m);
  bool ok = true;
  for (const char* key : {"unitarity_residual", "normalization_residual", "r1_deviation"})
    ok = ok && report[key].get<double>() <= cfg.tol;
  report["ok"] = ok;
  out = json_text(report) + "\n";
  return ok ? 0 : kExitInvariant;
}

int cmd_markov(const Config& cfg, std::string& out) {
  const Input in = load_input(cfg);
  const int n = in.filter || in.from_preset ? scale_of(cfg, in) : cfg.n.value_or(2);
  const Realization m = symbol_of(in, convention_of(cfg, in.filter || in.from_preset), n);
  if (!m.is_scalar()) throw FormatError("markov expects a scalar-valued realization");
  const Matrix gram = observability_gramian(m);
  const Matrix y = y_vector(m, gram);
  const CoefficientSequence c = autocorrelation_closed(m, cfg.nmax);
  out = "# Gamma = " + json_text(matrix_to_json(gram)) + "\n";
  out += "# Y = " + json_text(matrix_to_json(y)) + "\n";
  out += "n,re,im\n";
  const int span = static_cast<int>(cfg.nmax);
  for (int k = -span; k <= span; ++k) {
    const Complex v = c.scalar_at(k);
    out += std::to_string(k) + "," + num(v.real()) + "," + num(v.imag()) + "\n";
  }
  return 0;
}

struct Traces {
  double spectral, realization, coefficients;
};

Traces traces_of(const Realization& m, int n) {
  const double rho = m.state_dim() ? spectral_radius(m.A()) : 0.0;
  const CoefficientSequence c = autocorrelation_closed(m, default_coefficient_span(rho));
  return {trace_spectral(m, n), trace_realization(m, n), trace_coefficients(c, n)};
}

json traces_json(const Traces& t) {
  json j;
  j["spectral"] = t.spectral;
  j["realization"] = t.realization;
  j["coefficients"] = t.coefficients;
  j["spectral_minus_realization"] = t.spectral - t.realization;
  j["spectral_minus_coefficients"] = t.spectral - t.coefficients;
  return j;
}

int cmd_ruelle(const Config& cfg, std::string& out) {
  const Input in = load_input(cfg);
  const int n = scale_of(cfg, in);
  require_scale(n);
  const Realization m = symbol_of(in, convention_of(cfg, in.filter || in.from_preset), n);
  if (!m.is_scalar()) throw FormatError("ruelle expects a scalar-valued realization");
  const Window w = parse_window(cfg.window);
  int span = 0;
  for (int l : {w.row_min, w.row_max})
    for (int k : {w.col_min, w.col_max}) span = std::max(span, std::abs(n * l - k));
  const SlantedOperator op = slanted_matrix(autocorrelation_closed(m, static_cast<std::size_t>(span)), n, w);
  const Traces t = traces_of(m, n);
  if (cfg.format == "json") {
    const long long entries = static_cast<long long>(w.row_max - w.row_min + 1) * (w.col_max - w.col_min + 1);
    if (entries > 4096) throw UsageError("dense JSON output is limited to 4096 entries");
    json rows = json::array();
    for (int l = w.row_min; l <= w.row_max; ++l) {
      json row = json::array();
      for (int k = w.col_min; k <= w.col_max; ++k) row.push_back(complex_to_json(op.entry(l, k)));
      rows.push_back(std::move(row));
    }
    json report;
    report["N"] = n;
    report["window"] = {w.row_min, w.row_max, w.col_min, w.col_max};
    report["matrix"] = std::move(rows);
    report["trace"] = traces_json(t);
    out = json_text(report) + "\n";
    return 0;
  }
  if (cfg.format != "csv") throw UsageError("--format must be csv or json");
  out = "# trace_spectral = " + num(t.spectral) + "\n";
  out += "# trace_realization = " + num(t.realization) + "\n";
  out += "# trace_coefficients = " + num(t.coefficients) + "\n";
  out += "# spectral_minus_realization = " + num(t.spectral - t.realization) + "\n";
  out += "l,k,re,im\n";
  for (int l = w.row_min; l <= w.row_max; ++l)
    for (int k = w.col_min; k <= w.col_max; ++k) {
      const Complex v = op.entry(l, k);
      out += std::to_string(l) + "," + std::to_string(k) + "," + num(v.real()) + "," + num(v.imag()) + "\n";
    }
  return 0;
}

int cmd_trace(const Config& cfg, std::string& out) {
  const Input in = load_input(cfg);
  const int n = scale_of(cfg, in);
  require_scale(n);
  const Realization m = symbol_of(in, convention_of(cfg, in.filter || in.from_preset), n);
  json report = traces_json(traces_of(m, n));
  report["N"] = n;
  out = json_text(report) + "\n";
  return 0;
}

std::string r1_lines(double r1) {
  const bool pass = r1 <= 1.0 + 1e-9;
  return "# r1_max = " + num(r1) + "\n# r1_check = " + (pass ? "pass" : "fail") + "\n";
}

std::string certificate_lines(const L2Certificate& cert) {
  return "# l2_liminf = " + num(cert.liminf) + "\n# l2_bound = " + num(cert.bound) +
         "\n# l2_finite = " + (cert.finite ? "true" : "false") + "\n";
}

int cmd_cascade(const Config& cfg, std::string& out) {
  const Input in = load_input(cfg);
  const int n = scale_of(cfg, in);
  require_scale(n);
  const Realization m = unit_dc_symbol(cfg, in, n);
  if (!m.is_scalar()) throw FormatError("cascade expects a scalar-valued symbol");
  const std::vector<double> ws = parse_grid(cfg.grid);
  const double r1 = r1_max(m, n, 32);
  if (r1 > 1.0 + 1e-9) {
    out = r1_lines(r1);
    return kExitInvariant;
  }
  const Cascade cascade(m, n);
  out = "w,re,im,abs\n";
  for (double w : ws) {
    const Complex v = cascade(w, cfg.tol);
    out += num(w) + "," + num(v.real()) + "," + num(v.imag()) + "," + num(std::abs(v)) + "\n";
  }
  const L2Certificate cert = l2_norm_estimate(m, n, cfg.kmax, cfg.quad);
  out += certificate_lines(cert) + r1_lines(cert.r1_max);
  return cert.finite ? 0 : kExitInvariant;
}

int cmd_l2check(const Config& cfg, std::string& out) {
  const Input in = load_input(cfg);
  const int n = scale_of(cfg, in);
  require_scale(n);
  const Realization m = unit_dc_symbol(cfg, in, n);
  if (!m.is_scalar()) throw FormatError("l2check expects a scalar-valued symbol");
  const double r1 = r1_max(m, n, 32);
  if (r1 > 1.0 + 1e-9) {
    out = r1_lines(r1);
    return kExitInvariant;
  }
  const L2Certificate cert = l2_norm_estimate(m, n, cfg.kmax, cfg.quad);
  out = "k,integral\n";
  for (std::size_t k = 0; k < cert.integrals.size(); ++k) out += std::to_string(k) + "," + num(cert.integrals[k]) + "\n";
  out += certificate_lines(cert) + r1_lines(cert.r1_max);
  return cert.finite ? 0 : kExitInvariant;
}

/// Checks the product constructions of a square realization against direct
/// evaluation at seeded random points, and runs the Toeplitz and infinite
/// product routes when their hypotheses hold.
int cmd_product_demo(const Config& cfg, std::string& out) {
  const Input in = load_input(cfg);
  const int n = in.filter || in.from_preset ? scale_of(cfg, in) : cfg.n.value_or(2);
  Realization r = in.filter ? build_filter(*in.filter, in.filter->size()).realization()
                            : symbol_of(in, convention_of(cfg, in.from_preset), n);
  if (r.output_dim() != r.input_dim()) throw FormatError("product-demo expects a square realization");
  const std::uint64_t seed = seed_from_env();
  std::mt19937_64 rng(seed);
  const double rho = r.state_dim() ? spectral_radius(r.A()) : 0.0;
  const double lo = 1.2 * std::max(1.0, rho) + 0.1, hi = 3.0 * std::max(1.0, rho) + 0.1;
  auto point = [&] {
    const double radius = std::uniform_real_distribution<double>(lo, hi)(rng);
    const double angle = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
    return std::polar(radius, angle);
  };
  auto rel = [](const Matrix& a, const Matrix& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); };

  const Realization rr = product(r, r);
  double product_residual = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Complex z = point();
    product_residual = std::max(product_residual, rel(eval(rr, z), eval(r, z) * eval(r, z)));
  }
  const std::vector<Realization> copies(3, r);
  const MultiVarRealization mv = multivar_product(copies);
  double multivar_residual = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::vector<Complex> zs{point(), point(), point()};
    multivar_residual =
        std::max(multivar_residual, rel(eval_multivar(mv, zs), eval(r, zs[0]) * eval(r, zs[1]) * eval(r, zs[2])));
  }

  json report;
  report["seed"] = seed;
  report["tol"] = cfg.tol;
  report["product_residual"] = product_residual;
  report["multivar_residual"] = multivar_residual;
  bool ok = product_residual <= cfg.tol && multivar_residual <= cfg.tol;

  std::vector<Complex> dyadic;
  for (int k = 1; k <= 40; ++k) dyadic.push_back(std::polar(1.0, std::numbers::pi / std::ldexp(1.0, k)));

  if (r.state_dim() == 0 || spectral_radius(r.D()) < 1.0) {
    json toeplitz;
    toeplitz["symbol_norm"] = toeplitz_norm_estimate(r, cfg.samples);
    double section_residual = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) {
      const std::span<const Complex> zs(dyadic.data(), k);
      Matrix direct = Matrix::identity(r.output_dim());
      for (const Complex& z : zs) direct = direct * eval(r, z);
      section_residual = std::max(section_residual, rel(eval_section(toeplitz_section(r, k), zs), direct));
    }
    toeplitz["section_residual"] = section_residual;
    ok = ok && section_residual <= cfg.tol;
    report["toeplitz"] = toeplitz;
  } else {
    report["toeplitz"] = nullptr;
  }

  if (frobenius_norm(eval(r, 1.0) - Matrix::identity(r.output_dim())) <= 1e-10) {
    const ProductResult p = product_along_points(r, dyadic, cfg.tol);
    json inf;
    inf["value"] = matrix_to_json(p.value);
    inf["constant"] = p.constant;
    inf["cut"] = p.cut;
    inf["tail_bound"] = p.tail_bound;
    report["infinite_product"] = inf;
  } else {
    report["infinite_product"] = nullptr;
  }
  report["ok"] = ok;
  out = json_text(report) + "\n";
  return ok ? 0 : kExitInvariant;
}

void add_common(CLI::App* sub, Config& cfg) {
  sub->add_option("--input", cfg.input, "Realization or filter JSON file");
  sub->add_option("--output", cfg.output, "Output file (default: standard output)");
  sub->add_option("--preset", cfg.preset, "Built-in input: haar, daubechies4 or identity");
  sub->add_option("--N", cfg.n, "Scaling factor");
  sub->add_option("--tol", cfg.tol, "Tolerance");
  sub->add_option("--convention", cfg.convention, "Symbol normalization: unit-dc or paper-polyphase");
  sub->add_option("--grid", cfg.grid, "Frequency grid lo,hi,step (cascade)");
  sub->add_option("--window", cfg.window, "Slanted matrix window rowmin,rowmax,colmin,colmax (ruelle)");
  sub->add_option("--format", cfg.format, "csv or json (ruelle)");
  sub->add_option("--nmax", cfg.nmax, "Largest |n| for autocorrelation output (markov)");
  sub->add_option("--kmax", cfg.kmax, "Largest k for the L2 integrals");
  sub->add_option("--quad", cfg.quad, "Simpson points per unit length for the L2 integrals");
  sub->add_option("--samples", cfg.samples, "Circle samples for norm and unitarity checks");
}

int run(const std::string& command, const Config& cfg, std::string& out) {
  if (command == "filter-check") return cmd_filter_check(cfg, out);
  if (command == "markov") return cmd_markov(cfg, out);
  if (command == "ruelle") return cmd_ruelle(cfg, out);
  if (command == "trace") return cmd_trace(cfg, out);
  if (command == "cascade") return cmd_cascade(cfg, out);
  if (command == "l2check") return cmd_l2check(cfg, out);
  return cmd_product_demo(cfg, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Computations with rational matrix functions in state-space form"};
  app.require_subcommand(1);
  Config cfg;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"filter-check", "Check unitarity, M(1) = I and R1 for a wavelet filter"},
      {"markov", "Autocorrelation coefficients c_n as CSV"},
      {"ruelle", "Slanted transfer matrix window and trace values"},
      {"trace", "Trace of the transfer operator by three routes"},
      {"cascade", "Father wavelet transform on a frequency grid"},
      {"l2check", "L2 integrals of the partial products"},
      {"product-demo", "Product realizations against direct evaluation"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitMalformed;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::string out;
  int code = 0;
  try {
    code = run(command, cfg, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const FormatError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const json::exception& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const ConventionError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const DimensionError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::domain_error& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::exception& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  }

  if (cfg.output.empty()) {
    std::cout << out;
  } else {
    std::ofstream file(cfg.output, std::ios::binary);
    file << out;
    if (!file) {
      std::cerr << "error: cannot write " << cfg.output << "\n";
      return kExitMalformed;
    }
  }
  if (code == kExitInvariant) std::cerr << "invariant failure (see report)\n";
  return code;
}
