// macphail-lab: construct the explicit unconditionally-summable sequences,
// certify the bounds behind them, and evaluate the subset-sum functional G.
//
// Exit codes: 0 success / all checks pass, 1 a certified bound failed,
// 2 configuration error, 3 compute budget exceeded, 4 I/O failure.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "macphail/big_uint.hpp"
#include "macphail/blocks.hpp"
#include "macphail/certify.hpp"
#include "macphail/config.hpp"
#include "macphail/functional.hpp"
#include "macphail/io.hpp"
#include "macphail/kernels.hpp"
#include "macphail/log_domain.hpp"
#include "macphail/rational.hpp"
#include "macphail/sequence.hpp"

namespace {

using namespace macphail;

struct Options {
  std::string construction = "complex-dft";
  double p = 2.0;
  uint64_t alpha = 2;
  uint64_t k_max = 3;
  std::string r_text = "1.9";
  double delta = 0.3;
  uint64_t trials = 200;
  uint64_t seed = 1;
  double tolerance = 1e-9;
  double threshold = 1e6;
  uint64_t j_max = 100000;
  bool coefficients = false;
  std::string method = "auto";
  std::string output = "-";
  std::string format = "csv";
  std::string input;
  std::string walsh_fault;  // "i,j" test hook
};

Field parse_field(const std::string& name) {
  if (name == "complex-dft") return Field::complex_dft;
  if (name == "real-walsh") return Field::real_walsh;
  throw std::invalid_argument("construction must be complex-dft or real-walsh");
}

// resolve against MACPHAIL_LAB_OUT_DIR for relative paths
std::string resolve_output(const std::string& path) {
  if (path == "-" || path.empty()) return path;
  if (path.front() == '/') return path;
  const char* dir = std::getenv("MACPHAIL_LAB_OUT_DIR");
  if (!dir || !*dir) return path;
  std::string joined(dir);
  if (joined.back() != '/') joined.push_back('/');
  return joined + path;
}

void emit(const Table& table, const Options& opts, const std::string& path_override = "") {
  std::string path = resolve_output(path_override.empty() ? opts.output : path_override);
  std::ostringstream buffer;
  if (opts.format == "csv")
    write_csv(table, buffer);
  else
    write_json(table, buffer);
  if (path == "-" || path.empty()) {
    std::cout << buffer.str();
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  os << buffer.str();
  os.flush();
  if (!os.good()) throw std::ios_base::failure("write to '" + path + "' failed");
}

std::string fmt(double v) { return format_double(v); }

// honor the config file first, flags override
void apply_config_file(Options& opts, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::ios_base::failure("cannot read config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(is);
  if (j.contains("construction")) opts.construction = j["construction"].get<std::string>();
  if (j.contains("p")) opts.p = j["p"].get<double>();
  if (j.contains("alpha")) opts.alpha = j["alpha"].get<uint64_t>();
  if (j.contains("k_max")) opts.k_max = j["k_max"].get<uint64_t>();
  if (j.contains("r")) opts.r_text = j["r"].is_string() ? j["r"].get<std::string>()
                                                        : j["r"].dump();
  if (j.contains("delta")) opts.delta = j["delta"].get<double>();
  if (j.contains("trials")) opts.trials = j["trials"].get<uint64_t>();
  if (j.contains("seed")) opts.seed = j["seed"].get<uint64_t>();
  if (j.contains("tolerance")) opts.tolerance = j["tolerance"].get<double>();
  if (j.contains("threshold")) opts.threshold = j["threshold"].get<double>();
  if (j.contains("j_max")) opts.j_max = j["j_max"].get<uint64_t>();
  if (j.contains("format")) opts.format = j["format"].get<std::string>();
  if (j.contains("output")) opts.output = j["output"].get<std::string>();
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

int cmd_construct(const Options& opts) {
  Config cfg = make_config(parse_field(opts.construction), opts.p, opts.alpha, opts.tolerance);
  if (opts.k_max < 1) throw std::invalid_argument("k-max must be >= 1");
  if (opts.coefficients && opts.k_max > 5)
    throw BudgetError("coefficient output is limited to k-max <= 5");
  if (opts.coefficients && (opts.output == "-" || opts.output.empty()))
    throw std::invalid_argument("--coefficients needs --output (a second file is written)");

  MaterializationPolicy policy;
  BigUInt j_end = block_start(static_cast<uint32_t>(opts.k_max), cfg.alpha) * BigUInt(2) -
                  BigUInt(1);
  BigUInt j_limit = BigUInt(opts.j_max);
  if (j_end < j_limit) j_limit = j_end;

  Table table;
  table.command = "construct";
  table.meta = {{"construction", opts.construction},
                {"p", fmt(cfg.p)},
                {"alpha", std::to_string(cfg.alpha)},
                {"k_max", std::to_string(opts.k_max)},
                {"j_max", std::to_string(opts.j_max)},
                {"seed", std::to_string(opts.seed)}};
  table.columns = {"j", "k", "r", "norm", "norm_log_alpha", "scaling", "scaling_log_alpha"};

  Table coeffs;
  coeffs.command = "construct-coefficients";
  coeffs.meta = table.meta;
  coeffs.columns = {"j", "k", "r", "s", "coordinate", "coeff_re", "coeff_im"};

  for (BigUInt j(1); j <= j_limit; j += BigUInt(1)) {
    Term term = build_term(j, cfg, policy);
    std::vector<Cell> row;
    row.emplace_back(j.to_decimal());
    if (term.is_zero()) {
      row.emplace_back(std::monostate{});
      row.emplace_back(std::monostate{});
      row.emplace_back(0.0);
      row.emplace_back(std::monostate{});
      row.emplace_back(std::monostate{});
      row.emplace_back(std::monostate{});
    } else {
      row.emplace_back(static_cast<int64_t>(term.k));
      row.emplace_back(term.row.to_decimal());
      double nlog = norm_log(term.k);
      row.emplace_back(pow_alpha(cfg.alpha, nlog));
      row.emplace_back(nlog);
      row.emplace_back(pow_alpha(cfg.alpha, term.scaling_log));
      row.emplace_back(term.scaling_log);
      if (opts.coefficients && term.support_offset.fits_uint64() &&
          term.support_offset.to_uint64() <= policy.dense_limit) {
        Eigen::VectorXcd values = term_dense(term, policy);
        uint64_t n = term.support_offset.to_uint64();
        for (uint64_t s = 1; s <= n; ++s) {
          std::complex<double> v = values[static_cast<Eigen::Index>(s - 1)];
          coeffs.rows.push_back({j.to_decimal(), static_cast<int64_t>(term.k),
                                 term.row.to_decimal(), static_cast<int64_t>(s),
                                 (term.support_offset + BigUInt(s - 1)).to_decimal(),
                                 v.real(), v.imag()});
        }
      }
    }
    table.rows.push_back(std::move(row));
  }
  emit(table, opts);
  if (opts.coefficients) emit(coeffs, opts, opts.output + ".coefficients");
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckRow {
  std::string check;
  uint32_t k;
  uint64_t n;
  double p;
  uint64_t trials;
  double observed;
  double bound;
  bool pass;
};

int cmd_verify(const Options& opts) {
  Config cfg = make_config(parse_field(opts.construction), opts.p, opts.alpha, opts.tolerance);
  if (opts.k_max < 1 || opts.k_max > 5)
    throw std::invalid_argument("verify supports k-max between 1 and 5");
  std::optional<std::pair<uint64_t, uint64_t>> fault;
  if (!opts.walsh_fault.empty()) {
    if (cfg.field != Field::real_walsh)
      throw std::invalid_argument("the Walsh fault hook needs --construction real-walsh");
    size_t comma = opts.walsh_fault.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("the fault hook takes 'i,j'");
    fault = {std::stoull(opts.walsh_fault.substr(0, comma)),
             std::stoull(opts.walsh_fault.substr(comma + 1))};
  }

  MaterializationPolicy policy;
  std::vector<CheckRow> checks;
  const double tol = cfg.tolerance;

  for (uint32_t k = 1; k <= opts.k_max; ++k) {
    BigUInt jk_big = block_start(k, cfg.alpha);
    if (!jk_big.fits_uint64() || jk_big.to_uint64() > policy.stream_limit)
      throw BudgetError("block " + std::to_string(k) + " exceeds the stream limit");
    uint64_t n = jk_big.to_uint64();
    bool dense_block = n <= policy.dense_limit;

    // 1. kernel orthogonality
    {
      OrthogonalityReport report;
      uint64_t pair_samples = std::min<uint64_t>(opts.trials, 64);
      if (cfg.field == Field::complex_dft) {
        report = verify_orthogonality(DftKernel(n), tol, pair_samples,
                                      derive_seed(opts.seed, 10 + k));
      } else {
        WalshKernel kernel(detail::walsh_levels(n));
        if (fault) kernel.inject_fault(fault->first, fault->second);
        report = verify_orthogonality(kernel, tol, pair_samples,
                                      derive_seed(opts.seed, 10 + k));
      }
      checks.push_back({"orthogonality", k, n, cfg.p, report.pairs_checked,
                        report.max_deviation, report.threshold, report.pass});
    }

    // 2. Schur bound on sampled unit pairs (dense blocks)
    if (dense_block) {
      double worst = 0.0;
      double bound = schur_bound(n, cfg.p) * (1.0 + tol);
      for (uint64_t trial = 0; trial < opts.trials; ++trial) {
        auto y1 = random_dual_unit(n, cfg.pstar, derive_seed(opts.seed, 1000 * k + trial),
                                   cfg.field);
        auto y2 = random_dual_unit(n, std::numeric_limits<double>::infinity(),
                                   derive_seed(opts.seed + 1, 1000 * k + trial), cfg.field);
        double value;
        if (cfg.field == Field::complex_dft) {
          DftKernel kernel(n);
          value = std::abs(bilinear_form(kernel, y1.phi.dense, y2.phi.dense));
        } else {
          WalshKernel kernel(detail::walsh_levels(n));
          value = std::abs(
              bilinear_form(kernel, y1.phi.dense.real().eval(), y2.phi.dense.real().eval()));
        }
        worst = std::max(worst, value);
      }
      checks.push_back({"schur", k, n, cfg.p, opts.trials, worst, bound, worst <= bound});
    }

    // 3. block dual-sum supremum sampling
    {
      uint64_t trials = dense_block ? opts.trials : std::min<uint64_t>(opts.trials, 10);
      auto est = estimate_block_sup(k, trials, derive_seed(opts.seed, 20 + k), cfg, policy);
      double bound = est.bound * (1.0 + tol);
      checks.push_back(
          {"block_sup", k, n, cfg.p, trials, est.observed, bound, est.observed <= bound});
    }
  }

  // 4. finite-subset norms against the tail certificate
  {
    Xoshiro256pp rng(derive_seed(opts.seed, 99));
    uint64_t subset_trials = std::min<uint64_t>(opts.trials, 20);
    for (uint32_t k_start = 1; k_start <= opts.k_max; ++k_start) {
      double worst = 0.0;
      for (uint64_t trial = 0; trial < subset_trials; ++trial) {
        std::vector<uint64_t> M;
        for (uint32_t k = k_start; k <= opts.k_max; ++k) {
          uint64_t jk = block_start(k, cfg.alpha).to_uint64();
          uint64_t cap = std::min<uint64_t>(jk, 50);
          uint64_t count = rng.below(cap) + 1;
          for (uint64_t c = 0; c < count; ++c) M.push_back(jk + rng.below(jk));
        }
        worst = std::max(worst, finite_subset_norm(M, cfg, policy));
      }
      double bound = tail_bound(k_start, cfg).bound * (1.0 + tol);
      checks.push_back({"subset_norm", k_start, 0, cfg.p, subset_trials, worst, bound,
                        worst <= bound});
    }
  }

  Table table;
  table.command = "verify";
  table.meta = {{"construction", opts.construction},
                {"p", fmt(cfg.p)},
                {"alpha", std::to_string(cfg.alpha)},
                {"k_max", std::to_string(opts.k_max)},
                {"trials", std::to_string(opts.trials)},
                {"seed", std::to_string(opts.seed)},
                {"tolerance", fmt(tol)}};
  table.columns = {"check", "k", "n", "p", "trials", "observed", "bound", "pass"};
  bool all_pass = true;
  for (const auto& c : checks) {
    table.rows.push_back({c.check, static_cast<int64_t>(c.k),
                          c.n ? Cell(static_cast<int64_t>(c.n)) : Cell(std::monostate{}),
                          c.p, static_cast<int64_t>(c.trials), c.observed, c.bound,
                          std::string(c.pass ? "true" : "false")});
    if (!c.pass) {
      all_pass = false;
      std::cerr << "bound violation: check=" << c.check << " k=" << c.k << " n=" << c.n
                << " p=" << c.p << " observed=" << fmt(c.observed)
                << " bound=" << fmt(c.bound) << "\n";
    }
  }
  table.meta.emplace_back("all_pass", all_pass ? "true" : "false");
  emit(table, opts);
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// diverge
// ---------------------------------------------------------------------------

int cmd_diverge(const Options& opts) {
  Rational r = parse_decimal(opts.r_text);
  if (r.num <= 0) throw std::invalid_argument("r must be positive");
  if (r.num > 2 * r.den) throw std::invalid_argument("r > 2 rejected (norms are summable there)");
  Config cfg = make_config(parse_field(opts.construction), opts.p, opts.alpha, opts.tolerance);
  if (opts.k_max < 1) throw std::invalid_argument("k-max must be >= 1");

  const bool diverging = r.num < 2 * r.den;
  Table table;
  table.command = "diverge";
  table.meta = {{"construction", opts.construction},
                {"alpha", std::to_string(cfg.alpha)},
                {"r", opts.r_text},
                {"k_max", std::to_string(opts.k_max)},
                {"threshold", fmt(opts.threshold)}};
  if (diverging) {
    DivergenceWitness witness = divergence_witness(r, opts.threshold, cfg);
    table.meta.emplace_back("k0", std::to_string(witness.k0));
    table.meta.emplace_back("witness_block", std::to_string(witness.witness_block));
    table.meta.emplace_back("witness_partial_log_alpha", fmt(witness.partial_log_alpha));
    table.meta.emplace_back("threshold_log_alpha", fmt(witness.threshold_log_alpha));
  } else {
    // r = 2: the series of r-th powers converges geometrically
    double limit = 1.0 / (1.0 - pow_alpha(cfg.alpha, -2.0));
    table.meta.emplace_back("geometric_limit", fmt(limit));
  }
  table.columns = {"k", "term_log_alpha", "cumulative_log_alpha", "cumulative"};

  const double ln_alpha = ln_of_alpha(cfg.alpha);
  double r_value = r.value();
  LogSum acc;
  for (uint32_t k = 1; k <= opts.k_max; ++k) {
    double term_log = power_term_log(r_value, k);
    acc.add_ln(term_log * ln_alpha);
    double cum_log = to_log_alpha(acc.ln, cfg.alpha);
    table.rows.push_back({static_cast<int64_t>(k), term_log, cum_log,
                          pow_alpha(cfg.alpha, cum_log)});
  }
  emit(table, opts);
  return 0;
}

// ---------------------------------------------------------------------------
// macphail
// ---------------------------------------------------------------------------

int cmd_macphail(const Options& opts) {
  if (!opts.input.empty()) {
    std::ifstream is(opts.input);
    if (!is) throw std::ios_base::failure("cannot read '" + opts.input + "'");
    ImportedSequence imported = parse_finite_sequence(is);
    size_t count = imported.field == Field::complex_dft ? imported.complex_seq.vectors.size()
                                                        : imported.real_seq.vectors.size();
    bool exhaustive = opts.method == "exact" ||
                      (opts.method == "auto" && count <= kExhaustiveLimit);
    if (opts.method != "auto" && opts.method != "exact" && opts.method != "random")
      throw std::invalid_argument("method must be auto, exact or random");
    GReport report;
    if (imported.field == Field::complex_dft)
      report = exhaustive ? g_exact(imported.complex_seq)
                          : g_random(imported.complex_seq, opts.trials, opts.seed);
    else
      report = exhaustive ? g_exact(imported.real_seq)
                          : g_random(imported.real_seq, opts.trials, opts.seed);
    std::string subset;
    for (size_t i = 0; i < report.subset.size(); ++i) {
      if (i) subset += " ";
      subset += std::to_string(report.subset[i]);
    }
    Table table;
    table.command = "macphail";
    table.meta = {{"input", opts.input},
                  {"field", imported.field == Field::complex_dft ? "complex" : "real"},
                  {"p", fmt(imported.field == Field::complex_dft ? imported.complex_seq.p
                                                                 : imported.real_seq.p)},
                  {"vectors", std::to_string(count)},
                  {"seed", std::to_string(opts.seed)}};
    table.columns = {"method", "value", "trials", "subset"};
    table.rows.push_back({std::string(report.method == GMethod::exhaustive ? "exact"
                                                                           : "randomized"),
                          report.value, static_cast<int64_t>(report.trials), subset});
    emit(table, opts);
    return 0;
  }

  Config cfg = make_config(parse_field(opts.construction), opts.p, opts.alpha, opts.tolerance);
  if (opts.k_max < 1) throw std::invalid_argument("k-max must be >= 1");
  auto curve = mu_upper_curve(static_cast<uint32_t>(opts.k_max), cfg, opts.trials, opts.seed);
  Table table;
  table.command = "macphail";
  table.meta = {{"construction", opts.construction},
                {"p", fmt(cfg.p)},
                {"alpha", std::to_string(cfg.alpha)},
                {"k_max", std::to_string(opts.k_max)},
                {"trials", std::to_string(opts.trials)},
                {"seed", std::to_string(opts.seed)}};
  table.columns = {"k", "analytic_bound", "bound_log_alpha", "method", "estimate", "trials"};
  for (const auto& row : curve) {
    table.rows.push_back({static_cast<int64_t>(row.k), row.bound, row.bound_log_alpha,
                          row.method,
                          row.observed ? Cell(*row.observed) : Cell(std::monostate{}),
                          static_cast<int64_t>(row.trials)});
  }
  emit(table, opts);
  return 0;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

int cmd_export(const Options& opts) {
  if (opts.input.empty()) throw std::invalid_argument("export needs --input <report.json>");
  std::ifstream is(opts.input);
  if (!is) throw std::ios_base::failure("cannot read '" + opts.input + "'");
  Table table = read_json_table(is);
  emit(table, opts);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // single-threaded kernels keep rerun outputs byte-identical regardless of
  // the OpenMP environment
  Eigen::setNbThreads(1);

  Options opts;
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];

  try {
    if (!config_path.empty()) apply_config_file(opts, config_path);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"explicit unconditionally-convergent lp series and their certificates"};
  app.set_version_flag("--version", "macphail-lab 0.1.0");
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    sub->add_option("--construction", opts.construction, "complex-dft or real-walsh");
    sub->add_option("--p", opts.p, "lp exponent in [1,2]");
    sub->add_option("--alpha", opts.alpha, "block base, integer >= 2");
    sub->add_option("--k-max", opts.k_max, "last block to process");
    sub->add_option("--trials", opts.trials, "sampling trials");
    sub->add_option("--seed", opts.seed, "RNG seed");
    sub->add_option("--tolerance", opts.tolerance, "relative tolerance for bounds");
    sub->add_option("--output", opts.output, "output path ('-' for stdout)");
    sub->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* construct = app.add_subcommand("construct", "term table of the construction");
  add_common(construct);
  construct->add_option("--j-max", opts.j_max, "cap on enumerated series indices");
  construct->add_flag("--coefficients", opts.coefficients,
                      "also dump dense-block coefficients (second file)");

  CLI::App* verify = app.add_subcommand("verify", "run the certification checks");
  add_common(verify);
  verify->add_option("--inject-walsh-fault", opts.walsh_fault,
                     "test hook: flip the sign of Walsh entry i,j");

  CLI::App* diverge = app.add_subcommand("diverge", "power-sum divergence table");
  add_common(diverge);
  diverge->add_option("--r", opts.r_text, "power exponent as a decimal in (0,2]");
  diverge->add_option("--threshold", opts.threshold, "partial-sum threshold to witness");

  CLI::App* macphail_cmd = app.add_subcommand("macphail", "G functional and mu upper curve");
  add_common(macphail_cmd);
  macphail_cmd->add_option("--input", opts.input, "JSON finite sequence to evaluate");
  macphail_cmd->add_option("--method", opts.method, "auto, exact or random");

  CLI::App* export_cmd = app.add_subcommand("export", "re-serialize a prior JSON report");
  export_cmd->add_option("--config", config_path, "JSON config file; flags override its values");
  export_cmd->add_option("--input", opts.input, "prior JSON report")->required();
  export_cmd->add_option("--output", opts.output, "output path ('-' for stdout)");
  export_cmd->add_option("--format", opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (construct->parsed()) return cmd_construct(opts);
    if (verify->parsed()) return cmd_verify(opts);
    if (diverge->parsed()) return cmd_diverge(opts);
    if (macphail_cmd->parsed()) return cmd_macphail(opts);
    if (export_cmd->parsed()) return cmd_export(opts);
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
