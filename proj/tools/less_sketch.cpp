#include <cmath>
#include <concepts>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lessketch/lessketch.hpp"

using namespace lessketch;

namespace {

// A bad flag value. Reported with exit code 2.
struct FlagError {
  std::string flag;
  std::string message;
};

void check(bool ok, const char* flag, const std::string& message) {
  if (!ok) throw FlagError{flag, message};
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string show(const std::string& v) { return v; }
template <std::unsigned_integral T>
std::string show(T v) {
  return std::to_string(v);
}
std::string show(double v) { return format_full(v); }
template <class T>
std::string show(const std::vector<T>& v) {
  std::vector<std::string> parts;
  for (const auto& x : v) parts.push_back(show(x));
  return join(parts, ",");
}

// Registers flags on one subcommand and remembers how to print their
// resolved values, so the config line is itself a valid command line.
class Command {
 public:
  Command(CLI::App& parent, std::string path, const std::string& name, const std::string& about)
      : app_(parent.add_subcommand(name, about)), path_(std::move(path)) {
    app_->add_option("--seed", seed_, "master seed")
        ->envname("LESS_SKETCH_SEED")
        ->capture_default_str();
    app_->add_option("--jobs", jobs_, "worker threads (output does not depend on it)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    echo_.push_back([this] { return "--seed=" + show(seed_); });
  }

  template <class T>
  CLI::Option* flag(const std::string& name, T& var, const std::string& about) {
    auto* opt = app_->add_option(name, var, about)->capture_default_str();
    if constexpr (std::is_same_v<T, std::string>)
      opt->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    else if constexpr (requires { var.push_back(var.front()); })
      opt->delimiter(',');
    echo_.push_back([name, &var] {
      std::string v = show(var);
      if (v.empty()) return v;  // empty means "not set"; the flag is omitted
      if (v.find(' ') != std::string::npos) v = "'" + v + "'";
      return name + "=" + v;
    });
    return opt;
  }

  std::string config() const {
    std::vector<std::string> parts{path_};
    for (const auto& e : echo_)
      if (auto part = e(); !part.empty()) parts.push_back(part);
    return join(parts, " ");
  }

  CLI::App* app() const { return app_; }
  std::uint64_t seed() const { return seed_; }
  unsigned jobs() const { return jobs_; }

 private:
  CLI::App* app_;
  std::string path_;
  std::uint64_t seed_ = 0;
  unsigned jobs_ = 1;
  std::vector<std::function<std::string()>> echo_;
};

void print_config(const Command& cmd) { std::cout << "# config: " << cmd.config() << '\n'; }

struct MatrixFlags {
  std::string kind = "gaussian";
  std::size_t n = 2048;
  std::size_t d = 16;
  std::size_t block = 0;
  std::uint64_t matrix_seed = 0;

  void add(Command& cmd, std::size_t default_n, std::size_t default_d) {
    n = default_n;
    d = default_d;
    cmd.flag("--matrix", kind, "gaussian | heavy_tail | coherent_block | theorem4");
    cmd.flag("--n", n, "rows of the data matrix");
    cmd.flag("--d", d, "columns of the data matrix");
    cmd.flag("--block", block, "unit-leverage rows for coherent_block (0 means d)");
    cmd.flag("--matrix-seed", matrix_seed, "seed of the data matrix");
  }

  TallMatrix build() {
    check(d >= 1, "--d", "must be positive");
    check(n >= d, "--n", "must be at least --d");
    MatrixKind mk;
    try {
      mk = parse_matrix_kind(kind);
    } catch (const Error& e) {
      throw FlagError{"--matrix", e.what()};
    }
    if (mk == MatrixKind::CoherentBlock) {
      if (block == 0) block = d;
      check(block <= d, "--block", "must not exceed --d");
    }
    if (mk == MatrixKind::Theorem4) check(n == 2 * d, "--n", "theorem4 needs --n equal to 2*d");
    return generate_matrix(mk, n, d, matrix_seed, block);
  }
};

struct SketchFlags {
  std::string kind = "less";
  std::string extra;

  void add(Command& cmd) {
    cmd.flag("--kind", kind, "gaussian | rademacher | uniform | haar | rowsampling | less | srht | sparse");
    cmd.flag("--sketch", extra, "extra key=value sketch tokens, e.g. \"profile=approx rht=1\"");
  }

  SketchConfig config(std::size_t m, std::uint64_t seed) const {
    try {
      parse_sketch_kind(kind);
    } catch (const Error& e) {
      throw FlagError{"--kind", e.what()};
    }
    try {
      return parse_sketch_config("kind=" + kind + " m=" + std::to_string(m) +
                                 " seed=" + std::to_string(seed) + " " + extra);
    } catch (const Error& e) {
      throw FlagError{"--sketch", e.what()};
    }
  }
};

std::optional<double> parse_gamma(const std::string& text, const char* flag) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double g = std::stod(text, &used);
    check(used == text.size() && g > 0.0, flag, "must be a positive number or auto");
    return g;
  } catch (const std::logic_error&) {
    throw FlagError{flag, "must be a positive number or auto"};
  }
}

// "a..b" or a comma separated list.
std::vector<std::size_t> parse_range(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) {
    check(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos, flag,
          "expected a positive integer, got '" + s + "'");
    return static_cast<std::size_t>(std::stoull(s));
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::size_t lo = number(text.substr(0, dots));
    const std::size_t hi = number(text.substr(dots + 2));
    check(lo >= 1 && lo <= hi, flag, "range must satisfy 1 <= lo <= hi");
    for (std::size_t b = lo; b <= hi; ++b) out.push_back(b);
  } else {
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(number(item));
  }
  check(!out.empty(), flag, "is empty");
  return out;
}

std::string pass(bool ok) { return ok ? "pass" : "fail"; }

Matrix random_symmetric(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  RandomStream stream(seed, index);
  Matrix f(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) f(i, j) = f(j, i) = stream.normal();
  return f;
}

double trace_of_square(const Matrix& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) acc += b(i, j) * b(j, i);
  return acc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LESS sketching experiments; CSV on stdout, diagnostics on stderr"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::function<void()> run;
  auto on = [&](Command& cmd, std::function<void()> body) {
    cmd.app()->callback([&run, body] { run = body; });
  };

  // bias-sweep
  Command sweep(app, "bias-sweep", "bias-sweep", "inversion bias of the debiased estimator over m");
  MatrixFlags sweep_a;
  SketchFlags sweep_s;
  std::vector<std::size_t> sweep_m{64, 128, 256, 512};
  std::size_t sweep_replicas = 20000;
  std::string sweep_gamma = "auto";
  double sweep_clip = kDefaultClipThreshold;
  sweep_s.add(sweep);
  sweep_a.add(sweep, 2048, 16);
  sweep.flag("--m", sweep_m, "sketch sizes");
  sweep.flag("--replicas", sweep_replicas, "replicas per sketch size");
  sweep.flag("--gamma", sweep_gamma, "scaling of the sketched Gram matrix (auto: m/(m-d))");
  sweep.flag("--clip", sweep_clip, "replicas with eta above this are rejected");
  on(sweep, [&] {
    const TallMatrix a = sweep_a.build();
    const auto gamma = parse_gamma(sweep_gamma, "--gamma");
    check(sweep_replicas >= 100, "--replicas", "must be at least 100");
    for (std::size_t m : sweep_m) check(m > a.d(), "--m", "every value must exceed --d");
    sweep_s.config(sweep_m.front(), sweep.seed());
    print_config(sweep);
    std::cout << bias_report_csv_header() << '\n';
    for (std::size_t m : sweep_m) {
      const auto spec = resolve(sweep_s.config(m, sweep.seed()), a);
      const auto r = inversion_bias_report(a, spec, sweep_replicas, sweep.seed(), sweep_clip, gamma,
                                           sweep.jobs());
      std::cout << to_csv_row(r) << '\n' << std::flush;
      std::cerr << "m=" << m << " replicas_used=" << r.replicas_used
                << " trace=" << format_number(r.whitened_trace) << '\n';
    }
  });

  // subspace-check
  Command sub(app, "subspace-check", "subspace-check", "failure rate of the eta-embedding property");
  MatrixFlags sub_a;
  SketchFlags sub_s;
  std::size_t sub_m = 1280, sub_trials = 200;
  double sub_eta = 0.5;
  sub_s.add(sub);
  sub_a.add(sub, 4096, 32);
  sub.flag("--m", sub_m, "sketch size");
  sub.flag("--eta", sub_eta, "embedding accuracy");
  sub.flag("--trials", sub_trials, "independent sketches");
  on(sub, [&] {
    const TallMatrix a = sub_a.build();
    check(sub_m >= 1, "--m", "must be positive");
    check(sub_eta >= 0.0 && sub_eta < 1.0, "--eta", "must be in [0, 1)");
    check(sub_trials >= 50, "--trials", "must be at least 50");
    const auto spec = resolve(sub_s.config(sub_m, sub.seed()), a);
    print_config(sub);
    const double rate = subspace_embedding_check(a, spec, sub_eta, sub_trials, sub.seed(), sub.jobs());
    std::cout << "kind,m,d,n,eta,trials,failure_rate\n"
              << to_string(spec.kind) << ',' << sub_m << ',' << a.d() << ',' << a.n() << ','
              << format_number(sub_eta) << ',' << sub_trials << ',' << format_number(rate) << '\n';
  });

  // lower-bound
  Command lb(app, "lower-bound", "lower-bound", "diagonal bias ratio for row sampling on the 2d x d construction");
  std::size_t lb_d = 32, lb_m = 256, lb_replicas = 200000;
  std::vector<double> lb_gamma{1.0};
  lb.flag("--d", lb_d, "columns");
  lb.flag("--m", lb_m, "row samples");
  lb.flag("--replicas", lb_replicas, "accepted replicas");
  lb.flag("--gamma", lb_gamma, "scalings (the ratio does not depend on them)");
  on(lb, [&] {
    check(lb_d >= 2, "--d", "must be at least 2");
    check(lb_m >= lb_d, "--m", "must be at least --d");
    for (double g : lb_gamma) check(g > 0.0, "--gamma", "values must be positive");
    print_config(lb);
    const auto rows = lower_bound_bias_ratio(lb_d, lb_m, lb_gamma, lb_replicas, lb.seed(), lb.jobs());
    std::cout << "d,m,gamma,ratio,ratio_se,acceptance\n";
    for (const auto& r : rows)
      std::cout << lb_d << ',' << lb_m << ',' << format_number(r.gamma) << ','
                << format_number(r.ratio) << ',' << format_number(r.stderr_) << ','
                << format_number(r.acceptance) << '\n';
  });

  // averaging
  Command avg(app, "averaging", "averaging", "error of q-fold averaged debiased inverses");
  MatrixFlags avg_a;
  SketchFlags avg_s;
  std::size_t avg_m = 64, avg_reps = 50;
  std::vector<std::size_t> avg_q{1, 4, 16, 64, 256};
  std::string avg_gamma = "auto";
  double avg_clip = kDefaultClipThreshold;
  avg_s.add(avg);
  avg_a.add(avg, 1024, 16);
  avg.flag("--m", avg_m, "sketch size");
  avg.flag("--q", avg_q, "numbers of averaged replicas");
  avg.flag("--reps", avg_reps, "repetitions per q (repetition r uses master seed seed+r)");
  avg.flag("--gamma", avg_gamma, "scaling (auto: m/(m-d))");
  avg.flag("--clip", avg_clip, "replicas with eta above this are rejected");
  on(avg, [&] {
    const TallMatrix a = avg_a.build();
    check(avg_m > a.d(), "--m", "must exceed --d");
    check(avg_reps >= 1, "--reps", "must be positive");
    for (std::size_t q : avg_q) check(q >= 1, "--q", "values must be positive");
    const auto gamma = parse_gamma(avg_gamma, "--gamma");
    const auto spec = resolve(avg_s.config(avg_m, avg.seed()), a);
    print_config(avg);
    std::cout << "kind,m,d,n,q,rep,eta,fail_rate\n";
    for (std::size_t q : avg_q)
      for (std::size_t rep = 0; rep < avg_reps; ++rep) {
        const auto r = averaged_inverse(a, spec, q, avg.seed() + rep, avg_clip, gamma, avg.jobs());
        std::cout << to_string(spec.kind) << ',' << avg_m << ',' << a.d() << ',' << a.n() << ','
                  << q << ',' << rep << ',' << format_number(r.error) << ','
                  << format_number(r.report.failure_rate) << '\n';
      }
  });

  // newton
  Command nt(app, "newton", "newton", "distributed Newton sketch on a regularized GLM");
  SketchFlags nt_s;
  std::string nt_loss = "logistic", nt_gamma = "auto";
  std::size_t nt_n = 4096, nt_d = 32, nt_m = 256, nt_q = 32, nt_iters = 15;
  double nt_lambda = 1e-2, nt_tol = 1e-8;
  std::uint64_t nt_problem_seed = 0;
  nt_s.add(nt);
  nt.flag("--loss", nt_loss, "logistic | squared");
  nt.flag("--n", nt_n, "samples");
  nt.flag("--d", nt_d, "features");
  nt.flag("--lambda", nt_lambda, "ridge parameter");
  nt.flag("--problem-seed", nt_problem_seed, "seed of the synthetic problem");
  nt.flag("--m", nt_m, "sketch size per worker");
  nt.flag("--q", nt_q, "workers");
  nt.flag("--iters", nt_iters, "maximum iterations");
  nt.flag("--tol", nt_tol, "stop at this relative distance to the minimizer");
  nt.flag("--gamma", nt_gamma, "scaling of the sketched Hessian (auto: m/(m-d), 1: none)");
  on(nt, [&] {
    check(nt_loss == "logistic" || nt_loss == "squared", "--loss", "must be logistic or squared");
    check(nt_d >= 1 && nt_n >= nt_d, "--n", "must be at least --d");
    check(nt_lambda > 0.0, "--lambda", "must be positive");
    check(nt_m > nt_d, "--m", "must exceed --d");
    check(nt_q >= 1, "--q", "must be positive");
    check(nt_tol >= 1e-12, "--tol", "must be at least 1e-12");
    const auto gamma = parse_gamma(nt_gamma, "--gamma");
    const GlmProblem p = nt_loss == "logistic"
                             ? logistic_instance(nt_n, nt_d, nt_lambda, nt_problem_seed)
                             : least_squares_instance(nt_n, nt_d, nt_lambda, nt_problem_seed);
    // The profile is recomputed at every iterate; this only fixes the kind.
    const auto spec = resolve(nt_s.config(nt_m, nt.seed()), p.features);
    print_config(nt);
    NewtonSketchOptions opt;
    opt.gamma = gamma;
    opt.jobs = nt.jobs();
    const Vector x0(nt_d, 0.0);
    const auto rep = solve(p, spec, nt_q, x0, nt_iters, nt_tol, nt.seed(), opt);
    std::cout << "t,dist,rho\n";
    for (std::size_t t = 0; t < rep.distances.size(); ++t)
      std::cout << t << ',' << format_number(rep.distances[t]) << ','
                << (t == 0 ? std::string() : format_number(rep.rho[t - 1])) << '\n';
    std::cerr << "converged=" << (rep.converged ? 1 : 0) << " iterations=" << rep.iterations
              << " kappa=" << format_number(rep.kappa)
              << " lambda_min=" << format_number(rep.lambda_min) << '\n';
  });

  // oracles
  CLI::App* oracles = app.add_subcommand("oracles", "exact and Monte Carlo diagnostic oracles");
  oracles->require_subcommand(1);

  Command bm(*oracles, "oracles binom-moment", "binom-moment", "b E[1/(x + b/2)] - 1 for x ~ Bin(b, 1/2)");
  std::string bm_b = "1..256";
  bm.flag("--b", bm_b, "range a..b or list");
  on(bm, [&] {
    const auto bs = parse_range(bm_b, "--b");
    check(bs.back() <= 10000, "--b", "values must be at most 10000");
    print_config(bm);
    std::cout << "b,moment,gap,bound,check\n";
    for (std::size_t b : bs) {
      const double e = binomial_inverse_moment_exact(b);
      const double gap = static_cast<double>(b) * e - 1.0;
      const double bound = 3.0 / (256.0 * static_cast<double>(b));
      std::cout << b << ',' << format_number(e) << ',' << format_number(gap) << ','
                << format_number(bound) << ',' << pass(gap >= bound) << '\n';
    }
  });

  Command bt(*oracles, "oracles binom-tail", "binom-tail", "Pr(x <= b/2 - sqrt(b)/4) for x ~ Bin(b, 1/2)");
  std::string bt_b = "1..256";
  bt.flag("--b", bt_b, "range a..b or list");
  on(bt, [&] {
    const auto bs = parse_range(bt_b, "--b");
    print_config(bt);
    std::cout << "b,tail,bound,check\n";
    for (std::size_t b : bs) {
      const double tail = binomial_anticoncentration_check(b);
      std::cout << b << ',' << format_number(tail) << ',' << format_number(3.0 / 32.0) << ','
                << pass(tail >= 3.0 / 32.0) << '\n';
    }
  });

  Command ds(*oracles, "oracles ds-check", "ds-check", "doubly stochastic leverage matrix check");
  std::string ds_shapes = "8x2,16x4,32x8,64x8,128x16,256x32,512x64";
  std::string ds_matrix = "heavy_tail";
  std::size_t ds_count = 100;
  ds.flag("--shapes", ds_shapes, "comma separated NxD shapes, cycled");
  ds.flag("--matrix", ds_matrix, "gaussian | heavy_tail");
  ds.flag("--count", ds_count, "number of matrices (matrix i uses seed+i)");
  on(ds, [&] {
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    std::stringstream ss(ds_shapes);
    for (std::string item; std::getline(ss, item, ',');) {
      const auto x = item.find('x');
      check(x != std::string::npos, "--shapes", "expected NxD, got '" + item + "'");
      const auto n = parse_range(item.substr(0, x), "--shapes").front();
      const auto d = parse_range(item.substr(x + 1), "--shapes").front();
      check(d <= n, "--shapes", "need D <= N in '" + item + "'");
      shapes.emplace_back(n, d);
    }
    check(!shapes.empty(), "--shapes", "is empty");
    check(ds_matrix == "gaussian" || ds_matrix == "heavy_tail", "--matrix", "must be gaussian or heavy_tail");
    print_config(ds);
    std::cout << "index,n,d,row_resid,lam_max,col_resid,check\n";
    for (std::size_t i = 0; i < ds_count; ++i) {
      const auto [n, d] = shapes[i % shapes.size()];
      const TallMatrix a = ds_matrix == "gaussian" ? gaussian_matrix(n, d, ds.seed() + i)
                                                   : heavy_tail_matrix(n, d, ds.seed() + i);
      const auto r = doubly_stochastic_check(orthonormal_basis(a));
      std::cout << i << ',' << n << ',' << d << ',' << format_number(r.row_resid) << ','
                << format_number(r.lam_max) << ',' << format_number(r.column_sum_resid) << ','
                << pass(r.row_resid <= 1e-10 && r.lam_max <= 1.0 + 1e-10) << '\n';
    }
  });

  Command bs(*oracles, "oracles bs-var", "bs-var", "variance of x^T F x, exact against Monte Carlo");
  std::string bs_law = "rademacher";
  std::size_t bs_trials = 100000, bs_count = 20;
  double bs_keep = 0.25;
  MatrixFlags bs_a;
  bs.flag("--law", bs_law, "gaussian | rademacher | bernoulli | less");
  bs.flag("--trials", bs_trials, "Monte Carlo draws per matrix");
  bs.flag("--count", bs_count, "random symmetric F (independent laws; F i uses seed+i)");
  bs.flag("--keep", bs_keep, "keep probability s/m of the bernoulli law");
  bs_a.add(bs, 8, 8);
  bs_a.kind = "coherent_block";
  on(bs, [&] {
    check(bs_trials >= 1000, "--trials", "must be at least 1000");
    print_config(bs);
    std::cout << "index,law,n,trials,exact,variance,stderr,trace_b2,check\n";
    if (bs_law == "less") {
      // F is the projection onto the column span; no closed form.
      const TallMatrix a = bs_a.build();
      const auto u = orthonormal_basis(a);
      const Matrix b = projection(u);
      const auto law = EntryLaw::leverage_sparsified(exact_leverage_scores(a));
      const auto v = quadratic_form_variance_mc(law, b, bs_trials, bs.seed());
      std::cout << 0 << ",less," << a.n() << ',' << bs_trials << ",nan," << format_number(v.variance)
                << ',' << format_number(v.stderr_) << ',' << format_number(trace_of_square(b))
                << ",na\n";
      return;
    }
    EntryLaw law;
    if (bs_law == "gaussian")
      law = EntryLaw::gaussian();
    else if (bs_law == "rademacher")
      law = EntryLaw::rademacher();
    else if (bs_law == "bernoulli") {
      check(bs_keep > 0.0 && bs_keep <= 1.0, "--keep", "must be in (0, 1]");
      law = EntryLaw::scaled_bernoulli_sign(bs_keep);
    } else
      throw FlagError{"--law", "must be gaussian, rademacher, bernoulli or less"};
    for (std::size_t i = 0; i < bs_count; ++i) {
      const Matrix f = random_symmetric(bs_a.n, bs.seed(), i);
      const double exact = quadratic_form_variance_exact(law, f);
      const auto v = quadratic_form_variance_mc(law, f, bs_trials, bs.seed() + i);
      std::cout << i << ',' << bs_law << ',' << bs_a.n << ',' << bs_trials << ','
                << format_number(exact) << ',' << format_number(v.variance) << ','
                << format_number(v.stderr_) << ',' << format_number(trace_of_square(f)) << ','
                << pass(std::abs(v.variance - exact) <= 4.0 * v.stderr_ + 1e-12) << '\n';
    }
  });

  Command ce(*oracles, "oracles counterexamples", "counterexamples",
             "row sampling variance under a factor-3/2 distortion of exact leverage");
  std::vector<std::size_t> ce_d{1, 2, 4, 8, 16, 32};
  ce.flag("--d", ce_d, "dimensions");
  on(ce, [&] {
    for (std::size_t d : ce_d) check(d >= 1, "--d", "values must be positive");
    print_config(ce);
    std::cout << "d,variance,variance_over_d\n";
    for (std::size_t d : ce_d) {
      const double v = counterexample_row_sampling_variance(d);
      std::cout << d << ',' << format_number(v) << ',' << format_number(v / static_cast<double>(d))
                << '\n';
    }
  });

  // gen-matrix
  Command gen(app, "gen-matrix", "gen-matrix", "write a synthetic matrix in the matrix file format");
  MatrixFlags gen_a;
  gen_a.add(gen, 1024, 16);
  on(gen, [&] {
    if (gen.app()->get_option("--matrix-seed")->count() == 0) gen_a.matrix_seed = gen.seed();
    const TallMatrix a = gen_a.build();
    print_config(gen);
    write_matrix(std::cout, a.matrix());
  });

  // leverage
  CLI::App* lev = app.add_subcommand("leverage", "leverage score profiles in the profile file format");
  lev->require_subcommand(1);
  auto add_input = [](Command& cmd, std::string& input, MatrixFlags& flags) {
    cmd.flag("--input", input, "matrix file ('-' for stdin); empty generates one");
    flags.add(cmd, 1024, 16);
  };
  auto load = [](const std::string& input, MatrixFlags& flags) {
    if (input.empty()) return flags.build();
    Matrix m;
    try {
      if (input == "-") {
        m = read_matrix(std::cin);
      } else {
        std::ifstream in(input);
        check(static_cast<bool>(in), "--input", "cannot open " + input);
        m = read_matrix(in);
      }
      return TallMatrix(std::move(m));
    } catch (const Error& e) {
      throw FlagError{"--input", e.what()};
    }
  };

  Command lev_exact(*lev, "leverage exact", "exact", "exact leverage scores via thin QR");
  std::string lev_exact_input;
  MatrixFlags lev_exact_a;
  add_input(lev_exact, lev_exact_input, lev_exact_a);
  on(lev_exact, [&] {
    if (lev_exact.app()->get_option("--matrix-seed")->count() == 0) lev_exact_a.matrix_seed = lev_exact.seed();
    const TallMatrix a = load(lev_exact_input, lev_exact_a);
    print_config(lev_exact);
    write_profile(std::cout, exact_leverage_scores(a));
  });

  Command lev_approx(*lev, "leverage approx", "approx",
                     "approximate leverage scores from an SRHT sketch and a JL projection");
  std::string lev_approx_input;
  MatrixFlags lev_approx_a;
  std::size_t sketch_rows = 0, jl_dim = 32;
  add_input(lev_approx, lev_approx_input, lev_approx_a);
  lev_approx.flag("--sketch-rows", sketch_rows, "SRHT rows used for R (0 means 16d)");
  lev_approx.flag("--jl", jl_dim, "JL projection dimension");
  on(lev_approx, [&] {
    if (lev_approx.app()->get_option("--matrix-seed")->count() == 0) lev_approx_a.matrix_seed = lev_approx.seed();
    const TallMatrix a = load(lev_approx_input, lev_approx_a);
    if (sketch_rows == 0) sketch_rows = 16 * a.d();
    check(sketch_rows >= 4 * a.d(), "--sketch-rows", "must be at least 4d");
    check(jl_dim >= 8, "--jl", "must be at least 8");
    ApproxLeverageOptions opt;
    opt.sketch_rows = sketch_rows;
    opt.jl_dim = jl_dim;
    opt.seed = lev_approx.seed();
    print_config(lev_approx);
    write_profile(std::cout, approximate_leverage_scores(a, opt));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run) run();
    std::cout.flush();
    return 0;
  } catch (const FlagError& e) {
    std::cerr << "config error: " << e.flag << ": " << e.message << '\n';
    return 2;
  } catch (const Error& e) {
    if (e.code() == Errc::AllReplicasFailed) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
    switch (e.code()) {
      case Errc::ParseError:
      case Errc::InvalidArgument:
      case Errc::ShapeInvalid:
      case Errc::SketchTooLarge:
      case Errc::SketchSmallerThanD:
      case Errc::LengthNotPowerOfTwo:
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
      default:
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
  }
}
