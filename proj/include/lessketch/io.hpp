#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lessketch/error.hpp"
#include "lessketch/leverage.hpp"
#include "lessketch/leverage_approx.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/sketch.hpp"

namespace lessketch {

inline std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Matrix text format: "n d", then n lines of d reals.
inline void write_matrix(std::ostream& out, const Matrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? " " : "") << format_full(r[j]);
    out << '\n';
  }
}

namespace detail {

inline void skip_comments(std::istream& in) {
  while (true) {
    in >> std::ws;
    if (in.peek() != '#') return;
    std::string line;
    std::getline(in, line);
  }
}

}  // namespace detail

// Lines starting with '#' before the header are skipped, so CLI output with
// its config line can be read back directly.
inline Matrix read_matrix(std::istream& in) {
  detail::skip_comments(in);
  std::size_t n = 0, d = 0;
  if (!(in >> n >> d)) throw Error(Errc::ParseError, "matrix header must be 'n d'");
  Matrix a(n, d);
  for (auto& v : a.values())
    if (!(in >> v)) throw Error(Errc::ParseError, "matrix body has fewer than n*d entries");
  return a;
}

// Profile format: "n", then n lines "l_i p_i".
inline void write_profile(std::ostream& out, const LeverageProfile& profile) {
  out << profile.size() << '\n';
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << format_full(profile.scores[i]) << ' ' << format_full(profile.distribution[i]) << '\n';
}

/// The file stores no d; it is recovered as round(sum l_i), and approx_factor
/// as the smallest factor consistent with the stored pairs.
inline LeverageProfile read_profile(std::istream& in) {
  detail::skip_comments(in);
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw Error(Errc::ParseError, "profile header must be a positive n");
  LeverageProfile out;
  out.scores.resize(n);
  out.distribution.resize(n);
  double lsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> out.scores[i] >> out.distribution[i]))
      throw Error(Errc::ParseError, "profile body has fewer than n pairs");
    lsum += out.scores[i];
  }
  out.dim = static_cast<std::size_t>(std::max(1.0, std::round(lsum)));
  const double d = static_cast<double>(out.dim);
  out.approx_factor = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.scores[i] <= 0.0) continue;
    const double ratio = out.distribution[i] * d / out.scores[i];
    if (ratio <= 0.0) continue;
    out.approx_factor = std::max({out.approx_factor, ratio, 1.0 / ratio});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sketch configuration as key=value tokens, e.g.
//   kind=less m=256 seed=42 subgaussian=rademacher profile=exact

/// A SketchSpec whose data-dependent parts (leverage profile, sampling
/// distribution) are named rather than stored; `resolve` fills them in.
struct SketchConfig {
  SketchKind kind = SketchKind::Gaussian;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  SubgaussianLaw law = SubgaussianLaw::Rademacher;
  std::string profile = "exact";    // less: exact | approx | uniform
  std::string sampling = "uniform"; // rowsampling: uniform | leverage
  double sparsity = 1.0;            // sparse
  bool bernoulli = false;           // less
  bool hadamard = false;            // less
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw Error(Errc::ParseError, "bad value '" + std::string(text) + "' for " + std::string(key));
  return value;
}

inline bool parse_flag(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw Error(Errc::ParseError, "bad value '" + std::string(text) + "' for " + std::string(key));
}

}  // namespace detail

inline SketchKind parse_sketch_kind(std::string_view name) {
  const std::string s = detail::lower(name);
  for (auto k : {SketchKind::Gaussian, SketchKind::Rademacher, SketchKind::UniformSubgaussian,
                 SketchKind::Haar, SketchKind::RowSampling, SketchKind::Less, SketchKind::Srht,
                 SketchKind::ObliviousSparse})
    if (s == to_string(k)) return k;
  throw Error(Errc::ParseError, "unknown sketch kind '" + std::string(name) + "'");
}

inline SubgaussianLaw parse_subgaussian_law(std::string_view name) {
  const std::string s = detail::lower(name);
  for (auto l : {SubgaussianLaw::Rademacher, SubgaussianLaw::Gaussian, SubgaussianLaw::Uniform})
    if (s == to_string(l)) return l;
  throw Error(Errc::ParseError, "unknown subgaussian law '" + std::string(name) + "'");
}

inline SketchConfig parse_sketch_config(std::string_view text) {
  SketchConfig cfg;
  std::istringstream tokens{std::string(text)};
  std::string token;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::ParseError, "expected key=value, got '" + token + "'");
    const std::string key = detail::lower(std::string_view(token).substr(0, eq));
    const std::string_view value = std::string_view(token).substr(eq + 1);
    if (key == "kind") cfg.kind = parse_sketch_kind(value);
    else if (key == "m") cfg.m = detail::parse_number<std::size_t>(key, value);
    else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(key, value);
    else if (key == "subgaussian") cfg.law = parse_subgaussian_law(value);
    else if (key == "profile") {
      cfg.profile = detail::lower(value);
      if (cfg.profile != "exact" && cfg.profile != "approx" && cfg.profile != "uniform")
        throw Error(Errc::ParseError, "profile must be exact, approx or uniform");
    } else if (key == "sampling") {
      cfg.sampling = detail::lower(value);
      if (cfg.sampling != "uniform" && cfg.sampling != "leverage")
        throw Error(Errc::ParseError, "sampling must be uniform or leverage");
    } else if (key == "s") cfg.sparsity = detail::parse_number<double>(key, value);
    else if (key == "sparsifier") {
      const std::string v = detail::lower(value);
      if (v != "multinomial" && v != "bernoulli")
        throw Error(Errc::ParseError, "sparsifier must be multinomial or bernoulli");
      cfg.bernoulli = v == "bernoulli";
    } else if (key == "rht") cfg.hadamard = detail::parse_flag(key, value);
    else throw Error(Errc::ParseError, "unknown sketch key '" + key + "'");
  }
  return cfg;
}

/// Canonical form: fixed key order, and only the keys meaningful for the kind.
inline std::string serialize(const SketchConfig& cfg) {
  std::string out = "kind=" + std::string(to_string(cfg.kind)) + " m=" + std::to_string(cfg.m) +
                    " seed=" + std::to_string(cfg.seed);
  switch (cfg.kind) {
    case SketchKind::Less:
      out += " subgaussian=" + std::string(to_string(cfg.law));
      if (cfg.hadamard) out += " rht=1";
      else out += " profile=" + cfg.profile;
      out += cfg.bernoulli ? " sparsifier=bernoulli" : " sparsifier=multinomial";
      break;
    case SketchKind::RowSampling: out += " sampling=" + cfg.sampling; break;
    case SketchKind::ObliviousSparse: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.12g", cfg.sparsity);
      out += std::string(" s=") + buf;
      break;
    }
    default: break;
  }
  return out;
}

/// Builds the concrete SketchSpec for matrix A. `profile=approx` uses an SRHT
/// of 16d rows and a JL dimension of 32 drawn from seed + 1.
inline SketchSpec resolve(const SketchConfig& cfg, const TallMatrix& a) {
  SketchSpec spec;
  spec.kind = cfg.kind;
  spec.m = cfg.m;
  spec.seed = cfg.seed;
  spec.law = cfg.law;
  spec.sparsity = cfg.sparsity;
  spec.bernoulli_sparsifier = cfg.bernoulli;
  spec.hadamard_preprocess = cfg.hadamard;
  if (cfg.kind == SketchKind::Less && !cfg.hadamard) {
    if (cfg.profile == "exact") {
      spec.profile = exact_leverage_scores(a);
    } else if (cfg.profile == "uniform") {
      spec.profile = uniform_profile(a.n(), a.d());
    } else {
      ApproxLeverageOptions opt;
      opt.sketch_rows = std::min<std::size_t>(16 * a.d(), a.n());
      opt.exact_r = opt.sketch_rows < 4 * a.d();
      opt.jl_dim = 32;
      opt.seed = cfg.seed + 1;
      spec.profile = approximate_leverage_scores(a, opt);
    }
  }
  if (cfg.kind == SketchKind::RowSampling) {
    if (cfg.sampling == "leverage") spec.probabilities = exact_leverage_scores(a).distribution;
    else spec.probabilities.assign(a.n(), 1.0 / static_cast<double>(a.n()));
  }
  return spec;
}

}  // namespace lessketch
