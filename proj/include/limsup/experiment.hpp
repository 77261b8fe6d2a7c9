#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "dichotomy.hpp"
#include "rates.hpp"
#include "sweep.hpp"
#include "ubiquity.hpp"

namespace limsup {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct ReportBundle {
  std::map<std::string, Table> tables;  // file stem -> table
  std::vector<std::string> summary;     // human-readable lines, deterministic
  std::vector<std::string> provenance;  // config echo, seeds, versions
  double seconds = 0;                   // only emitted in the summary
};

inline constexpr const char* kVersion = "limsup-lab 1.0";

/// 12 significant digits.
inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(long v) { return std::to_string(v); }

namespace detail {

inline std::vector<ExactBox> config_balls(const ExperimentConfig& c, std::size_t dim) {
  if (c.balls == "default") return default_balls(dim);
  if (c.balls == "full") return {ExactBox::cube(dim)};
  std::vector<ExactBox> out;
  for (const auto& t : split(c.balls, ';')) {
    std::vector<Interval<Rational>> axes;
    for (const auto& ax : split(t, 'x')) {
      auto v = split(ax, ',');
      if (v.size() != 2) throw ValidationError("task.balls: axis '" + ax + "' needs lo,hi");
      axes.push_back({parse_rational(v[0]), parse_rational(v[1])});
    }
    ExactBox b(std::move(axes));
    if (b.dim() != dim) throw ValidationError("task.balls: ball dimension does not match the system");
    out.push_back(std::move(b));
  }
  return out;
}

inline SanitizedRates config_sanitized(const ExperimentConfig& c) {
  switch (c.kind) {
    case SystemKind::Rational: return sanitize_simultaneous(c.phi);
    case SystemKind::LinearForms: {
      SanitizeOptions o;
      o.window_lo = c.window_lo;
      o.window_hi = c.window_hi;
      o.epsilon = c.epsilon;
      return sanitize_linear_forms(c.phi, c.Phi, c.M, o);
    }
    case SystemKind::Shrinking: return pass_through(c.psi);
  }
  throw ValidationError("unknown system kind");
}

inline void rate_summary(const SanitizedRates& s, const RatePair& rp, ReportBundle& b) {
  b.summary.push_back("level scheme: " + std::string(scheme_name(rp.levels.kind)));
  b.summary.push_back("lambda(psi) = " + fmt(rp.lambda_psi) + ", lambda(rho) = " + fmt(rp.lambda_rho));
  for (const auto& w : s.warnings) b.summary.push_back("sanitizer warning: " + w);
}

inline void run_measure(const ExperimentConfig& c, ReportBundle& b) {
  if (c.boxes.empty()) throw ValidationError("measure.boxes: at least one box required");
  AmbientSpace space =
      c.measure_space.empty() ? AmbientSpace::lebesgue_cube(static_cast<int>(c.boxes[0].dim()), false)
                              : AmbientSpace(c.measure_space);
  MeasureEstimate m;
  if (c.method == "mc") {
    m = mc_measure(box_union_predicate(c.boxes), space, c.samples, *c.seed);
  } else {
    try {
      m = union_measure(c.boxes, space);
    } catch (const UseStatisticalError& e) {
      if (!c.seed) throw ValidationError(std::string(e.what()) + "; task.seed is required for the fallback");
      m = mc_measure(box_union_predicate(c.boxes), space, c.samples, *c.seed);
      b.summary.push_back("exact sweep refused, Monte Carlo used");
    }
  }
  Table t{{"method", "value", "error", "samples", "seed"}, {}};
  t.rows.push_back({method_name(m.method), fmt(m.value), fmt(m.error), std::to_string(m.samples),
                    m.method == Method::MonteCarlo ? std::to_string(m.seed) : ""});
  b.tables["measure"] = std::move(t);
  b.summary.push_back("measure: " + fmt(m.value) + " +- " + fmt(m.error) + " [" + m.tag() + "]");
}

inline void run_ubiquity(const ExperimentConfig& c, ReportBundle& b) {
  Family f = c.family();
  validate_family(f);
  auto san = config_sanitized(c);
  if (san.full_measure) {
    b.summary.push_back("full measure: " + san.full_measure_reason + "; ubiquity not evaluated");
    return;
  }
  auto rp = make_rates(san, f, c.scheme(), c.n_lo, c.n_hi);
  rate_summary(san, rp, b);
  auto balls = config_balls(c, ambient_space(f).total_dim());
  UbiquityOptions o;
  o.seed = *c.seed;
  o.mc_samples = c.samples;
  o.exact_items = c.cap;
  auto rep = verify_ubiquity(f, rp, balls, c.n_lo, c.n_hi, o);
  Table t{{"ball_id", "n", "ratio", "method", "error"}, {}};
  double lo = INFINITY;
  bool any_mc = false;
  for (const auto& e : rep.entries) {
    t.rows.push_back({std::to_string(e.ball_id), fmt(e.n), fmt(e.ratio.value), method_name(e.ratio.method),
                      fmt(e.ratio.error)});
    lo = std::min(lo, e.ratio.value);
    any_mc = any_mc || e.ratio.method == Method::MonteCarlo;
  }
  b.tables["ubiquity"] = std::move(t);
  b.summary.push_back("ubiquity: " + std::to_string(balls.size()) + " balls, levels " + fmt(c.n_lo) + ".." +
                      fmt(c.n_hi) + ", minimum ratio " + fmt(lo));
  if (any_mc)
    b.summary.push_back("Monte Carlo entries: " + std::to_string(c.samples) +
                        " samples, seed per (ball, n) = seed + 1000003*ball + n");
  std::size_t flagged = 0;
  for (char x : rep.flagged) flagged += x ? 1 : 0;
  b.summary.push_back("balls flagged as not bounded away from 0: " + std::to_string(flagged));
}

inline void run_series(const ExperimentConfig& c, ReportBundle& b) {
  Family f = c.family();
  validate_family(f);
  SeriesReport rep;
  if (c.series == "application") {
    std::vector<double> dl;
    if (c.kind == SystemKind::Shrinking) dl = factor_deltas(f);
    rep = application_series(c.kind, c.kind == SystemKind::Shrinking ? c.psi : c.phi, c.Phi, c.N, c.M, dl);
  } else {
    auto san = config_sanitized(c);
    if (san.full_measure) {
      b.summary.push_back("full measure: " + san.full_measure_reason + "; theorem series not evaluated");
      return;
    }
    long hi = std::min<long>(c.N, 64);
    auto rp = make_rates(san, f, c.scheme(), 1, hi);
    rate_summary(san, rp, b);
    rep = theorem_series(rp, ambient_space(f), c.N);
  }
  Table t{{"N", "partial_sum", "last_term"}, {}};
  for (const auto& p : rep.points) t.rows.push_back({fmt(p.N), fmt(p.partial_sum), fmt(p.last_term)});
  b.tables["series"] = std::move(t);
  b.summary.push_back("series (" + rep.label + "): S_" + fmt(c.N) + " = " + fmt(rep.final_sum()));
  b.summary.push_back("heuristic classification: " + std::string(series_class_name(rep.classification)) +
                      " (log10 tail gain " + fmt(rep.growth_log10) + ")");
  if (rep.has_block)
    b.summary.push_back("M-adic block sum " + fmt(rep.block_sum) + ", bound (M-1)c2^h*sum = " +
                        fmt(rep.block_bound) + ", c2 = " + fmt(rep.c2));
}

inline void run_chung_erdos(const ExperimentConfig& c, ReportBundle& b) {
  Family f = c.family();
  validate_family(f);
  auto san = config_sanitized(c);
  if (san.full_measure) {
    b.summary.push_back("full measure: " + san.full_measure_reason + "; level sets not built");
    return;
  }
  if (c.n_hi <= c.n_lo) throw ValidationError("task.levels: chung-erdos needs at least two levels");
  auto rp = make_rates(san, f, c.scheme(), c.n_lo, c.n_hi);
  rate_summary(san, rp, b);
  AmbientSpace space = ambient_space(f);
  ExactBox ball = c.balls == "default" ? ExactBox::cube(space.total_dim()) : config_balls(c, space.total_dim())[0];
  LevelSetOptions lo;
  lo.cap = c.cap;
  std::vector<LevelSet> sets;
  Table lv{{"n", "kept_centers", "boxes"}, {}};
  for (long n = c.n_lo; n <= c.n_hi; ++n) {
    sets.push_back(build_level_set(f, rp, ball, n, lo));
    lv.rows.push_back({fmt(n), std::to_string(sets.back().big.size()), std::to_string(sets.back().boxes.size())});
  }
  auto rep = chung_erdos_bound(sets, space);
  Table t{{"N", "sum_measure", "pair_sum", "ratio"}, {}};
  for (std::size_t N = 2; N <= sets.size(); ++N)
    t.rows.push_back({std::to_string(N), fmt(to_double(rep.sum_measure[N - 1])), fmt(to_double(rep.pair_sum[N - 1])),
                      fmt(rep.ratios[N - 2])});
  b.tables["chung_erdos"] = std::move(t);
  b.tables["chung_erdos_levels"] = std::move(lv);
  b.summary.push_back("chung-erdos: " + std::to_string(sets.size()) + " level sets, final ratio " +
                      fmt(rep.ratios.back()) + ", mu(B) = " + fmt(to_double(box_measure(ball, space).value)));
  if (!rep.note.empty()) b.summary.push_back(rep.note);
}

inline void run_hits(const ExperimentConfig& c, ReportBundle& b) {
  Family f = c.family();
  validate_family(f);
  auto san = config_sanitized(c);
  if (san.full_measure) {
    b.summary.push_back("full measure: " + san.full_measure_reason + "; hits not evaluated");
    return;
  }
  long top = 0;
  for (long w : c.windows) {
    if (w < 1) throw ValidationError("task.windows: window starts must be >= 1");
    top = std::max(top, 2 * w);
  }
  long first = *std::min_element(c.windows.begin(), c.windows.end());
  auto rp = make_rates(san, f, c.scheme(), first, top);
  rate_summary(san, rp, b);
  auto pts = sample_points(ambient_space(f), c.points, *c.seed);
  auto hist = hit_statistics(f, rp, pts, first, top);
  Table t{{"window_lo", "window_hi", "k", "fraction"}, {}};
  for (long w : c.windows)
    t.rows.push_back({fmt(w), fmt(2 * w), std::to_string(c.k), fmt(hist.window_fraction(w, 2 * w, c.k))});
  b.tables["hits"] = std::move(t);
  b.summary.push_back("hits: " + std::to_string(c.points) + " points, seed " + std::to_string(*c.seed) +
                      ", surrogate: hit in >= " + std::to_string(c.k) + " levels of [N, 2N]");
}

inline void run_probe(const ExperimentConfig& c, ReportBundle& b) {
  std::vector<std::string> bad;
  if (!c.probe_factor) bad.push_back("probe.factor: required");
  if (!c.probe_geometry) bad.push_back("probe.geometry: required");
  if (c.probe_x.empty()) bad.push_back("probe.x: required");
  if (c.probe_r.size() < 2) bad.push_back("probe.r: need at least two radii");
  if (c.probe_eps.size() < 2) bad.push_back("probe.eps: need at least two widths");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  auto rep = kappa_scaling_probe(*c.probe_factor, *c.probe_geometry, c.probe_x, c.probe_r, c.probe_eps, c.samples,
                                 *c.seed);
  Table t{{"r", "eps", "measure", "error"}, {}};
  for (const auto& s : rep.samples) t.rows.push_back({fmt(s.r), fmt(s.eps), fmt(s.measure), fmt(s.error)});
  b.tables["scaling_probe"] = std::move(t);
  b.summary.push_back("eps exponent " + fmt(rep.eps_slope) + ", r exponent " + fmt(rep.r_slope));
  b.summary.push_back("fitted delta " + fmt(rep.delta) + ", kappa " + fmt(rep.kappa) +
                      (rep.monotone ? "" : " (measures not monotone)"));
  if (std::holds_alternative<AffineGeometry>(*c.probe_geometry))
    b.summary.push_back("slab measures: Monte Carlo, " + std::to_string(c.samples) + " samples per ball box, seed " +
                        std::to_string(*c.seed));
}

}  // namespace detail

/// Validates, dispatches and collects.  A config without a task yields an
/// empty bundle.
inline ReportBundle run_experiment(const ExperimentConfig& c) {
  if (c.statistical() && !c.seed) throw ValidationError("task.seed: required for " + std::string(task_name(*c.task)));
  ReportBundle b;
  b.provenance.push_back("version: " + std::string(kVersion));
  if (c.task) b.provenance.push_back("task: " + std::string(task_name(*c.task)));
  if (c.seed) b.provenance.push_back("seed: " + std::to_string(*c.seed));
  for (const auto& e : c.echo) b.provenance.push_back("config " + e);
  if (!c.task) return b;
  auto t0 = std::chrono::steady_clock::now();
  switch (*c.task) {
    case Task::Measure: detail::run_measure(c, b); break;
    case Task::Ubiquity: detail::run_ubiquity(c, b); break;
    case Task::Series: detail::run_series(c, b); break;
    case Task::ChungErdos: detail::run_chung_erdos(c, b); break;
    case Task::Hits: detail::run_hits(c, b); break;
    case Task::ScalingProbe: detail::run_probe(c, b); break;
  }
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return b;
}

namespace detail {

// write to a temporary sibling, then rename
inline void write_atomic(const std::filesystem::path& path, const std::string& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << body;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename to " + path.string() + ": " + ec.message());
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + detail::csv_cell(cells[i]);
    out += "\n";
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline std::string summary_text(const ReportBundle& b) {
  std::string out;
  if (b.tables.empty() && b.summary.empty()) out += "no tasks\n";
  for (const auto& s : b.summary) out += s + "\n";
  if (!b.tables.empty()) {
    out += "\ntables:";
    for (const auto& [name, t] : b.tables) out += " " + name + ".csv(" + std::to_string(t.rows.size()) + ")";
    out += "\n";
  }
  out += "\n[provenance]\n";
  for (const auto& p : b.provenance) out += p + "\n";
  out += "elapsed_seconds: " + fmt(b.seconds) + "\n";
  return out;
}

/// One CSV per table plus summary.txt, each written atomically.
inline std::vector<std::filesystem::path> emit_reports(const ReportBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& [name, t] : b.tables) {
    auto p = dir / (name + ".csv");
    detail::write_atomic(p, to_csv(t));
    written.push_back(p);
  }
  auto p = dir / "summary.txt";
  detail::write_atomic(p, summary_text(b));
  written.push_back(p);
  return written;
}

}  // namespace limsup
