#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "errors.hpp"
#include "exact.hpp"
#include "geometry.hpp"
#include "rate_function.hpp"
#include "systems.hpp"

namespace limsup {

enum class Task { Measure, Ubiquity, Series, ChungErdos, Hits, ScalingProbe };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::Measure: return "measure";
    case Task::Ubiquity: return "ubiquity";
    case Task::Series: return "series";
    case Task::ChungErdos: return "chung-erdos";
    case Task::Hits: return "hits";
    case Task::ScalingProbe: return "scaling-probe";
  }
  return "?";
}

inline std::optional<Task> parse_task(const std::string& s) {
  for (Task t : {Task::Measure, Task::Ubiquity, Task::Series, Task::ChungErdos, Task::Hits, Task::ScalingProbe})
    if (s == task_name(t)) return t;
  return std::nullopt;
}

struct ExperimentConfig {
  std::optional<Task> task;
  // system
  SystemKind kind = SystemKind::Rational;
  int d = 1, h = 1;
  long M = 16;
  std::string levels;  // scheme name; empty = default for the kind
  std::vector<RateFunction> phi, Phi, psi;
  std::vector<CantorSpec> cantor;
  std::vector<Rational> target;
  double epsilon = 0.1;
  long window_lo = 1, window_hi = 1L << 17;
  // task
  long n_lo = 1, n_hi = 3;
  long N = 10000;
  std::optional<std::uint64_t> seed;
  std::uint64_t samples = 100000;
  std::uint64_t cap = 10'000'000;
  std::string balls = "default";
  std::size_t points = 10000;
  std::vector<long> windows{4, 16};
  int k = 1;
  std::string series = "theorem";
  // measure
  std::vector<FactorSpace> measure_space;
  std::vector<Box> boxes;
  std::string method = "exact";
  // probe
  std::optional<FactorSpace> probe_factor;
  std::optional<FactorGeometry<Rational>> probe_geometry;
  std::vector<double> probe_x, probe_r, probe_eps;

  std::vector<std::string> echo;  // every key=value read, sorted

  Family family() const {
    switch (kind) {
      case SystemKind::Rational: return RationalFamily{d};
      case SystemKind::LinearForms: return LinearFormsFamily{d, h, Phi, M};
      case SystemKind::Shrinking: return ShrinkingFamily{cantor, target};
    }
    return RationalFamily{d};
  }

  LevelScheme scheme() const {
    std::string s = levels;
    if (s.empty()) s = kind == SystemKind::Rational ? "geometric" : kind == SystemKind::LinearForms ? "window" : "identity";
    if (s == "identity") return LevelScheme::identity();
    if (s == "window") return LevelScheme::window(M);
    return LevelScheme::geometric(M);
  }

  bool statistical() const {
    if (!task) return false;
    switch (*task) {
      case Task::Measure: return method == "mc";
      case Task::Ubiquity:
      case Task::Hits:
      case Task::ScalingProbe: return true;
      default: return false;
    }
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    auto a = item.find_first_not_of(" \t");
    auto b = item.find_last_not_of(" \t");
    out.push_back(a == std::string::npos ? "" : item.substr(a, b - a + 1));
  }
  return out;
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos)
    return Rational(BigInt(std::stoll(s.substr(0, slash))), BigInt(std::stoll(s.substr(slash + 1))));
  return Rational(std::stod(s));
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(std::stod(t));
  return out;
}

inline std::pair<long, long> parse_range(const std::string& s) {
  auto c = s.find(':');
  if (c == std::string::npos) {
    long v = std::stol(s);
    return {v, v};
  }
  return {std::stol(s.substr(0, c)), std::stol(s.substr(c + 1))};
}

/// "lebesgue:2", "lebesgue:2:cube", "cantor:3:0,2"
inline FactorSpace parse_factor(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.empty()) throw ValidationError("factor spec is empty");
  if (parts[0] == "lebesgue") {
    int dim = parts.size() > 1 ? std::stoi(parts[1]) : 1;
    bool torus = !(parts.size() > 2 && parts[2] == "cube");
    return FactorSpace::lebesgue(dim, 0.0, torus);
  }
  if (parts[0] == "cantor" && parts.size() >= 3) {
    std::vector<int> digits;
    for (const auto& t : split(parts[2], ',')) digits.push_back(std::stoi(t));
    return FactorSpace::cantor_factor(CantorSpec(std::stoi(parts[1]), digits));
  }
  throw ValidationError("factor spec '" + s + "' not understood");
}

inline Box parse_box(const std::string& s) {
  std::vector<Interval<double>> axes;
  for (const auto& ax : split(s, 'x')) {
    auto v = parse_doubles(ax);
    if (v.size() != 2) throw ValidationError("box axis '" + ax + "' needs lo,hi");
    axes.push_back({v[0], v[1]});
  }
  return Box(std::move(axes));
}

}  // namespace detail

/// Flat INI file: sections [system], [task], [measure], [probe].
inline ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  std::vector<std::string> bad;
  for (const auto& [sec, body] : tree)
    for (const auto& [key, val] : body) c.echo.push_back(sec + "." + key + " = " + val.data());
  std::sort(c.echo.begin(), c.echo.end());

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  };
  auto field = [&](const std::string& key, auto&& fn) {
    if (auto v = get(key)) {
      try {
        fn(*v);
      } catch (const ValidationError& e) {
        for (const auto& f : e.fields()) bad.push_back(key + ": " + f);
      } catch (const std::exception& e) {
        bad.push_back(key + ": cannot parse '" + *v + "'");
      }
    }
  };
  auto rates = [](const std::string& v) {
    std::vector<RateFunction> out;
    for (const auto& t : detail::split(v, ';')) out.push_back(RateFunction::parse(t));
    return out;
  };

  field("task.name", [&](const std::string& v) {
    c.task = parse_task(v);
    if (!c.task) throw ValidationError("unknown task '" + v + "'");
  });
  field("system.kind", [&](const std::string& v) {
    if (v == "rational") c.kind = SystemKind::Rational;
    else if (v == "linear-forms") c.kind = SystemKind::LinearForms;
    else if (v == "shrinking") c.kind = SystemKind::Shrinking;
    else throw ValidationError("unknown system kind '" + v + "'");
  });
  field("system.d", [&](const std::string& v) { c.d = std::stoi(v); });
  field("system.h", [&](const std::string& v) { c.h = std::stoi(v); });
  field("system.M", [&](const std::string& v) { c.M = std::stol(v); });
  field("system.levels", [&](const std::string& v) {
    if (v != "geometric" && v != "identity" && v != "window") throw ValidationError("unknown level scheme '" + v + "'");
    c.levels = v;
  });
  field("system.phi", [&](const std::string& v) { c.phi = rates(v); });
  field("system.Phi", [&](const std::string& v) { c.Phi = rates(v); });
  field("system.psi", [&](const std::string& v) { c.psi = rates(v); });
  field("system.epsilon", [&](const std::string& v) { c.epsilon = std::stod(v); });
  field("system.window", [&](const std::string& v) { std::tie(c.window_lo, c.window_hi) = detail::parse_range(v); });

  // shrinking factors: base and digits per factor, ';'-separated
  if (c.kind == SystemKind::Shrinking) {
    std::vector<std::string> bases = detail::split(get("system.base").value_or("2"), ';');
    std::vector<std::string> digs = detail::split(get("system.digits").value_or(""), ';');
    std::vector<std::string> tgts = detail::split(get("system.target").value_or("0"), ';');
    std::size_t nf = std::max({bases.size(), digs.size(), static_cast<std::size_t>(c.d)});
    auto pick = [](const std::vector<std::string>& v, std::size_t i) { return v.size() == 1 ? v[0] : v.at(i); };
    c.d = static_cast<int>(nf);
    for (std::size_t i = 0; i < nf; ++i) {
      try {
        int b = std::stoi(pick(bases, i));
        std::vector<int> dg;
        std::string ds = digs.empty() || (digs.size() == 1 && digs[0].empty()) ? "" : pick(digs, i);
        if (ds.empty())
          for (int k = 0; k < b; ++k) dg.push_back(k);
        else
          for (const auto& t : detail::split(ds, ',')) dg.push_back(std::stoi(t));
        CantorSpec cs;
        cs.base = b;
        cs.digits = dg;
        cs.validate();
        c.cantor.push_back(cs);
        c.target.push_back(detail::parse_rational(pick(tgts, i)));
      } catch (const ValidationError& e) {
        for (const auto& f : e.fields()) bad.push_back("system." + f);
      } catch (const std::exception&) {
        bad.push_back("system.base/digits/target: cannot parse factor " + std::to_string(i));
      }
    }
  }

  field("task.levels", [&](const std::string& v) { std::tie(c.n_lo, c.n_hi) = detail::parse_range(v); });
  field("task.N", [&](const std::string& v) { c.N = std::stol(v); });
  field("task.seed", [&](const std::string& v) { c.seed = std::stoull(v); });
  field("task.samples", [&](const std::string& v) { c.samples = std::stoull(v); });
  field("task.cap", [&](const std::string& v) { c.cap = std::stoull(v); });
  field("task.balls", [&](const std::string& v) { c.balls = v; });
  field("task.points", [&](const std::string& v) { c.points = std::stoull(v); });
  field("task.windows", [&](const std::string& v) {
    c.windows.clear();
    for (double x : detail::parse_doubles(v)) c.windows.push_back(static_cast<long>(x));
  });
  field("task.k", [&](const std::string& v) { c.k = std::stoi(v); });
  field("task.series", [&](const std::string& v) {
    if (v != "theorem" && v != "application") throw ValidationError("series must be theorem or application");
    c.series = v;
  });

  field("measure.space", [&](const std::string& v) {
    for (const auto& t : detail::split(v, ';')) c.measure_space.push_back(detail::parse_factor(t));
  });
  field("measure.boxes", [&](const std::string& v) {
    for (const auto& t : detail::split(v, ';')) c.boxes.push_back(detail::parse_box(t));
  });
  field("measure.method", [&](const std::string& v) {
    if (v != "exact" && v != "mc") throw ValidationError("method must be exact or mc");
    c.method = v;
  });

  field("probe.factor", [&](const std::string& v) { c.probe_factor = detail::parse_factor(v); });
  field("probe.geometry", [&](const std::string& v) {
    auto parts = detail::split(v, ':');
    if (parts[0] == "point" && parts.size() == 2) {
      PointGeometry<Rational> p;
      for (const auto& t : detail::split(parts[1], ',')) p.coords.push_back(detail::parse_rational(t));
      c.probe_geometry = p;
    } else if (parts[0] == "affine" && parts.size() == 3) {
      AffineGeometry a;
      for (const auto& t : detail::split(parts[1], ',')) a.q.push_back(std::stoll(t));
      a.p = std::stoll(parts[2]);
      c.probe_geometry = a;
    } else {
      throw ValidationError("geometry must be point:x,... or affine:q1,q2,...:p");
    }
  });
  field("probe.x", [&](const std::string& v) { c.probe_x = detail::parse_doubles(v); });
  field("probe.r", [&](const std::string& v) { c.probe_r = detail::parse_doubles(v); });
  field("probe.eps", [&](const std::string& v) { c.probe_eps = detail::parse_doubles(v); });

  // cross-field checks
  if (c.d < 1) bad.push_back("system.d: must be >= 1");
  if (c.h < 1) bad.push_back("system.h: must be >= 1");
  if (c.M < 2) bad.push_back("system.M: must be >= 2");
  if (c.n_lo < 1 || c.n_hi < c.n_lo) bad.push_back("task.levels: need 1 <= lo <= hi");
  if (c.N < 1) bad.push_back("task.N: must be positive");
  if (c.samples < 1) bad.push_back("task.samples: must be positive");
  if (c.cap < 1) bad.push_back("task.cap: must be positive");
  if (c.k < 1) bad.push_back("task.k: must be positive");
  auto broadcast = [&](std::vector<RateFunction>& v, std::size_t n, const char* key) {
    if (v.size() == 1 && n > 1) v.assign(n, v[0]);
    if (!v.empty() && v.size() != n) bad.push_back(std::string(key) + ": need " + std::to_string(n) + " functions");
  };
  if (c.kind == SystemKind::Rational || c.kind == SystemKind::LinearForms) {
    broadcast(c.phi, c.d, "system.phi");
    if (c.phi.empty() && c.task && *c.task != Task::Measure && *c.task != Task::ScalingProbe)
      bad.push_back("system.phi: required for this system");
  }
  if (c.kind == SystemKind::LinearForms) {
    broadcast(c.Phi, c.h, "system.Phi");
    if (c.Phi.empty()) bad.push_back("system.Phi: required for linear forms");
  }
  if (c.kind == SystemKind::Shrinking) {
    broadcast(c.psi, static_cast<std::size_t>(c.d), "system.psi");
    if (c.psi.empty() && c.task && *c.task != Task::Measure && *c.task != Task::ScalingProbe)
      bad.push_back("system.psi: required for shrinking targets");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace limsup
