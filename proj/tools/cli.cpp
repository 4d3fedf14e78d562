// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rwfbm/error.hpp"
#include "rwfbm/fbm.hpp"
#include "rwfbm/hierarchy.hpp"
#include "rwfbm/stats.hpp"
#include "rwfbm/testing.hpp"
#include "rwfbm/verify.hpp"

namespace rwfbm::cli {

namespace {

constexpr double generate_past_horizon = 16;
constexpr double bounds_past_horizon = 1;
constexpr double distribution_past_horizon = 16;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0; }

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c, double past) {
  return {{"hurst", num(c.hurst)},
          {"level", std::to_string(c.level)},
          {"horizon", num(c.horizon)},
          {"seed", std::to_string(c.seed)},
          {"epsilon", num(c.epsilon)},
          {"past_horizon", num(past)}};
}

void write_reports(const std::vector<VerificationReport>& reports, Format format, std::ostream& out) {
  if (format == Format::ndjson) {
    for (const auto& r : reports)
      out << to_ndjson(r) << '\n';
    return;
  }
  out << "check,seed,replicas,statistic,bound,pass,hard_failure\n";
  for (const auto& r : reports)
    out << r.check << ',' << r.seed << ',' << r.replicas << ',' << num(r.statistic) << ',' << num(r.bound) << ','
        << (r.pass ? "true" : "false") << ',' << (r.hard_failure ? "true" : "false") << '\n';
}

std::vector<VerificationReport> identities(const RunConfig& c) {
  TwoSidedBm bm(c.seed);
  if (c.inject_fault) {
    if (c.level == 0)
      throw ConfigError("inject-fault", "needs level >= 1");
    bm.right().ensure(c.level, c.horizon);
    corrupt_twisted_step(bm.right(), c.level, 1);
  }
  return {check_exact_identities(bm, c.level, c.horizon)};
}

std::vector<VerificationReport> bounds(const RunConfig& c) {
  BoundsConfig b;
  b.hurst = c.hurst;
  b.level = c.level;
  b.horizon = c.horizon;
  b.C = c.C;
  b.replicas = c.replicas;
  b.seed = c.seed;
  b.epsilon = c.epsilon;
  b.past_horizon = c.past_horizon.value_or(bounds_past_horizon);
  b.threads = c.threads;
  return check_probabilistic_bounds(b);
}

RateConfig rate_config(const RunConfig& c) {
  RateConfig r;
  r.hurst = c.hurst;
  r.m_max = c.level;
  r.m_min = c.level >= 4 ? c.level - 4 : 0;
  r.horizon = c.horizon;
  r.replicas = c.replicas;
  r.seed = c.seed;
  r.epsilon = c.epsilon;
  r.past_horizon = c.past_horizon.value_or(bounds_past_horizon);
  r.threads = c.threads;
  return r;
}

std::vector<VerificationReport> distribution(const RunConfig& c) {
  DistributionConfig d;
  d.hurst = c.hurst;
  d.level = c.level;
  d.horizon = c.horizon;
  d.replicas = c.replicas;
  d.seed = c.seed;
  d.epsilon = c.epsilon;
  d.past_horizon = c.past_horizon.value_or(distribution_past_horizon);
  d.coefficient_level = std::min(c.level, d.coefficient_level);
  d.threads = c.threads;
  return check_distributional_properties(d);
}

std::vector<VerificationReport> delta(const RunConfig& c) {
  DeltaTruncationConfig d;
  d.hurst = c.hurst;
  d.t = 1;
  d.delta = c.delta;
  d.level = c.level;
  d.replicas = c.replicas;
  d.seed = c.seed;
  d.threads = c.threads;
  return {check_delta_truncation(d)};
}

} // namespace

void validate(const RunConfig& c) {
  if (!(c.hurst > 0 && c.hurst < 1))
    throw ConfigError("hurst", "must lie in (0, 1), got " + num(c.hurst));
  if (c.level > 15)
    throw ConfigError("level", "at most 15 is supported, got " + std::to_string(c.level));
  if (!finite_positive(c.horizon))
    throw ConfigError("horizon", "must be positive and finite, got " + num(c.horizon));
  if (!(c.epsilon > 0 && c.epsilon < 1))
    throw ConfigError("epsilon", "must lie in (0, 1), got " + num(c.epsilon));
  if (c.replicas < 1)
    throw ConfigError("replicas", "must be at least 1");
  if (c.past_horizon && !finite_positive(*c.past_horizon))
    throw ConfigError("past-horizon", "must be positive and finite, got " + num(*c.past_horizon));
  if (!(c.delta > 0 && c.delta <= 1))
    throw ConfigError("delta", "must lie in (0, 1], got " + num(c.delta));
}

Format parse_format(const std::string& name) {
  if (name == "csv")
    return Format::csv;
  if (name == "ndjson")
    return Format::ndjson;
  throw ConfigError("format", "expected csv or ndjson, got '" + name + "'");
}

const char* to_string(Format f) { return f == Format::csv ? "csv" : "ndjson"; }

std::vector<std::string> expand_values(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    const auto dots = v.find("..");
    if (dots == std::string::npos) {
      out.push_back(v);
      continue;
    }
    long lo = 0, hi = 0;
    try {
      lo = std::stol(v.substr(0, dots));
      hi = std::stol(v.substr(dots + 2));
    } catch (const std::exception&) {
      throw ConfigError("values", "bad range '" + v + "'");
    }
    if (hi < lo)
      throw ConfigError("values", "empty range '" + v + "'");
    for (long i = lo; i <= hi; ++i)
      out.push_back(std::to_string(i));
  }
  return out;
}

int run_generate(const RunConfig& c, std::ostream& out) {
  validate(c);
  const double past = c.past_horizon.value_or(generate_past_horizon);
  TruncationPolicy policy;
  policy.epsilon = c.epsilon;
  policy.max_past_horizon = past;
  const Kernel kernel(c.hurst);
  HierarchyOptions o;
  o.keep_stopping_times = false;
  TwoSidedBm bm(c.seed, o, o);
  const FbmLevelPath path = simulate_fbm(bm, c.level, kernel, c.horizon, policy);
  const double dt = path.spacing();

  if (c.format == Format::csv) {
    out << "# command=generate\n";
    for (const auto& [k, v] : config_echo(c, past))
      out << "# " << k << '=' << v << '\n';
    out << "# tail_cutoff_used=" << path.tail_cutoff_used << '\n';
    out << "# rows=" << path.values.size() << '\n';
    out << "t,bm,fbm\n";
    std::string line;
    for (std::uint64_t k = 0; k < path.values.size(); ++k) {
      line = num(static_cast<double>(k) * dt);
      line += ',';
      line += num(bm.grid_value(c.level, static_cast<std::int64_t>(k)));
      line += ',';
      line += num(path.values[k]);
      line += '\n';
      out << line;
    }
    return 0;
  }
  nlohmann::ordered_json head;
  head["command"] = "generate";
  nlohmann::ordered_json cfg;
  cfg["hurst"] = c.hurst;
  cfg["level"] = c.level;
  cfg["horizon"] = c.horizon;
  cfg["seed"] = c.seed;
  cfg["epsilon"] = c.epsilon;
  cfg["past_horizon"] = past;
  head["config"] = cfg;
  head["tail_cutoff_used"] = path.tail_cutoff_used;
  head["rows"] = path.values.size();
  out << head.dump() << '\n';
  for (std::uint64_t k = 0; k < path.values.size(); ++k) {
    nlohmann::ordered_json row;
    row["t"] = static_cast<double>(k) * dt;
    row["bm"] = bm.grid_value(c.level, static_cast<std::int64_t>(k));
    row["fbm"] = path.values[k];
    out << row.dump() << '\n';
  }
  return 0;
}

int run_verify(const RunConfig& c, const std::string& suite, std::ostream& out) {
  validate(c);
  std::vector<VerificationReport> reports;
  auto add = [&](std::vector<VerificationReport> rs) {
    for (auto& r : rs)
      reports.push_back(std::move(r));
  };
  if (suite == "identities")
    add(identities(c));
  else if (suite == "bounds")
    add(bounds(c));
  else if (suite == "rates")
    add({fit_convergence_rate(rate_config(c))});
  else if (suite == "distribution")
    add(distribution(c));
  else if (suite == "delta")
    add(delta(c));
  else if (suite == "all") {
    add(identities(c));
    add(bounds(c));
    add({fit_convergence_rate(rate_config(c))});
    add(distribution(c));
    add(delta(c));
  } else
    throw ConfigError("suite", "unknown suite '" + suite + "'; expected identities, bounds, rates, distribution, delta or all");
  write_reports(reports, c.format, out);
  return any_hard_failure(reports) ? 1 : 0;
}

int run_sweep(const RunConfig& c, const std::string& axis, const std::vector<std::string>& raw, std::ostream& out) {
  validate(c);
  if (axis != "m" && axis != "hurst")
    throw ConfigError("axis", "expected m or hurst, got '" + axis + "'");
  const auto values = expand_values(raw);
  if (values.size() < 2)
    throw ConfigError("values", "a sweep needs at least two values");

  struct Row {
    double hurst;
    unsigned level;
    double median;
  };
  std::vector<Row> rows;
  for (const auto& v : values) {
    RunConfig rc = c;
    try {
      if (axis == "m") {
        const long m = std::stol(v);
        if (m < 1 || m > 15)
          throw ConfigError("values", "levels must lie in 1..15, got " + v);
        rc.level = static_cast<unsigned>(m);
      } else {
        std::size_t used = 0;
        rc.hurst = std::stod(v, &used);
        if (used != v.size())
          throw std::invalid_argument(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("values", "cannot parse '" + v + "'");
    }
    validate(rc);
    RateConfig r = rate_config(rc);
    r.m_min = r.m_max = rc.level;
    rows.push_back({rc.hurst, rc.level, median_level_differences(r).front()});
  }

  const double past = c.past_horizon.value_or(bounds_past_horizon);
  if (c.format == Format::ndjson) {
    for (const auto& row : rows) {
      nlohmann::ordered_json j;
      j["axis"] = axis;
      j["hurst"] = row.hurst;
      j["level"] = row.level;
      j["horizon"] = c.horizon;
      j["seed"] = c.seed;
      j["replicas"] = c.replicas;
      j["epsilon"] = c.epsilon;
      j["past_horizon"] = past;
      j["median_max_difference"] = row.median;
      j["median_over_m"] = row.median / row.level;
      j["target_beta"] = beta_exponent(row.hurst);
      out << j.dump() << '\n';
    }
    return 0;
  }
  out << "# command=sweep\n# axis=" << axis << '\n';
  for (const auto& [k, v] : config_echo(c, past))
    if (!(k == "hurst" && axis == "hurst") && !(k == "level" && axis == "m"))
      out << "# " << k << '=' << v << '\n';
  out << "# replicas=" << c.replicas << '\n';
  out << "# median_max_difference: median over replicas of max over the level-m grid of |B^H_{m+1} - B^H_m|\n";
  out << "# median_over_m: median_max_difference / m\n";
  out << "# target_beta: min(2H - 1/2, 1/2)\n";
  out << "hurst,level,median_max_difference,median_over_m,target_beta\n";
  for (const auto& row : rows)
    out << num(row.hurst) << ',' << row.level << ',' << num(row.median) << ',' << num(row.median / row.level) << ','
        << num(beta_exponent(row.hurst)) << '\n';
  return 0;
}

namespace {

void add_common(CLI::App* app, RunConfig& c, std::string& format) {
  app->add_option("--hurst", c.hurst, "Hurst parameter H in (0, 1)")->capture_default_str();
  app->add_option("--level", c.level, "Approximation level m")->capture_default_str();
  app->add_option("--horizon", c.horizon, "Time horizon K")->capture_default_str();
  app->add_option("--seed", c.seed, "Master seed")->envname("RWFBM_SEED")->capture_default_str();
  app->add_option("--epsilon", c.epsilon, "Target relative tail truncation error")->capture_default_str();
  app->add_option("--replicas", c.replicas, "Monte Carlo replicas")->capture_default_str();
  app->add_option("--format", format, "csv or ndjson")->capture_default_str();
  app->add_option("--out", c.out, "Output path (default: standard output)");
  app->add_option("--threads", c.threads, "Worker threads, 0 for all cores")->capture_default_str();
  app->add_option_function<double>(
      "--past-horizon", [&c](double v) { c.past_horizon = v; }, "Cap on the past window, in time units");
}

int with_output(const RunConfig& c, const std::function<int(std::ostream&)>& body) {
  if (c.out.empty() || c.out == "-")
    return body(std::cout);
  std::ostringstream buffer;
  const int status = body(buffer);
  std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
  if (!f)
    throw std::runtime_error(c.out + ": " + std::strerror(errno));
  f << buffer.str();
  f.flush();
  if (!f)
    throw std::runtime_error(c.out + ": " + std::strerror(errno));
  return status;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk construction of fractional Brownian motion"};
  app.require_subcommand(1);
  RunConfig c;
  std::string format = "csv";
  std::string suite = "all";
  std::string axis = "m";
  std::vector<std::string> values;

  auto* gen = app.add_subcommand("generate", "Write one path on the level-m grid");
  add_common(gen, c, format);

  auto* ver = app.add_subcommand("verify", "Run verification checks, one report per check");
  add_common(ver, c, format);
  ver->add_option("--suite", suite, "identities, bounds, rates, distribution, delta or all")->capture_default_str();
  ver->add_option("--delta", c.delta, "Window width of the delta-truncation check")->capture_default_str();
  ver->add_option("--C", c.C, "Confidence parameter of the exceedance budgets")->capture_default_str();
  ver->add_flag("--inject-fault", c.inject_fault, "Flip one step before the identity check");

  auto* sw = app.add_subcommand("sweep", "Median level differences over an axis of m or H values");
  add_common(sw, c, format);
  sw->add_option("--axis", axis, "m or hurst")->capture_default_str();
  sw->add_option("--values", values, "Comma list, or a..b for levels")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    c.format = parse_format(format);
    if (*gen)
      return with_output(c, [&](std::ostream& o) { return run_generate(c, o); });
    if (*ver)
      return with_output(c, [&](std::ostream& o) { return run_verify(c, suite, o); });
    return with_output(c, [&](std::ostream& o) { return run_sweep(c, axis, values, o); });
  } catch (const ConfigError& e) {
    std::cerr << "rwfbm: invalid " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "rwfbm: " << e.what() << '\n';
  }
  return 2;
}

} // namespace rwfbm::cli
