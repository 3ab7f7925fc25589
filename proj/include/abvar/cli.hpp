#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "abvar/criteria.hpp"
#include "abvar/diagonal.hpp"
#include "abvar/invariants.hpp"
#include "abvar/json_io.hpp"
#include "abvar/theta.hpp"
#include "abvar/tube.hpp"

namespace abvar::cli {

using OJson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

enum class Format { text, json };

struct RunConfig {
  std::string command;
  /// File path or inline JSON document.
  std::string input;
  Format format = Format::text;
  std::uint64_t seed = 0;
  /// rho2 sample count; 0 selects the default of 4 * dim_target.
  std::size_t samples = 0;
  std::optional<std::int64_t> n;
  std::vector<std::int64_t> type;
  std::string m_source = "bauer";
  std::int64_t n_max = 64;
  double quad_tol = QuadratureOptions{}.abs_tol;
  double theta_tol = kThetaTolerance;
  double rank_threshold = Rho2Options{}.rank_threshold;
  int truncation_scale = 1;
};

struct CommandInfo {
  const char* name;
  const char* module;
  const char* anchor;
};

inline const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> table{
      {"validate", "torus_core", "canonical_polarized_torus"},
      {"bs", "lattice_svp", "buser_sarnak_invariant"},
      {"rel-bs", "lattice_svp", "relative_buser_sarnak_invariant"},
      {"lemma31", "diagonal_product", "diagonal_relative_invariant_identity"},
      {"tube", "tube_volume", "tube_volume_inequality"},
      {"federer", "tube_volume", "federer_area_bound"},
      {"criteria", "criteria", "seshadri_nef_big_criterion"},
      {"table", "criteria", "h0_bound_comparison"},
      {"rho2", "theta_rho2", "rho2_surjectivity"},
  };
  return table;
}

inline const CommandInfo* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (name == c.name) return &c;
  return nullptr;
}

namespace detail {

inline OJson header(const CommandInfo& info, const char* status) {
  OJson j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = info.name;
  j["module"] = info.module;
  j["anchor"] = info.anchor;
  j["status"] = status;
  return j;
}

inline OJson int_vector(const IntVector& v) { return OJson(v); }

inline std::string rational_string(const Rational& q) {
  return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

inline json_io::Json require_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("input_missing", std::string(cfg.command) + " needs --input");
  return json_io::load(cfg.input);
}

inline PolarizedTorus torus_from(const json_io::Json& doc, const std::set<std::string>& extra = {}) {
  std::set<std::string> allowed{"type", "tau"};
  allowed.insert(extra.begin(), extra.end());
  std::set<std::string> required{"type", "tau"};
  required.insert(extra.begin(), extra.end());
  json_io::check_fields(doc, allowed, required, "input");
  return make_torus(json_io::torus_input(doc));
}

inline OJson svp_json(const SvpResult<double>& r) {
  OJson j;
  j["length_sq"] = r.length_sq;
  j["witness"] = int_vector(r.witness);
  j["nodes"] = r.nodes;
  j["lll_first_sq"] = r.lll_first_sq;
  j["lll_swaps"] = r.lll_swaps;
  return j;
}

inline OJson run_validate(const RunConfig& cfg, bool& ok) {
  const auto doc = require_input(cfg);
  json_io::check_fields(doc, {"type", "tau"}, {"type", "tau"}, "input");
  const auto rep = validate(json_io::torus_input(doc));
  OJson r;
  r["ok"] = rep.ok();
  OJson checks = OJson::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"detail", c.detail}});
  r["checks"] = checks;
  r["recovered_type"] = rep.recovered_type;
  if (const auto* f = rep.first_failure()) r["failed_invariant"] = f->name;
  ok = rep.ok();
  return r;
}

inline OJson run_bs(const RunConfig& cfg) {
  const auto t = torus_from(require_input(cfg));
  OJson r = svp_json(buser_sarnak(t));
  r["n"] = t.dim();
  r["type"] = t.type();
  return r;
}

inline OJson run_rel_bs(const RunConfig& cfg) {
  const auto doc = require_input(cfg);
  const auto t = torus_from(doc, {"sublattice"});
  const auto sub = make_subtorus(t, json_io::sublattice(doc["sublattice"]));
  const auto res = relative_buser_sarnak(sub);
  OJson r = svp_json(res);
  r["k"] = sub.k();
  r["max_tube_radius"] = std::sqrt(res.length_sq) / 2.0;
  return r;
}

inline OJson run_lemma31(const RunConfig& cfg) {
  const auto t = torus_from(require_input(cfg));
  const auto c = lemma31_check(t);
  OJson r;
  r["lhs"] = c.lhs;
  r["rhs"] = c.rhs;
  r["rel_err"] = c.rel_err;
  r["lhs_witness"] = int_vector(c.lhs_witness);
  return r;
}

inline OJson run_tube(const RunConfig& cfg) {
  const auto doc = require_input(cfg);
  const auto t = torus_from(doc, {"sublattice", "r", "curves"});
  const auto sub = make_subtorus(t, json_io::sublattice(doc["sublattice"]));
  const auto tube = make_tube(sub, json_io::number(doc["r"], "r"));
  const auto& cs = json_io::array(doc["curves"], "curves");
  if (cs.empty()) throw ValidationError("curves_empty", "at least one curve is required");
  std::vector<CurveSpec> curves;
  for (std::size_t i = 0; i < cs.size(); ++i) curves.push_back(json_io::curve(cs[i], "curves[" + std::to_string(i) + "]"));
  QuadratureOptions opt;
  opt.abs_tol = cfg.quad_tol;
  const auto rep = prop23_check(tube, curves, opt);
  OJson r;
  r["r"] = tube.r();
  r["max_radius"] = tube.max_radius();
  r["intersection"] = rep.intersection;
  r["volume"] = rep.volume;
  r["bound"] = rep.bound;
  r["slack"] = rep.slack;
  r["quadrature_error_estimate"] = rep.quadrature_error_estimate;
  r["inequality_holds"] = rep.inequality_holds();
  return r;
}

inline OJson run_federer(const RunConfig& cfg) {
  const auto doc = require_input(cfg);
  json_io::check_fields(doc, {"curve", "r", "domain_radius"}, {"curve", "r", "domain_radius"}, "input");
  QuadratureOptions opt;
  opt.abs_tol = cfg.quad_tol;
  const auto rep = federer_check(json_io::vector_poly(doc["curve"], "curve"), json_io::number(doc["r"], "r"),
                                 json_io::number(doc["domain_radius"], "domain_radius"), opt);
  OJson r;
  r["multiplicity"] = rep.multiplicity;
  r["area"] = rep.area;
  r["bound"] = rep.bound;
  r["quadrature_error_estimate"] = rep.quadrature_error_estimate;
  r["inequality_holds"] = rep.inequality_holds();
  return r;
}

inline OJson run_criteria(const RunConfig& cfg) {
  CriteriaReport rep;
  if (cfg.m_source == "bauer") {
    if (!cfg.input.empty()) throw ValidationError("m_source", "--input is only used with --m-source computed");
    if (cfg.type.empty()) throw ValidationError("type_missing", "--type is required with --m-source bauer");
    rep = evaluate_bauer(cfg.type);
  } else if (cfg.m_source == "computed") {
    const auto t = torus_from(require_input(cfg));
    if (!cfg.type.empty() && cfg.type != t.type())
      throw ValidationError("type_mismatch", "--type disagrees with the torus type");
    rep = evaluate_computed(t);
  } else {
    throw ValidationError("m_source", "m source must be bauer or computed");
  }
  if (cfg.n && *cfg.n != rep.n)
    throw ValidationError("dimension", "--n is " + std::to_string(*cfg.n) + " but the type has length " + std::to_string(rep.n));
  OJson r;
  r["n"] = rep.n;
  r["type"] = rep.type;
  r["h0"] = rep.h0.str();
  r["Ln"] = rep.Ln.str();
  r["m_source"] = to_string(rep.m_source);
  r["m_value"] = rep.m_value;
  r["seshadri_lower_bound"] = rep.seshadri_lb;
  r["nef_ok"] = rep.nef_ok;
  r["big_ok"] = rep.big_ok;
  r["intersection_number"] = rep.intersection_number.str();
  r["paper_bound_ok"] = rep.paper_bound_ok;
  r["iyer_bound_ok"] = rep.iyer_bound_ok;
  r["verdict"] = to_string(rep.verdict);
  return r;
}

inline OJson table_row(const BoundsRow& row, bool crossover) {
  OJson j;
  j["n"] = row.n;
  j["paper_bound"] = rational_string(row.paper);
  j["paper_bound_value"] = row.paper.convert_to<double>();
  j["iyer_bound"] = row.iyer.str();
  j["ratio"] = row.ratio;
  j["paper_smaller"] = row.paper_smaller;
  j["crossover"] = crossover;
  return j;
}

inline OJson run_rho2(const RunConfig& cfg) {
  const auto t = torus_from(require_input(cfg));
  Rho2Options opt;
  opt.seed = cfg.seed;
  opt.samples = cfg.samples;
  opt.tol = cfg.theta_tol;
  opt.rank_threshold = cfg.rank_threshold;
  opt.truncation_scale = cfg.truncation_scale;
  const auto rep = rho2_rank(t, opt);
  OJson r;
  r["dim_sym2"] = rep.dim_sym2;
  r["dim_target"] = rep.dim_target;
  r["singular_values"] = rep.singular_values;
  r["numerical_rank"] = rep.numerical_rank;
  r["surjective"] = rep.surjective;
  r["verdict"] = rep.verdict();
  r["sample_count"] = rep.sample_count;
  r["seed_used"] = rep.seed_used;
  r["attempts"] = rep.attempts;
  r["truncation_level1"] = rep.truncation_level1;
  r["truncation_level2"] = rep.truncation_level2;
  r["residual"] = rep.residual;
  r["condition"] = rep.condition;
  return r;
}

inline std::string scalar_text(const OJson& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline void print_text(std::ostream& out, const OJson& doc) {
  out << doc["command"].get<std::string>() << " (" << doc["module"].get<std::string>() << ", "
      << doc["anchor"].get<std::string>() << "): " << doc["status"].get<std::string>() << "\n";
  const auto& body = doc.contains("result") ? doc["result"] : doc["error"];
  for (const auto& [key, value] : body.items()) out << "  " << key << ": " << scalar_text(value) << "\n";
}

inline void print_table_text(std::ostream& out, const BoundsTable& table) {
  out << std::setw(4) << "n" << "  " << std::setw(14) << "paper" << "  " << std::setw(14) << "iyer" << "  "
      << std::setw(12) << "ratio" << "  smaller\n";
  for (const auto& row : table.rows) {
    std::ostringstream paper, iyer, ratio;
    paper << std::setprecision(6) << std::scientific << row.paper.convert_to<double>();
    iyer << std::setprecision(6) << std::scientific << row.iyer.convert_to<double>();
    ratio << std::setprecision(6) << std::scientific << row.ratio;
    out << std::setw(4) << row.n << "  " << std::setw(14) << paper.str() << "  " << std::setw(14) << iyer.str() << "  "
        << std::setw(12) << ratio.str() << "  " << (row.paper_smaller ? "yes" : "no")
        << (table.crossover && *table.crossover == row.n ? "  <- crossover" : "") << "\n";
  }
  if (table.crossover) out << "crossover n* = " << *table.crossover << "\n";
  else out << "no crossover for n <= " << table.rows.size() << "\n";
}

inline int report_error(std::ostream& out, const RunConfig& cfg, const CommandInfo& info, const char* kind,
                        const std::string& invariant, const std::string& message) {
  OJson doc = header(info, "error");
  OJson err;
  err["kind"] = kind;
  if (!invariant.empty()) err["invariant"] = invariant;
  err["message"] = message;
  doc["error"] = err;
  if (cfg.format == Format::json) out << doc.dump() << "\n";
  else print_text(out, doc);
  return std::string(kind) == "internal" ? kExitInternal : kExitValidation;
}

} // namespace detail

/// Executes one command and writes its report to `out`. Returns the exit code.
inline int run(const RunConfig& cfg, std::ostream& out) {
  const CommandInfo* info = find_command(cfg.command);
  if (!info) {
    static const CommandInfo unknown{"unknown", "cli", "command_dispatch"};
    return detail::report_error(out, cfg, unknown, "validation", "command", "unknown command '" + cfg.command + "'");
  }
  try {
    if (cfg.command == "table") {
      const auto table = bounds_table(cfg.n_max);
      if (cfg.format == Format::text) {
        detail::print_table_text(out, table);
      } else {
        // One JSON document per line.
        for (const auto& row : table.rows) {
          OJson line = detail::header(*info, "ok");
          line["result"] = detail::table_row(row, table.crossover && *table.crossover == row.n);
          out << line.dump() << "\n";
        }
      }
      return kExitOk;
    }
    OJson result;
    bool ok = true;
    if (cfg.command == "validate") result = detail::run_validate(cfg, ok);
    else if (cfg.command == "bs") result = detail::run_bs(cfg);
    else if (cfg.command == "rel-bs") result = detail::run_rel_bs(cfg);
    else if (cfg.command == "lemma31") result = detail::run_lemma31(cfg);
    else if (cfg.command == "tube") result = detail::run_tube(cfg);
    else if (cfg.command == "federer") result = detail::run_federer(cfg);
    else if (cfg.command == "criteria") result = detail::run_criteria(cfg);
    else result = detail::run_rho2(cfg);
    OJson doc = detail::header(*info, ok ? "ok" : "invalid");
    doc["result"] = result;
    if (cfg.format == Format::json) out << doc.dump() << "\n";
    else detail::print_text(out, doc);
    return ok ? kExitOk : kExitValidation;
  } catch (const json_io::ParseError& e) {
    OJson doc = detail::header(*info, "error");
    doc["error"] = {{"kind", "validation"}, {"invariant", e.invariant()}, {"line", e.line()}, {"column", e.column()},
                    {"message", e.what()}};
    if (cfg.format == Format::json) out << doc.dump() << "\n";
    else detail::print_text(out, doc);
    return kExitValidation;
  } catch (const ValidationError& e) {
    return detail::report_error(out, cfg, *info, "validation", e.invariant(), e.what());
  } catch (const std::exception& e) {
    return detail::report_error(out, cfg, *info, "internal", "", e.what());
  }
}

/// Parses the command line into a RunConfig. Returns an exit code when the
/// process should stop (help or usage errors), nullopt otherwise.
inline std::optional<int> parse_args(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out,
                                     std::ostream& err) {
  CLI::App app{"Invariants and criteria for polarized complex tori", "abvar"};
  app.require_subcommand(1);
  const std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format")->transform(CLI::CheckedTransformer(formats));
  };
  auto add_input = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("-i,--input", cfg.input, "JSON file path or inline JSON document");
    if (required) opt->required();
  };

  for (const char* name : {"validate", "bs", "rel-bs", "lemma31"}) {
    auto* sub = app.add_subcommand(name, std::string(find_command(name)->anchor));
    add_common(sub);
    add_input(sub, true);
  }
  for (const char* name : {"tube", "federer"}) {
    auto* sub = app.add_subcommand(name, std::string(find_command(name)->anchor));
    add_common(sub);
    add_input(sub, true);
    sub->add_option("--quad-tol", cfg.quad_tol, "Absolute quadrature tolerance")->check(CLI::PositiveNumber);
  }
  {
    auto* sub = app.add_subcommand("criteria", find_command("criteria")->anchor);
    add_common(sub);
    add_input(sub, false);
    sub->add_option("--n", cfg.n, "Dimension (checked against the type)");
    sub->add_option("--type", cfg.type, "Polarization type d_1,...,d_n")->delimiter(',');
    sub->add_option("--m-source", cfg.m_source, "Source of m")->check(CLI::IsMember({"bauer", "computed"}));
  }
  {
    auto* sub = app.add_subcommand("table", find_command("table")->anchor);
    add_common(sub);
    sub->add_option("--n-max", cfg.n_max, "Largest n in the table")->check(CLI::PositiveNumber);
  }
  {
    auto* sub = app.add_subcommand("rho2", find_command("rho2")->anchor);
    add_common(sub);
    add_input(sub, true);
    sub->add_option("--seed", cfg.seed, "Seed for the sample points");
    sub->add_option("--samples", cfg.samples, "Number of sample points (default 4 * dim_target)");
    sub->add_option("--theta-tol", cfg.theta_tol, "Theta series truncation tolerance");
    sub->add_option("--rank-threshold", cfg.rank_threshold, "Relative singular value cutoff");
    sub->add_option("--truncation-scale", cfg.truncation_scale, "Multiplier for the truncation box")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  return std::nullopt;
}

inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (auto code = parse_args(argc, argv, cfg, out, err)) return *code;
  return run(cfg, out);
}

} // namespace abvar::cli
