#pragma once

// Command-line front end. run_cli takes the argument vector (without a
// program name) plus output streams, and returns the process exit code:
//   0  success
//   1  usage problems, malformed input, or failed validation
//   2  a cause query whose first condition (actuality) fails
//   3  an unreadable file

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "harmquant/model_io.hpp"
#include "harmquant/report.hpp"

namespace harmquant {

namespace detail {

struct FileOpenFailure {
  std::string path;
};

inline std::string read_file_or_fail(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileOpenFailure{path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "VAR=value,VAR=value" against declared ranges.
inline Assignment parse_cli_bindings(const CausalModel& m,
                                     const std::string& text,
                                     const char* what) {
  Assignment a;
  if (trim_text(text).empty())
    throw InputError(std::string(what) +
                     " expects VAR=value[,VAR=value...] assignments");
  for (const auto& piece : split_outside_brackets(text, ',')) {
    std::size_t eq = piece.find('=');
    if (eq == std::string::npos)
      throw InputError(std::string(what) + " expects VAR=value pairs, found '" +
                       trim_text(piece) + "'");
    std::string var = trim_text(piece.substr(0, eq));
    std::string val = trim_text(piece.substr(eq + 1));
    int vi = m.index_of(var);
    if (vi < 0)
      throw InputError(std::string(what) + " refers to unknown variable '" +
                       var + "'");
    Value v = looks_like_integer(val) ? Value::integer(std::stoll(val))
                                      : Value::symbol(val);
    if (m.position_in_range(vi, v) < 0)
      throw InputError("'" + val + "' is not in the range of '" + var + "'");
    if (a.count(var))
      throw InputError(std::string(what) + " sets '" + var + "' twice");
    a.emplace(var, std::move(v));
  }
  return a;
}

inline CausalFormula formula_from_bindings(const Assignment& a) {
  std::optional<CausalFormula> result;
  for (const auto& [k, v] : a) {
    CausalFormula atom = CausalFormula::eq(k, v);
    result = result ? CausalFormula::conj(std::move(*result), std::move(atom))
                    : std::move(atom);
  }
  return *result;
}

// "identity", "floor:RATIONAL", "table:FILE", or "prelec:ALPHA".
inline WeightingFunction parse_weighting_spec(const std::string& spec) {
  if (spec == "identity") return WeightingFunction::identity();
  if (spec.rfind("floor:", 0) == 0)
    return WeightingFunction::floor(Rational::parse(spec.substr(6)));
  if (spec.rfind("table:", 0) == 0)
    return WeightingFunction::table(
        parse_weight_table(read_file_or_fail(spec.substr(6))));
  if (spec.rfind("prelec:", 0) == 0) {
    try {
      std::size_t used = 0;
      std::string body = spec.substr(7);
      double alpha = std::stod(body, &used);
      if (used != body.size()) throw InputError("bad prelec exponent");
      return WeightingFunction::prelec(alpha);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw InputError("bad prelec exponent in '" + spec + "'");
    }
  }
  throw InputError("unknown weighting '" + spec +
                   "'; use identity, floor:R, table:FILE, or prelec:A");
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"quantify causal harm in finite structural models"};
  app.require_subcommand(1);

  std::string model_path, context_s, set_s, policy_s, agent_s;
  std::string cause_s, alt_s, effect_s, alt_effect_s;
  std::string weighting_s, default_action_s, penalty_mode_s;
  std::string format = "text";
  bool qualitative = false, benefit = false, rbt = false;

  CLI::App* validate = app.add_subcommand("validate", "check a model file");
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve in one context");
  CLI::App* cause = app.add_subcommand("cause", "test a contrastive cause");
  CLI::App* harm =
      app.add_subcommand("harm", "score one action in one context");
  CLI::App* wqh_cmd =
      app.add_subcommand("wqh", "probability-weighted harm over contexts");
  CLI::App* aggregate =
      app.add_subcommand("aggregate", "multi-agent total with fairness");
  CLI::App* compare = app.add_subcommand("compare", "rank the file's policies");

  for (CLI::App* sub :
       {validate, solve_cmd, cause, harm, wqh_cmd, aggregate, compare}) {
    sub->add_option("--model", model_path, "model file to load")->required();
    sub->add_option("--format", format, "output form")
        ->check(CLI::IsMember({"text", "json"}));
  }
  for (CLI::App* sub : {solve_cmd, cause, harm, wqh_cmd})
    sub->add_option("--context", context_s, "exogenous values VAR=v,...");
  for (CLI::App* sub : {solve_cmd, harm, wqh_cmd, aggregate})
    sub->add_option("--set", set_s, "intervention VAR=v,...");
  for (CLI::App* sub : {harm, wqh_cmd, aggregate})
    sub->add_option("--policy", policy_s, "named policy from the file");
  for (CLI::App* sub : {harm, wqh_cmd})
    sub->add_option("--agent", agent_s, "agent to assess");
  cause->add_option("--cause", cause_s, "actual cause VAR=v,...")->required();
  cause->add_option("--alt", alt_s, "alternative cause values")->required();
  cause->add_option("--effect", effect_s, "actual effect VAR=v,...")
      ->required();
  cause->add_option("--alt-effect", alt_effect_s, "contrasted effect")
      ->required();
  harm->add_flag("--qualitative", qualitative, "harms yes/no plus certificate");
  harm->add_flag("--benefit", benefit, "score benefit instead of harm");
  harm->add_flag("--rbt", rbt, "risk-based comparison against a default");
  harm->add_option("--default-action", default_action_s,
                   "default action for --rbt");
  wqh_cmd->add_option("--weighting", weighting_s,
                      "identity | floor:R | table:FILE | prelec:A");
  aggregate->add_option("--penalty-mode", penalty_mode_s,
                        "how often the fairness penalty applies")
      ->check(CLI::IsMember({"once", "per-group", "per_group"}));

  try {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.emplace_back("harmquant");
    for (auto& a : args) full.push_back(std::move(a));
    std::vector<char*> argv;
    argv.reserve(full.size());
    for (auto& s : full) argv.push_back(s.data());
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::string text;
  try {
    text = detail::read_file_or_fail(model_path);
  } catch (const detail::FileOpenFailure& f) {
    err << "error: cannot open '" << f.path << "'\n";
    return 3;
  }
  ParseResult parsed = parse_model(text);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics)
      err << model_path << ":" << d.line << ": " << d.message << "\n";
    return 1;
  }
  ModelFile file = std::move(*parsed.file);

  const std::string cmd = app.get_subcommands().front()->get_name();
  const bool as_json = format == "json";

  auto get_context = [&]() -> Context {
    if (!context_s.empty())
      return detail::parse_cli_bindings(file.model, context_s, "--context");
    if (file.model.exogenous_indices().empty()) return {};
    throw InputError("the model has exogenous variables; pass --context");
  };
  auto get_action = [&]() -> Intervention {
    const bool has_policy = !policy_s.empty();
    const bool has_set = !set_s.empty();
    if (has_policy == has_set)
      throw InputError("pass exactly one of --policy or --set");
    if (has_set)
      return Intervention{
          detail::parse_cli_bindings(file.model, set_s, "--set")};
    for (const auto& p : file.policies)
      if (p.name == policy_s) return p.action;
    throw InputError("no policy named '" + policy_s + "'");
  };
  auto get_agent = [&]() -> const UtilityModel& {
    if (!agent_s.empty()) return file.agent(agent_s);
    return file.sole_agent();
  };
  auto get_dist = [&]() -> ContextDistribution {
    if (file.dist) return *file.dist;
    if (file.model.exogenous_indices().empty())
      return ContextDistribution::point_mass({});
    throw InputError("the model has exogenous variables but no distribution");
  };
  auto get_collective = [&]() -> CollectiveModel {
    CollectiveModel cm = file.collective();
    if (!penalty_mode_s.empty())
      cm.fairness.mode = penalty_mode_s == "once" ? PenaltyMode::once
                                                  : PenaltyMode::per_group;
    return cm;
  };

  try {
    if (cmd == "validate") {
      if (as_json)
        out << report::dump(report::with_version(
            {{"valid", true}, {"name", file.name}}));
      else
        out << "'" << file.name << "' is valid\n";
      return 0;
    }

    if (cmd == "solve") {
      Context ctx = get_context();
      CausalModel m =
          set_s.empty()
              ? file.model
              : intervene(file.model,
                          Intervention{detail::parse_cli_bindings(
                              file.model, set_s, "--set")});
      Assignment a = solve(m, ctx);
      out << (as_json ? report::dump(report::solve_json(a))
                      : report::solve_text(file.model, a));
      return 0;
    }

    if (cmd == "cause") {
      Context ctx = get_context();
      ContrastiveQuery q;
      q.cause = detail::parse_cli_bindings(file.model, cause_s, "--cause");
      q.alt = detail::parse_cli_bindings(file.model, alt_s, "--alt");
      q.effect = detail::formula_from_bindings(
          detail::parse_cli_bindings(file.model, effect_s, "--effect"));
      q.alt_effect = detail::formula_from_bindings(detail::parse_cli_bindings(
          file.model, alt_effect_s, "--alt-effect"));
      // The candidate cause is staged as an intervention so its values are
      // actual; the contrastive check then runs against the acted model.
      CausalModel acted = intervene(file.model, Intervention{q.cause});
      CauseVerdict v = check_contrastive_cause(acted, ctx, q);
      out << (as_json ? report::dump(report::cause_json(v))
                      : report::cause_text(v));
      return v.ac1 ? 0 : 2;
    }

    if (cmd == "harm") {
      if (int(qualitative) + int(benefit) + int(rbt) > 1)
        throw InputError(
            "pass at most one of --qualitative, --benefit, --rbt");
      const UtilityModel& um = get_agent();
      Context ctx = get_context();
      Intervention action = get_action();
      if (qualitative) {
        QualitativeVerdict v = qualitative_harm(file.model, um, ctx, action);
        out << (as_json ? report::dump(report::qualitative_json(v))
                        : report::qualitative_text(v));
      } else if (benefit) {
        HarmAssessment h = quantitative_benefit(file.model, um, ctx, action);
        out << (as_json ? report::dump(report::harm_json(h))
                        : report::harm_text(h));
      } else if (rbt) {
        if (default_action_s.empty())
          throw InputError("--rbt needs --default-action");
        Intervention fallback{detail::parse_cli_bindings(
            file.model, default_action_s, "--default-action")};
        double v = rbt_harm(file.model, um, ctx, action, fallback);
        out << (as_json ? report::dump(report::scored_json(v))
                        : report::scored_text(v));
      } else {
        HarmAssessment h = quantitative_harm(file.model, um, ctx, action);
        out << (as_json ? report::dump(report::harm_json(h))
                        : report::harm_text(h));
      }
      return 0;
    }

    if (cmd == "wqh") {
      const UtilityModel& um = get_agent();
      ContextDistribution dist = get_dist();
      WeightingFunction w =
          weighting_s.empty()
              ? (file.weighting ? *file.weighting
                                : WeightingFunction::identity())
              : detail::parse_weighting_spec(weighting_s);
      WqhReport r = wqh(file.model, um, dist, w, get_action());
      out << (as_json ? report::dump(report::wqh_json(r, w.describe()))
                      : report::wqh_text(r, w.describe()));
      return 0;
    }

    if (cmd == "aggregate") {
      CollectiveModel cm = get_collective();
      Intervention action = get_action();
      AggregateReport r = aggregate_harm(cm, action, policy_s);
      auto harms = per_agent_wqh(cm, action);
      out << (as_json ? report::dump(report::aggregate_json(r, harms))
                      : report::aggregate_text(r, harms));
      return 0;
    }

    // compare
    CollectiveModel cm = get_collective();
    auto ranked = compare_policies(cm, file.policies);
    out << (as_json ? report::dump(report::compare_json(ranked))
                    : report::compare_text(ranked));
    return 0;
  } catch (const detail::FileOpenFailure& f) {
    err << "error: cannot open '" << f.path << "'\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace harmquant
