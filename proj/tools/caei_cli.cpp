#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "caei/caei.hpp"

namespace {

using caei::io::Json;

enum Exit : int { ok = 0, usage = 1, infeasible = 2, unverified = 3, guard = 4 };

/// Carries an exit status out of a subcommand.
struct Outcome {
  int code = ok;
  std::optional<Json> document;
};

Outcome emit(const caei::AnySolution& sol) { return {ok, caei::io::to_json(sol)}; }

Outcome no_solution(const std::string& why) {
  std::cerr << why << "\n";
  return {infeasible, std::nullopt};
}

bool all_contiguous(const caei::CakeInstance& inst) {
  for (const auto& d : inst.demands)
    if (d.size() != 1) return false;
  return true;
}

Outcome run_solve(const std::string& path, const std::string& method, double tol) {
  const caei::AnyInstance any = caei::io::read_instance(path);
  if (const auto* div = std::get_if<caei::DivisibleInstance>(&any)) {
    if (method == "eg") {
      caei::EgOptions opts;
      opts.tolerance = tol;
      caei::EgResult eg = caei::solve_eg(*div, opts);
      if (!eg.solution) return no_solution("equilibrium solver did not certify a CAEI");
      return emit(*eg.solution);
    }
    auto sol = caei::max_welfare_caei(*div);
    if (!sol) return no_solution("no CAEI");
    return emit(*sol);
  }
  if (method == "eg") throw caei::InputError("--method eg applies to divisible instances only");
  if (const auto* cake = std::get_if<caei::CakeInstance>(&any)) return emit(caei::solve_existence(*cake));
  const auto& disc = std::get<caei::DiscreteInstance>(any);
  auto sol = caei::solve_caei(disc);
  if (!sol) return no_solution("NoCaei: some item has more singleton demanders than copies");
  return emit(*sol);
}

Outcome run_maxwelfare(const std::string& path, const std::string& group, bool relaxed) {
  const caei::AnyInstance any = caei::io::read_instance(path);
  const caei::Grouping grouping = group == "agents" ? caei::Grouping::by_agents : caei::Grouping::by_types;
  if (const auto* disc = std::get_if<caei::DiscreteInstance>(&any)) {
    if (!relaxed) throw caei::InputError("discrete welfare maximization needs --relaxed");
    return emit(caei::max_welfare_relaxed(*disc, grouping).solution);
  }
  if (relaxed) throw caei::InputError("--relaxed applies to discrete instances only");
  if (const auto* div = std::get_if<caei::DivisibleInstance>(&any)) {
    auto sol = caei::max_welfare_caei(*div, grouping);
    if (!sol) return no_solution("no CAEI");
    return emit(*sol);
  }
  const auto& cake = std::get<caei::CakeInstance>(any);
  if (all_contiguous(cake)) return emit(caei::greedy_contiguous(cake).solution);
  return emit(caei::max_welfare_fixed_agents(cake));
}

Outcome run_verify(const std::string& inst_path, const std::string& sol_path, const std::optional<std::string>& tol,
                   bool relaxed) {
  const caei::AnyInstance inst = caei::io::read_instance(inst_path);
  const caei::AnySolution sol = caei::io::read_solution(sol_path);
  const bool exact = std::visit([](const auto& s) { return s.exact; }, sol);
  const caei::Rational tolerance = tol ? caei::parse_rational(*tol) : exact ? caei::Rational(0) : caei::Rational(1, 1000000);
  if (sgn(tolerance) < 0) throw caei::InputError("--tol must be nonnegative");
  const caei::CaeiReport report =
      caei::verify_caei(inst, sol, tolerance, relaxed ? caei::Clearing::relaxed : caei::Clearing::full);
  Json doc;
  doc["partition_ok"] = report.partition_ok;
  doc["budgets_ok"] = report.budgets_ok;
  doc["optimal_bundles_ok"] = report.optimal_bundles_ok;
  doc["is_caei"] = report.is_caei;
  doc["is_ceei"] = report.is_ceei;
  Json violations = Json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"subject", v.subject}, {"condition", v.condition}, {"magnitude", caei::to_string(v.magnitude)}});
  doc["violations"] = violations;
  return {report.is_caei ? ok : unverified, doc};
}

Json witness_json(const caei::SatisfiableResult& r) {
  Json w = Json::array();
  for (caei::AgentId i : r.witness) w.push_back(i + 1);
  return {{"welfare", r.welfare}, {"witness", w}};
}

Outcome run_oracle(const std::string& path, const std::string& kind) {
  const caei::AnyInstance any = caei::io::read_instance(path);
  if (kind == "satisfiable")
    return {ok, std::visit([](const auto& inst) { return witness_json(caei::oracle_max_satisfiable(inst)); }, any)};
  return std::visit(
      [](const auto& inst) -> Outcome {
        auto sol = caei::oracle_caei_search(inst);
        if (!sol) return no_solution("NoCaei");
        return emit(*sol);
      },
      any);
}

Outcome run_gen(const caei::GeneratorSpec& spec) { return {ok, caei::io::to_json(caei::generate_instance(spec))}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive allocation from equal incomes for single-minded agents"};
  app.require_subcommand(1);
  std::string out_path;

  std::string file, method = "exact", group = "types", kind = "caei", sol_file, model;
  double eg_tol = 1e-9;
  bool relaxed = false;
  std::optional<std::string> tol;
  caei::GeneratorSpec gen;
  std::size_t types = 0;

  auto* solve = app.add_subcommand("solve", "Compute a CAEI");
  solve->add_option("file", file, "Instance file")->required();
  solve->add_option("--method", method, "eg or exact (divisible only)")->check(CLI::IsMember({"eg", "exact"}));
  solve->add_option("--eg-tol", eg_tol, "Tolerance of the equilibrium solver");
  solve->add_option("--out", out_path, "Write the solution here instead of stdout");

  auto* maxw = app.add_subcommand("maxwelfare", "Compute a welfare-maximizing CAEI");
  maxw->add_option("file", file, "Instance file")->required();
  maxw->add_option("--group", group, "Enumerate served sets by types or agents")
      ->check(CLI::IsMember({"types", "agents"}));
  maxw->add_flag("--relaxed", relaxed, "Allow unsold copies (discrete)");
  maxw->add_option("--out", out_path, "Write the solution here instead of stdout");

  auto* verify = app.add_subcommand("verify", "Check a solution against an instance");
  verify->add_option("instance", file, "Instance file")->required();
  verify->add_option("solution", sol_file, "Solution file")->required();
  verify->add_option("--tol", tol, "Tolerance (default 0 for exact solutions, 1e-6 otherwise)");
  verify->add_flag("--relaxed", relaxed, "Only forbid over-allocation");

  auto* oracle = app.add_subcommand("oracle", "Brute-force ground truth");
  oracle->add_option("file", file, "Instance file")->required();
  oracle->add_option("--kind", kind, "satisfiable or caei")->check(CLI::IsMember({"satisfiable", "caei"}));
  oracle->add_option("--out", out_path, "Write the result here instead of stdout");

  auto* generate = app.add_subcommand("gen", "Generate a random instance");
  generate->add_option("--model", model, "divisible, cake or discrete")
      ->required()
      ->check(CLI::IsMember({"divisible", "cake", "discrete"}));
  generate->add_option("--agents", gen.agents, "Number of agents")->required();
  generate->add_option("--goods", gen.goods, "Goods, items, or intervals per cake demand")->required();
  generate->add_option("--seed", gen.seed, "Random seed")->required();
  generate->add_flag("--contiguous", gen.contiguous, "Single-interval cake demands");
  generate->add_option("--types", types, "Exact number of distinct demands");
  generate->add_option("--out", out_path, "Write the instance here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    Outcome result;
    if (*solve) {
      result = run_solve(file, method, eg_tol);
    } else if (*maxw) {
      result = run_maxwelfare(file, group, relaxed);
    } else if (*verify) {
      result = run_verify(file, sol_file, tol, relaxed);
    } else if (*oracle) {
      result = run_oracle(file, kind);
    } else {
      gen.model = caei::parse_model(model);
      if (generate->count("--types") > 0) gen.types = types;
      result = run_gen(gen);
    }
    if (result.document) {
      const std::string text = caei::io::dump(*result.document);
      if (out_path.empty())
        std::cout << text;
      else
        caei::io::write_file(out_path, text);
    }
    return result.code;
  } catch (const caei::OracleGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return guard;
  } catch (const caei::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
}
