#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "caei/model.hpp"

// JSON encoding of instances and solutions. Numbers are "a/b" strings (or
// integers); agents and items are 1-based in files.

namespace caei::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string model_tag(const AnyInstance& inst) {
  static const char* const tags[] = {"divisible", "cake", "discrete"};
  return tags[inst.index()];
}

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline const Json& array_at(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

inline Rational number(const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
  } catch (const InputError& e) {
    fail(where, e.what());
  }
  fail(where, "expected a fraction string or an integer");
}

inline long integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long>();
}

inline std::size_t index1(const Json& j, std::size_t bound, const std::string& where) {
  const long v = integer(j, where);
  if (v < 1 || static_cast<std::size_t>(v) > bound)
    fail(where, "index " + std::to_string(v) + " out of range 1.." + std::to_string(bound));
  return static_cast<std::size_t>(v - 1);
}

inline Json encode(const Rational& r, bool exact) {
  if (!exact) return to_decimal_string(r);
  if (r.get_den() == 1 && r.get_num().fits_slong_p()) return r.get_num().get_si();
  return to_string(r);
}

inline RationalVector vector_of(const Json& j, const std::string& where) {
  RationalVector out;
  const Json& a = array_at(j, where);
  for (std::size_t k = 0; k < a.size(); ++k) out.push_back(number(a[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

inline Json encode_vector(const RationalVector& v, bool exact) {
  Json a = Json::array();
  for (const Rational& r : v) a.push_back(encode(r, exact));
  return a;
}

inline Piece piece_of(const Json& j, const std::string& where) {
  std::vector<Interval> raw;
  const Json& a = array_at(j, where);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::string at = where + "[" + std::to_string(k) + "]";
    const Json& pair = array_at(a[k], at);
    if (pair.size() != 2) fail(at, "an interval needs exactly two endpoints");
    raw.push_back({number(pair[0], at + "[0]"), number(pair[1], at + "[1]")});
  }
  try {
    return canonicalize_piece(std::move(raw));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

inline Json encode_piece(const Piece& p) {
  Json a = Json::array();
  for (const Interval& iv : p) a.push_back(Json::array({encode(iv.lo, true), encode(iv.hi, true)}));
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instances

inline Json to_json(const AnyInstance& any) {
  Json j;
  j["model"] = detail::model_tag(any);
  std::visit(
      [&](const auto& inst) {
        using I = std::decay_t<decltype(inst)>;
        j["agents"] = inst.agents();
        if constexpr (std::is_same_v<I, DivisibleInstance>) {
          j["goods"] = inst.goods;
          Json rows = Json::array();
          for (const auto& row : inst.demand) rows.push_back(detail::encode_vector(row, true));
          j["demands"] = rows;
        } else if constexpr (std::is_same_v<I, CakeInstance>) {
          Json rows = Json::array();
          for (const Piece& d : inst.demands) rows.push_back(detail::encode_piece(d));
          j["demands"] = rows;
        } else {
          j["quantities"] = inst.quantities;
          Json rows = Json::array();
          for (const auto& d : inst.demands) {
            Json items = Json::array();
            for (std::size_t item : d) items.push_back(item + 1);
            rows.push_back(items);
          }
          j["demands"] = rows;
        }
      },
      any);
  return j;
}

inline AnyInstance instance_from_json(const Json& j) {
  const std::string model = detail::field(j, "model", "instance").get<std::string>();
  const Json& demands = detail::array_at(detail::field(j, "demands", "instance"), "demands");
  const long agents = detail::integer(detail::field(j, "agents", "instance"), "agents");
  if (agents < 1 || static_cast<std::size_t>(agents) != demands.size())
    detail::fail("agents", "does not match the number of demand entries (" + std::to_string(demands.size()) + ")");

  auto checked = [](auto&& inst) -> AnyInstance {
    try {
      validate(inst);
    } catch (const InputError& e) {
      detail::fail("instance", e.what());
    }
    return std::move(inst);
  };

  if (model == "divisible") {
    DivisibleInstance inst;
    inst.goods = static_cast<std::size_t>(detail::integer(detail::field(j, "goods", "instance"), "goods"));
    for (std::size_t i = 0; i < demands.size(); ++i) {
      const std::string at = "demands[" + std::to_string(i) + "]";
      inst.demand.push_back(detail::vector_of(demands[i], at));
      if (inst.demand.back().size() != inst.goods) detail::fail(at, "expected one entry per good");
    }
    return checked(std::move(inst));
  }
  if (model == "cake") {
    CakeInstance inst;
    for (std::size_t i = 0; i < demands.size(); ++i)
      inst.demands.push_back(detail::piece_of(demands[i], "demands[" + std::to_string(i) + "]"));
    return checked(std::move(inst));
  }
  if (model == "discrete") {
    DiscreteInstance inst;
    const Json& q = detail::array_at(detail::field(j, "quantities", "instance"), "quantities");
    for (std::size_t k = 0; k < q.size(); ++k)
      inst.quantities.push_back(detail::integer(q[k], "quantities[" + std::to_string(k) + "]"));
    for (std::size_t i = 0; i < demands.size(); ++i) {
      const std::string at = "demands[" + std::to_string(i) + "]";
      std::vector<std::size_t> items;
      const Json& a = detail::array_at(demands[i], at);
      for (std::size_t k = 0; k < a.size(); ++k)
        items.push_back(detail::index1(a[k], inst.quantities.size(), at + "[" + std::to_string(k) + "]"));
      std::sort(items.begin(), items.end());
      if (std::adjacent_find(items.begin(), items.end()) != items.end()) detail::fail(at, "repeated item");
      inst.demands.push_back(std::move(items));
    }
    return checked(std::move(inst));
  }
  detail::fail("model", "unknown model \"" + model + "\"");
}

// ---------------------------------------------------------------------------
// Solutions

inline Json to_json(const AnySolution& any) {
  Json j;
  static const char* const tags[] = {"divisible", "cake", "discrete"};
  j["model"] = tags[any.index()];
  std::visit(
      [&](const auto& sol) {
        using S = std::decay_t<decltype(sol)>;
        if constexpr (std::is_same_v<S, CakeSolution>) {
          j["prices"] = {{"breakpoints", detail::encode_vector(sol.prices.breakpoints, true)},
                         {"densities", detail::encode_vector(sol.prices.densities, true)}};
          Json rows = Json::array();
          for (const Piece& p : sol.allocation) rows.push_back(detail::encode_piece(p));
          j["allocation"] = rows;
        } else if constexpr (std::is_same_v<S, DivisibleSolution>) {
          j["prices"] = detail::encode_vector(sol.prices, sol.exact);
          Json rows = Json::array();
          for (const auto& row : sol.allocation) rows.push_back(detail::encode_vector(row, sol.exact));
          j["allocation"] = rows;
        } else {
          j["prices"] = detail::encode_vector(sol.prices, true);
          j["allocation"] = sol.allocation;
        }
        Json served = Json::array();
        for (AgentId i : sol.served) served.push_back(i + 1);
        j["served"] = served;
        j["welfare"] = sol.welfare;
        j["exact"] = sol.exact;
        j["clearing"] = sol.clearing == Clearing::full ? "full" : "relaxed";
        j["solver"] = sol.solver;
      },
      any);
  return j;
}

inline AnySolution solution_from_json(const Json& j) {
  const std::string model = detail::field(j, "model", "solution").get<std::string>();
  const Json& alloc = detail::array_at(detail::field(j, "allocation", "solution"), "allocation");
  const Json& prices = detail::field(j, "prices", "solution");

  auto fill_common = [&](auto& sol) {
    const Json& served = detail::array_at(detail::field(j, "served", "solution"), "served");
    for (std::size_t k = 0; k < served.size(); ++k)
      sol.served.push_back(detail::index1(served[k], alloc.size(), "served[" + std::to_string(k) + "]"));
    sol.welfare = static_cast<std::size_t>(detail::integer(detail::field(j, "welfare", "solution"), "welfare"));
    if (j.contains("exact")) sol.exact = j["exact"].get<bool>();
    if (j.contains("clearing")) {
      const std::string c = j["clearing"].get<std::string>();
      if (c != "full" && c != "relaxed") detail::fail("clearing", "expected \"full\" or \"relaxed\"");
      sol.clearing = c == "full" ? Clearing::full : Clearing::relaxed;
    }
    if (j.contains("solver")) sol.solver = j["solver"].get<std::string>();
  };

  if (model == "divisible") {
    DivisibleSolution sol;
    sol.prices = detail::vector_of(prices, "prices");
    for (std::size_t i = 0; i < alloc.size(); ++i)
      sol.allocation.push_back(detail::vector_of(alloc[i], "allocation[" + std::to_string(i) + "]"));
    fill_common(sol);
    return sol;
  }
  if (model == "cake") {
    CakeSolution sol;
    sol.prices.breakpoints = detail::vector_of(detail::field(prices, "breakpoints", "prices"), "prices.breakpoints");
    sol.prices.densities = detail::vector_of(detail::field(prices, "densities", "prices"), "prices.densities");
    try {
      validate(sol.prices);
    } catch (const InputError& e) {
      detail::fail("prices", e.what());
    }
    for (std::size_t i = 0; i < alloc.size(); ++i)
      sol.allocation.push_back(detail::piece_of(alloc[i], "allocation[" + std::to_string(i) + "]"));
    fill_common(sol);
    return sol;
  }
  if (model == "discrete") {
    DiscreteSolution sol;
    sol.prices = detail::vector_of(prices, "prices");
    for (std::size_t i = 0; i < alloc.size(); ++i) {
      const std::string at = "allocation[" + std::to_string(i) + "]";
      std::vector<Count> row;
      const Json& a = detail::array_at(alloc[i], at);
      for (std::size_t k = 0; k < a.size(); ++k) row.push_back(detail::integer(a[k], at + "[" + std::to_string(k) + "]"));
      sol.allocation.push_back(std::move(row));
    }
    fill_common(sol);
    return sol;
  }
  detail::fail("model", "unknown model \"" + model + "\"");
}

// ---------------------------------------------------------------------------
// Files

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

/// Wraps type errors from the JSON library into input errors.
template <class F>
auto decode(const Json& j, const std::string& origin, F&& f) {
  try {
    return f(j);
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline AnyInstance read_instance(const std::string& path) {
  return decode(read_json_file(path), path, [](const Json& j) { return instance_from_json(j); });
}

inline AnySolution read_solution(const std::string& path) {
  return decode(read_json_file(path), path, [](const Json& j) { return solution_from_json(j); });
}

/// Two-space indented JSON with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write file");
  out << text;
}

}  // namespace caei::io
