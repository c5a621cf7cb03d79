#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "caei/model.hpp"

namespace caei {

enum class Model { divisible, cake, discrete };

inline Model parse_model(const std::string& name) {
  if (name == "divisible") return Model::divisible;
  if (name == "cake") return Model::cake;
  if (name == "discrete") return Model::discrete;
  throw InputError("unknown model \"" + name + "\"");
}

struct GeneratorSpec {
  Model model = Model::divisible;
  std::size_t agents = 2;
  /// Goods (divisible), items (discrete) or the most intervals per demand (cake).
  std::size_t goods = 2;
  std::uint64_t seed = 0;
  /// Cake only: every demand is a single interval.
  bool contiguous = false;
  /// Exact number of distinct demands; unset means unconstrained.
  std::optional<std::size_t> types;
  /// Grid denominator for fractions (divisible values, cake endpoints).
  long grid = 10;
  /// Largest copy count per discrete item.
  Count max_quantity = 3;
};

namespace detail {

/// Raw modulo keeps the output identical across standard libraries.
class Dice {
 public:
  explicit Dice(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }
  bool coin() { return below(2) == 1; }

 private:
  std::mt19937_64 engine_;
};

inline RationalVector random_divisible_row(Dice& dice, std::size_t goods, long grid) {
  RationalVector row(goods, Rational(0));
  bool any = false;
  for (std::size_t j = 0; j < goods; ++j) {
    if (!dice.coin()) continue;
    row[j] = make_rational(static_cast<long>(1 + dice.below(static_cast<std::uint64_t>(grid))), grid);
    any = true;
  }
  if (!any) {
    const std::size_t j = dice.below(goods);
    row[j] = make_rational(static_cast<long>(1 + dice.below(static_cast<std::uint64_t>(grid))), grid);
  }
  return row;
}

inline Interval random_interval(Dice& dice, long grid) {
  const auto g = static_cast<std::uint64_t>(grid);
  long a = static_cast<long>(dice.below(g + 1));
  long b = static_cast<long>(dice.below(g));
  if (b >= a) ++b;
  if (a > b) std::swap(a, b);
  return {make_rational(a, grid), make_rational(b, grid)};
}

inline Piece random_cake_demand(Dice& dice, std::size_t max_pieces, bool contiguous, long grid) {
  const std::size_t count = contiguous ? 1 : 1 + dice.below(max_pieces);
  std::vector<Interval> raw;
  for (std::size_t k = 0; k < count; ++k) raw.push_back(random_interval(dice, grid));
  return canonicalize_piece(std::move(raw));
}

inline std::vector<std::size_t> random_item_set(Dice& dice, std::size_t items) {
  std::vector<std::size_t> set;
  for (std::size_t j = 0; j < items; ++j)
    if (dice.coin()) set.push_back(j);
  if (set.empty()) set.push_back(dice.below(items));
  return set;
}

/// Draws `distinct` different demands, then spreads agents over them so
/// that every template is used.
template <class Demand, class Draw, class Key>
std::vector<Demand> assign_types(Dice& dice, std::size_t agents, std::size_t distinct, Draw draw, Key key) {
  std::vector<Demand> templates;
  std::set<std::string> seen;
  for (std::size_t attempts = 0; templates.size() < distinct; ++attempts) {
    if (attempts > 1000 * distinct) throw InputError("cannot draw " + std::to_string(distinct) + " distinct demands");
    Demand d = draw();
    if (seen.insert(key(d)).second) templates.push_back(std::move(d));
  }
  std::vector<Demand> out;
  for (std::size_t i = 0; i < agents; ++i) out.push_back(templates[i < distinct ? i : dice.below(distinct)]);
  return out;
}

inline std::string key_of(const RationalVector& row) {
  std::string key;
  for (const Rational& v : row) key += to_string(v) + ",";
  return key;
}

inline std::string key_of(const Piece& piece) {
  std::string key;
  for (const Interval& iv : piece) key += to_string(iv.lo) + ":" + to_string(iv.hi) + ",";
  return key;
}

inline std::string key_of(const std::vector<std::size_t>& items) {
  std::string key;
  for (std::size_t j : items) key += std::to_string(j) + ",";
  return key;
}

}  // namespace detail

/// Random instance satisfying every model invariant; the same spec always
/// yields the same instance.
inline AnyInstance generate_instance(const GeneratorSpec& spec) {
  if (spec.agents < 1 || spec.goods < 1) throw InputError("agents and goods must be at least 1");
  if (spec.types && (*spec.types < 1 || *spec.types > spec.agents))
    throw InputError("types must lie between 1 and the number of agents");
  if (spec.grid < 2) throw InputError("grid must be at least 2");
  detail::Dice dice(spec.seed);

  switch (spec.model) {
    case Model::divisible: {
      auto draw = [&] { return detail::random_divisible_row(dice, spec.goods, spec.grid); };
      DivisibleInstance inst;
      inst.goods = spec.goods;
      if (spec.types) {
        inst.demand = detail::assign_types<RationalVector>(dice, spec.agents, *spec.types, draw,
                                                           [](const RationalVector& r) { return detail::key_of(r); });
      } else {
        for (std::size_t i = 0; i < spec.agents; ++i) inst.demand.push_back(draw());
      }
      validate(inst);
      return inst;
    }
    case Model::cake: {
      auto draw = [&] { return detail::random_cake_demand(dice, spec.goods, spec.contiguous, spec.grid); };
      CakeInstance inst;
      if (spec.types) {
        inst.demands = detail::assign_types<Piece>(dice, spec.agents, *spec.types, draw,
                                                   [](const Piece& p) { return detail::key_of(p); });
      } else {
        for (std::size_t i = 0; i < spec.agents; ++i) inst.demands.push_back(draw());
      }
      validate(inst);
      return inst;
    }
    case Model::discrete: {
      for (std::size_t attempt = 0;; ++attempt) {
        if (attempt > 1000) throw InputError("cannot draw a discrete instance where every item is demanded");
        DiscreteInstance inst;
        for (std::size_t j = 0; j < spec.goods; ++j)
          inst.quantities.push_back(1 + static_cast<Count>(dice.below(static_cast<std::uint64_t>(spec.max_quantity))));
        auto draw = [&] { return detail::random_item_set(dice, spec.goods); };
        if (spec.types) {
          inst.demands = detail::assign_types<std::vector<std::size_t>>(
              dice, spec.agents, *spec.types, draw, [](const std::vector<std::size_t>& d) { return detail::key_of(d); });
        } else {
          for (std::size_t i = 0; i < spec.agents; ++i) inst.demands.push_back(draw());
        }
        // Undemanded items are dropped rather than redrawn.
        std::vector<bool> used(spec.goods, false);
        for (const auto& d : inst.demands)
          for (std::size_t j : d) used[j] = true;
        std::vector<std::size_t> remap(spec.goods, SIZE_MAX);
        std::vector<Count> kept;
        for (std::size_t j = 0; j < spec.goods; ++j)
          if (used[j]) {
            remap[j] = kept.size();
            kept.push_back(inst.quantities[j]);
          }
        if (kept.empty()) continue;
        inst.quantities = std::move(kept);
        for (auto& d : inst.demands)
          for (std::size_t& j : d) j = remap[j];
        validate(inst);
        return inst;
      }
    }
  }
  throw InputError("unknown model");
}

}  // namespace caei
