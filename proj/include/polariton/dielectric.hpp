#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "polariton/error.hpp"

namespace polariton {

using complex = std::complex<double>;

namespace model {

/// Non-dispersive medium.
struct Constant {
  double eps_b = 1.0;
};

/// Single Lorentz resonance on a constant background:
///   eps(E) = eps_b + f / (E_x^2 - E^2 - i*gamma*E)
/// with f in eV^2. For a dye-doped film f scales with molar concentration.
struct Lorentz {
  double eps_b = 2.2;
  double resonance_ev = 2.11;
  double fwhm_ev = 0.040;
  double strength_ev2 = 0.0;
};

/// Free-electron metal: eps(E) = eps_inf - E_p^2 / (E^2 + i*Gamma*E).
struct Drude {
  double eps_inf = 4.0;
  double plasma_ev = 9.0;
  double damping_ev = 0.07;
};

}  // namespace model

using DielectricModel = std::variant<model::Constant, model::Lorentz, model::Drude>;

/// Default silver mirror parameters.
inline DielectricModel silver() { return model::Drude{4.0, 9.0, 0.07}; }

inline void validate(const DielectricModel& m) {
  auto finite = [](auto... xs) { return (std::isfinite(xs) && ...); };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, model::Constant>) {
          if (!finite(v.eps_b)) throw Error(ErrorCode::invalid_model, "constant eps_b is not finite");
        } else if constexpr (std::is_same_v<T, model::Lorentz>) {
          if (!finite(v.eps_b, v.resonance_ev, v.fwhm_ev, v.strength_ev2))
            throw Error(ErrorCode::invalid_model, "lorentz parameters are not finite");
          if (!(v.fwhm_ev > 0.0) || !(v.strength_ev2 >= 0.0) || !(v.resonance_ev > 0.0))
            throw Error(ErrorCode::invalid_model, "lorentz requires fwhm > 0, strength >= 0, resonance > 0");
        } else {
          if (!finite(v.eps_inf, v.plasma_ev, v.damping_ev))
            throw Error(ErrorCode::invalid_model, "drude parameters are not finite");
          if (!(v.damping_ev > 0.0) || !(v.plasma_ev > 0.0))
            throw Error(ErrorCode::invalid_model, "drude requires damping > 0 and plasma energy > 0");
        }
      },
      m);
}

inline complex eval_epsilon(const DielectricModel& m, double energy_ev) {
  validate(m);
  if (!(energy_ev > 0.0) || !std::isfinite(energy_ev))
    throw Error(ErrorCode::invalid_model, "energy must be positive and finite");
  const double e = energy_ev;
  return std::visit(
      [e](const auto& v) -> complex {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, model::Constant>) {
          return {v.eps_b, 0.0};
        } else if constexpr (std::is_same_v<T, model::Lorentz>) {
          if (v.strength_ev2 == 0.0) return {v.eps_b, 0.0};
          const complex denom(v.resonance_ev * v.resonance_ev - e * e, -v.fwhm_ev * e);
          return v.eps_b + v.strength_ev2 / denom;
        } else {
          const complex denom(e * e, v.damping_ev * e);
          return v.eps_inf - v.plasma_ev * v.plasma_ev / denom;
        }
      },
      m);
}

/// Principal square root, flipped onto the branch with Im n >= 0.
inline complex index_from_epsilon(complex eps) {
  complex n = std::sqrt(eps);
  if (n.imag() < 0.0 || (n.imag() == 0.0 && n.real() < 0.0)) n = -n;
  return n;
}

inline complex refractive_index(const DielectricModel& m, double energy_ev) {
  return index_from_epsilon(eval_epsilon(m, energy_ev));
}

/// Bounding media carry no thickness; every interior film has a finite one.
struct Layer {
  double thickness_nm = 0.0;
  bool semi_infinite = false;
  DielectricModel model = model::Constant{};

  static Layer bounding(DielectricModel m) { return Layer{0.0, true, std::move(m)}; }
  static Layer film(double thickness_nm, DielectricModel m) {
    return Layer{thickness_nm, false, std::move(m)};
  }
};

/// Ordered multilayer; light enters from layers.front().
struct Stack {
  std::vector<Layer> layers;

  void validate() const {
    if (layers.size() < 3) throw Error(ErrorCode::invalid_stack, "a stack needs at least 3 layers");
    if (!layers.front().semi_infinite || !layers.back().semi_infinite)
      throw Error(ErrorCode::invalid_stack, "first and last layers must be semi-infinite");
    for (std::size_t i = 1; i + 1 < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.semi_infinite)
        throw Error(ErrorCode::invalid_stack, "interior layer " + std::to_string(i) + " is semi-infinite");
      if (!std::isfinite(l.thickness_nm) || l.thickness_nm < 0.0)
        throw Error(ErrorCode::invalid_stack, "interior layer " + std::to_string(i) + " has invalid thickness");
    }
    for (const auto& l : layers) polariton::validate(l.model);
  }

  Stack reversed() const {
    Stack out{std::vector<Layer>(layers.rbegin(), layers.rend())};
    return out;
  }
};

}  // namespace polariton
