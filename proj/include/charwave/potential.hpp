#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "charwave/errors.hpp"
#include "charwave/quadrature.hpp"

namespace charwave {

enum class Side { left, right };

// Piecewise description of the coefficient V(x) on [0, x_max]. Pieces are
// either constant or smooth profiles with a supplied derivative.
struct PotentialPiece {
  double x0 = 0, x1 = 0;
  bool is_const = true;
  double value = 1.0;                  // constant pieces
  std::function<double(double)> V;     // profile pieces
  std::function<double(double)> dV;    // dV/dx on the piece
};

struct PotentialSpec {
  std::vector<PotentialPiece> pieces;
  double gap_floor = 1e-2;  // (A2) rejection threshold
};

class Potential {
 public:
  std::vector<PotentialPiece> pieces;
  std::vector<double> breakpoints;   // D(V): value jumps, in x
  std::vector<double> kink_points;   // D(V'): slope-only jumps, in x
  double v_min = 0, v_sup = 0, dv_sup = 0;
  double gap_min = std::numeric_limits<double>::infinity();
  double x_max = 0;

  bool all_constant() const {
    return std::all_of(pieces.begin(), pieces.end(), [](const auto& p) { return p.is_const; });
  }

  double value_at(double x, Side side = Side::right) const {
    const PotentialPiece& p = piece_at(x, side);
    return p.is_const ? p.value : p.V(x);
  }

  double slope_at(double x, Side side = Side::right) const {
    const PotentialPiece& p = piece_at(x, side);
    return p.is_const ? 0.0 : p.dV(x);
  }

  // side selects which piece wins when x sits exactly on a piece boundary.
  const PotentialPiece& piece_at(double x, Side side = Side::right) const {
    if (x < pieces.front().x0 - 1e-12 || x > x_max + 1e-12)
      throw OutOfRange("x = " + std::to_string(x) + " outside represented range [0, " +
                       std::to_string(x_max) + "]");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      const auto& p = pieces[i];
      if (side == Side::right ? (x < p.x1) : (x <= p.x1)) return p;
    }
    return pieces.back();
  }
};

// (A1)/(A2) validation: inf V > 0, bounded V and V', positive minimal gap
// among breakpoints and 0.
inline Potential build_potential(const PotentialSpec& spec) {
  if (spec.pieces.empty()) throw ConfigInvalid("potential: no pieces");
  Potential pot;
  pot.pieces = spec.pieces;
  double cursor = pot.pieces.front().x0;
  if (std::abs(cursor) > 1e-12) throw ConfigInvalid("potential: pieces must start at x = 0");
  pot.v_min = std::numeric_limits<double>::infinity();
  for (auto& p : pot.pieces) {
    if (std::abs(p.x0 - cursor) > 1e-10)
      throw ConfigInvalid("potential: pieces must be contiguous without overlap");
    if (p.x1 <= p.x0) throw ConfigInvalid("potential: empty piece");
    cursor = p.x1;
    if (p.is_const) {
      pot.v_min = std::min(pot.v_min, p.value);
      pot.v_sup = std::max(pot.v_sup, std::abs(p.value));
    } else {
      if (!p.V || !p.dV) throw ConfigInvalid("potential: profile piece needs V and dV");
      const int samples = 256;
      for (int i = 0; i <= samples; ++i) {
        double x = p.x0 + (p.x1 - p.x0) * i / samples;
        double v = p.V(x), dv = p.dV(x);
        if (!std::isfinite(v) || !std::isfinite(dv))
          throw RejectedA1("V or V' not finite at x = " + std::to_string(x));
        pot.v_min = std::min(pot.v_min, v);
        pot.v_sup = std::max(pot.v_sup, std::abs(v));
        pot.dv_sup = std::max(pot.dv_sup, std::abs(dv));
      }
    }
  }
  pot.x_max = cursor;
  if (!(pot.v_min > 0)) throw RejectedA1("inf V <= 0 (sampled minimum " + std::to_string(pot.v_min) + ")");

  // Classify interior piece boundaries: value jump -> D(V), slope jump -> D(V').
  for (std::size_t i = 0; i + 1 < pot.pieces.size(); ++i) {
    const auto& a = pot.pieces[i];
    const auto& b = pot.pieces[i + 1];
    double x = a.x1;
    double vl = a.is_const ? a.value : a.V(x);
    double vr = b.is_const ? b.value : b.V(x);
    double sl = a.is_const ? 0.0 : a.dV(x);
    double sr = b.is_const ? 0.0 : b.dV(x);
    if (std::abs(vl - vr) > 1e-12 * (1.0 + std::abs(vl)))
      pot.breakpoints.push_back(x);
    else if (std::abs(sl - sr) > 1e-10 * (1.0 + std::abs(sl)))
      pot.kink_points.push_back(x);
  }

  std::vector<double> d = pot.breakpoints;
  d.push_back(0.0);
  std::sort(d.begin(), d.end());
  for (std::size_t i = 0; i + 1 < d.size(); ++i) pot.gap_min = std::min(pot.gap_min, d[i + 1] - d[i]);
  if (pot.gap_min < spec.gap_floor)
    throw RejectedA2("minimal breakpoint gap " + std::to_string(pot.gap_min) +
                     " below floor " + std::to_string(spec.gap_floor));
  return pot;
}

// The (A5) 2pi-periodic step profile, laid out on [0, x_max]:
// V = a on |x| < theta*pi (mod 2pi), V = b on theta*pi < |x| < pi.
inline PotentialSpec step_potential_a5(double a, double b, double theta, double x_max,
                                       double gap_floor = 1e-2) {
  PotentialSpec spec;
  spec.gap_floor = gap_floor;
  const double pi = M_PI;
  double x = 0;
  int cell = 0;
  while (x < x_max - 1e-12) {
    double cell0 = 2 * pi * cell;
    double e1 = cell0 + theta * pi;          // end of (half) a-layer
    double e2 = cell0 + (2 - theta) * pi;    // end of b-layer
    double e3 = cell0 + 2 * pi;              // end of trailing a-half
    for (auto [lo, hi, v] : {std::tuple{x, std::min(e1, x_max), a},
                             std::tuple{std::max(x, e1), std::min(e2, x_max), b},
                             std::tuple{std::max(x, e2), std::min(e3, x_max), a}}) {
      if (hi > lo + 1e-12) spec.pieces.push_back({lo, hi, true, v, {}, {}});
    }
    x = std::min(e3, x_max);
    ++cell;
  }
  // Merge the trailing a-half of one cell with the leading a-half of the next.
  std::vector<PotentialPiece> merged;
  for (auto& p : spec.pieces) {
    if (!merged.empty() && merged.back().is_const && p.is_const &&
        merged.back().value == p.value && std::abs(merged.back().x1 - p.x0) < 1e-12)
      merged.back().x1 = p.x1;
    else
      merged.push_back(p);
  }
  spec.pieces = std::move(merged);
  return spec;
}

// z = kappa(x) = int_0^x sqrt(V); c(z) = 1/sqrt(V); lambda = c_z / c.
class CoordinateMap {
 public:
  explicit CoordinateMap(const Potential& pot) : pot_(pot) {
    z_start_.resize(pot_.pieces.size() + 1, 0.0);
    for (std::size_t i = 0; i < pot_.pieces.size(); ++i)
      z_start_[i + 1] = z_start_[i] + piece_length_z(i);
    for (double x : pot_.breakpoints) z_breaks_.push_back(kappa(x));
    for (double x : pot_.breakpoints) z_lambda_breaks_.push_back(kappa(x));
    for (double x : pot_.kink_points) z_lambda_breaks_.push_back(kappa(x));
    std::sort(z_lambda_breaks_.begin(), z_lambda_breaks_.end());
    lambda_sup_ = 0;
    for (std::size_t i = 0; i < pot_.pieces.size(); ++i) {
      const auto& p = pot_.pieces[i];
      if (p.is_const) continue;
      const int samples = 256;
      for (int s = 0; s <= samples; ++s) {
        double x = p.x0 + (p.x1 - p.x0) * s / samples;
        lambda_sup_ = std::max(lambda_sup_, std::abs(lambda_from_x(p, x)));
      }
    }
  }

  double z_max() const { return z_start_.back(); }
  double lambda_sup() const { return lambda_sup_; }
  const std::vector<double>& z_breakpoints() const { return z_breaks_; }
  const std::vector<double>& z_lambda_breakpoints() const { return z_lambda_breaks_; }
  const Potential& potential() const { return pot_; }
  bool lambda_identically_zero() const { return pot_.all_constant(); }

  double kappa(double x) const {
    std::size_t i = piece_index_x(x);
    const auto& p = pot_.pieces[i];
    if (p.is_const) return z_start_[i] + std::sqrt(p.value) * (x - p.x0);
    if (x <= p.x0) return z_start_[i];
    int panels = std::max(8, static_cast<int>(std::ceil(16 * (x - p.x0))));
    return z_start_[i] + integrate_gauss([&](double s) { return std::sqrt(p.V(s)); }, p.x0, x, panels);
  }

  double kappa_inverse(double z) const {
    if (z < -1e-12 * (1 + std::abs(z)) || z > z_max() * (1 + 1e-12) + 1e-12)
      throw OutOfRange("z = " + std::to_string(z) + " outside kappa image [0, " +
                       std::to_string(z_max()) + "]");
    z = std::clamp(z, 0.0, z_max());
    std::size_t i = piece_index_z(z);
    const auto& p = pot_.pieces[i];
    if (p.is_const) return p.x0 + (z - z_start_[i]) / std::sqrt(p.value);
    double x = bisect([&](double s) { return kappa(s) - z; }, p.x0, p.x1, 1e-14);
    for (int it = 0; it < 3; ++it) x -= (kappa(x) - z) / std::sqrt(p.V(std::clamp(x, p.x0, p.x1)));
    return std::clamp(x, p.x0, p.x1);
  }

  // c(z) = 1/sqrt(V(kappa^{-1}(z))), one-sided at jumps.
  double c(double z, Side side = Side::right) const {
    std::size_t i = piece_index_z(z, side);
    const auto& p = pot_.pieces[i];
    if (p.is_const) return 1.0 / std::sqrt(p.value);
    double x = kappa_inverse(std::clamp(z, z_start_[i], z_start_[i + 1]));
    return 1.0 / std::sqrt(p.V(x));
  }

  // lambda(z) = c_z/c = dc/dx = -V'/(2 V^{3/2}); identically 0 on constant pieces.
  double lambda(double z, Side side = Side::right) const {
    std::size_t i = piece_index_z(z, side);
    const auto& p = pot_.pieces[i];
    if (p.is_const) return 0.0;
    double x = kappa_inverse(std::clamp(z, z_start_[i], z_start_[i + 1]));
    return lambda_from_x(p, x);
  }

 private:
  static double lambda_from_x(const PotentialPiece& p, double x) {
    double v = p.V(x);
    return -0.5 * p.dV(x) / (v * std::sqrt(v));
  }

  double piece_length_z(std::size_t i) const {
    const auto& p = pot_.pieces[i];
    if (p.is_const) return std::sqrt(p.value) * (p.x1 - p.x0);
    int panels = std::max(8, static_cast<int>(std::ceil(16 * (p.x1 - p.x0))));
    return integrate_gauss([&](double s) { return std::sqrt(p.V(s)); }, p.x0, p.x1, panels);
  }

  std::size_t piece_index_x(double x) const {
    if (x < -1e-12 || x > pot_.x_max + 1e-9)
      throw OutOfRange("x = " + std::to_string(x) + " outside [0, " + std::to_string(pot_.x_max) + "]");
    for (std::size_t i = 0; i < pot_.pieces.size(); ++i)
      if (x < pot_.pieces[i].x1 || i + 1 == pot_.pieces.size()) return i;
    return pot_.pieces.size() - 1;
  }

  std::size_t piece_index_z(double z, Side side = Side::right) const {
    for (std::size_t i = 0; i < pot_.pieces.size(); ++i) {
      if (i + 1 == pot_.pieces.size()) return i;
      if (side == Side::right ? (z < z_start_[i + 1]) : (z <= z_start_[i + 1])) return i;
    }
    return pot_.pieces.size() - 1;
  }

  Potential pot_;
  std::vector<double> z_start_;
  std::vector<double> z_breaks_, z_lambda_breaks_;
  double lambda_sup_ = 0;
};

}  // namespace charwave
