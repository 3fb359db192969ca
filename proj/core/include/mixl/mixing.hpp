#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixl/draws.hpp"

namespace mixl {

enum class Family { Fixed, Normal, Uniform, Triangular, Lognormal, Loguniform, AsymTriangular, Fm2, Fm3 };

/// Stable config-file names: fixed, normal, uniform, triangular, lognormal, loguniform, at, fm2, fm3.
std::string_view family_name(Family family);
/// Throws InvalidSpec on unknown names.
Family parse_family(std::string_view name);

/// The eight random families, in the order used for batch estimation.
inline constexpr Family kRandomFamilies[] = {Family::Normal,     Family::Uniform,        Family::Triangular,
                                             Family::Lognormal,  Family::Loguniform,     Family::AsymTriangular,
                                             Family::Fm2,        Family::Fm3};

struct MixingSpec {
  std::string coefficient;
  Family family = Family::Fixed;
  /// Lognormal and loguniform are negative by default; this flips them to positive support.
  bool positive = false;
  /// Asymmetric triangular only: pins the mode offset c to 0 and drops it from the parameters.
  bool pin_at_offset = false;

  bool operator==(const MixingSpec&) const = default;
};

bool is_random(Family family);
std::size_t arity(const MixingSpec& spec);
/// Parameter labels, e.g. {"price.mu", "price.sigma"}; fixed coefficients use the bare name.
std::vector<std::string> parameter_labels(const MixingSpec& spec);
/// Number of draw dimensions the family consumes (triangular: 2, other random: 1, fixed: 0).
std::size_t draw_dims(Family family);
DrawKind draw_kind(Family family);
/// True for parameters whose sign is not identified (normal/lognormal sigma); reported as |value|.
bool is_scale_parameter(const MixingSpec& spec, std::size_t index);

/// Family transform for one person-draw. `d1`, `d2` are the draws for the coefficient's
/// dimensions (d2 only used by triangular). Invalid asymmetric-triangular parameters give NaN.
double transform(const MixingSpec& spec, std::span<const double> params, double d1, double d2 = 0.0) noexcept;

/// Realizes the coefficient for every (person, draw) of `draws`, starting at `first_dim`.
/// Result is laid out [person][draw]. Throws ArityMismatch, WrongDrawKind, DrawDimensionMismatch.
std::vector<double> realize(const MixingSpec& spec, std::span<const double> params, const DrawBlock& draws,
                            std::size_t first_dim);

/// Single-draw inverse CDF of the triangle on [a, b] with mode (a + b) / 2 + c.
/// Throws DegenerateSupport (a >= b) and ModeOutOfSupport.
double at_inverse_cdf(double a, double b, double c, double u);

/// Population mean of the coefficient's distribution at `params`.
double analytic_mean(const MixingSpec& spec, std::span<const double> params);

}  // namespace mixl
