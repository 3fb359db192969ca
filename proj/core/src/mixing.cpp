#include "mixl/mixing.hpp"

#include <cmath>
#include <limits>

#include "mixl/errors.hpp"

namespace mixl {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::Fixed: return "fixed";
    case Family::Normal: return "normal";
    case Family::Uniform: return "uniform";
    case Family::Triangular: return "triangular";
    case Family::Lognormal: return "lognormal";
    case Family::Loguniform: return "loguniform";
    case Family::AsymTriangular: return "at";
    case Family::Fm2: return "fm2";
    case Family::Fm3: return "fm3";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::Fixed, Family::Normal, Family::Uniform, Family::Triangular, Family::Lognormal,
                   Family::Loguniform, Family::AsymTriangular, Family::Fm2, Family::Fm3}) {
    if (family_name(f) == name) return f;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown mixing family '" + std::string(name) + "'");
}

bool is_random(Family family) { return family != Family::Fixed; }

std::size_t arity(const MixingSpec& spec) {
  switch (spec.family) {
    case Family::Fixed: return 1;
    case Family::Normal:
    case Family::Uniform:
    case Family::Triangular:
    case Family::Lognormal:
    case Family::Loguniform: return 2;
    case Family::AsymTriangular: return spec.pin_at_offset ? 2 : 3;
    case Family::Fm2: return 3;
    case Family::Fm3: return 4;
  }
  return 0;
}

std::vector<std::string> parameter_labels(const MixingSpec& spec) {
  const std::string& n = spec.coefficient;
  switch (spec.family) {
    case Family::Fixed: return {n};
    case Family::Normal:
    case Family::Lognormal: return {n + ".mu", n + ".sigma"};
    case Family::Uniform:
    case Family::Triangular:
    case Family::Loguniform: return {n + ".a", n + ".b"};
    case Family::AsymTriangular:
      if (spec.pin_at_offset) return {n + ".a", n + ".b"};
      return {n + ".a", n + ".b", n + ".c"};
    case Family::Fm2: return {n + ".mu", n + ".s1", n + ".s2"};
    case Family::Fm3: return {n + ".mu", n + ".s1", n + ".s2", n + ".s3"};
  }
  return {};
}

std::size_t draw_dims(Family family) {
  switch (family) {
    case Family::Fixed: return 0;
    case Family::Triangular: return 2;
    default: return 1;
  }
}

DrawKind draw_kind(Family family) {
  return family == Family::Normal || family == Family::Lognormal ? DrawKind::StdNormal : DrawKind::Uniform01;
}

bool is_scale_parameter(const MixingSpec& spec, std::size_t index) {
  return (spec.family == Family::Normal || spec.family == Family::Lognormal) && index == 1;
}

namespace {

inline double at_value(double a, double b, double c, double u) noexcept {
  const double mode = 0.5 * (a + b) + c;
  if (!(a < mode && mode < b)) return std::numeric_limits<double>::quiet_NaN();
  const double f_mode = (mode - a) / (b - a);
  if (u <= f_mode) return a + (mode - a) * std::sqrt(u / f_mode);
  return b - (b - mode) * std::sqrt((1.0 - u) / (1.0 - f_mode));
}

}  // namespace

double transform(const MixingSpec& spec, std::span<const double> params, double d1, double d2) noexcept {
  const double sign = spec.positive ? 1.0 : -1.0;
  switch (spec.family) {
    case Family::Fixed: return params[0];
    case Family::Normal: return params[0] + params[1] * d1;
    case Family::Uniform: return params[0] + params[1] * d1;
    case Family::Triangular: return params[0] + params[1] * (d1 + d2);
    case Family::Lognormal: return sign * std::exp(params[0] + params[1] * d1);
    case Family::Loguniform: return sign * std::exp(params[0] + params[1] * d1);
    case Family::AsymTriangular:
      return at_value(params[0], params[1], spec.pin_at_offset ? 0.0 : params[2], d1);
    case Family::Fm2: return params[0] + d1 * (params[1] + d1 * params[2]);
    case Family::Fm3: return params[0] + d1 * (params[1] + d1 * (params[2] + d1 * params[3]));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> realize(const MixingSpec& spec, std::span<const double> params, const DrawBlock& draws,
                            std::size_t first_dim) {
  if (params.size() != arity(spec)) {
    throw Error(ErrorCode::ArityMismatch, spec.coefficient + ": family " + std::string(family_name(spec.family)) +
                                              " takes " + std::to_string(arity(spec)) + " parameters, got " +
                                              std::to_string(params.size()));
  }
  const std::size_t dims = draw_dims(spec.family);
  std::vector<double> out(draws.n_persons() * draws.n_draws());
  if (dims == 0) {
    std::fill(out.begin(), out.end(), params[0]);
    return out;
  }
  if (draws.kind() != draw_kind(spec.family)) {
    throw Error(ErrorCode::WrongDrawKind, spec.coefficient + ": family " + std::string(family_name(spec.family)) +
                                              " needs " +
                                              (draw_kind(spec.family) == DrawKind::StdNormal ? "std_normal" : "uniform01") +
                                              " draws");
  }
  if (first_dim + dims > draws.n_dims()) {
    throw Error(ErrorCode::DrawDimensionMismatch, spec.coefficient + ": draw block has too few dimensions");
  }
  for (std::size_t p = 0; p < draws.n_persons(); ++p) {
    for (std::size_t r = 0; r < draws.n_draws(); ++r) {
      const double d1 = draws(p, r, first_dim);
      const double d2 = dims > 1 ? draws(p, r, first_dim + 1) : 0.0;
      out[p * draws.n_draws() + r] = transform(spec, params, d1, d2);
    }
  }
  return out;
}

double at_inverse_cdf(double a, double b, double c, double u) {
  if (!(a < b)) throw Error(ErrorCode::DegenerateSupport, "asymmetric triangular needs a < b");
  const double mode = 0.5 * (a + b) + c;
  if (!(a < mode && mode < b)) throw Error(ErrorCode::ModeOutOfSupport, "asymmetric triangular mode outside (a, b)");
  return at_value(a, b, c, u);
}

double analytic_mean(const MixingSpec& spec, std::span<const double> p) {
  if (p.size() != arity(spec)) throw Error(ErrorCode::ArityMismatch, spec.coefficient + ": wrong parameter count");
  const double sign = spec.positive ? 1.0 : -1.0;
  switch (spec.family) {
    case Family::Fixed: return p[0];
    case Family::Normal: return p[0];
    case Family::Uniform: return p[0] + 0.5 * p[1];
    case Family::Triangular: return p[0] + p[1];
    case Family::Lognormal: return sign * std::exp(p[0] + 0.5 * p[1] * p[1]);
    case Family::Loguniform:
      if (std::abs(p[1]) < 1e-12) return sign * std::exp(p[0] + 0.5 * p[1]);
      return sign * (std::exp(p[0] + p[1]) - std::exp(p[0])) / p[1];
    case Family::AsymTriangular: {
      const double c = spec.pin_at_offset ? 0.0 : p[2];
      const double mode = 0.5 * (p[0] + p[1]) + c;
      return (p[0] + p[1] + mode) / 3.0;
    }
    case Family::Fm2: return p[0] + p[1] / 2.0 + p[2] / 3.0;
    case Family::Fm3: return p[0] + p[1] / 2.0 + p[2] / 3.0 + p[3] / 4.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace mixl
