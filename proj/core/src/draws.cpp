#include "mixl/draws.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixl/errors.hpp"
#include "mixl/io.hpp"

namespace mixl {

DrawBlock::DrawBlock(std::size_t n_persons, std::size_t n_draws, std::size_t n_dims, DrawKind kind,
                     std::uint64_t seed, std::vector<double> values)
    : n_persons_(n_persons), n_draws_(n_draws), n_dims_(n_dims), kind_(kind), seed_(seed), values_(std::move(values)) {
  if (values_.size() != n_persons_ * n_draws_ * n_dims_) {
    throw Error(ErrorCode::DrawDimensionMismatch, "draw tensor size does not match its shape");
  }
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::uniform_closed_open() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  const std::size_t i = static_cast<std::size_t>(uniform_closed_open() * static_cast<double>(n));
  return std::min(i, n - 1);
}

double Rng::std_normal() { return inverse_normal_cdf(uniform()); }

DrawBlock mlhs(std::size_t n_persons, std::size_t n_draws, std::size_t n_dims, std::uint64_t seed) {
  if (n_persons == 0 || n_draws == 0 || n_dims == 0) {
    throw Error(ErrorCode::ZeroCount, "mlhs needs n_persons, n_draws and n_dims >= 1");
  }
  Rng rng(seed);
  std::vector<double> values(n_persons * n_draws * n_dims);
  std::vector<double> column(n_draws);
  const double width = 1.0 / static_cast<double>(n_draws);
  for (std::size_t p = 0; p < n_persons; ++p) {
    for (std::size_t d = 0; d < n_dims; ++d) {
      const double u = rng.uniform();
      for (std::size_t i = 0; i < n_draws; ++i) column[i] = (static_cast<double>(i) + u) * width;
      // Fisher-Yates
      for (std::size_t i = n_draws; i > 1; --i) {
        std::swap(column[i - 1], column[rng.index(i)]);
      }
      for (std::size_t r = 0; r < n_draws; ++r) values[(p * n_draws + r) * n_dims + d] = column[r];
    }
  }
  return DrawBlock(n_persons, n_draws, n_dims, DrawKind::Uniform01, seed, std::move(values));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inverse_normal_cdf(double u) {
  constexpr double lo = 1e-12;
  constexpr double hi = 1.0 - 1e-12;
  if (!(u > lo)) u = lo;
  if (u > hi) u = hi;

  // Acklam's rational approximation (relative error < 1.2e-9) ...
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // ... polished by one Halley step against erfc. The upper tail is refined through the
  // complement so that x(u) = -x(1-u) holds to rounding.
  if (u > 0.5) {
    const double v = 1.0 - u;
    const double y = -x;
    const double e = 0.5 * std::erfc(-y / std::sqrt(2.0)) - v;
    const double g = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * y * y);
    return -(y - g / (1.0 + 0.5 * y * g));
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
  const double g = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - g / (1.0 + 0.5 * x * g);
}

DrawBlock to_std_normal(const DrawBlock& block) {
  if (block.kind() != DrawKind::Uniform01) throw Error(ErrorCode::WrongKind, "to_std_normal expects uniform draws");
  std::vector<double> out(block.values().begin(), block.values().end());
  for (double& v : out) v = inverse_normal_cdf(v);
  return DrawBlock(block.n_persons(), block.n_draws(), block.n_dims(), DrawKind::StdNormal, block.seed(), std::move(out));
}

void write_draws_csv(const DrawBlock& block, const std::filesystem::path& path) {
  std::string out = "person,draw,dim,value\n";
  for (std::size_t p = 0; p < block.n_persons(); ++p)
    for (std::size_t r = 0; r < block.n_draws(); ++r)
      for (std::size_t d = 0; d < block.n_dims(); ++d)
        out += std::to_string(p) + "," + std::to_string(r) + "," + std::to_string(d) + "," +
               io::format_double(block(p, r, d)) + "\n";
  io::write_file_atomic(path, out);
}

}  // namespace mixl
