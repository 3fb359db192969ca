#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace mixl {

enum class DrawKind { Uniform01, StdNormal };

/// Immutable [person][draw][dimension] tensor of simulation draws.
class DrawBlock {
 public:
  DrawBlock() = default;
  DrawBlock(std::size_t n_persons, std::size_t n_draws, std::size_t n_dims, DrawKind kind, std::uint64_t seed,
            std::vector<double> values);

  double operator()(std::size_t person, std::size_t draw, std::size_t dim) const {
    return values_[(person * n_draws_ + draw) * n_dims_ + dim];
  }

  /// Draws of one person, laid out [draw][dimension].
  std::span<const double> person(std::size_t p) const {
    return {values_.data() + p * n_draws_ * n_dims_, n_draws_ * n_dims_};
  }

  std::span<const double> values() const { return values_; }
  std::size_t n_persons() const { return n_persons_; }
  std::size_t n_draws() const { return n_draws_; }
  std::size_t n_dims() const { return n_dims_; }
  DrawKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  bool operator==(const DrawBlock&) const = default;

 private:
  std::size_t n_persons_ = 0;
  std::size_t n_draws_ = 0;
  std::size_t n_dims_ = 0;
  DrawKind kind_ = DrawKind::Uniform01;
  std::uint64_t seed_ = 0;
  std::vector<double> values_;
};

/// Modified Latin Hypercube Sampling. For each (person, dimension) a single offset u is
/// shifted into every stratum, (i + u) / n_draws, and the strata are then shuffled
/// independently. Throws ZeroCount.
DrawBlock mlhs(std::size_t n_persons, std::size_t n_draws, std::size_t n_dims, std::uint64_t seed);

/// Elementwise inverse standard-normal CDF. Throws WrongKind unless the block is uniform.
DrawBlock to_std_normal(const DrawBlock& block);

/// Inverse standard-normal CDF, accurate to ~1e-15 on (1e-12, 1 - 1e-12); inputs outside
/// are clamped to that interval.
double inverse_normal_cdf(double u);

double normal_cdf(double x);

void write_draws_csv(const DrawBlock& block, const std::filesystem::path& path);

/// Deterministic 64-bit source shared by every sampler in the library. Uses only
/// std::mt19937_64 output bits so streams agree across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform on [0, 1).
  double uniform_closed_open();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  double std_normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace mixl
