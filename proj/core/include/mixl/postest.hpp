#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixl/averaging.hpp"
#include "mixl/data.hpp"
#include "mixl/estimation.hpp"
#include "mixl/models.hpp"

namespace mixl {

/// Shares by alternative label, averaged over persons, tasks and simulation draws. The fit's
/// draws are regenerated from its fingerprint. Throws SpecDataMismatch.
ShareTable predict_shares(const FitResult& fit, const ChoiceDataset& dataset);

/// pi-weighted constituent shares. Throws ConstituentMismatch.
ShareTable predict_shares(const MAResult& ma, std::span<const FitResult> fits, const ChoiceDataset& dataset);

struct CoefficientSamples {
  std::string coefficient;
  std::vector<double> values;
};

struct UnconditionalDraws {
  /// Model id of the fit, or "MA" for averaged draws.
  std::string source;
  std::size_t n_samples = 0;
  std::vector<CoefficientSamples> coefficients;

  /// Throws UnknownAttribute.
  const CoefficientSamples& at(const std::string& coefficient) const;
};

/// Population draws of every coefficient at the fitted parameters. Throws ZeroCount.
UnconditionalDraws sample_unconditionals(const FitResult& fit, std::size_t n_samples, std::uint64_t seed);

/// For each sample a constituent is picked with probability pi_k, then its coefficients are
/// drawn. Throws ConstituentMismatch when the fits do not match the averaged models or do not
/// share coefficient names.
UnconditionalDraws sample_ma_unconditionals(const MAResult& ma, std::span<const FitResult> fits,
                                            std::size_t n_samples, std::uint64_t seed);

inline constexpr std::size_t kWtpRedraws = 200;
inline constexpr double kZ975 = 1.959963984540054;

struct WtpRow {
  std::string attribute;
  /// "se" when the mean is a single parameter, "redraw" for parametric re-draws, "unavailable"
  /// when a needed standard error is missing.
  std::string method;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  /// The same quantity read as a marginal rate of substitution, -w.
  double mrs_mean() const { return -mean; }
  double mrs_lower() const { return -upper; }
  double mrs_upper() const { return -lower; }
};

struct WtpSummary {
  std::string source;
  std::vector<WtpRow> rows;
};

/// Mean +/- 1.96 SE.
WtpRow wtp_interval(const std::string& attribute, double estimate, double se);

/// WTP for every non-price coefficient of a WTP-space fit. Throws NotWTPSpace.
WtpSummary wtp_summary(const FitResult& fit, std::uint64_t seed = 1);
/// Means are pi-weighted constituent means; re-draws perturb every constituent.
WtpSummary wtp_summary(const MAResult& ma, std::span<const FitResult> fits, std::uint64_t seed = 1);

inline constexpr std::size_t kDefaultBins = 100;

/// Histogram on equal-width bins starting at `lower`. A spike stands for a degenerate
/// distribution: one bin of width 1 centred on the value, density 1.
struct DensityGrid {
  std::string coefficient;
  double lower = 0.0;
  double width = 0.0;
  std::vector<double> density;
  bool spike = false;

  std::size_t n_bins() const { return density.size(); }
  double center(std::size_t bin) const { return lower + (static_cast<double>(bin) + 0.5) * width; }
  double upper() const { return lower + width * static_cast<double>(density.size()); }
};

/// [min, max] of the samples padded by 5% of the range on each side. Throws DegenerateRange.
std::pair<double, double> padded_range(std::span<const double> samples);
/// Padded range covering both sample sets.
std::pair<double, double> common_range(std::span<const double> a, std::span<const double> b);

/// Normalized histogram on [lo, hi]; samples outside are dropped before normalizing.
/// Throws DegenerateRange when lo >= hi, ZeroCount when n_bins < 1 or nothing falls inside.
DensityGrid histogram(std::span<const double> samples, std::size_t n_bins, double lo, double hi);

/// Histogram over the padded sample range; all-equal samples yield a spike. Throws
/// InvalidSpec for n_bins < 2.
DensityGrid density_of(const std::string& coefficient, std::span<const double> samples,
                       std::size_t n_bins = kDefaultBins);
std::vector<DensityGrid> density_grid(const UnconditionalDraws& draws, std::size_t n_bins = kDefaultBins);

/// Re-bins `grid` onto the bins of `target` by overlap, keeping mass per unit length.
DensityGrid resample_grid(const DensityGrid& grid, const DensityGrid& target);

/// sum |f - g| * width, in [0, 2]. Throws GridMismatch unless the bins coincide.
double recovery_score(const DensityGrid& estimated, const DensityGrid& truth);

/// Histograms both sample sets on their common padded range and scores them.
double recovery_score(std::span<const double> estimated, std::span<const double> truth,
                      std::size_t n_bins = kDefaultBins);

}  // namespace mixl
