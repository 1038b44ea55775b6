#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace msda {

// Ordered observations (t^j, y^j). Times are minutes and strictly increasing.
class ObservationSeries {
 public:
  ObservationSeries() = default;
  ObservationSeries(std::vector<double> times, std::vector<double> values);

  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  double time(std::size_t j) const { return times_[j]; }
  double value(std::size_t j) const { return values_[j]; }
  // t^j - t^{j-1}; zero for j == 0.
  double gap(std::size_t j) const { return j == 0 ? 0.0 : times_[j] - times_[j - 1]; }

  double start() const { return times_.front(); }
  double end() const { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

// Interventions at known times with nonnegative intensities. The decoupling
// scale alpha_kick = T_s / typical_intensity converts intensity into minutes.
class KickSeries {
 public:
  KickSeries() = default;
  KickSeries(std::vector<double> times, std::vector<double> intensities, double T_s);

  std::span<const double> times() const { return times_; }
  std::span<const double> intensities() const { return intensities_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  double typical_intensity() const { return typical_intensity_; }
  double alpha_kick() const { return alpha_kick_; }

  // Same kicks, decoupling scale recomputed for a new short time-scale.
  KickSeries rescaled(double T_s) const;

  // Sum of intensities of kicks with lo < k < hi.
  double intensity_strictly_between(double lo, double hi) const;
  // Sum of intensities of kicks with lo <= k < hi.
  double intensity_in_gap(double lo, double hi) const;

  // Extra minutes added to a distance or a gap by the kicks it contains.
  double inflation_between(double lo, double hi) const {
    return alpha_kick_ * intensity_strictly_between(lo, hi);
  }
  double inflation_in_gap(double lo, double hi) const {
    return alpha_kick_ * intensity_in_gap(lo, hi);
  }

 private:
  std::vector<double> times_;
  std::vector<double> intensities_;
  std::vector<double> cumulative_;  // cumulative_[k] = sum of intensities_[0..k)
  double typical_intensity_ = 0.0;
  double alpha_kick_ = 0.0;
};

enum class MeasurementKind {
  explicit_times,  // h1
  random_gaps,     // h2
  periodic,        // h3
};

struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::periodic;
  double gap_low = 60.0;
  double gap_high = 90.0;
  double period = 5.0;
  std::vector<double> explicit_times;
  std::uint64_t rng_seed = 0;

  static MeasurementSpec h1(std::vector<double> times);
  static MeasurementSpec h2(std::uint64_t seed, double low = 60.0, double high = 90.0);
  static MeasurementSpec h3(double period = 5.0);
};

ObservationSeries load_observations(const std::filesystem::path& path);
void save_observations(const ObservationSeries& series, const std::filesystem::path& path);

KickSeries load_kicks(const std::filesystem::path& path, double T_s);

ObservationSeries subsample(const ObservationSeries& dense, const MeasurementSpec& spec);

}  // namespace msda
