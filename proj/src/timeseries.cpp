#include "msda/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "msda/csv.hpp"
#include "msda/error.hpp"

namespace msda {

ObservationSeries::ObservationSeries(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) {
    throw Error(Errc::invalid_argument, "observation_series", "times and values differ in length");
  }
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (!std::isfinite(times_[j]) || !std::isfinite(values_[j])) {
      throw Error(Errc::invalid_argument, "observation_series",
                  "non-finite entry at row " + std::to_string(j + 1));
    }
    if (j > 0 && !(times_[j] > times_[j - 1])) {
      throw Error(Errc::invalid_argument, "observation_series",
                  "non-monotone times at row " + std::to_string(j + 1));
    }
  }
}

KickSeries::KickSeries(std::vector<double> times, std::vector<double> intensities, double T_s)
    : times_(std::move(times)), intensities_(std::move(intensities)) {
  if (times_.size() != intensities_.size()) {
    throw Error(Errc::invalid_argument, "kick_series", "times and intensities differ in length");
  }
  if (!(T_s > 0.0)) throw Error(Errc::invalid_argument, "kick_series", "T_s must be positive");
  cumulative_.assign(times_.size() + 1, 0.0);
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k]) || !std::isfinite(intensities_[k])) {
      throw Error(Errc::invalid_argument, "kick_series", "non-finite kick entry");
    }
    if (intensities_[k] < 0.0) {
      throw Error(Errc::invalid_argument, "kick_series",
                  "negative intensity at row " + std::to_string(k + 1));
    }
    if (k > 0 && times_[k] < times_[k - 1]) {
      throw Error(Errc::invalid_argument, "kick_series",
                  "non-monotone times at row " + std::to_string(k + 1));
    }
    cumulative_[k + 1] = cumulative_[k] + intensities_[k];
  }
  if (!times_.empty()) {
    typical_intensity_ = cumulative_.back() / static_cast<double>(times_.size());
    if (!(typical_intensity_ > 0.0)) {
      throw Error(Errc::invalid_argument, "kick_series", "typical intensity must be positive");
    }
    alpha_kick_ = T_s / typical_intensity_;
  }
}

KickSeries KickSeries::rescaled(double T_s) const {
  return KickSeries(times_, intensities_, T_s);
}

double KickSeries::intensity_strictly_between(double lo, double hi) const {
  if (hi < lo) std::swap(lo, hi);
  // kicks with k > lo ... and k < hi
  const auto first = std::upper_bound(times_.begin(), times_.end(), lo) - times_.begin();
  const auto last = std::lower_bound(times_.begin(), times_.end(), hi) - times_.begin();
  if (last <= first) return 0.0;
  return cumulative_[last] - cumulative_[first];
}

double KickSeries::intensity_in_gap(double lo, double hi) const {
  if (hi < lo) std::swap(lo, hi);
  // a kick at lo belongs to this gap, one at hi to the next
  const auto first = std::lower_bound(times_.begin(), times_.end(), lo) - times_.begin();
  const auto last = std::lower_bound(times_.begin(), times_.end(), hi) - times_.begin();
  if (last <= first) return 0.0;
  return cumulative_[last] - cumulative_[first];
}

MeasurementSpec MeasurementSpec::h1(std::vector<double> times) {
  MeasurementSpec spec;
  spec.kind = MeasurementKind::explicit_times;
  spec.explicit_times = std::move(times);
  return spec;
}

MeasurementSpec MeasurementSpec::h2(std::uint64_t seed, double low, double high) {
  MeasurementSpec spec;
  spec.kind = MeasurementKind::random_gaps;
  spec.rng_seed = seed;
  spec.gap_low = low;
  spec.gap_high = high;
  return spec;
}

MeasurementSpec MeasurementSpec::h3(double period) {
  MeasurementSpec spec;
  spec.kind = MeasurementKind::periodic;
  spec.period = period;
  return spec;
}

ObservationSeries load_observations(const std::filesystem::path& path) {
  constexpr const char* op = "load_observations";
  const auto rows = csv::parse_numeric_rows(csv::read_file(path, op), 2, op);
  if (rows.size() < 2) {
    throw Error(Errc::parse, op, "too few rows (" + std::to_string(rows.size()) + "), need 2");
  }
  std::vector<double> t, y;
  t.reserve(rows.size());
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r > 0 && !(rows[r][0] > rows[r - 1][0])) {
      throw Error(Errc::parse, op, "non-monotone times at row " + std::to_string(r + 1));
    }
    t.push_back(rows[r][0]);
    y.push_back(rows[r][1]);
  }
  return ObservationSeries(std::move(t), std::move(y));
}

void save_observations(const ObservationSeries& series, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t j = 0; j < series.size(); ++j) {
    out += csv::format(series.time(j));
    out += ',';
    out += csv::format(series.value(j));
    out += '\n';
  }
  csv::write_file(path, out, "save_observations");
}

KickSeries load_kicks(const std::filesystem::path& path, double T_s) {
  constexpr const char* op = "load_kicks";
  const auto rows = csv::parse_numeric_rows(csv::read_file(path, op), 2, op);
  std::vector<double> t, intensity;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r][1] < 0.0) {
      throw Error(Errc::parse, op, "negative intensity at row " + std::to_string(r + 1));
    }
    if (r > 0 && rows[r][0] < rows[r - 1][0]) {
      throw Error(Errc::parse, op, "non-monotone times at row " + std::to_string(r + 1));
    }
    t.push_back(rows[r][0]);
    intensity.push_back(rows[r][1]);
  }
  if (!(T_s > 0.0)) throw Error(Errc::invalid_argument, op, "T_s must be positive");
  return KickSeries(std::move(t), std::move(intensity), T_s);
}

namespace {

// Index of the dense sample closest to t (ties go to the earlier sample).
std::size_t nearest_index(std::span<const double> times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const auto hi = static_cast<std::size_t>(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

// Uniform on [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ObservationSeries take(const ObservationSeries& dense, const std::vector<std::size_t>& idx) {
  std::vector<double> t, y;
  t.reserve(idx.size());
  y.reserve(idx.size());
  for (const auto i : idx) {
    if (!t.empty() && dense.time(i) <= t.back()) continue;
    t.push_back(dense.time(i));
    y.push_back(dense.value(i));
  }
  return ObservationSeries(std::move(t), std::move(y));
}

}  // namespace

ObservationSeries subsample(const ObservationSeries& dense, const MeasurementSpec& spec) {
  constexpr const char* op = "subsample";
  if (dense.empty()) throw Error(Errc::invalid_argument, op, "dense series is empty");
  const auto times = dense.times();
  std::vector<std::size_t> idx;

  switch (spec.kind) {
    case MeasurementKind::explicit_times: {
      auto requested = spec.explicit_times;
      std::sort(requested.begin(), requested.end());
      for (const double t : requested) {
        if (!(t >= dense.start() && t <= dense.end())) {
          throw Error(Errc::invalid_argument, op,
                      "explicit time " + csv::format(t) + " outside dense span");
        }
        idx.push_back(nearest_index(times, t));
      }
      break;
    }
    case MeasurementKind::periodic: {
      if (!(spec.period > 0.0)) throw Error(Errc::invalid_argument, op, "period must be positive");
      const auto count = static_cast<std::size_t>(
          std::floor((dense.end() - dense.start()) / spec.period + 1e-9));
      for (std::size_t k = 0; k <= count; ++k) {
        idx.push_back(nearest_index(times, dense.start() + static_cast<double>(k) * spec.period));
      }
      break;
    }
    case MeasurementKind::random_gaps: {
      if (!(spec.gap_low > 0.0 && spec.gap_low < spec.gap_high)) {
        throw Error(Errc::invalid_argument, op, "gap bounds must satisfy 0 < low < high");
      }
      std::mt19937_64 rng(spec.rng_seed);
      std::size_t current = 0;
      idx.push_back(current);
      while (true) {
        const double gap = spec.gap_low + (spec.gap_high - spec.gap_low) * unit_uniform(rng);
        const double lo = times[current] + spec.gap_low;
        const double hi = times[current] + spec.gap_high;
        if (lo > dense.end()) break;
        // nearest dense sample to the target that keeps the gap within bounds
        std::size_t next = nearest_index(times, times[current] + gap);
        if (times[next] < lo) {
          next = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), lo) -
                                          times.begin());
        } else if (times[next] > hi) {
          next = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), hi) -
                                          times.begin()) - 1;
        }
        if (next >= times.size() || times[next] < lo || times[next] > hi) break;
        idx.push_back(next);
        current = next;
      }
      break;
    }
  }
  return take(dense, idx);
}

}  // namespace msda
