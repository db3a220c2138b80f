#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "fluxswarm/core/errors.hpp"

namespace fluxswarm::flow {

struct WaveformPhase {
  double duration = 0.0;  // s
  double velocity = 0.0;  // m/s, centreline plateau
};

/// Periodic piecewise-constant inflow with linear ramps of width ramp_time
/// centred on every phase transition (including the wrap-around one).
class InflowWaveform {
 public:
  InflowWaveform() = default;
  InflowWaveform(std::vector<WaveformPhase> phases, double ramp_time)
      : phases_(std::move(phases)), ramp_(ramp_time) {
    if (phases_.empty()) throw ValidationError("waveform: needs at least one phase");
    double shortest = phases_.front().duration;
    for (const auto& ph : phases_) {
      if (!(ph.duration > 0.0)) throw ValidationError("waveform: phase durations must be positive");
      shortest = std::min(shortest, ph.duration);
      period_ += ph.duration;
    }
    if (ramp_ < 0.0 || ramp_ >= shortest / 2.0) {
      throw ValidationError("waveform: ramp_time must be < min phase duration / 2");
    }
  }

  /// Systole 400 mm/s for 150 ms, reversal -15 mm/s for 100 ms, late
  /// diastole 8 mm/s for the rest of a 1 s cycle; 10 ms ramps.
  static InflowWaveform triphasic() {
    return InflowWaveform({{0.150, 0.400}, {0.100, -0.015}, {0.750, 0.008}}, 0.010);
  }

  /// Constant inflow, used for Poiseuille checks.
  static InflowWaveform constant(double velocity) { return InflowWaveform({{1.0, velocity}}, 0.0); }

  double period() const { return period_; }
  double ramp_time() const { return ramp_; }
  const std::vector<WaveformPhase>& phases() const { return phases_; }

  double velocity(double t) const {
    double tau = std::fmod(t, period_);
    if (tau < 0.0) tau += period_;
    const double half = 0.5 * ramp_;
    const auto n = phases_.size();

    double start = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double end = start + phases_[k].duration;
      if (tau < end || k + 1 == n) {
        const double here = phases_[k].velocity;
        const double prev = phases_[(k + n - 1) % n].velocity;
        const double next = phases_[(k + 1) % n].velocity;
        if (half > 0.0 && tau - start < half) {
          // Ramp entering this phase, centred on `start`.
          return prev + (here - prev) * (tau - start + half) / ramp_;
        }
        if (half > 0.0 && end - tau < half) {
          return here + (next - here) * (tau - (end - half)) / ramp_;
        }
        return here;
      }
      start = end;
    }
    return phases_.back().velocity;
  }

 private:
  std::vector<WaveformPhase> phases_;
  double ramp_ = 0.0;
  double period_ = 0.0;
};

/// Fully developed channel profile with centreline value `peak`.
inline double parabolic_profile(double y, double peak, double width) {
  return peak * 4.0 * y * (width - y) / (width * width);
}

}  // namespace fluxswarm::flow
