#pragma once

// Discrete Fourier analysis of uniformly sampled cyclic motion profiles.
//
// A signal is n samples f_k taken at x_k = 2*pi*k/n over exactly one cycle.
// The series is f(x) = a0/2 + sum_n (a_n cos nx + b_n sin nx) with the
// coefficient integrals discretized by the rectangle rule, which recovers
// band-limited content exactly at uniform sampling.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mechharmonic/planar.hpp"  // kPi, angle helpers

namespace mechharmonic {

struct SampledSignal {
  std::vector<double> samples;

  SampledSignal() = default;
  explicit SampledSignal(std::vector<double> values) : samples(std::move(values)) {
    if (samples.size() < 4) {
      throw std::invalid_argument("SampledSignal: need at least 4 samples");
    }
    for (double v : samples) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("SampledSignal: non-finite sample");
      }
    }
  }

  std::size_t size() const { return samples.size(); }
};

struct HarmonicTerm {
  double a = 0.0;
  double b = 0.0;
};

struct HarmonicSpectrum {
  double a0 = 0.0;
  std::vector<HarmonicTerm> terms;  // terms[k] holds order k+1

  int max_order() const { return static_cast<int>(terms.size()); }
};

inline int max_alias_free_order(std::size_t n_samples) {
  return static_cast<int>(n_samples / 2) - 1;
}

/// Rectangle-rule Fourier coefficients up to max_order.
inline HarmonicSpectrum compute_spectrum(const SampledSignal& signal, int max_order) {
  const std::size_t n = signal.size();
  if (max_order < 1) {
    throw std::invalid_argument("compute_spectrum: max_order must be >= 1");
  }
  if (max_order > max_alias_free_order(n)) {
    throw std::invalid_argument(
        "compute_spectrum: order too high for sample count (aliasing)");
  }

  HarmonicSpectrum spec;
  spec.terms.resize(static_cast<std::size_t>(max_order));
  const double step = 2.0 * kPi / static_cast<double>(n);
  double sum0 = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum0 += signal.samples[k];
  spec.a0 = 2.0 * sum0 / static_cast<double>(n);
  for (int order = 1; order <= max_order; ++order) {
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = step * static_cast<double>(k) * order;
      sa += signal.samples[k] * std::cos(x);
      sb += signal.samples[k] * std::sin(x);
    }
    spec.terms[static_cast<std::size_t>(order - 1)] = {2.0 * sa / static_cast<double>(n),
                                                       2.0 * sb / static_cast<double>(n)};
  }
  return spec;
}

inline const HarmonicTerm& term_at(const HarmonicSpectrum& spec, int order) {
  if (order < 1 || order > spec.max_order()) {
    throw std::out_of_range("harmonic order out of range");
  }
  return spec.terms[static_cast<std::size_t>(order - 1)];
}

/// H_n = sqrt(a_n^2 + b_n^2)
inline double magnitude(const HarmonicSpectrum& spec, int order) {
  const HarmonicTerm& t = term_at(spec, order);
  return std::hypot(t.a, t.b);
}

/// Full-quadrant phase of harmonic `order` in degrees, mapped to [0, 360).
/// A zero-magnitude harmonic reports phase 0.
inline double phase_degrees(const HarmonicSpectrum& spec, int order) {
  const HarmonicTerm& t = term_at(spec, order);
  if (t.a == 0.0 && t.b == 0.0) return 0.0;
  double deg = deg_from_rad(std::atan2(t.b, t.a));
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

/// Superposition of the stored terms at angle x.
inline double reconstruct(const HarmonicSpectrum& spec, double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("reconstruct: non-finite evaluation point");
  }
  double value = 0.5 * spec.a0;
  for (int order = 1; order <= spec.max_order(); ++order) {
    const HarmonicTerm& t = spec.terms[static_cast<std::size_t>(order - 1)];
    value += t.a * std::cos(order * x) + t.b * std::sin(order * x);
  }
  return value;
}

}  // namespace mechharmonic
