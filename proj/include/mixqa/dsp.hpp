#pragma once

#include <Eigen/Dense>

#include <utility>

#include "mixqa/errors.hpp"

namespace mixqa {

/// Second-order IIR section, a0 normalized to 1.
struct BiquadCoefficients {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    bool is_stable() const;
    /// Magnitude response at normalized angular frequency w (rad/sample).
    double magnitude_at(double omega) const;
};

/// Two-stage K-weighting (high-frequency shelf + high-pass) for the given
/// sample rate. At 48 kHz the coefficients match the published reference
/// table; at other rates they are re-derived from the analog prototype via
/// the bilinear transform. Throws UnsupportedRate below 8000 Hz.
std::pair<BiquadCoefficients, BiquadCoefficients> k_weighting(int sample_rate);

/// Direct-form difference equation with zero initial state:
/// y[n] = b0*x[n] + b1*x[n-1] + b2*x[n-2] - a1*y[n-1] - a2*y[n-2].
Eigen::ArrayXd biquad_filter(const Eigen::Ref<const Eigen::ArrayXd>& signal,
                             const BiquadCoefficients& coeffs);

/// One-sided spectrum of a real frame: fft_size/2 + 1 bins.
struct Spectrum {
    Eigen::ArrayXd bin_frequencies;  // Hz, k * sample_rate / fft_size
    Eigen::ArrayXd magnitudes;       // linear amplitude |X_k|
    Eigen::ArrayXd phases;           // radians in (-pi, pi]
};

enum class Window { hann };

/// Windowed real FFT of one frame. Frame length must be a power of two
/// (throws BadFrameLength). bin_frequencies are filled from sample_rate.
Spectrum stft_frame(const Eigen::Ref<const Eigen::ArrayXd>& frame, Window window,
                    int sample_rate);

/// Forward real FFT, no window. Returns the one-sided complex spectrum.
Eigen::ArrayXcd rfft(const Eigen::Ref<const Eigen::ArrayXd>& frame);

/// Inverse of rfft. n is the original (even) frame length.
Eigen::ArrayXd irfft(const Eigen::Ref<const Eigen::ArrayXcd>& spectrum, Eigen::Index n);

/// Periodic Hann window of length n.
Eigen::ArrayXd hann_window(Eigen::Index n);

/// 4x oversampling: zero-stuff + polyphase Kaiser-windowed-sinc lowpass.
/// Output length is exactly 4x the input; every 4th output sample is a
/// bit-exact copy of the corresponding input sample.
Eigen::ArrayXd oversample_4x(const Eigen::Ref<const Eigen::ArrayXd>& signal);

// STFT frame geometry shared by all spectral analyzers.
inline constexpr Eigen::Index kStftFrameLength = 4096;
inline constexpr Eigen::Index kStftHop = 2048;

} // namespace mixqa
