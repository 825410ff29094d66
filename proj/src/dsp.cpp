#include "mixqa/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace mixqa {

namespace {

constexpr double kPi = std::numbers::pi;

// Interpolation FIR for the 4x oversampler. Odd length with the center tap
// on a multiple of 4 makes the t % 4 == 0 polyphase branch an exact copy of
// the input (windowed-sinc zeros land on integers), so the oversampled grid
// always contains the original sample instants.
constexpr int kInterpTaps = 193;
constexpr int kInterpCenter = 96;
constexpr double kKaiserBeta = 7.857;  // ~80 dB stopband

double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

const Eigen::ArrayXd& interpolation_taps() {
    static const Eigen::ArrayXd taps = [] {
        Eigen::ArrayXd h(kInterpTaps);
        const double i0_beta = bessel_i0(kKaiserBeta);
        for (int t = 0; t < kInterpTaps; ++t) {
            const int m = t - kInterpCenter;
            if (m % 4 == 0) {
                // exact sinc zeros / center: keeps the identity branch bit-exact
                h(t) = m == 0 ? 1.0 : 0.0;
                continue;
            }
            const double sinc = std::sin(kPi * m / 4.0) / (kPi * m);
            const double r = 2.0 * t / (kInterpTaps - 1) - 1.0;
            const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
            h(t) = 4.0 * sinc * window;
        }
        return h;
    }();
    return taps;
}

Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> fft = [] {
        Eigen::FFT<double> f;
        f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
        return f;
    }();
    return fft;
}

} // namespace

bool BiquadCoefficients::is_stable() const {
    // Schur-Cohn conditions for z^2 + a1 z + a2
    return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

double BiquadCoefficients::magnitude_at(double omega) const {
    const std::complex<double> z1 = std::polar(1.0, -omega);
    const std::complex<double> z2 = z1 * z1;
    return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

std::pair<BiquadCoefficients, BiquadCoefficients> k_weighting(int sample_rate) {
    if (sample_rate < 8000)
        throw UnsupportedRate("K-weighting needs >= 8000 Hz, got " + std::to_string(sample_rate));

    // Analog prototype of the reference filter; the bilinear transform below
    // reproduces the published 48 kHz coefficient table and stays valid at
    // other rates.
    BiquadCoefficients shelf;
    {
        const double gain_db = 3.999843853973347;
        const double f0 = 1681.974450955533;
        const double q = 0.7071752369554196;
        const double k = std::tan(kPi * f0 / sample_rate);
        const double vh = std::pow(10.0, gain_db / 20.0);
        const double vb = std::pow(vh, 0.4996667741545416);
        const double a0 = 1.0 + k / q + k * k;
        shelf.b0 = (vh + vb * k / q + k * k) / a0;
        shelf.b1 = 2.0 * (k * k - vh) / a0;
        shelf.b2 = (vh - vb * k / q + k * k) / a0;
        shelf.a1 = 2.0 * (k * k - 1.0) / a0;
        shelf.a2 = (1.0 - k / q + k * k) / a0;
    }

    BiquadCoefficients highpass;
    {
        const double f0 = 38.13547087602444;
        const double q = 0.5003270373238773;
        const double k = std::tan(kPi * f0 / sample_rate);
        const double a0 = 1.0 + k / q + k * k;
        highpass.b0 = 1.0;  // reference numerator kept unnormalized
        highpass.b1 = -2.0;
        highpass.b2 = 1.0;
        highpass.a1 = 2.0 * (k * k - 1.0) / a0;
        highpass.a2 = (1.0 - k / q + k * k) / a0;
    }

    return {shelf, highpass};
}

Eigen::ArrayXd biquad_filter(const Eigen::Ref<const Eigen::ArrayXd>& signal,
                             const BiquadCoefficients& c) {
    const Eigen::Index n = signal.size();
    Eigen::ArrayXd out(n);
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x0 = signal(i);
        const double y0 = c.b0 * x0 + c.b1 * x1 + c.b2 * x2 - c.a1 * y1 - c.a2 * y2;
        out(i) = y0;
        x2 = x1;
        x1 = x0;
        y2 = y1;
        y1 = y0;
    }
    return out;
}

Eigen::ArrayXd hann_window(Eigen::Index n) {
    Eigen::ArrayXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) = 0.5 - 0.5 * std::cos(2.0 * kPi * i / static_cast<double>(n));
    return w;
}

Eigen::ArrayXcd rfft(const Eigen::Ref<const Eigen::ArrayXd>& frame) {
    std::vector<double> in(frame.data(), frame.data() + frame.size());
    std::vector<std::complex<double>> out;
    fft_engine().fwd(out, in);
    return Eigen::Map<const Eigen::ArrayXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::ArrayXd irfft(const Eigen::Ref<const Eigen::ArrayXcd>& spectrum, Eigen::Index n) {
    std::vector<std::complex<double>> in(spectrum.data(), spectrum.data() + spectrum.size());
    std::vector<double> out;
    fft_engine().inv(out, in, n);
    return Eigen::Map<const Eigen::ArrayXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Spectrum stft_frame(const Eigen::Ref<const Eigen::ArrayXd>& frame, Window window,
                    int sample_rate) {
    const Eigen::Index n = frame.size();
    if (n < 2 || (n & (n - 1)) != 0)
        throw BadFrameLength("frame length must be a power of two, got " + std::to_string(n));
    (void)window;  // only hann is defined

    const Eigen::ArrayXd windowed = frame * hann_window(n);
    const Eigen::ArrayXcd spec = rfft(windowed);

    Spectrum s;
    const Eigen::Index bins = n / 2 + 1;
    s.bin_frequencies = Eigen::ArrayXd::LinSpaced(bins, 0.0, static_cast<double>(bins - 1)) *
                        (static_cast<double>(sample_rate) / static_cast<double>(n));
    s.magnitudes = spec.abs();
    s.phases.resize(bins);
    for (Eigen::Index k = 0; k < bins; ++k) {
        double ph = std::arg(spec(k));
        if (ph <= -kPi) ph += 2.0 * kPi;  // principal value in (-pi, pi]
        s.phases(k) = ph;
    }
    return s;
}

Eigen::ArrayXd oversample_4x(const Eigen::Ref<const Eigen::ArrayXd>& signal) {
    const Eigen::ArrayXd& h = interpolation_taps();
    const Eigen::Index n = signal.size();
    const Eigen::Index out_len = 4 * n;
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(out_len);
    if (n == 0) return out;
    // Edges are extended by replication so a constant signal stays constant
    // instead of ringing against an artificial step; replication is linear in
    // the input, preserving the operator's linearity.
    const Eigen::Index margin = kInterpTaps / 4 / 2 + 2;
    for (Eigen::Index k = -margin; k < n + margin; ++k) {
        const double x = signal(std::clamp<Eigen::Index>(k, 0, n - 1));
        if (x == 0.0) continue;
        const Eigen::Index base = 4 * k - kInterpCenter;
        const Eigen::Index t_lo = std::max<Eigen::Index>(0, -base);
        const Eigen::Index t_hi = std::min<Eigen::Index>(kInterpTaps - 1, out_len - 1 - base);
        for (Eigen::Index t = t_lo; t <= t_hi; ++t) out(base + t) += h(t) * x;
    }
    return out;
}

} // namespace mixqa
