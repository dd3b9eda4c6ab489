// Periodic 1-D spectral machinery: FFT plans, derivative, zero-mean antiderivative,
// quadrature, dealiasing, and field serialization.
#ifndef QNLS_GRID_HPP
#define QNLS_GRID_HPP

#include <fftw3.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include "qnls/algebra.hpp"
#include "qnls/core.hpp"

namespace qnls {

struct PeriodicGrid {
    std::size_t n = 0;     // power of two, >= 8
    double length = 2.0 * pi;

    double x(std::size_t i) const { return length * double(i) / double(n); }
    /// Signed integer frequency of bin i.
    long freq(std::size_t i) const {
        return (i <= n / 2) ? long(i) : long(i) - long(n);
    }
    /// Wavenumber 2*pi*freq/L of bin i.
    double k(std::size_t i) const { return 2.0 * pi * double(freq(i)) / length; }
    bool operator==(const PeriodicGrid& o) const { return n == o.n && length == o.length; }
};

inline PeriodicGrid make_grid(std::size_t n, double length) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid size must be a power of two >= 8");
    if (!(length > 0)) throw std::invalid_argument("grid length must be positive");
    return {n, length};
}

namespace detail {

/// Cached FFTW plans per size. Plan creation is serialized; execution via the
/// new-array interface is safe from concurrent threads on distinct buffers.
class FftCache {
public:
    static FftCache& instance() {
        static FftCache c;
        return c;
    }
    struct Plans {
        fftw_plan fwd, bwd;
    };
    Plans get(std::size_t n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        CVec tmp(n), out(n);
        auto* in = reinterpret_cast<fftw_complex*>(tmp.data());
        auto* ou = reinterpret_cast<fftw_complex*>(out.data());
        Plans p;
        p.fwd = fftw_plan_dft_1d(int(n), in, ou, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.bwd = fftw_plan_dft_1d(int(n), in, ou, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[n] = p;
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::size_t, Plans> plans_;
};

} // namespace detail

inline CVec fft(const PeriodicGrid& g, const CVec& f) {
    CVec in = f, out(g.n);
    auto p = detail::FftCache::instance().get(g.n);
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

inline CVec ifft(const PeriodicGrid& g, const CVec& F) {
    CVec in = F, out(g.n);
    auto p = detail::FftCache::instance().get(g.n);
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double s = 1.0 / double(g.n);
    for (auto& v : out) v *= s;
    return out;
}

/// Spectral derivative.
inline CVec dx(const PeriodicGrid& g, const CVec& f) {
    CVec F = fft(g, f);
    for (std::size_t i = 0; i < g.n; ++i) F[i] *= cplx(0, g.k(i));
    // the unpaired Nyquist mode has no well-defined derivative sign; drop it
    if (g.n % 2 == 0) F[g.n / 2] = 0;
    return ifft(g, F);
}

inline cplx mean(const CVec& f) {
    cplx s = 0;
    for (const auto& v : f) s += v;
    return s / double(f.size());
}

enum class MeanPolicy { project, strict };

struct NonzeroMeanError : std::runtime_error {
    cplx offending_mean;
    explicit NonzeroMeanError(cplx m)
        : std::runtime_error("dx_inv: integrand has nonzero mean " + std::to_string(m.real()) +
                             (m.imag() < 0 ? "-" : "+") + std::to_string(std::abs(m.imag())) + "i"),
          offending_mean(m) {}
};

/// Zero-mean periodic antiderivative of (f - mean f). Under the strict policy the
/// mean must already be negligible; under project it is removed (and reported).
inline CVec dx_inv(const PeriodicGrid& g, const CVec& f, MeanPolicy policy = MeanPolicy::project,
                   cplx* removed_mean = nullptr) {
    CVec F = fft(g, f);
    const cplx m = F[0] / double(g.n);
    if (removed_mean) *removed_mean = m;
    if (policy == MeanPolicy::strict) {
        double scale = 0;
        for (const auto& v : f) scale = std::max(scale, std::abs(v));
        if (std::abs(m) > 1e-10 * std::max(scale, 1e-300)) throw NonzeroMeanError(m);
    }
    F[0] = 0;
    for (std::size_t i = 1; i < g.n; ++i) F[i] /= cplx(0, g.k(i));
    if (g.n % 2 == 0) F[g.n / 2] = 0;
    return ifft(g, F);
}

/// Trapezoid quadrature over one period (exact for resolved periodic integrands).
inline cplx integrate(const PeriodicGrid& g, const CVec& f) {
    return mean(f) * g.length;
}
inline double integrate(const PeriodicGrid& g, const RVec& f) {
    double s = 0;
    for (double v : f) s += v;
    return s * g.length / double(g.n);
}

/// 2/3-rule dealiasing: zero all modes with |freq| > n/3.
inline CVec dealias(const PeriodicGrid& g, const CVec& f) {
    CVec F = fft(g, f);
    const long cut = long(g.n) / 3;
    for (std::size_t i = 0; i < g.n; ++i)
        if (std::labs(g.freq(i)) > cut) F[i] = 0;
    return ifft(g, F);
}

enum class Parity { none, even, odd };

/// Band-limited random complex field: modes |k| in [1, kcut] plus optionally k=0,
/// scaled to the requested max amplitude. Optional parity in x about 0.
inline CVec random_band_limited(const PeriodicGrid& g, Rng& rng, long kcut, double amplitude,
                                Parity parity = Parity::none, bool realfield = false) {
    CVec F(g.n, 0.0);
    for (long k = 1; k <= kcut; ++k) {
        F[std::size_t(k)] = rng.cnormal();
        F[g.n - std::size_t(k)] = rng.cnormal();
    }
    if (parity == Parity::even) {
        for (long k = 1; k <= kcut; ++k) F[g.n - std::size_t(k)] = F[std::size_t(k)];
        F[0] = rng.cnormal();
    } else if (parity == Parity::odd) {
        for (long k = 1; k <= kcut; ++k) F[g.n - std::size_t(k)] = -F[std::size_t(k)];
        F[0] = 0;
    } else {
        F[0] = rng.cnormal();
    }
    CVec f = ifft(g, F);
    if (realfield)
        for (auto& v : f) v = v.real();
    double m = 0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    if (m > 0)
        for (auto& v : f) v *= amplitude / m;
    return f;
}

/// Fraction of spectral energy carried by the top eighth of frequencies.
inline double spectral_tail_fraction(const PeriodicGrid& g, const CVec& f) {
    CVec F = fft(g, f);
    double peak = 0, tail = 0;
    const long hi = long(g.n) * 7 / 16;   // |freq| above ~7/8 of Nyquist
    for (std::size_t i = 0; i < g.n; ++i) {
        const double a = std::abs(F[i]);
        peak = std::max(peak, a);
        if (std::labs(g.freq(i)) >= hi) tail = std::max(tail, a);
    }
    return peak > 0 ? tail / peak : 0.0;
}

// ---------------------------------------------------------------------------
// composite fields
// ---------------------------------------------------------------------------

struct SpinorField {
    CVec c1, c2;
    std::size_t size() const { return c1.size(); }
};

/// 2x2-matrix-valued field (one sample per grid point).
using Mat2Field = std::vector<Mat2>;

inline SpinorField dx(const PeriodicGrid& g, const SpinorField& u) {
    return {dx(g, u.c1), dx(g, u.c2)};
}

inline Mat2Field mat_dx_inv(const PeriodicGrid& g, const Mat2Field& M, MeanPolicy policy,
                            double* removed_norm = nullptr) {
    const std::size_t n = M.size();
    Mat2Field out(n);
    double rm = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            CVec comp(n);
            for (std::size_t p = 0; p < n; ++p) comp[p] = M[p](a, b);
            cplx removed;
            CVec W = dx_inv(g, comp, policy, &removed);
            rm = std::max(rm, std::abs(removed));
            for (std::size_t p = 0; p < n; ++p) out[p](a, b) = W[p];
        }
    if (removed_norm) *removed_norm = rm;
    return out;
}

// ---------------------------------------------------------------------------
// serialization: CSV (x, Re, Im per component) and a compact binary format
// (header: N, L, component_count; then little-endian float64 samples).
// ---------------------------------------------------------------------------

struct FieldData {
    PeriodicGrid grid;
    std::size_t components = 1;
    std::vector<CVec> values;   // one CVec per component
};

inline void write_field_csv(const std::string& path, const FieldData& f) {
    std::ofstream os(path);
    os << "x";
    for (std::size_t c = 0; c < f.components; ++c) os << ",re" << c << ",im" << c;
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        os << f.grid.x(i);
        for (std::size_t c = 0; c < f.components; ++c)
            os << "," << f.values[c][i].real() << "," << f.values[c][i].imag();
        os << "\n";
    }
}

inline void write_field_bin(const std::string& path, const FieldData& f) {
    std::ofstream os(path, std::ios::binary);
    const std::uint64_t n = f.grid.n, c = f.components;
    const double L = f.grid.length;
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(&L), 8);
    os.write(reinterpret_cast<const char*>(&c), 8);
    for (std::size_t ci = 0; ci < f.components; ++ci)
        for (std::size_t i = 0; i < f.grid.n; ++i) {
            const double re = f.values[ci][i].real(), im = f.values[ci][i].imag();
            os.write(reinterpret_cast<const char*>(&re), 8);
            os.write(reinterpret_cast<const char*>(&im), 8);
        }
}

inline FieldData read_field_bin(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::uint64_t n = 0, c = 0;
    double L = 0;
    is.read(reinterpret_cast<char*>(&n), 8);
    is.read(reinterpret_cast<char*>(&L), 8);
    is.read(reinterpret_cast<char*>(&c), 8);
    FieldData f;
    f.grid = make_grid(n, L);
    f.components = c;
    f.values.assign(c, CVec(n));
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t i = 0; i < n; ++i) {
            double re, im;
            is.read(reinterpret_cast<char*>(&re), 8);
            is.read(reinterpret_cast<char*>(&im), 8);
            f.values[ci][i] = {re, im};
        }
    if (!is) throw std::runtime_error("truncated field file " + path);
    return f;
}

} // namespace qnls

#endif
