#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "jamsig/synth.hpp"

namespace jamsig {

// Radix-2 decimation-in-time transforms. Input length must be a power of two.
// ifft(fft(x)) reproduces x to within 1e-9 for unit-scale inputs.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

inline constexpr int kSpectrumLength = 800;
inline constexpr int kPsdGroupWidth = 81;
inline constexpr std::size_t kRawCaptureLength = 65536;

// Log-power spectrum feature: the first kSpectrumLength * kPsdGroupWidth FFT
// magnitude-squared bins averaged in groups of kPsdGroupWidth, in dB.
// Requires capture.size() == kRawCaptureLength.
std::vector<double> psd(const IQCapture& capture);

struct SpectrumVector {
    std::vector<double> bins;  // length kSpectrumLength, dB domain
    int class_id = -1;
    double jnr_db = 0.0;
};

struct NormStats {
    double x_min = 0.0;
    double x_max = 0.0;
};

// Global dB min/max over a training set. Rejects empty input and degenerate
// spreads (x_max <= x_min).
NormStats fit_norm(const std::vector<SpectrumVector>& train);

// Affine map [x_min, x_max] -> [-1, 1]; out-of-range inputs clamp to [-1.5, 1.5].
std::vector<double> normalize(const std::vector<double>& bins, const NormStats& stats);
// Exact inverse of normalize on [-1, 1]; does not undo clamping.
std::vector<double> denormalize(const std::vector<double>& bins, const NormStats& stats);

struct SpectrumDataset {
    std::vector<SpectrumVector> rows;
    NormStats stats{};  // stats of the training set the rows were produced under
    bool has_stats = false;

    std::size_t size() const { return rows.size(); }
};

// JSPC container: dB-domain spectra with labels and optional NormStats.
void write_spectrum_dataset(const std::filesystem::path& path, const SpectrumDataset& ds);
SpectrumDataset read_spectrum_dataset(const std::filesystem::path& path);

}  // namespace jamsig
