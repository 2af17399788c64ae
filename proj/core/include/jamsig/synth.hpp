#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "jamsig/rng.hpp"

namespace jamsig {

// The eight jamming classes. Enumerator order fixes the class ids 0..7
// used everywhere downstream (labels, confusion matrices, file headers).
enum class JammingClass : int {
    CwjA = 0,   // continuous wave, amplitude-varying
    CwjW = 1,   // continuous wave, frequency-varying
    Amj = 2,    // cosine amplitude modulation
    Namj = 3,   // noise amplitude modulation
    Nbnj = 4,   // narrowband noise
    Mtj = 5,    // multitone
    Lfmj = 6,   // linear FM sweep
    Ppnj = 7,   // periodic pulsed noise
};

inline constexpr int kNumClasses = 8;

int class_id(JammingClass cls);
JammingClass class_from_id(int id);
const char* class_name(JammingClass cls);
JammingClass class_from_name(const std::string& name);

// Per-class parameter payloads. Frequencies in Hz, phases in radians,
// pulse period/width in samples.
struct CwParams {
    double amp_sqrt_pj;
    double f_j;
    double theta_j;
};

struct AmParams {
    double u0;
    double f_m;
    double theta_m;
    double beta_am;
    double f_j;
    double theta_j;
    double p_j;
};

struct NoiseAmParams {
    double u0;
    double rbw;
    double f_j;
    double theta_j;
};

struct NarrowbandNoiseParams {
    double rbw;
    double f_j;
    double theta_j;
};

struct MultitoneParams {
    std::vector<double> p_t;
    std::vector<double> f_t;
    std::vector<double> theta;
    int tone_count() const { return static_cast<int>(f_t.size()); }
};

struct ChirpParams {
    double f_l;
    double f_h;
    double t_sw;
    double theta_j;
    double p_j;
    double sweep_bandwidth() const { return f_h - f_l; }
};

struct PulsedNoiseParams {
    std::int64_t period_t;
    std::int64_t tau;
    double rbw;
    double f_j;
    double theta_j;
};

struct JammingParams {
    JammingClass cls;
    std::variant<CwParams, AmParams, NoiseAmParams, NarrowbandNoiseParams, MultitoneParams,
                 ChirpParams, PulsedNoiseParams>
        payload;
};

// Complex baseband capture. i/q hold the real and imaginary parts.
struct IQCapture {
    std::vector<double> i;
    std::vector<double> q;
    double fs = 0.0;
    int class_id = -1;
    double jnr_db = 0.0;
    std::uint64_t sample_seed = 0;

    std::size_t size() const { return i.size(); }
    std::complex<double> sample(std::size_t k) const { return {i[k], q[k]}; }
    double mean_power() const;
};

struct SynthConfig {
    double fs = 163.84e6;
    std::size_t n_raw = 65536;
    double noise_power = 1.0;
    std::uint64_t global_seed = 0;

    double capture_duration() const { return static_cast<double>(n_raw) / fs; }
    void validate() const;
};

// Uniform draw from the per-class simulation parameter ranges.
// Deterministic in (cls, seed) for a fixed config; only the chirp sweep
// period depends on the config (one full sweep per capture).
JammingParams draw_params(JammingClass cls, std::uint64_t seed, const SynthConfig& cfg = {});

// Noise-free complex waveform of the class equation, sampled at t_k = k/fs.
IQCapture synthesize_waveform(const JammingParams& params, const SynthConfig& cfg,
                              std::uint64_t noise_seed = 0);

// Zero-mean complex Gaussian sequence, spectrally flat over the central
// rbw fraction of the FFT bins (band |f| <= rbw*fs/2, width rbw*fs around
// 0 Hz) and zero outside, normalized to exactly unit mean power.
// rbw = 1 keeps every bin, degenerating to white noise.
std::vector<std::complex<double>> band_limited_noise(double rbw, std::size_t n, double fs,
                                                     std::uint64_t seed);

// Scales the jamming waveform so its mean power sits exactly jnr_db above
// cfg.noise_power, then adds complex AWGN of total power cfg.noise_power.
IQCapture apply_jnr(const IQCapture& capture, double jnr_db, const SynthConfig& cfg,
                    std::uint64_t seed);

// Seed derivation used by synthesize_labeled: jnr is quantized to
// centi-dB so equal grid values always map to equal seeds.
std::uint64_t sample_seed_for(std::uint64_t global_seed, int class_id, std::int64_t sample_index,
                              double jnr_db);

// draw_params -> synthesize_waveform -> apply_jnr, fully determined by
// (cfg.global_seed, cls, sample_index, jnr_db).
IQCapture synthesize_labeled(JammingClass cls, double jnr_db, std::int64_t sample_index,
                             const SynthConfig& cfg);

// "JSIQ" capture container: magic, version u16, JSON header, interleaved
// float32 I/Q pairs.
void write_iq_capture(const std::filesystem::path& path, const IQCapture& capture);
IQCapture read_iq_capture(const std::filesystem::path& path);

}  // namespace jamsig
