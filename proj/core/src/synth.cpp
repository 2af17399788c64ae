#include "jamsig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jamsig/binio.hpp"
#include "jamsig/dsp.hpp"

namespace jamsig {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

constexpr const char* kClassNames[kNumClasses] = {"CWJ_A", "CWJ_W", "AMJ",  "NAMJ",
                                                  "NBNJ",  "MTJ",   "LFMJ", "PPNJ"};

}  // namespace

int class_id(JammingClass cls) { return static_cast<int>(cls); }

JammingClass class_from_id(int id) {
    if (id < 0 || id >= kNumClasses) {
        throw std::invalid_argument("class_from_id: id out of range 0..7: " + std::to_string(id));
    }
    return static_cast<JammingClass>(id);
}

const char* class_name(JammingClass cls) { return kClassNames[class_id(cls)]; }

JammingClass class_from_name(const std::string& name) {
    for (int id = 0; id < kNumClasses; ++id) {
        if (name == kClassNames[id]) return static_cast<JammingClass>(id);
    }
    throw std::invalid_argument("class_from_name: unknown class \"" + name + "\"");
}

double IQCapture::mean_power() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < i.size(); ++k) acc += i[k] * i[k] + q[k] * q[k];
    return i.empty() ? 0.0 : acc / static_cast<double>(i.size());
}

void SynthConfig::validate() const {
    if (n_raw == 0 || (n_raw & (n_raw - 1)) != 0) {
        throw std::invalid_argument("SynthConfig: n_raw must be a nonzero power of two");
    }
    if (fs <= 2.0 * 30e6) {
        throw std::invalid_argument("SynthConfig: fs must exceed 60 MHz to keep all tones in-band");
    }
    if (noise_power <= 0.0) {
        throw std::invalid_argument("SynthConfig: noise_power must be positive");
    }
}

JammingParams draw_params(JammingClass cls, std::uint64_t seed, const SynthConfig& cfg) {
    Rng rng(seed);
    const auto phase = [&rng] { return rng.uniform(0.0, kTwoPi); };

    switch (cls) {
        case JammingClass::CwjA: {
            CwParams p{};
            p.amp_sqrt_pj = rng.uniform(0.1, 50.0);
            p.f_j = 20e6;
            p.theta_j = phase();
            return {cls, p};
        }
        case JammingClass::CwjW: {
            CwParams p{};
            p.amp_sqrt_pj = 20.0;
            p.f_j = rng.uniform(20e6, 30e6);
            p.theta_j = phase();
            return {cls, p};
        }
        case JammingClass::Amj: {
            AmParams p{};
            p.u0 = rng.uniform(10.0, 110.0);
            p.f_m = rng.uniform(22e6, 28e6);
            p.theta_m = phase();
            p.beta_am = 1.0;
            p.f_j = 25e6;
            p.theta_j = phase();
            p.p_j = 1.0;
            return {cls, p};
        }
        case JammingClass::Namj: {
            NoiseAmParams p{};
            p.u0 = rng.uniform(2.0, 50.0);
            p.rbw = 0.3;
            p.f_j = 25e6;
            p.theta_j = phase();
            return {cls, p};
        }
        case JammingClass::Nbnj: {
            NarrowbandNoiseParams p{};
            p.rbw = rng.uniform(0.02, 1.0);
            p.f_j = 25e6;
            p.theta_j = phase();
            return {cls, p};
        }
        case JammingClass::Mtj: {
            MultitoneParams p;
            const int tones = static_cast<int>(rng.uniform_int(2, 6));
            p.p_t.resize(tones);
            p.f_t.resize(tones);
            p.theta.resize(tones);
            // Tone powers share one order of magnitude; only their ratios
            // matter because JNR calibration rescales the total.
            for (int i = 0; i < tones; ++i) {
                p.p_t[i] = rng.uniform(0.5, 2.0);
                p.f_t[i] = rng.uniform(22e6, 28e6);
                p.theta[i] = phase();
            }
            return {cls, p};
        }
        case JammingClass::Lfmj: {
            ChirpParams p{};
            p.f_h = rng.uniform(2.024e6, 3e6);
            p.f_l = rng.uniform(-2e6, 0.0);
            p.t_sw = cfg.capture_duration();  // one full sweep per capture
            p.theta_j = phase();
            p.p_j = 1.0;
            return {cls, p};
        }
        case JammingClass::Ppnj: {
            PulsedNoiseParams p{};
            p.period_t = rng.uniform_int(8000, 18000);
            p.tau = rng.uniform_int(2000, 3000);
            p.rbw = 0.2;
            p.f_j = 25e6;
            p.theta_j = phase();
            return {cls, p};
        }
    }
    throw std::invalid_argument("draw_params: unknown class");
}

namespace {

IQCapture make_capture(std::size_t n, const SynthConfig& cfg) {
    IQCapture cap;
    cap.i.resize(n);
    cap.q.resize(n);
    cap.fs = cfg.fs;
    return cap;
}

void synth_cw(const CwParams& p, const SynthConfig& cfg, IQCapture& out) {
    const double w = kTwoPi * p.f_j / cfg.fs;
    for (std::size_t k = 0; k < cfg.n_raw; ++k) {
        const double ph = w * static_cast<double>(k) + p.theta_j;
        out.i[k] = p.amp_sqrt_pj * std::cos(ph);
        out.q[k] = p.amp_sqrt_pj * std::sin(ph);
    }
}

void synth_am(const AmParams& p, const SynthConfig& cfg, IQCapture& out) {
    const double scale = std::sqrt(p.p_j / (p.u0 + p.beta_am * p.beta_am));
    const double wm = kTwoPi * p.f_m / cfg.fs;
    const double wj = kTwoPi * p.f_j / cfg.fs;
    for (std::size_t k = 0; k < cfg.n_raw; ++k) {
        const double t = static_cast<double>(k);
        const double envelope = scale * (p.u0 + p.beta_am * std::cos(wm * t + p.theta_m));
        const double ph = wj * t + p.theta_j;
        out.i[k] = envelope * std::cos(ph);
        out.q[k] = envelope * std::sin(ph);
    }
}

void synth_carrier_noise(double u0, double rbw, double f_j, double theta_j,
                         const SynthConfig& cfg, std::uint64_t noise_seed, IQCapture& out) {
    const auto noise = band_limited_noise(rbw, cfg.n_raw, cfg.fs, noise_seed);
    const double wj = kTwoPi * f_j / cfg.fs;
    for (std::size_t k = 0; k < cfg.n_raw; ++k) {
        const double ph = wj * static_cast<double>(k) + theta_j;
        const std::complex<double> carrier(std::cos(ph), std::sin(ph));
        const std::complex<double> v = (u0 + noise[k]) * carrier;
        out.i[k] = v.real();
        out.q[k] = v.imag();
    }
}

void synth_multitone(const MultitoneParams& p, const SynthConfig& cfg, IQCapture& out) {
    std::fill(out.i.begin(), out.i.end(), 0.0);
    std::fill(out.q.begin(), out.q.end(), 0.0);
    for (int tone = 0; tone < p.tone_count(); ++tone) {
        const double amp = std::sqrt(p.p_t[tone]);
        const double w = kTwoPi * p.f_t[tone] / cfg.fs;
        const double theta = p.theta[tone];
        for (std::size_t k = 0; k < cfg.n_raw; ++k) {
            const double ph = w * static_cast<double>(k) + theta;
            out.i[k] += amp * std::cos(ph);
            out.q[k] += amp * std::sin(ph);
        }
    }
}

void synth_chirp(const ChirpParams& p, const SynthConfig& cfg, IQCapture& out) {
    const double amp = std::sqrt(p.p_j);
    const double rate = p.sweep_bandwidth() / (2.0 * p.t_sw);
    for (std::size_t k = 0; k < cfg.n_raw; ++k) {
        const double t = static_cast<double>(k) / cfg.fs;
        const double ph = kTwoPi * (p.f_l + rate * t) * t + p.theta_j;
        out.i[k] = amp * std::cos(ph);
        out.q[k] = amp * std::sin(ph);
    }
}

void synth_pulsed_noise(const PulsedNoiseParams& p, const SynthConfig& cfg,
                        std::uint64_t noise_seed, IQCapture& out) {
    const auto noise = band_limited_noise(p.rbw, cfg.n_raw, cfg.fs, noise_seed);
    const double wj = kTwoPi * p.f_j / cfg.fs;
    for (std::size_t k = 0; k < cfg.n_raw; ++k) {
        const auto pos = static_cast<std::int64_t>(k) % p.period_t;
        if (pos >= p.tau) {
            out.i[k] = 0.0;
            out.q[k] = 0.0;
            continue;
        }
        const double ph = wj * static_cast<double>(k) + p.theta_j;
        const std::complex<double> v =
            noise[k] * std::complex<double>(std::cos(ph), std::sin(ph));
        out.i[k] = v.real();
        out.q[k] = v.imag();
    }
}

}  // namespace

IQCapture synthesize_waveform(const JammingParams& params, const SynthConfig& cfg,
                              std::uint64_t noise_seed) {
    cfg.validate();
    if (cfg.n_raw == 0) throw std::invalid_argument("synthesize_waveform: empty capture");

    IQCapture out = make_capture(cfg.n_raw, cfg);
    out.class_id = class_id(params.cls);

    switch (params.cls) {
        case JammingClass::CwjA:
        case JammingClass::CwjW:
            synth_cw(std::get<CwParams>(params.payload), cfg, out);
            break;
        case JammingClass::Amj:
            synth_am(std::get<AmParams>(params.payload), cfg, out);
            break;
        case JammingClass::Namj: {
            const auto& p = std::get<NoiseAmParams>(params.payload);
            synth_carrier_noise(p.u0, p.rbw, p.f_j, p.theta_j, cfg, noise_seed, out);
            break;
        }
        case JammingClass::Nbnj: {
            const auto& p = std::get<NarrowbandNoiseParams>(params.payload);
            synth_carrier_noise(0.0, p.rbw, p.f_j, p.theta_j, cfg, noise_seed, out);
            break;
        }
        case JammingClass::Mtj: {
            const auto& p = std::get<MultitoneParams>(params.payload);
            if (p.tone_count() == 0) {
                throw std::invalid_argument("synthesize_waveform: multitone with no tones");
            }
            if (p.p_t.size() != p.f_t.size() || p.theta.size() != p.f_t.size()) {
                throw std::invalid_argument("synthesize_waveform: multitone array length mismatch");
            }
            synth_multitone(p, cfg, out);
            break;
        }
        case JammingClass::Lfmj: {
            const auto& p = std::get<ChirpParams>(params.payload);
            if (p.f_h <= p.f_l) {
                throw std::invalid_argument("synthesize_waveform: chirp requires f_h > f_l");
            }
            synth_chirp(p, cfg, out);
            break;
        }
        case JammingClass::Ppnj: {
            const auto& p = std::get<PulsedNoiseParams>(params.payload);
            if (p.tau <= 0 || p.tau >= p.period_t) {
                throw std::invalid_argument("synthesize_waveform: pulse width must satisfy 0 < tau < T");
            }
            synth_pulsed_noise(p, cfg, noise_seed, out);
            break;
        }
    }
    return out;
}

std::vector<std::complex<double>> band_limited_noise(double rbw, std::size_t n, double fs,
                                                     std::uint64_t seed) {
    (void)fs;  // the band is defined as a fraction of fs, so fs cancels in bin units
    if (!(rbw > 0.0 && rbw <= 1.0)) {
        throw std::invalid_argument("band_limited_noise: rbw must lie in (0, 1]");
    }
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("band_limited_noise: n must be a power of two");
    }

    Rng rng(seed);
    std::vector<std::complex<double>> x(n);
    const double comp_sigma = std::sqrt(0.5);  // unit power per complex sample
    for (auto& v : x) {
        v = {comp_sigma * rng.next_gaussian(), comp_sigma * rng.next_gaussian()};
    }

    auto spectrum = fft(x);

    // Keep bins within rbw*fs/2 of DC on either side; rbw = 1 keeps all.
    const auto half_bins = static_cast<std::size_t>(rbw * static_cast<double>(n) / 2.0);
    for (std::size_t m = 0; m < n; ++m) {
        const std::size_t dist = std::min(m, n - m);
        if (dist > half_bins) spectrum[m] = 0.0;
    }

    x = ifft(spectrum);

    double power = 0.0;
    for (const auto& v : x) power += std::norm(v);
    power /= static_cast<double>(n);
    const double scale = 1.0 / std::sqrt(power);
    for (auto& v : x) v *= scale;
    return x;
}

IQCapture apply_jnr(const IQCapture& capture, double jnr_db, const SynthConfig& cfg,
                    std::uint64_t seed) {
    const double measured = capture.mean_power();
    if (measured <= 0.0) {
        throw std::invalid_argument("apply_jnr: capture has zero power");
    }

    const double target = std::pow(10.0, jnr_db / 10.0) * cfg.noise_power;
    const double gain = std::sqrt(target / measured);

    IQCapture out = capture;
    out.jnr_db = jnr_db;
    const double sigma = std::sqrt(cfg.noise_power / 2.0);
    Rng rng(seed);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.i[k] = out.i[k] * gain + sigma * rng.next_gaussian();
        out.q[k] = out.q[k] * gain + sigma * rng.next_gaussian();
    }
    return out;
}

std::uint64_t sample_seed_for(std::uint64_t global_seed, int class_id, std::int64_t sample_index,
                              double jnr_db) {
    const auto jnr_q = static_cast<std::uint64_t>(
        static_cast<std::int64_t>(std::llround(jnr_db * 100.0)));
    std::uint64_t s = mix_seed(global_seed, static_cast<std::uint64_t>(class_id));
    s = mix_seed(s, static_cast<std::uint64_t>(sample_index));
    s = mix_seed(s, jnr_q);
    return s;
}

IQCapture synthesize_labeled(JammingClass cls, double jnr_db, std::int64_t sample_index,
                             const SynthConfig& cfg) {
    cfg.validate();
    const std::uint64_t sample_seed = sample_seed_for(cfg.global_seed, class_id(cls),
                                                      sample_index, jnr_db);
    const auto params = draw_params(cls, mix_seed(sample_seed, 1), cfg);
    IQCapture clean = synthesize_waveform(params, cfg, mix_seed(sample_seed, 2));
    IQCapture out = apply_jnr(clean, jnr_db, cfg, mix_seed(sample_seed, 3));
    out.class_id = class_id(cls);
    out.sample_seed = sample_seed;
    return out;
}

void write_iq_capture(const std::filesystem::path& path, const IQCapture& capture) {
    nlohmann::json header;
    header["fs"] = capture.fs;
    header["n_raw"] = capture.size();
    header["class_id"] = capture.class_id;
    header["jnr_db"] = capture.jnr_db;
    header["sample_seed"] = capture.sample_seed;

    AtomicFileWriter writer(path);
    auto& os = writer.stream();
    write_magic(os, "JSIQ");
    write_le<std::uint16_t>(os, 1);
    write_json_block(os, header.dump());
    for (std::size_t k = 0; k < capture.size(); ++k) {
        write_le<float>(os, static_cast<float>(capture.i[k]));
        write_le<float>(os, static_cast<float>(capture.q[k]));
    }
    writer.commit();
}

IQCapture read_iq_capture(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open IQ capture: " + path.string());
    expect_magic(is, "JSIQ", path.string());
    const auto version = read_le<std::uint16_t>(is);
    if (version != 1) {
        throw std::runtime_error(path.string() + ": unsupported JSIQ version " +
                                 std::to_string(version));
    }
    const auto header = nlohmann::json::parse(read_json_block(is));

    IQCapture cap;
    cap.fs = header.at("fs").get<double>();
    cap.class_id = header.at("class_id").get<int>();
    cap.jnr_db = header.at("jnr_db").get<double>();
    cap.sample_seed = header.at("sample_seed").get<std::uint64_t>();
    const auto n = header.at("n_raw").get<std::size_t>();
    cap.i.resize(n);
    cap.q.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        cap.i[k] = read_le<float>(is);
        cap.q[k] = read_le<float>(is);
    }
    return cap;
}

}  // namespace jamsig
