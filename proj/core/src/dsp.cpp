#include "jamsig/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jamsig/binio.hpp"

namespace jamsig {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

void fft_in_place(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("fft: length must be a nonzero power of two");
    }

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t start = 0; start < n; start += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[start + k];
                const auto v = a[start + k + len / 2] * w;
                a[start + k] = u + v;
                a[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= inv_n;
    }
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x) {
    auto a = x;
    fft_in_place(a, false);
    return a;
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x) {
    auto a = x;
    fft_in_place(a, true);
    return a;
}

std::vector<double> psd(const IQCapture& capture) {
    if (capture.size() != kRawCaptureLength) {
        throw std::invalid_argument("psd: capture length must be " +
                                    std::to_string(kRawCaptureLength) + ", got " +
                                    std::to_string(capture.size()));
    }

    std::vector<std::complex<double>> x(capture.size());
    for (std::size_t k = 0; k < capture.size(); ++k) x[k] = {capture.i[k], capture.q[k]};
    const auto spectrum = fft(x);

    std::vector<double> out(kSpectrumLength);
    for (int g = 0; g < kSpectrumLength; ++g) {
        double acc = 0.0;
        const std::size_t base = static_cast<std::size_t>(g) * kPsdGroupWidth;
        for (int j = 0; j < kPsdGroupWidth; ++j) acc += std::norm(spectrum[base + j]);
        const double mean = acc / kPsdGroupWidth;
        out[g] = 10.0 * std::log10(std::max(mean, 1e-30));
    }
    return out;
}

NormStats fit_norm(const std::vector<SpectrumVector>& train) {
    if (train.empty()) throw std::invalid_argument("fit_norm: empty training set");

    NormStats stats{1e300, -1e300};
    for (const auto& row : train) {
        for (double v : row.bins) {
            stats.x_min = std::min(stats.x_min, v);
            stats.x_max = std::max(stats.x_max, v);
        }
    }
    if (!(stats.x_max > stats.x_min)) {
        throw std::invalid_argument("fit_norm: degenerate spread, x_max <= x_min");
    }
    return stats;
}

std::vector<double> normalize(const std::vector<double>& bins, const NormStats& stats) {
    if (!(stats.x_max > stats.x_min)) {
        throw std::invalid_argument("normalize: invalid NormStats");
    }
    const double scale = 2.0 / (stats.x_max - stats.x_min);
    std::vector<double> out(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        out[k] = std::clamp((bins[k] - stats.x_min) * scale - 1.0, -1.5, 1.5);
    }
    return out;
}

std::vector<double> denormalize(const std::vector<double>& bins, const NormStats& stats) {
    if (!(stats.x_max > stats.x_min)) {
        throw std::invalid_argument("denormalize: invalid NormStats");
    }
    const double scale = (stats.x_max - stats.x_min) / 2.0;
    std::vector<double> out(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        out[k] = (bins[k] + 1.0) * scale + stats.x_min;
    }
    return out;
}

void write_spectrum_dataset(const std::filesystem::path& path, const SpectrumDataset& ds) {
    for (const auto& row : ds.rows) {
        if (row.bins.size() != static_cast<std::size_t>(kSpectrumLength)) {
            throw std::invalid_argument("write_spectrum_dataset: row length != " +
                                        std::to_string(kSpectrumLength));
        }
    }

    nlohmann::json header;
    header["spectrum_length"] = kSpectrumLength;
    header["count"] = ds.rows.size();
    auto names = nlohmann::json::array();
    for (int c = 0; c < kNumClasses; ++c) names.push_back(class_name(class_from_id(c)));
    header["classes"] = std::move(names);
    header["has_stats"] = ds.has_stats;
    if (ds.has_stats) {
        header["x_min"] = ds.stats.x_min;
        header["x_max"] = ds.stats.x_max;
    }

    AtomicFileWriter writer(path);
    auto& os = writer.stream();
    write_magic(os, "JSPC");
    write_le<std::uint16_t>(os, 1);
    write_json_block(os, header.dump());
    for (const auto& row : ds.rows) {
        for (double v : row.bins) write_le<float>(os, static_cast<float>(v));
    }
    for (const auto& row : ds.rows) write_le<std::int32_t>(os, row.class_id);
    for (const auto& row : ds.rows) write_le<float>(os, static_cast<float>(row.jnr_db));
    writer.commit();
}

SpectrumDataset read_spectrum_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open spectrum dataset: " + path.string());
    expect_magic(is, "JSPC", path.string());
    const auto version = read_le<std::uint16_t>(is);
    if (version != 1) {
        throw std::runtime_error(path.string() + ": unsupported JSPC version " +
                                 std::to_string(version));
    }
    const auto header = nlohmann::json::parse(read_json_block(is));
    const auto length = header.at("spectrum_length").get<int>();
    if (length != kSpectrumLength) {
        throw std::runtime_error(path.string() + ": unexpected spectrum length " +
                                 std::to_string(length));
    }
    const auto count = header.at("count").get<std::size_t>();

    SpectrumDataset ds;
    ds.has_stats = header.at("has_stats").get<bool>();
    if (ds.has_stats) {
        ds.stats.x_min = header.at("x_min").get<double>();
        ds.stats.x_max = header.at("x_max").get<double>();
    }
    ds.rows.resize(count);
    for (auto& row : ds.rows) {
        row.bins.resize(kSpectrumLength);
        for (auto& v : row.bins) v = read_le<float>(is);
    }
    for (auto& row : ds.rows) row.class_id = read_le<std::int32_t>(is);
    for (auto& row : ds.rows) row.jnr_db = read_le<float>(is);
    if (!is) throw std::runtime_error(path.string() + ": truncated spectrum dataset");
    return ds;
}

}  // namespace jamsig
