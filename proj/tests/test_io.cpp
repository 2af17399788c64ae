#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "jamsig/binio.hpp"
#include "jamsig/dsp.hpp"
#include "jamsig/nn.hpp"
#include "jamsig/synth.hpp"

using namespace jamsig;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST_CASE("write_le and read_le round-trip primitive values") {
    const auto path = temp_file("jamsig_le.bin");
    {
        std::ofstream os(path, std::ios::binary);
        write_le<std::uint16_t>(os, 0xBEEF);
        write_le<std::uint32_t>(os, 123456789u);
        write_le<float>(os, 1.5f);
        write_le<double>(os, -2.25);
    }
    std::ifstream is(path, std::ios::binary);
    CHECK(read_le<std::uint16_t>(is) == 0xBEEF);
    CHECK(read_le<std::uint32_t>(is) == 123456789u);
    CHECK(read_le<float>(is) == 1.5f);
    CHECK(read_le<double>(is) == -2.25);
    CHECK_THROWS_AS(read_le<double>(is), std::runtime_error);
    fs::remove(path);
}

TEST_CASE("AtomicFileWriter leaves no file behind when not committed") {
    const auto path = temp_file("jamsig_atomic.bin");
    fs::remove(path);
    {
        AtomicFileWriter writer(path);
        writer.stream() << "partial";
        // no commit
    }
    CHECK_FALSE(fs::exists(path));
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));

    {
        AtomicFileWriter writer(path);
        writer.stream() << "done";
        writer.commit();
    }
    CHECK(fs::exists(path));
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    fs::remove(path);
}

TEST_CASE("IQ captures round-trip through the JSIQ container") {
    SynthConfig cfg;
    cfg.n_raw = 4096;
    cfg.global_seed = 5;
    JammingParams p;
    p.cls = JammingClass::CwjW;
    p.payload = CwParams{2.5, 23e6, 0.7};
    IQCapture c = synthesize_waveform(p, cfg);
    c.class_id = 1;
    c.jnr_db = -5.0;
    c.sample_seed = 0xABCDEF0123456789ULL;

    const auto path = temp_file("jamsig_capture.jsiq");
    write_iq_capture(path, c);
    const IQCapture back = read_iq_capture(path);
    fs::remove(path);

    CHECK(back.size() == c.size());
    CHECK(back.fs == doctest::Approx(cfg.fs).epsilon(1e-12));
    CHECK(back.class_id == 1);
    CHECK(back.jnr_db == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(back.sample_seed == c.sample_seed);
    for (std::size_t k = 0; k < c.size(); ++k) {
        // samples are stored as float32
        CHECK(back.i[k] == doctest::Approx(c.i[k]).epsilon(1e-6));
        CHECK(back.q[k] == doctest::Approx(c.q[k]).epsilon(1e-6));
    }
}

TEST_CASE("reading a JSIQ file with a bad magic fails cleanly") {
    const auto path = temp_file("jamsig_bad.jsiq");
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE garbage";
    }
    CHECK_THROWS_AS(read_iq_capture(path), std::runtime_error);
    fs::remove(path);
    CHECK_THROWS_AS(read_iq_capture(temp_file("jamsig_missing.jsiq")), std::runtime_error);
}

TEST_CASE("weight files round-trip tensors and metadata exactly") {
    Rng rng(17);
    Tensor a({3, 4});
    init_gaussian(a, rng, 1.0);
    Tensor b({2, 3, 5});
    init_gaussian(b, rng, 1.0);
    Tensor c({7});
    init_gaussian(c, rng, 1.0);

    const auto path = temp_file("jamsig_weights.jwgt");
    write_weight_file(path, {{"alpha", &a}, {"beta", &b}, {"gamma", &c}},
                      R"({"epochs":12,"seed":99})");
    const WeightFile file = read_weight_file(path);
    fs::remove(path);

    REQUIRE(file.tensors.size() == 3);
    CHECK(file.meta_json == R"({"epochs":12,"seed":99})");
    CHECK(file.tensors.at("alpha").shape == a.shape);
    CHECK(file.tensors.at("beta").shape == b.shape);
    CHECK(file.tensors.at("gamma").shape == c.shape);
    // float64 storage: bit-exact round trip
    CHECK(file.tensors.at("alpha").data == a.data);
    CHECK(file.tensors.at("beta").data == b.data);
    CHECK(file.tensors.at("gamma").data == c.data);
}

TEST_CASE("truncated weight files fail cleanly") {
    Rng rng(18);
    Tensor a({64});
    init_gaussian(a, rng, 1.0);
    const auto path = temp_file("jamsig_trunc.jwgt");
    write_weight_file(path, {{"only", &a}}, "{}");

    const auto full_size = fs::file_size(path);
    const auto cut = temp_file("jamsig_trunc_cut.jwgt");
    {
        std::ifstream is(path, std::ios::binary);
        std::vector<char> buf(full_size - 40);
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::ofstream os(cut, std::ios::binary);
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    CHECK_THROWS_AS(read_weight_file(cut), std::runtime_error);
    fs::remove(path);
    fs::remove(cut);
}

TEST_CASE("truncated spectrum datasets fail cleanly") {
    SpectrumDataset ds;
    SpectrumVector row;
    row.bins.assign(kSpectrumLength, -40.0);
    row.bins[3] = -20.0;
    row.class_id = 2;
    ds.rows.push_back(row);

    const auto path = temp_file("jamsig_cut.jspc");
    write_spectrum_dataset(path, ds);
    const auto full_size = fs::file_size(path);
    const auto cut = temp_file("jamsig_cut2.jspc");
    {
        std::ifstream is(path, std::ios::binary);
        std::vector<char> buf(full_size / 2);
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::ofstream os(cut, std::ios::binary);
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    CHECK_THROWS_AS(read_spectrum_dataset(cut), std::runtime_error);
    fs::remove(path);
    fs::remove(cut);
}
