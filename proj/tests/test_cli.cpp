#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "jamsig/dsp.hpp"
#include "jamsig/synth.hpp"

namespace fs = std::filesystem;
using namespace jamsig;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

// Runs the installed binary with the given arguments, capturing stdout.
// Stderr carries progress chatter and is discarded.
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(JAMSIG_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[512];
    while (std::fgets(buf, sizeof(buf), pipe) != nullptr) result.out += buf;
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int line_count(const std::string& text) {
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

const fs::path& workspace() {
    static const fs::path dir = [] {
        const fs::path p = fs::temp_directory_path() / "jamsig_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string q(const fs::path& path) { return "\"" + path.string() + "\""; }

}  // namespace

TEST_CASE("full pipeline: generate, train, augment, classify, report") {
    const fs::path ws = workspace();
    const fs::path manifest = ws / "dataset" / "manifest.json";

    // generate
    auto gen = run_cli("generate --train 2 --test 1 --jnr 0,10 --seed 7 --out " +
                       q(ws / "dataset"));
    REQUIRE(gen.exit_code == 0);
    CHECK(gen.out.find("manifest.json") != std::string::npos);
    REQUIRE(fs::exists(manifest));
    CHECK(fs::exists(ws / "dataset" / "train.jspc"));
    CHECK(fs::exists(ws / "dataset" / "test.jspc"));
    CHECK(fs::exists(ws / "dataset" / "generate.resolved.cfg"));
    CHECK(slurp(ws / "dataset" / "generate.resolved.cfg").find("train=2\n") !=
          std::string::npos);

    // train-gan (micro epochs; the schedule default is covered in unit tests)
    auto gan = run_cli("train-gan --manifest " + q(manifest) +
                       " --shots 2 --epochs 3 --seed 11 --out " + q(ws / "gan"));
    REQUIRE(gan.exit_code == 0);
    CHECK(gan.out.rfind("equilibrium converged=", 0) == 0);
    REQUIRE(fs::exists(ws / "gan" / "gan.jwgt"));
    CHECK(fs::exists(ws / "gan" / "gan_loss.svg"));
    CHECK(line_count(slurp(ws / "gan" / "gan_loss.csv")) == 4);  // header + 3 epochs

    // augment: defaults to 4x the checkpoint's per-class count = 8 rows/class
    auto aug = run_cli("augment --gan " + q(ws / "gan" / "gan.jwgt") + " --out " +
                       q(ws / "aug"));
    REQUIRE(aug.exit_code == 0);
    CHECK(aug.out.find("rows=64") != std::string::npos);
    REQUIRE(fs::exists(ws / "aug" / "synthetic.jspc"));

    // augment is reproducible: same checkpoint, same derived seed, same bytes
    auto aug2 = run_cli("augment --gan " + q(ws / "gan" / "gan.jwgt") + " --out " +
                        q(ws / "aug2"));
    REQUIRE(aug2.exit_code == 0);
    CHECK(slurp(ws / "aug" / "synthetic.jspc") == slurp(ws / "aug2" / "synthetic.jspc"));
    auto aug3 = run_cli("augment --gan " + q(ws / "gan" / "gan.jwgt") +
                        " --seed 999 --per-class 5 --out " + q(ws / "aug3"));
    REQUIRE(aug3.exit_code == 0);
    CHECK(aug3.out.find("rows=40") != std::string::npos);

    // train-cnn on the blend of real and synthetic rows
    auto cnn = run_cli("train-cnn --manifest " + q(manifest) + " --synthetic " +
                       q(ws / "aug" / "synthetic.jspc") +
                       " --shots 2 --epochs 2 --seed 11 --out " + q(ws / "cnn"));
    REQUIRE(cnn.exit_code == 0);
    CHECK(cnn.out.find("cnn.jwgt") != std::string::npos);
    CHECK(cnn.out.find("final_loss=") != std::string::npos);
    REQUIRE(fs::exists(ws / "cnn" / "cnn.jwgt"));
    CHECK(line_count(slurp(ws / "cnn" / "cnn_loss.csv")) == 3);

    // evaluate: accuracy line plus confusion artifacts
    auto eval = run_cli("evaluate --manifest " + q(manifest) + " --cnn " +
                        q(ws / "cnn" / "cnn.jwgt") + " --out " + q(ws / "eval"));
    REQUIRE(eval.exit_code == 0);
    REQUIRE(eval.out.rfind("accuracy ", 0) == 0);
    const double accuracy = std::stod(eval.out.substr(9));
    CHECK(accuracy >= 0.0);
    CHECK(accuracy <= 1.0);
    CHECK(fs::exists(ws / "eval" / "confusion_test.csv"));
    CHECK(fs::exists(ws / "eval" / "confusion_test.svg"));

    auto eval_jnr = run_cli("evaluate --manifest " + q(manifest) + " --cnn " +
                            q(ws / "cnn" / "cnn.jwgt") + " --split train --jnr 10 --out " +
                            q(ws / "eval_jnr"));
    REQUIRE(eval_jnr.exit_code == 0);
    CHECK(fs::exists(ws / "eval_jnr" / "confusion_train_jnr_10.csv"));

    // sweep: one plain 1-shot cell on one JNR point
    auto sweep = run_cli("sweep --manifest " + q(manifest) +
                         " --shots 1 --seeds 1 --no-augment --cnn-epochs 2 --jnr 0 --out " +
                         q(ws / "sweep"));
    REQUIRE(sweep.exit_code == 0);
    CHECK(sweep.out.find("rows=1") != std::string::npos);
    const std::string csv = slurp(ws / "sweep" / "sweep.csv");
    CHECK(csv.rfind("subset,jnr_db,seed,augmented,accuracy\n", 0) == 0);
    CHECK(csv.find("1-shot,0,1,0,") != std::string::npos);
    CHECK(fs::exists(ws / "sweep" / "sweep.svg"));

    // project: real rows plus synthetic overlay, overlap table per class
    auto proj = run_cli("project --manifest " + q(manifest) + " --synthetic " +
                        q(ws / "aug" / "synthetic.jspc") +
                        " --per-class 2 --iterations 60 --seed 3 --out " + q(ws / "proj"));
    REQUIRE(proj.exit_code == 0);
    CHECK(fs::exists(ws / "proj" / "tsne.svg"));
    const std::string tsne_csv = slurp(ws / "proj" / "tsne.csv");
    CHECK(line_count(tsne_csv) == 1 + 16 + 64);
    const std::string overlap = slurp(ws / "proj" / "overlap.csv");
    CHECK(overlap.rfind("class,overlap_ratio\n", 0) == 0);
    CHECK(line_count(overlap) == 9);

    // flops report
    auto flops = run_cli("flops --out " + q(ws / "flops"));
    REQUIRE(flops.exit_code == 0);
    CHECK(flops.out.find("cnn flops=1180416") != std::string::npos);
    CHECK(flops.out.find("cgan flops=4921536") != std::string::npos);
    CHECK(flops.out.find("params=4931553") != std::string::npos);
    CHECK(fs::exists(ws / "flops" / "flops.json"));
}

TEST_CASE("preprocess folds a capture directory into one spectra file") {
    const fs::path ws = workspace();
    const fs::path raw = ws / "raw";
    fs::create_directories(raw);
    SynthConfig cfg;
    cfg.global_seed = 5;
    for (int k = 0; k < 3; ++k) {
        const auto capture =
            synthesize_labeled(class_from_id(k), 10.0, /*sample_index=*/k, cfg);
        char name[32];
        std::snprintf(name, sizeof(name), "capture_%02d.jsiq", k);
        write_iq_capture(raw / name, capture);
    }
    std::ofstream(raw / "notes.txt") << "ignored\n";  // non-.jsiq files are skipped

    auto pre = run_cli("preprocess --in " + q(raw) + " --out " + q(ws / "pre"));
    REQUIRE(pre.exit_code == 0);
    REQUIRE(fs::exists(ws / "pre" / "spectra.jspc"));

    const SpectrumDataset ds = read_spectrum_dataset(ws / "pre" / "spectra.jspc");
    REQUIRE(ds.rows.size() == 3);
    CHECK(ds.has_stats);
    for (int k = 0; k < 3; ++k) {
        CHECK(ds.rows[static_cast<std::size_t>(k)].class_id == k);
        CHECK(ds.rows[static_cast<std::size_t>(k)].jnr_db == 10.0);
    }

    auto missing = run_cli("preprocess --in " + q(ws / "no_such_dir") + " --out " +
                           q(ws / "pre2"));
    CHECK(missing.exit_code == 1);
    auto empty = run_cli("preprocess --out " + q(ws / "pre3"));
    CHECK(empty.exit_code == 2);
}

TEST_CASE("config file merges under command-line flags") {
    const fs::path ws = workspace();
    const fs::path cfg_path = ws / "generate.cfg";
    {
        std::ofstream os(cfg_path);
        os << "# comment line\n";
        os << "train = 5   # flag on the command line overrides this\n";
        os << "test = 1\n";
        os << "seed=21\n";
        os << "\n";
    }
    auto gen = run_cli("generate --config " + q(cfg_path) + " --train 1 --jnr 0 --out " +
                       q(ws / "cfg_dataset"));
    REQUIRE(gen.exit_code == 0);
    const std::string resolved = slurp(ws / "cfg_dataset" / "generate.resolved.cfg");
    CHECK(resolved.find("train=1\n") != std::string::npos);  // CLI wins
    CHECK(resolved.find("test=1\n") != std::string::npos);   // config applied
    CHECK(resolved.find("seed=21\n") != std::string::npos);

    {
        std::ofstream os(ws / "bad.cfg");
        os << "bogus=1\n";
    }
    auto bad_key = run_cli("generate --config " + q(ws / "bad.cfg") +
                           " --train 1 --test 1 --seed 1 --out " + q(ws / "cfg_bad"));
    CHECK(bad_key.exit_code == 2);

    {
        std::ofstream os(ws / "noeq.cfg");
        os << "just a line\n";
    }
    auto bad_line = run_cli("generate --config " + q(ws / "noeq.cfg") +
                            " --train 1 --test 1 --seed 1 --out " + q(ws / "cfg_bad2"));
    CHECK(bad_line.exit_code == 2);
}

TEST_CASE("exit codes distinguish usage errors from runtime failures") {
    const fs::path ws = workspace();

    // usage errors -> 2
    CHECK(run_cli("generate --train 1 --test 1 --out " + q(ws / "e1")).exit_code == 2);
    CHECK(run_cli("generate --train nope --test 1 --seed 1 --out " + q(ws / "e2")).exit_code ==
          2);
    CHECK(run_cli("generate --train 0 --test 1 --seed 1 --out " + q(ws / "e3")).exit_code == 2);
    CHECK(run_cli("nonsense").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("generate --bogus 1 --seed 1").exit_code == 2);
    CHECK(run_cli("train-gan --manifest " + q(ws / "dataset" / "manifest.json") +
                  " --shots -2 --seed 1 --out " + q(ws / "e4"))
              .exit_code == 2);

    // runtime failures -> 1
    CHECK(run_cli("train-gan --manifest " + q(ws / "no_manifest.json") +
                  " --seed 1 --out " + q(ws / "e5"))
              .exit_code == 1);
    CHECK(run_cli("augment --gan " + q(ws / "no_gan.jwgt") + " --out " + q(ws / "e6"))
              .exit_code == 1);

    // help -> 0
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("generate --help").exit_code == 0);
}

TEST_CASE("evaluate rejects a bad split name") {
    const fs::path ws = workspace();
    // Depends on the pipeline case having produced the dataset and classifier.
    if (!fs::exists(ws / "cnn" / "cnn.jwgt")) return;
    auto bad = run_cli("evaluate --manifest " + q(ws / "dataset" / "manifest.json") +
                       " --cnn " + q(ws / "cnn" / "cnn.jwgt") + " --split half --out " +
                       q(ws / "e7"));
    CHECK(bad.exit_code == 2);
    auto none = run_cli("evaluate --manifest " + q(ws / "dataset" / "manifest.json") +
                        " --cnn " + q(ws / "cnn" / "cnn.jwgt") + " --jnr -99 --out " +
                        q(ws / "e8"));
    CHECK(none.exit_code == 2);
}
