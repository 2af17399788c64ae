// Command-line front end: dataset generation, GAN/CNN training, evaluation,
// sweeps, t-SNE projection, and FLOPs reports. Every command resolves its
// settings from defaults < config file < command-line flags and writes the
// resolved snapshot next to its outputs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jamsig/binio.hpp"
#include "jamsig/cgan.hpp"
#include "jamsig/cnn.hpp"
#include "jamsig/dsp.hpp"
#include "jamsig/experiment.hpp"
#include "jamsig/svg.hpp"
#include "jamsig/synth.hpp"

namespace fs = std::filesystem;
using namespace jamsig;

namespace {

// One subcommand's settings: string-valued options with config-file merge.
class Settings {
public:
    explicit Settings(CLI::App* sub) : sub_(sub) {
        sub_->add_option("--config", config_path_,
                         "key=value settings file; command-line flags win");
    }

    void add(const std::string& key, const std::string& def, const std::string& help) {
        auto& slot = values_[key];
        slot.value = def;
        slot.cli = sub_->add_option("--" + key, slot.value, help);
    }

    void add_flag(const std::string& key, const std::string& help) {
        auto& slot = values_[key];
        slot.value = "0";
        slot.is_flag = true;
        slot.cli = sub_->add_flag("--" + key, help);
    }

    // Called after CLI11 parsing: fold in the config file, then normalize.
    void finalize() {
        for (auto& [key, slot] : values_) {
            if (slot.is_flag && slot.cli->count() > 0) slot.value = "1";
        }
        if (config_path_.empty()) return;

        std::ifstream is(config_path_);
        if (!is) throw std::invalid_argument("config: cannot open " + config_path_);
        std::string line;
        int line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                            " is not key=value");
            }
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto it = values_.find(key);
            if (it == values_.end()) {
                throw std::invalid_argument("config: unknown key \"" + key + "\"");
            }
            if (it->second.cli->count() == 0) {
                it->second.value = it->second.is_flag ? (value.empty() ? "1" : value) : value;
            }
        }
    }

    const std::string& str(const std::string& key) const { return values_.at(key).value; }

    std::uint64_t u64(const std::string& key) const {
        const auto& v = str(key);
        try {
            std::size_t pos = 0;
            const auto out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return out;
        } catch (...) {
            throw std::invalid_argument(key + ": expected unsigned integer, got \"" + v + "\"");
        }
    }

    int integer(const std::string& key) const {
        const auto& v = str(key);
        try {
            std::size_t pos = 0;
            const auto out = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return out;
        } catch (...) {
            throw std::invalid_argument(key + ": expected integer, got \"" + v + "\"");
        }
    }

    double real(const std::string& key) const {
        const auto& v = str(key);
        try {
            std::size_t pos = 0;
            const auto out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return out;
        } catch (...) {
            throw std::invalid_argument(key + ": expected number, got \"" + v + "\"");
        }
    }

    bool flag(const std::string& key) const { return str(key) == "1" || str(key) == "true"; }

    std::vector<double> real_list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(item, &pos));
                if (pos != item.size()) throw std::invalid_argument("");
            } catch (...) {
                throw std::invalid_argument(key + ": expected comma-separated numbers, got \"" +
                                            str(key) + "\"");
            }
        }
        return out;
    }

    std::vector<int> int_list(const std::string& key) const {
        std::vector<int> out;
        for (double v : real_list(key)) {
            const int i = static_cast<int>(std::lround(v));
            if (std::abs(v - i) > 1e-9) {
                throw std::invalid_argument(key + ": expected integers, got \"" + str(key) +
                                            "\"");
            }
            out.push_back(i);
        }
        return out;
    }

    // Writes the fully-resolved settings next to the command's outputs.
    void snapshot(const fs::path& out_dir, const std::string& command) const {
        AtomicFileWriter writer(out_dir / (command + ".resolved.cfg"));
        auto& os = writer.stream();
        for (const auto& [key, slot] : values_) os << key << "=" << slot.value << "\n";
        writer.commit();
    }

private:
    struct Slot {
        std::string value;
        CLI::Option* cli = nullptr;
        bool is_flag = false;
    };

    CLI::App* sub_;
    std::string config_path_;
    std::map<std::string, Slot> values_;  // ordered for stable snapshots
};

fs::path prepare_out_dir(const Settings& s) {
    const fs::path dir(s.str("out"));
    fs::create_directories(dir);
    return dir;
}

std::uint64_t required_seed(const Settings& s) {
    if (s.str("seed").empty()) {
        throw std::invalid_argument("seed: required for this command");
    }
    return s.u64("seed");
}

SubsetSpec subset_from(const Settings& s) {
    SubsetSpec spec;
    spec.shots = s.integer("shots");
    spec.fraction = s.real("fraction");
    if (spec.shots < 0) throw std::invalid_argument("shots: must be >= 0");
    if (spec.shots == 0 && !(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
        throw std::invalid_argument("fraction: must lie in (0, 1]");
    }
    return spec;
}

void write_gan_loss_artifacts(const fs::path& out_dir, const GanHistory& history) {
    {
        AtomicFileWriter writer(out_dir / "gan_loss.csv");
        auto& os = writer.stream();
        os << "step,d_loss,g_loss\n";
        for (std::size_t k = 0; k < history.d_loss.size(); ++k) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", k, history.d_loss[k],
                          history.g_loss[k]);
            os << buf;
        }
        writer.commit();
    }
    write_curves_svg(out_dir / "gan_loss.svg",
                     {{"d_loss", history.d_loss}, {"g_loss", history.g_loss}},
                     "Adversarial losses", "step", "loss");
}

// ---------------------------------------------------------------- commands

int cmd_generate(const Settings& s) {
    const int train = s.integer("train");
    const int test = s.integer("test");
    if (train < 1) throw std::invalid_argument("train: must be >= 1");
    if (test < 1) throw std::invalid_argument("test: must be >= 1");
    const auto grid = s.str("jnr").empty() ? default_jnr_grid() : s.real_list("jnr");
    if (grid.empty()) throw std::invalid_argument("jnr: grid must be non-empty");
    const auto seed = required_seed(s);

    const fs::path out_dir = prepare_out_dir(s);
    build_dataset(out_dir, train, test, grid, seed, [](int done, int total) {
        std::cerr << "\r" << done << "/" << total << " spectra" << std::flush;
        if (done == total) std::cerr << "\n";
    });
    s.snapshot(out_dir, "generate");
    std::cout << (out_dir / "manifest.json").string() << "\n";
    return 0;
}

int cmd_preprocess(const Settings& s) {
    const fs::path in_dir(s.str("in"));
    if (s.str("in").empty()) throw std::invalid_argument("in: required input directory");
    if (!fs::is_directory(in_dir)) {
        throw std::runtime_error("in: not a directory: " + in_dir.string());
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsiq") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("in: no .jsiq captures in " + in_dir.string());

    SpectrumDataset ds;
    for (const auto& file : files) {
        const IQCapture capture = read_iq_capture(file);
        SpectrumVector row;
        row.bins = psd(capture);
        // Quantize to the float32 storage precision before fitting stats.
        for (auto& v : row.bins) v = static_cast<float>(v);
        row.class_id = capture.class_id;
        row.jnr_db = capture.jnr_db;
        ds.rows.push_back(std::move(row));
    }
    ds.stats = fit_norm(ds.rows);
    ds.has_stats = true;

    const fs::path out_dir = prepare_out_dir(s);
    write_spectrum_dataset(out_dir / "spectra.jspc", ds);
    s.snapshot(out_dir, "preprocess");
    std::cout << (out_dir / "spectra.jspc").string() << "\n";
    return 0;
}

int cmd_train_gan(const Settings& s) {
    const auto seed = required_seed(s);
    const LoadedDataset data = load_dataset(s.str("manifest"));
    const SubsetSpec subset = subset_from(s);

    SpectrumDataset rows = subset_split(data.train, subset, seed);
    const Tensor x = rows_to_tensor(rows.rows, data.manifest.stats);
    const std::vector<int> y = rows_labels(rows.rows);

    std::vector<int> per_class(kNumClasses, 0);
    for (int label : y) ++per_class[label];
    int max_per_class = 0;
    for (int c : per_class) max_per_class = std::max(max_per_class, c);

    GanTrainConfig cfg;
    cfg.epochs = resolve_gan_epochs(s.integer("epochs"), max_per_class);
    cfg.seed = mix_seed(seed, 0x67616e);
    GanTrainer trainer(cfg);

    const int report_every = std::max(1, cfg.epochs / 20);
    const GanHistory history =
        trainer.train(x, y, [&](int epoch, double d_loss, double g_loss) {
            if ((epoch + 1) % report_every == 0 || epoch + 1 == cfg.epochs) {
                std::cerr << "epoch " << epoch + 1 << "/" << cfg.epochs << " d=" << d_loss
                          << " g=" << g_loss << "\n";
            }
        });

    const fs::path out_dir = prepare_out_dir(s);
    nlohmann::json meta;
    meta["seed"] = seed;
    meta["epochs"] = cfg.epochs;
    meta["per_class"] = per_class;
    meta["x_min"] = data.manifest.stats.x_min;
    meta["x_max"] = data.manifest.stats.x_max;
    save_gan_weights(out_dir / "gan.jwgt", trainer.generator(), trainer.discriminator(),
                     meta.dump());
    write_gan_loss_artifacts(out_dir, history);
    s.snapshot(out_dir, "train-gan");

    const EquilibriumReport eq = check_equilibrium(history);
    std::cout << "equilibrium converged=" << (eq.converged ? 1 : 0) << " d_mean="
              << eq.d_mean << " g_mean=" << eq.g_mean << " checkpoint="
              << (out_dir / "gan.jwgt").string() << "\n";
    return 0;
}

int cmd_augment(const Settings& s) {
    const fs::path gan_path(s.str("gan"));
    GeneratorNet gen(0);
    DiscriminatorNet disc(0);
    const auto meta = nlohmann::json::parse(load_gan_weights(gan_path, gen, disc));

    NormStats stats{meta.at("x_min").get<double>(), meta.at("x_max").get<double>()};
    const auto per_class = meta.at("per_class").get<std::vector<int>>();
    if (per_class.size() != static_cast<std::size_t>(kNumClasses)) {
        throw std::runtime_error(gan_path.string() + ": malformed per_class meta");
    }

    const int override_count = s.integer("per-class");
    std::vector<int> labels;
    for (int c = 0; c < kNumClasses; ++c) {
        const int count = override_count > 0 ? override_count : 4 * per_class[c];
        for (int k = 0; k < count; ++k) labels.push_back(c);
    }
    if (labels.empty()) throw std::invalid_argument("per-class: nothing to generate");

    const std::uint64_t seed = s.str("seed").empty()
                                   ? mix_seed(meta.at("seed").get<std::uint64_t>(), 0x617567)
                                   : s.u64("seed");
    Rng rng(seed);
    Tensor z({static_cast<int>(labels.size()), kNoiseDim});
    init_gaussian(z, rng, 1.0);
    const Tensor synth = gen.forward(z, labels, false);

    SpectrumDataset ds;
    ds.stats = stats;
    ds.has_stats = true;
    std::vector<double> row(kSpectrumLength);
    for (int r = 0; r < synth.dim(0); ++r) {
        std::copy_n(synth.data.begin() + static_cast<std::size_t>(r) * kSpectrumLength,
                    kSpectrumLength, row.begin());
        SpectrumVector sv;
        sv.bins = denormalize(row, stats);
        sv.class_id = labels[r];
        sv.jnr_db = 0.0;
        ds.rows.push_back(std::move(sv));
    }

    const fs::path out_dir = prepare_out_dir(s);
    write_spectrum_dataset(out_dir / "synthetic.jspc", ds);
    s.snapshot(out_dir, "augment");
    std::cout << (out_dir / "synthetic.jspc").string() << " rows=" << ds.rows.size() << "\n";
    return 0;
}

int cmd_train_cnn(const Settings& s) {
    const auto seed = required_seed(s);
    const LoadedDataset data = load_dataset(s.str("manifest"));
    const SubsetSpec subset = subset_from(s);

    SpectrumDataset rows = subset_split(data.train, subset, seed);
    Tensor x = rows_to_tensor(rows.rows, data.manifest.stats);
    std::vector<int> y = rows_labels(rows.rows);
    const int real_rows = x.dim(0);

    int synth_rows = 0;
    if (!s.str("synthetic").empty()) {
        const SpectrumDataset synth = read_spectrum_dataset(s.str("synthetic"));
        if (synth.rows.empty()) {
            throw std::runtime_error(s.str("synthetic") + ": empty synthetic dataset");
        }
        const Tensor xs = rows_to_tensor(synth.rows, data.manifest.stats);
        const std::vector<int> ys = rows_labels(synth.rows);
        Tensor blended({x.dim(0) + xs.dim(0), kSpectrumLength});
        std::copy(x.data.begin(), x.data.end(), blended.data.begin());
        std::copy(xs.data.begin(), xs.data.end(), blended.data.begin() + x.numel());
        x = std::move(blended);
        y.insert(y.end(), ys.begin(), ys.end());
        synth_rows = xs.dim(0);
    }

    CnnTrainConfig cfg;
    cfg.epochs = s.integer("epochs");
    if (cfg.epochs < 1) throw std::invalid_argument("epochs: must be >= 1");
    cfg.seed = mix_seed(seed, 0x636e6e);
    CnnTrainer trainer(cfg);
    const CnnHistory history = trainer.train(x, y);

    const fs::path out_dir = prepare_out_dir(s);
    nlohmann::json meta;
    meta["seed"] = seed;
    meta["epochs"] = cfg.epochs;
    meta["train_rows"] = real_rows;
    meta["synthetic_rows"] = synth_rows;
    save_cnn_weights(out_dir / "cnn.jwgt", trainer.net(), meta.dump());

    {
        AtomicFileWriter writer(out_dir / "cnn_loss.csv");
        auto& os = writer.stream();
        os << "epoch,loss,train_accuracy\n";
        for (std::size_t k = 0; k < history.loss.size(); ++k) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", k, history.loss[k],
                          history.train_accuracy[k]);
            os << buf;
        }
        writer.commit();
    }
    s.snapshot(out_dir, "train-cnn");
    std::cout << (out_dir / "cnn.jwgt").string() << " final_loss="
              << history.loss.back() << "\n";
    return 0;
}

int cmd_evaluate(const Settings& s) {
    const LoadedDataset data = load_dataset(s.str("manifest"));
    CnnNet net(0);
    load_cnn_weights(s.str("cnn"), net);

    const std::string split = s.str("split");
    if (split != "train" && split != "test") {
        throw std::invalid_argument("split: must be train or test");
    }
    const SpectrumDataset& rows = split == "train" ? data.train : data.test;

    const auto filter = s.str("jnr").empty() ? std::vector<double>{} : s.real_list("jnr");
    std::vector<SpectrumVector> kept;
    for (const auto& row : rows.rows) {
        if (filter.empty()) {
            kept.push_back(row);
            continue;
        }
        for (double jnr : filter) {
            if (std::abs(row.jnr_db - jnr) < 1e-6) {
                kept.push_back(row);
                break;
            }
        }
    }
    if (kept.empty()) throw std::invalid_argument("jnr: filter matched no rows");

    const Tensor x = rows_to_tensor(kept, data.manifest.stats);
    const EvalResult result = evaluate_spectra(net, x, rows_labels(kept));

    std::string cell = split;
    if (!filter.empty()) {
        cell += "_jnr";
        for (double jnr : filter) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%g", jnr);
            cell += std::string("_") + buf;
        }
    }

    const fs::path out_dir = prepare_out_dir(s);
    write_confusion_csv(out_dir / ("confusion_" + cell + ".csv"), result.confusion);

    std::vector<std::vector<double>> normalized(kNumClasses,
                                                std::vector<double>(kNumClasses, 0.0));
    for (int t = 0; t < kNumClasses; ++t) {
        int row_total = 0;
        for (int p = 0; p < kNumClasses; ++p) row_total += result.confusion[t][p];
        for (int p = 0; p < kNumClasses; ++p) {
            normalized[t][p] = row_total > 0
                                   ? static_cast<double>(result.confusion[t][p]) / row_total
                                   : 0.0;
        }
    }
    std::vector<std::string> names;
    for (int c = 0; c < kNumClasses; ++c) names.emplace_back(class_name(class_from_id(c)));
    write_confusion_svg(out_dir / ("confusion_" + cell + ".svg"), normalized, names,
                        "Confusion (" + cell + ")");
    s.snapshot(out_dir, "evaluate");

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", result.accuracy);
    std::cout << "accuracy " << buf << "\n";
    return 0;
}

int cmd_sweep(const Settings& s) {
    const LoadedDataset data = load_dataset(s.str("manifest"));

    SweepConfig cfg;
    if (!s.str("shots").empty()) {
        cfg.shots = s.int_list("shots");
        cfg.fractions.clear();
    } else if (!s.str("fractions").empty()) {
        cfg.fractions = s.real_list("fractions");
    }
    cfg.repetitions = s.integer("seeds");
    cfg.with_ablation = !s.flag("no-augment");
    cfg.jnr_grid = s.str("jnr").empty() ? data.manifest.jnr_grid : s.real_list("jnr");
    cfg.gan_epochs = s.integer("gan-epochs");
    cfg.cnn_epochs = s.integer("cnn-epochs");
    cfg.jobs = s.integer("jobs");
    cfg.validate();

    const fs::path out_dir = prepare_out_dir(s);
    const auto rows =
        run_sweep(data.train, data.test, cfg, out_dir / "sweep.csv",
                  [](const std::string& cell) { std::cerr << "cell done: " << cell << "\n"; });
    write_sweep_curves_svg(out_dir / "sweep.svg", rows);
    s.snapshot(out_dir, "sweep");
    std::cout << (out_dir / "sweep.csv").string() << " rows=" << rows.size() << "\n";
    return 0;
}

int cmd_project(const Settings& s) {
    const LoadedDataset data = load_dataset(s.str("manifest"));
    const int per_class = s.integer("per-class");
    if (per_class < 2) throw std::invalid_argument("per-class: must be >= 2");
    const auto seed = s.str("seed").empty() ? 0 : s.u64("seed");

    SubsetSpec spec;
    spec.shots = std::min(per_class, data.manifest.train_per_class);
    const SpectrumDataset real = subset_split(data.train, spec, seed);

    std::vector<SpectrumVector> synthetic;
    if (!s.str("synthetic").empty()) {
        synthetic = read_spectrum_dataset(s.str("synthetic")).rows;
    }

    TsneConfig cfg;
    cfg.seed = seed;
    cfg.perplexity = s.real("perplexity");
    cfg.iterations = s.integer("iterations");
    const ProjectionResult result = tsne_project(real.rows, synthetic, cfg);

    const fs::path out_dir = prepare_out_dir(s);
    write_projection_csv(out_dir / "tsne.csv", result);
    write_projection_svg(out_dir / "tsne.svg", result, "t-SNE projection");

    if (!synthetic.empty()) {
        const auto ratios = cluster_overlap(real.rows, synthetic);
        AtomicFileWriter writer(out_dir / "overlap.csv");
        auto& os = writer.stream();
        os << "class,overlap_ratio\n";
        for (int c = 0; c < kNumClasses; ++c) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s,%.6f\n", class_name(class_from_id(c)),
                          ratios[c]);
            os << buf;
        }
        writer.commit();
    }
    s.snapshot(out_dir, "project");
    std::cout << (out_dir / "tsne.csv").string() << "\n";
    return 0;
}

int cmd_flops(const Settings& s) {
    const FlopsReport cnn = count_flops("cnn", cnn_layer_specs());
    const FlopsReport cgan = count_flops("cgan", cgan_layer_specs());

    const fs::path out_dir = prepare_out_dir(s);
    write_flops_json(out_dir / "flops.json", {cnn, cgan});
    s.snapshot(out_dir, "flops");

    std::cout << "cnn flops=" << cnn.total_flops << " params=" << cnn.total_params_strict
              << "; cgan flops=" << cgan.total_flops
              << " params=" << cgan.total_params_strict << "; "
              << (out_dir / "flops.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jamming-signal spectrum pipeline"};
    app.require_subcommand(1);

    Settings generate(app.add_subcommand("generate", "synthesize a labeled spectrum dataset"));
    generate.add("train", "100", "training samples per class");
    generate.add("test", "400", "test samples per class");
    generate.add("jnr", "", "comma-separated JNR grid in dB (default -20..20 step 5)");
    generate.add("seed", "", "global seed (required)");
    generate.add("out", "runs/dataset", "output directory");

    Settings preprocess(app.add_subcommand("preprocess", "convert .jsiq captures to spectra"));
    preprocess.add("in", "", "directory of .jsiq captures");
    preprocess.add("out", "runs/preprocess", "output directory");

    Settings train_gan(app.add_subcommand("train-gan", "train the conditional GAN"));
    train_gan.add("manifest", "runs/dataset/manifest.json", "dataset manifest path");
    train_gan.add("shots", "0", "absolute per-class training count (0 = use fraction)");
    train_gan.add("fraction", "1.0", "per-class training fraction");
    train_gan.add("epochs", "0", "training epochs (0 = 3200, or 800 at <= 10/class)");
    train_gan.add("seed", "", "run seed (required)");
    train_gan.add("out", "runs/gan", "output directory");

    Settings augment(app.add_subcommand("augment", "sample synthetic spectra from a GAN"));
    augment.add("gan", "runs/gan/gan.jwgt", "generator checkpoint");
    augment.add("per-class", "0", "synthetic rows per class (0 = 4x the GAN's train count)");
    augment.add("seed", "", "sampling seed (default derived from the checkpoint)");
    augment.add("out", "runs/augment", "output directory");

    Settings train_cnn(app.add_subcommand("train-cnn", "train the classifier"));
    train_cnn.add("manifest", "runs/dataset/manifest.json", "dataset manifest path");
    train_cnn.add("synthetic", "", "optional synthetic spectra to blend in");
    train_cnn.add("shots", "0", "absolute per-class training count (0 = use fraction)");
    train_cnn.add("fraction", "1.0", "per-class training fraction");
    train_cnn.add("epochs", "100", "training epochs");
    train_cnn.add("seed", "", "run seed (required)");
    train_cnn.add("out", "runs/cnn", "output directory");

    Settings evaluate(app.add_subcommand("evaluate", "score a trained classifier"));
    evaluate.add("manifest", "runs/dataset/manifest.json", "dataset manifest path");
    evaluate.add("cnn", "runs/cnn/cnn.jwgt", "classifier checkpoint");
    evaluate.add("split", "test", "evaluation split: train | test");
    evaluate.add("jnr", "", "comma-separated JNR filter in dB (default: all)");
    evaluate.add("out", "runs/evaluate", "output directory");

    Settings sweep(app.add_subcommand("sweep", "accuracy sweep over subsets and JNR"));
    sweep.add("manifest", "runs/dataset/manifest.json", "dataset manifest path");
    sweep.add("fractions", "1.0,0.5,0.3,0.1", "subset fractions");
    sweep.add("shots", "", "subset shot counts (replaces fractions)");
    sweep.add("seeds", "3", "repetitions per cell");
    sweep.add("jnr", "", "evaluation JNR points (default: manifest grid)");
    sweep.add("gan-epochs", "0", "GAN epochs override (0 = auto)");
    sweep.add("cnn-epochs", "100", "classifier epochs");
    sweep.add("jobs", "1", "parallel cell workers");
    sweep.add_flag("no-augment", "run only the non-augmented variant");
    sweep.add("out", "runs/sweep", "output directory");

    Settings project(app.add_subcommand("project", "t-SNE projection of spectra"));
    project.add("manifest", "runs/dataset/manifest.json", "dataset manifest path");
    project.add("synthetic", "", "optional synthetic spectra to overlay");
    project.add("per-class", "40", "real rows per class to project");
    project.add("perplexity", "30", "t-SNE perplexity");
    project.add("iterations", "1000", "t-SNE iterations");
    project.add("seed", "", "projection seed (default 0)");
    project.add("out", "runs/project", "output directory");

    Settings flops(app.add_subcommand("flops", "FLOPs and parameter accounting"));
    flops.add("out", "runs/flops", "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Settings* active = nullptr;
    int (*handler)(const Settings&) = nullptr;
    const auto pick = [&](const char* name, Settings& s, int (*h)(const Settings&)) {
        if (app.get_subcommand(name)->parsed()) {
            active = &s;
            handler = h;
        }
    };
    pick("generate", generate, cmd_generate);
    pick("preprocess", preprocess, cmd_preprocess);
    pick("train-gan", train_gan, cmd_train_gan);
    pick("augment", augment, cmd_augment);
    pick("train-cnn", train_cnn, cmd_train_cnn);
    pick("evaluate", evaluate, cmd_evaluate);
    pick("sweep", sweep, cmd_sweep);
    pick("project", project, cmd_project);
    pick("flops", flops, cmd_flops);

    try {
        active->finalize();
        return handler(*active);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
