#include "jamsig/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "jamsig/binio.hpp"
#include "jamsig/svg.hpp"

namespace jamsig {

namespace {

std::vector<std::string> canonical_class_names() {
    std::vector<std::string> names;
    names.reserve(kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) names.emplace_back(class_name(class_from_id(c)));
    return names;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------- manifest

void DatasetManifest::validate() const {
    if (classes != canonical_class_names()) {
        throw std::invalid_argument("manifest: class list must hold the 8 canonical names");
    }
    if (train_per_class < 1 || test_per_class < 1) {
        throw std::invalid_argument("manifest: per-class counts must be >= 1");
    }
    if (jnr_grid.empty()) throw std::invalid_argument("manifest: jnr grid must be non-empty");
    if (train_file.empty() || test_file.empty()) {
        throw std::invalid_argument("manifest: dataset file names must be set");
    }
}

std::vector<double> default_jnr_grid() {
    std::vector<double> grid;
    for (int v = -20; v <= 20; v += 5) grid.push_back(v);
    return grid;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    manifest.validate();
    nlohmann::json j;
    j["classes"] = manifest.classes;
    j["train_per_class"] = manifest.train_per_class;
    j["test_per_class"] = manifest.test_per_class;
    j["jnr_grid"] = manifest.jnr_grid;
    j["global_seed"] = manifest.global_seed;
    j["x_min"] = manifest.stats.x_min;
    j["x_max"] = manifest.stats.x_max;
    j["train_file"] = manifest.train_file;
    j["test_file"] = manifest.test_file;

    AtomicFileWriter writer(path);
    writer.stream() << j.dump(2) << "\n";
    writer.commit();
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": manifest parse failure: " + e.what());
    }

    DatasetManifest m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.train_per_class = j.at("train_per_class").get<int>();
    m.test_per_class = j.at("test_per_class").get<int>();
    m.jnr_grid = j.at("jnr_grid").get<std::vector<double>>();
    m.global_seed = j.at("global_seed").get<std::uint64_t>();
    m.stats.x_min = j.at("x_min").get<double>();
    m.stats.x_max = j.at("x_max").get<double>();
    m.train_file = j.at("train_file").get<std::string>();
    m.test_file = j.at("test_file").get<std::string>();
    m.validate();
    return m;
}

// ---------------------------------------------------------------- dataset build

DatasetManifest build_dataset(const std::filesystem::path& out_dir, int train_per_class,
                              int test_per_class, const std::vector<double>& jnr_grid,
                              std::uint64_t global_seed,
                              const std::function<void(int, int)>& on_progress) {
    if (train_per_class < 1 || test_per_class < 1) {
        throw std::invalid_argument("build_dataset: per-class counts must be >= 1");
    }
    if (jnr_grid.empty()) throw std::invalid_argument("build_dataset: empty jnr grid");

    std::filesystem::create_directories(out_dir);

    SynthConfig synth_cfg;
    synth_cfg.global_seed = global_seed;
    synth_cfg.validate();

    const int per_class = train_per_class + test_per_class;
    const int total = per_class * kNumClasses;
    int done = 0;

    SpectrumDataset train, test;
    train.rows.reserve(static_cast<std::size_t>(train_per_class) * kNumClasses);
    test.rows.reserve(static_cast<std::size_t>(test_per_class) * kNumClasses);

    for (int c = 0; c < kNumClasses; ++c) {
        for (int idx = 0; idx < per_class; ++idx) {
            Rng jnr_rng(mix_seed(mix_seed(mix_seed(global_seed, 0x4a4e52), c), idx));
            const double jnr =
                jnr_grid[jnr_rng.uniform_int(0, static_cast<std::int64_t>(jnr_grid.size()) - 1)];

            const IQCapture capture = synthesize_labeled(class_from_id(c), jnr, idx, synth_cfg);
            SpectrumVector row;
            row.bins = psd(capture);
            // Spectra persist as float32; quantize now so the normalization
            // stats fitted below bound the rows a reader gets back.
            for (auto& v : row.bins) v = static_cast<float>(v);
            row.class_id = c;
            row.jnr_db = jnr;
            (idx < train_per_class ? train.rows : test.rows).push_back(std::move(row));

            ++done;
            if (on_progress && done % 200 == 0) on_progress(done, total);
        }
    }

    const NormStats stats = fit_norm(train.rows);
    train.stats = stats;
    train.has_stats = true;
    test.stats = stats;
    test.has_stats = true;

    write_spectrum_dataset(out_dir / "train.jspc", train);
    write_spectrum_dataset(out_dir / "test.jspc", test);

    DatasetManifest manifest;
    manifest.classes = canonical_class_names();
    manifest.train_per_class = train_per_class;
    manifest.test_per_class = test_per_class;
    manifest.jnr_grid = jnr_grid;
    manifest.global_seed = global_seed;
    manifest.stats = stats;
    manifest.train_file = "train.jspc";
    manifest.test_file = "test.jspc";
    write_manifest(out_dir / "manifest.json", manifest);

    if (on_progress) on_progress(total, total);
    return manifest;
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
    LoadedDataset out;
    out.manifest = read_manifest(manifest_path);
    const auto dir = manifest_path.parent_path();
    out.train = read_spectrum_dataset(dir / out.manifest.train_file);
    out.test = read_spectrum_dataset(dir / out.manifest.test_file);
    return out;
}

// ---------------------------------------------------------------- subsets

std::string SubsetSpec::label() const {
    if (shots > 0) return std::to_string(shots) + "-shot";
    return format_double(fraction);
}

SpectrumDataset subset_split(const SpectrumDataset& train, const SubsetSpec& spec,
                             std::uint64_t seed) {
    if (spec.shots < 0) throw std::invalid_argument("subset_split: shots must be >= 0");
    if (spec.shots == 0 && !(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
        throw std::invalid_argument("subset_split: fraction must lie in (0, 1]");
    }

    std::vector<std::vector<std::size_t>> by_class(kNumClasses);
    for (std::size_t k = 0; k < train.rows.size(); ++k) {
        const int c = train.rows[k].class_id;
        if (c < 0 || c >= kNumClasses) {
            throw std::invalid_argument("subset_split: row with class id out of range");
        }
        by_class[c].push_back(k);
    }

    SpectrumDataset out;
    out.stats = train.stats;
    out.has_stats = train.has_stats;

    for (int c = 0; c < kNumClasses; ++c) {
        auto& pool = by_class[c];
        if (pool.empty()) {
            throw std::invalid_argument(std::string("subset_split: no rows for class ") +
                                        class_name(class_from_id(c)));
        }
        const auto available = static_cast<int>(pool.size());
        int take;
        if (spec.shots > 0) {
            if (spec.shots > available) {
                throw std::invalid_argument("subset_split: requested " +
                                            std::to_string(spec.shots) + " shots but only " +
                                            std::to_string(available) + " rows for class " +
                                            class_name(class_from_id(c)));
            }
            take = spec.shots;
        } else {
            take = std::max(1, static_cast<int>(std::lround(spec.fraction * available)));
            take = std::min(take, available);
        }

        // One permutation per (seed, class); prefixes make smaller subsets
        // nest inside larger ones.
        Rng rng(mix_seed(mix_seed(seed, 0x737562), c));
        for (int k = available - 1; k > 0; --k) {
            const auto j = static_cast<int>(rng.uniform_int(0, k));
            std::swap(pool[k], pool[j]);
        }
        for (int k = 0; k < take; ++k) out.rows.push_back(train.rows[pool[k]]);
    }
    return out;
}

// ---------------------------------------------------------------- tensors

Tensor rows_to_tensor(const std::vector<SpectrumVector>& rows, const NormStats& stats) {
    if (rows.empty()) throw std::invalid_argument("rows_to_tensor: no rows");
    Tensor out({static_cast<int>(rows.size()), kSpectrumLength});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto norm = normalize(rows[r].bins, stats);
        std::copy(norm.begin(), norm.end(),
                  out.data.begin() + static_cast<std::size_t>(r) * kSpectrumLength);
    }
    return out;
}

std::vector<int> rows_labels(const std::vector<SpectrumVector>& rows) {
    std::vector<int> labels(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].class_id < 0 || rows[r].class_id >= kNumClasses) {
            throw std::invalid_argument("rows_labels: class id out of range");
        }
        labels[r] = rows[r].class_id;
    }
    return labels;
}

EvalResult evaluate_spectra(CnnNet& net, const Tensor& data, const std::vector<int>& labels) {
    if (data.dim(0) != static_cast<int>(labels.size()) || labels.empty()) {
        throw std::invalid_argument("evaluate_spectra: data/label mismatch or empty");
    }

    EvalResult result;
    result.confusion.assign(kNumClasses, std::vector<int>(kNumClasses, 0));
    result.total = static_cast<int>(labels.size());

    constexpr int kChunk = 256;
    int correct = 0;
    for (int first = 0; first < data.dim(0); first += kChunk) {
        const int nb = std::min(kChunk, data.dim(0) - first);
        Tensor xb({nb, kSpectrumLength});
        std::copy_n(data.data.begin() + static_cast<std::size_t>(first) * kSpectrumLength,
                    static_cast<std::size_t>(nb) * kSpectrumLength, xb.data.begin());
        const Tensor logits = net.forward(xb, false);
        for (int r = 0; r < nb; ++r) {
            int best = 0;
            for (int c = 1; c < kNumClasses; ++c) {
                if (logits.at(r, c) > logits.at(r, best)) best = c;
            }
            const int truth = labels[first + r];
            ++result.confusion[truth][best];
            if (best == truth) ++correct;
        }
    }
    result.accuracy = static_cast<double>(correct) / result.total;
    return result;
}

// ---------------------------------------------------------------- cells

int resolve_gan_epochs(int requested, int per_class_count) {
    if (requested > 0) return requested;
    return per_class_count <= 10 ? 800 : 3200;
}

namespace {

struct TrainedCell {
    std::unique_ptr<CnnTrainer> trainer;
    NormStats stats;
    CellResult result;  // eval left empty; filled by the caller
};

TrainedCell train_cell(const SpectrumDataset& train, const CellConfig& cfg) {
    if (train.rows.empty()) throw std::invalid_argument("run_cell: empty training set");

    TrainedCell cell;
    cell.stats = train.has_stats ? train.stats : fit_norm(train.rows);

    SpectrumDataset subset = subset_split(train, cfg.subset, cfg.seed);
    cell.result.subset_rows = subset.rows;

    Tensor x_train = rows_to_tensor(subset.rows, cell.stats);
    std::vector<int> y_train = rows_labels(subset.rows);

    if (cfg.augment) {
        std::vector<int> per_class(kNumClasses, 0);
        for (int label : y_train) ++per_class[label];
        int max_per_class = 0;
        for (int c = 0; c < kNumClasses; ++c) max_per_class = std::max(max_per_class, per_class[c]);

        GanTrainConfig gan_cfg;
        gan_cfg.epochs = resolve_gan_epochs(cfg.gan_epochs, max_per_class);
        gan_cfg.seed = mix_seed(cfg.seed, 0x67616e);
        GanTrainer gan(gan_cfg);
        cell.result.gan_history = gan.train(x_train, y_train);
        cell.result.gan_ran = true;

        // m' = 4m synthetic rows per class, class-major.
        std::vector<int> synth_labels;
        for (int c = 0; c < kNumClasses; ++c) {
            for (int k = 0; k < 4 * per_class[c]; ++k) synth_labels.push_back(c);
        }

        const Tensor synth = gan.generate(synth_labels);
        cell.result.synthetic_rows.reserve(synth_labels.size());
        std::vector<double> row(kSpectrumLength);
        for (int r = 0; r < synth.dim(0); ++r) {
            std::copy_n(synth.data.begin() + static_cast<std::size_t>(r) * kSpectrumLength,
                        kSpectrumLength, row.begin());
            SpectrumVector sv;
            sv.bins = denormalize(row, cell.stats);
            sv.class_id = synth_labels[r];
            sv.jnr_db = 0.0;  // synthetic rows carry no JNR
            cell.result.synthetic_rows.push_back(std::move(sv));
        }

        // Blend real and synthetic for the classifier.
        const int total = x_train.dim(0) + synth.dim(0);
        Tensor blended({total, kSpectrumLength});
        std::copy(x_train.data.begin(), x_train.data.end(), blended.data.begin());
        std::copy(synth.data.begin(), synth.data.end(),
                  blended.data.begin() + x_train.numel());
        y_train.insert(y_train.end(), synth_labels.begin(), synth_labels.end());
        x_train = std::move(blended);
    }

    CnnTrainConfig cnn_cfg;
    cnn_cfg.epochs = cfg.cnn_epochs;
    cnn_cfg.seed = mix_seed(cfg.seed, 0x636e6e);
    cell.trainer = std::make_unique<CnnTrainer>(cnn_cfg);
    cell.trainer->train(x_train, y_train);
    return cell;
}

std::pair<Tensor, std::vector<int>> filtered_test(const SpectrumDataset& test,
                                                  const std::vector<double>& jnr_filter,
                                                  const NormStats& stats) {
    std::vector<SpectrumVector> rows;
    for (const auto& row : test.rows) {
        if (jnr_filter.empty()) {
            rows.push_back(row);
            continue;
        }
        for (double jnr : jnr_filter) {
            if (std::abs(row.jnr_db - jnr) < 1e-6) {
                rows.push_back(row);
                break;
            }
        }
    }
    if (rows.empty()) {
        throw std::invalid_argument("run_cell: JNR filter matched no test rows");
    }
    return {rows_to_tensor(rows, stats), rows_labels(rows)};
}

}  // namespace

CellResult run_cell(const SpectrumDataset& train, const SpectrumDataset& test,
                    const CellConfig& cfg) {
    TrainedCell cell = train_cell(train, cfg);
    const auto [x_test, y_test] = filtered_test(test, cfg.jnr_filter, cell.stats);
    cell.result.eval = evaluate_spectra(cell.trainer->net(), x_test, y_test);
    return std::move(cell.result);
}

// ---------------------------------------------------------------- sweep

void SweepConfig::validate() const {
    if (shots.empty() && fractions.empty()) {
        throw std::invalid_argument("sweep: no subset axis given");
    }
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw std::invalid_argument("sweep: fractions must lie in (0, 1]");
        }
    }
    for (int s : shots) {
        if (s < 1) throw std::invalid_argument("sweep: shots must be >= 1");
    }
    if (repetitions < 1) throw std::invalid_argument("sweep: repetitions must be >= 1");
    if (jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");
}

std::vector<SweepRow> run_sweep(const SpectrumDataset& train, const SpectrumDataset& test,
                                const SweepConfig& cfg, const std::filesystem::path& flush_path,
                                const std::function<void(const std::string&)>& on_cell) {
    cfg.validate();

    std::vector<SubsetSpec> subsets;
    if (!cfg.shots.empty()) {
        for (int s : cfg.shots) subsets.push_back({1.0, s});
    } else {
        for (double f : cfg.fractions) subsets.push_back({f, 0});
    }
    const std::vector<bool> variants =
        cfg.with_ablation ? std::vector<bool>{true, false} : std::vector<bool>{false};

    std::vector<double> jnr_points =
        cfg.jnr_grid.empty() ? default_jnr_grid() : cfg.jnr_grid;

    struct Cell {
        SubsetSpec subset;
        bool augmented;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& subset : subsets) {
        for (bool augmented : variants) {
            for (int rep = 1; rep <= cfg.repetitions; ++rep) {
                cells.push_back({subset, augmented, static_cast<std::uint64_t>(rep)});
            }
        }
    }

    std::vector<std::vector<SweepRow>> per_cell(cells.size());
    std::vector<bool> cell_done(cells.size(), false);
    std::mutex mu;
    std::size_t next_cell = 0;

    const auto flush_completed = [&] {
        if (flush_path.empty()) return;
        std::vector<SweepRow> done;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (!cell_done[k]) continue;
            done.insert(done.end(), per_cell[k].begin(), per_cell[k].end());
        }
        write_sweep_csv(flush_path, done);
    };

    const auto worker = [&] {
        for (;;) {
            std::size_t mine;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next_cell >= cells.size()) return;
                mine = next_cell++;
            }
            const Cell& cell = cells[mine];

            CellConfig cc;
            cc.subset = cell.subset;
            cc.augment = cell.augmented;
            cc.seed = cell.seed;
            cc.gan_epochs = cfg.gan_epochs;
            cc.cnn_epochs = cfg.cnn_epochs;

            TrainedCell trained = train_cell(train, cc);
            std::vector<SweepRow> rows;
            for (double jnr : jnr_points) {
                const auto [x_test, y_test] = filtered_test(test, {jnr}, trained.stats);
                const EvalResult eval =
                    evaluate_spectra(trained.trainer->net(), x_test, y_test);
                rows.push_back(
                    {cell.subset.label(), jnr, cell.seed, cell.augmented, eval.accuracy});
            }

            {
                std::lock_guard<std::mutex> lock(mu);
                per_cell[mine] = std::move(rows);
                cell_done[mine] = true;
                flush_completed();
                if (on_cell) {
                    on_cell(cell.subset.label() + (cell.augmented ? " augmented" : " plain") +
                            " seed " + std::to_string(cell.seed));
                }
            }
        }
    };

    const int workers = std::min<int>(cfg.jobs, static_cast<int>(cells.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<SweepRow> rows;
    for (auto& cell_rows : per_cell) {
        rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    }
    if (!flush_path.empty()) write_sweep_csv(flush_path, rows);
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    AtomicFileWriter writer(path);
    auto& os = writer.stream();
    os << "subset,jnr_db,seed,augmented,accuracy\n";
    for (const auto& row : rows) {
        os << row.subset << "," << format_double(row.jnr_db) << "," << row.seed << ","
           << (row.augmented ? 1 : 0) << "," << format_fixed(row.accuracy, 6) << "\n";
    }
    writer.commit();
}

void write_sweep_curves_svg(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("write_sweep_curves_svg: no rows");

    std::vector<double> jnrs;
    for (const auto& row : rows) {
        if (std::find(jnrs.begin(), jnrs.end(), row.jnr_db) == jnrs.end()) {
            jnrs.push_back(row.jnr_db);
        }
    }
    std::sort(jnrs.begin(), jnrs.end());

    std::map<std::pair<std::string, bool>, std::vector<std::pair<double, int>>> acc;
    std::vector<std::pair<std::string, bool>> order;
    for (const auto& row : rows) {
        const auto key = std::make_pair(row.subset, row.augmented);
        if (acc.find(key) == acc.end()) {
            acc[key].assign(jnrs.size(), {0.0, 0});
            order.push_back(key);
        }
        const auto slot = static_cast<std::size_t>(
            std::find(jnrs.begin(), jnrs.end(), row.jnr_db) - jnrs.begin());
        acc[key][slot].first += row.accuracy;
        acc[key][slot].second += 1;
    }

    std::vector<CurveSeries> series;
    for (const auto& key : order) {
        CurveSeries s;
        s.name = key.first + (key.second ? " augmented" : " plain");
        for (const auto& [sum, n] : acc[key]) s.values.push_back(n > 0 ? sum / n : 0.0);
        series.push_back(std::move(s));
    }

    const std::string x_label = "JNR (dB), " + format_double(jnrs.front()) + " to " +
                                format_double(jnrs.back()) + " left to right";
    write_curves_svg(path, series, "Accuracy vs JNR", x_label, "accuracy");
}

void write_confusion_csv(const std::filesystem::path& path,
                         const std::vector<std::vector<int>>& confusion) {
    if (confusion.size() != static_cast<std::size_t>(kNumClasses)) {
        throw std::invalid_argument("write_confusion_csv: expected 8 rows");
    }
    const auto names = canonical_class_names();

    AtomicFileWriter writer(path);
    auto& os = writer.stream();
    os << "true_class";
    for (const auto& name : names) os << "," << name;
    os << "\n";
    for (int t = 0; t < kNumClasses; ++t) {
        if (confusion[t].size() != static_cast<std::size_t>(kNumClasses)) {
            throw std::invalid_argument("write_confusion_csv: ragged matrix");
        }
        os << names[t];
        for (int p = 0; p < kNumClasses; ++p) os << "," << confusion[t][p];
        os << "\n";
    }
    writer.commit();
}

// ---------------------------------------------------------------- projection

ProjectionResult tsne_project(const std::vector<SpectrumVector>& real,
                              const std::vector<SpectrumVector>& synthetic,
                              const TsneConfig& cfg) {
    const std::size_t n = real.size() + synthetic.size();
    if (n < 10) throw std::invalid_argument("tsne_project: need at least 10 rows");
    if (n > 4096) {
        throw std::invalid_argument("tsne_project: exact O(n^2) method capped at 4096 rows");
    }

    Tensor points({static_cast<int>(n), kSpectrumLength});
    ProjectionResult result;
    result.class_ids.reserve(n);
    result.synthetic.reserve(n);

    std::size_t r = 0;
    for (const auto* rows : {&real, &synthetic}) {
        for (const auto& row : *rows) {
            if (row.bins.size() != static_cast<std::size_t>(kSpectrumLength)) {
                throw std::invalid_argument("tsne_project: row length != 800");
            }
            std::copy(row.bins.begin(), row.bins.end(),
                      points.data.begin() + static_cast<std::size_t>(r) * kSpectrumLength);
            result.class_ids.push_back(row.class_id);
            result.synthetic.push_back(rows == &synthetic);
            ++r;
        }
    }

    result.coords = tsne(points, cfg);
    return result;
}

void write_projection_csv(const std::filesystem::path& path, const ProjectionResult& result) {
    AtomicFileWriter writer(path);
    auto& os = writer.stream();
    os << "x,y,class,source\n";
    for (int r = 0; r < result.coords.dim(0); ++r) {
        os << format_fixed(result.coords.at(r, 0), 6) << ","
           << format_fixed(result.coords.at(r, 1), 6) << ","
           << class_name(class_from_id(result.class_ids[r])) << ","
           << (result.synthetic[r] ? "synthetic" : "real") << "\n";
    }
    writer.commit();
}

void write_projection_svg(const std::filesystem::path& path, const ProjectionResult& result,
                          const std::string& title) {
    std::vector<ScatterPoint> points;
    points.reserve(result.coords.dim(0));
    for (int r = 0; r < result.coords.dim(0); ++r) {
        points.push_back({result.coords.at(r, 0), result.coords.at(r, 1), result.class_ids[r],
                          result.synthetic[r]});
    }
    write_scatter_svg(path, points, canonical_class_names(), title);
}

std::vector<double> cluster_overlap(const std::vector<SpectrumVector>& real,
                                    const std::vector<SpectrumVector>& synthetic) {
    const auto centroids = [](const std::vector<SpectrumVector>& rows, const char* what) {
        std::vector<std::vector<double>> sum(kNumClasses,
                                             std::vector<double>(kSpectrumLength, 0.0));
        std::vector<int> count(kNumClasses, 0);
        for (const auto& row : rows) {
            if (row.class_id < 0 || row.class_id >= kNumClasses) {
                throw std::invalid_argument(std::string(what) + ": class id out of range");
            }
            if (row.bins.size() != static_cast<std::size_t>(kSpectrumLength)) {
                throw std::invalid_argument(std::string(what) + ": row length != 800");
            }
            for (int k = 0; k < kSpectrumLength; ++k) sum[row.class_id][k] += row.bins[k];
            ++count[row.class_id];
        }
        for (int c = 0; c < kNumClasses; ++c) {
            if (count[c] == 0) {
                throw std::invalid_argument(std::string(what) + ": missing class " +
                                            class_name(class_from_id(c)));
            }
            for (auto& v : sum[c]) v /= count[c];
        }
        return sum;
    };

    const auto real_c = centroids(real, "cluster_overlap(real)");
    const auto synth_c = centroids(synthetic, "cluster_overlap(synthetic)");

    const auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = a[k] - b[k];
            acc += d * d;
        }
        return std::sqrt(acc);
    };

    std::vector<double> ratios(kNumClasses, 0.0);
    for (int c = 0; c < kNumClasses; ++c) {
        double nearest = 0.0;
        bool first = true;
        for (int other = 0; other < kNumClasses; ++other) {
            if (other == c) continue;
            const double d = dist(real_c[c], real_c[other]);
            if (first || d < nearest) {
                nearest = d;
                first = false;
            }
        }
        if (nearest <= 0.0) {
            throw std::invalid_argument("cluster_overlap: coincident real centroids");
        }
        ratios[c] = dist(real_c[c], synth_c[c]) / nearest;
    }
    return ratios;
}

// ---------------------------------------------------------------- FLOPs

FlopsReport count_flops(const std::string& network, const std::vector<LayerSpec>& layers) {
    FlopsReport report;
    report.network = network;

    for (const auto& spec : layers) {
        LayerFlops entry;
        entry.name = spec.name;
        if (spec.kind == "conv1d") {
            if (spec.c_in < 1 || spec.c_out < 1 || spec.kernel < 1 || spec.m_out < 1) {
                throw std::invalid_argument("count_flops: bad conv1d geometry for " + spec.name);
            }
            const long long m = spec.m_out, k = spec.kernel;
            const long long cin = spec.c_in, cout = spec.c_out;
            entry.flops = m * k * cin * cout;
            entry.flops_2d_literal = m * m * k * k * cin * cout;
            entry.params_strict = k * cin * cout + cout;
            entry.params_featuremap = k * cin * cout + m * cout;
        } else if (spec.kind == "dense") {
            if (spec.in < 1 || spec.out < 1) {
                throw std::invalid_argument("count_flops: bad dense geometry for " + spec.name);
            }
            const long long in = spec.in, out = spec.out;
            entry.flops = in * out;
            entry.flops_2d_literal = in * out;
            entry.params_strict = in * out + out;
            entry.params_featuremap = in * out + out;
        } else if (spec.kind == "embedding") {
            if (spec.in < 1 || spec.out < 1) {
                throw std::invalid_argument("count_flops: bad embedding geometry for " +
                                            spec.name);
            }
            entry.flops = 0;  // table lookup
            entry.flops_2d_literal = 0;
            entry.params_strict = static_cast<long long>(spec.in) * spec.out;
            entry.params_featuremap = entry.params_strict;
        } else {
            throw std::invalid_argument("count_flops: unknown layer kind \"" + spec.kind + "\"");
        }

        report.total_flops += entry.flops;
        report.total_flops_2d_literal += entry.flops_2d_literal;
        report.total_params_strict += entry.params_strict;
        report.total_params_featuremap += entry.params_featuremap;
        report.layers.push_back(std::move(entry));
    }
    return report;
}

std::vector<LayerSpec> cnn_layer_specs() {
    std::vector<LayerSpec> layers;
    layers.push_back({"conv1d", "conv1", 1, 16, 7, 400, 0, 0});
    layers.push_back({"conv1d", "conv2", 16, 32, 5, 200, 0, 0});
    layers.push_back({"conv1d", "conv3", 32, 64, 3, 100, 0, 0});
    layers.push_back({"dense", "fc1", 0, 0, 0, 0, 64, 128});
    layers.push_back({"dense", "fc2", 0, 0, 0, 0, 128, kNumClasses});
    return layers;
}

std::vector<LayerSpec> cgan_layer_specs() {
    std::vector<LayerSpec> layers;
    layers.push_back({"embedding", "gen_embed", 0, 0, 0, 0, kNumClasses, kLabelEmbedDim});
    const int gen_widths[][2] = {{200, 256}, {256, 256}, {256, 512}, {512, 512}, {512, 512},
                                 {512, 512}, {512, 768}, {768, 768}, {768, 800}, {800, 800}};
    for (std::size_t i = 0; i < std::size(gen_widths); ++i) {
        layers.push_back({"dense", "gen_fc" + std::to_string(i + 1), 0, 0, 0, 0,
                          gen_widths[i][0], gen_widths[i][1]});
    }
    layers.push_back({"embedding", "disc_embed", 0, 0, 0, 0, kNumClasses, kLabelEmbedDim});
    const int disc_widths[][2] = {{900, 800}, {800, 512}, {512, 512}, {512, 256}, {256, 256},
                                  {256, 128}, {128, 128}, {128, 64},  {64, 64},   {64, 1}};
    for (std::size_t i = 0; i < std::size(disc_widths); ++i) {
        layers.push_back({"dense", "disc_fc" + std::to_string(i + 1), 0, 0, 0, 0,
                          disc_widths[i][0], disc_widths[i][1]});
    }
    return layers;
}

void write_flops_json(const std::filesystem::path& path,
                      const std::vector<FlopsReport>& reports) {
    nlohmann::json j;
    auto list = nlohmann::json::array();
    for (const auto& report : reports) {
        nlohmann::json r;
        r["network"] = report.network;
        auto layers = nlohmann::json::array();
        for (const auto& layer : report.layers) {
            layers.push_back({{"name", layer.name},
                              {"flops", layer.flops},
                              {"flops_2d_literal", layer.flops_2d_literal},
                              {"params_strict", layer.params_strict},
                              {"params_featuremap", layer.params_featuremap}});
        }
        r["layers"] = std::move(layers);
        r["total_flops"] = report.total_flops;
        r["total_flops_2d_literal"] = report.total_flops_2d_literal;
        r["total_params_strict"] = report.total_params_strict;
        r["total_params_featuremap"] = report.total_params_featuremap;
        list.push_back(std::move(r));
    }
    j["reports"] = std::move(list);
    // Published totals for the same architecture family, for side-by-side
    // comparison only.
    j["reference_values"] = {{"cgan_1dcnn_flops", 0.24e9}, {"cgan_1dcnn_params", 4.97e6}};

    AtomicFileWriter writer(path);
    writer.stream() << j.dump(2) << "\n";
    writer.commit();
}

}  // namespace jamsig
