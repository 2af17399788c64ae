#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jamsig/cgan.hpp"
#include "jamsig/cnn.hpp"
#include "jamsig/dsp.hpp"
#include "jamsig/tsne.hpp"

namespace jamsig {

struct DatasetManifest {
    std::vector<std::string> classes;
    int train_per_class = 100;
    int test_per_class = 400;
    std::vector<double> jnr_grid;  // dB values samples draw from uniformly
    std::uint64_t global_seed = 0;
    NormStats stats{};
    std::string train_file;  // relative to the manifest's directory
    std::string test_file;

    void validate() const;
};

std::vector<double> default_jnr_grid();  // -20..20 dB, step 5

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Synthesizes train/test spectra for all classes into out_dir (train.jspc,
// test.jspc, manifest.json). JNR per sample is drawn uniformly from the grid;
// NormStats fit on the train split only. Deterministic from global_seed.
DatasetManifest build_dataset(const std::filesystem::path& out_dir, int train_per_class,
                              int test_per_class, const std::vector<double>& jnr_grid,
                              std::uint64_t global_seed,
                              const std::function<void(int, int)>& on_progress = {});

struct LoadedDataset {
    DatasetManifest manifest;
    SpectrumDataset train;
    SpectrumDataset test;
};
LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

// Subset request: shots > 0 selects an absolute per-class count, otherwise
// fraction of the available per-class rows (rounded to nearest, min 1).
struct SubsetSpec {
    double fraction = 1.0;
    int shots = 0;

    std::string label() const;  // CSV tag: "1.0" / "0.1" / "3-shot"
};

// Balanced per-class sample without replacement. Per seed, smaller subsets
// are prefixes of larger ones (nested consistency).
SpectrumDataset subset_split(const SpectrumDataset& train, const SubsetSpec& spec,
                             std::uint64_t seed);

struct CellConfig {
    SubsetSpec subset;
    bool augment = true;
    std::uint64_t seed = 0;
    int gan_epochs = 0;  // 0 = 3200, dropping to 800 when the subset has <= 10/class
    int cnn_epochs = 100;
    std::vector<double> jnr_filter;  // empty = evaluate on every test row
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted] counts
    int total = 0;
};

struct CellResult {
    EvalResult eval;
    GanHistory gan_history;                 // empty when the GAN stage was skipped
    bool gan_ran = false;
    std::vector<SpectrumVector> subset_rows;     // dB domain
    std::vector<SpectrumVector> synthetic_rows;  // dB domain, 4x subset per class
};

int resolve_gan_epochs(int requested, int per_class_count);

// subset -> (GAN -> 4x synthetic unless augment = false) -> CNN -> evaluate.
CellResult run_cell(const SpectrumDataset& train, const SpectrumDataset& test,
                    const CellConfig& cfg);

Tensor rows_to_tensor(const std::vector<SpectrumVector>& rows, const NormStats& stats);
std::vector<int> rows_labels(const std::vector<SpectrumVector>& rows);

EvalResult evaluate_spectra(CnnNet& net, const Tensor& data, const std::vector<int>& labels);

struct SweepConfig {
    std::vector<double> fractions = {1.0, 0.5, 0.3, 0.1};
    std::vector<int> shots;  // when non-empty, replaces the fraction axis
    int repetitions = 3;     // seeds 1..repetitions
    bool with_ablation = true;
    std::vector<double> jnr_grid;  // evaluation points; empty = manifest grid
    int gan_epochs = 0;
    int cnn_epochs = 100;
    int jobs = 1;

    void validate() const;
};

struct SweepRow {
    std::string subset;
    double jnr_db = 0.0;
    std::uint64_t seed = 0;
    bool augmented = false;
    double accuracy = 0.0;
};

// Cartesian product of subset x ablation x seed cells, each evaluated at every
// grid JNR. When flush_path is set, completed rows are rewritten to it after
// every cell so failures keep partial results.
std::vector<SweepRow> run_sweep(const SpectrumDataset& train, const SpectrumDataset& test,
                                const SweepConfig& cfg,
                                const std::filesystem::path& flush_path = {},
                                const std::function<void(const std::string&)>& on_cell = {});

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_sweep_curves_svg(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows);
void write_confusion_csv(const std::filesystem::path& path,
                         const std::vector<std::vector<int>>& confusion);

struct ProjectionResult {
    Tensor coords;  // {n, 2}
    std::vector<int> class_ids;
    std::vector<bool> synthetic;
};

ProjectionResult tsne_project(const std::vector<SpectrumVector>& real,
                              const std::vector<SpectrumVector>& synthetic,
                              const TsneConfig& cfg = {});
void write_projection_csv(const std::filesystem::path& path, const ProjectionResult& result);
void write_projection_svg(const std::filesystem::path& path, const ProjectionResult& result,
                          const std::string& title);

// Per-class ratio of real-to-synthetic centroid distance over the smallest
// real-to-real inter-centroid distance, in the 800-dim feature space.
std::vector<double> cluster_overlap(const std::vector<SpectrumVector>& real,
                                    const std::vector<SpectrumVector>& synthetic);

struct LayerSpec {
    std::string kind;  // "conv1d" | "dense"
    std::string name;
    int c_in = 0, c_out = 0, kernel = 0, m_out = 0;  // conv1d
    int in = 0, out = 0;                             // dense
};

struct LayerFlops {
    std::string name;
    long long flops = 0;             // 1-D adapted: M*K*C_in*C_out, dense in*out
    long long flops_2d_literal = 0;  // M^2*K^2*C_in*C_out as printed in the source text
    long long params_strict = 0;     // weights + biases
    long long params_featuremap = 0;      // kernel terms + feature-map terms
};

struct FlopsReport {
    std::string network;
    std::vector<LayerFlops> layers;
    long long total_flops = 0;
    long long total_flops_2d_literal = 0;
    long long total_params_strict = 0;
    long long total_params_featuremap = 0;
};

FlopsReport count_flops(const std::string& network, const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> cnn_layer_specs();
std::vector<LayerSpec> cgan_layer_specs();
void write_flops_json(const std::filesystem::path& path,
                      const std::vector<FlopsReport>& reports);

}  // namespace jamsig
