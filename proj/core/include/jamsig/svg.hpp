#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace jamsig {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    int class_id = 0;
    bool synthetic = false;  // synthetic points render hollow
};

// 2-d scatter with one color per class; class_names drives the legend.
void write_scatter_svg(const std::filesystem::path& path,
                       const std::vector<ScatterPoint>& points,
                       const std::vector<std::string>& class_names, const std::string& title);

// Row-normalized confusion heatmap; matrix[t][p] in [0, 1], true rows.
void write_confusion_svg(const std::filesystem::path& path,
                         const std::vector<std::vector<double>>& matrix,
                         const std::vector<std::string>& class_names, const std::string& title);

struct CurveSeries {
    std::string name;
    std::vector<double> values;  // plotted against index
};

void write_curves_svg(const std::filesystem::path& path, const std::vector<CurveSeries>& series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label);

}  // namespace jamsig
