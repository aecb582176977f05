#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ugmae/parameters.hpp"

namespace ugmae {

enum class Projection { kPca, kIdentity };
Projection parse_projection(std::string_view name);

/// Rows of x projected onto the top `dims` principal axes of the centred
/// data. Each axis is signed so its largest-magnitude loading is positive.
Mat pca_project(const Mat& x, int dims = 2);

/// kIdentity requires exactly two columns and returns x unchanged.
Mat project_2d(const Mat& x, Projection projection);

/// Static SVG scatter plot, one colour per label.
std::string scatter_svg(const Mat& xy, const std::vector<int>& labels, const std::string& title);

/// Static SVG line plot with +-err whiskers.
std::string line_svg(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& err,
                     const std::string& x_label, const std::string& y_label, const std::string& title);

}  // namespace ugmae
