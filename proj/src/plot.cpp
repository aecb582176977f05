#include "ugmae/plot.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdio>
#include <limits>

#include "ugmae/error.hpp"

namespace ugmae {

Projection parse_projection(std::string_view name) {
  if (name == "pca") return Projection::kPca;
  if (name == "identity") return Projection::kIdentity;
  throw Error(ErrorKind::kConfigError, "unknown projection '" + std::string(name) + "'");
}

Mat pca_project(const Mat& x, int dims) {
  if (dims < 1 || dims > x.cols()) throw Error(ErrorKind::kShapeMismatch, "cannot project onto that many axes");
  const Mat centered = x.rowwise() - x.colwise().mean();
  const Mat cov = centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(x.rows() - 1));
  Eigen::SelfAdjointEigenSolver<Mat> solver(cov);
  // Eigenvalues come out ascending.
  Mat axes = solver.eigenvectors().rightCols(dims).rowwise().reverse();
  for (Index j = 0; j < axes.cols(); ++j) {
    Index top = 0;
    axes.col(j).cwiseAbs().maxCoeff(&top);
    if (axes(top, j) < 0) axes.col(j) *= -1.0;
  }
  return centered * axes;
}

Mat project_2d(const Mat& x, Projection projection) {
  if (projection == Projection::kIdentity) {
    if (x.cols() != 2) throw Error(ErrorKind::kShapeMismatch, "identity projection needs 2-dimensional embeddings");
    return x;
  }
  return pca_project(x, 2);
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr double kWidth = 640, kHeight = 480, kMargin = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double sx(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double sy(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

Frame frame_for(double x0, double x1, double y0, double y1) {
  auto widen = [](double& lo, double& hi) {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  };
  widen(x0, x1);
  widen(y0, y1);
  return {x0, x1, y0, y1};
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + num(kWidth / 2) +
         "\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + escape(title) +
         "</text>\n";
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string s = "<g stroke=\"black\" fill=\"none\"><rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) +
                  "\" width=\"" + num(kWidth - 2 * kMargin) + "\" height=\"" + num(kHeight - 2 * kMargin) +
                  "\"/></g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + num(f.sx(xv)) + "\" y=\"" + num(kHeight - kMargin + 16) + "\" text-anchor=\"middle\">" +
         num(xv) + "</text>\n";
    s += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(f.sy(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
       escape(x_label) + "</text>\n";
  s += "<text x=\"15\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
       num(kHeight / 2) + ")\">" + escape(y_label) + "</text>\n</g>\n";
  return s;
}

}  // namespace

std::string scatter_svg(const Mat& xy, const std::vector<int>& labels, const std::string& title) {
  if (xy.cols() != 2 || static_cast<std::size_t>(xy.rows()) != labels.size())
    throw Error(ErrorKind::kShapeMismatch, "scatter needs n x 2 coordinates and n labels");
  const Frame f = xy.rows() ? frame_for(xy.col(0).minCoeff(), xy.col(0).maxCoeff(), xy.col(1).minCoeff(),
                                        xy.col(1).maxCoeff())
                            : frame_for(0, 1, 0, 1);
  std::string s = header(title) + axes(f, "component 1", "component 2");
  for (Index i = 0; i < xy.rows(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    const char* colour = kPalette[static_cast<std::size_t>(((label % 10) + 10) % 10)];
    s += "<circle cx=\"" + num(f.sx(xy(i, 0))) + "\" cy=\"" + num(f.sy(xy(i, 1))) + "\" r=\"3\" fill=\"" + colour +
         "\" fill-opacity=\"0.8\"/>\n";
  }
  return s + "</svg>\n";
}

std::string line_svg(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& err,
                     const std::string& x_label, const std::string& y_label, const std::string& title) {
  if (x.size() != y.size() || err.size() != y.size()) throw Error(ErrorKind::kShapeMismatch, "series lengths differ");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < y.size(); ++i) {
    lo = std::min(lo, y[i] - err[i]);
    hi = std::max(hi, y[i] + err[i]);
  }
  const Frame f = x.empty() ? frame_for(0, 1, 0, 1)
                            : frame_for(*std::min_element(x.begin(), x.end()), *std::max_element(x.begin(), x.end()),
                                        lo, hi);
  std::string s = header(title) + axes(f, x_label, y_label);
  if (!x.empty()) {
    s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) s += num(f.sx(x[i])) + "," + num(f.sy(y[i])) + " ";
    s += "\"/>\n";
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += "<line x1=\"" + num(f.sx(x[i])) + "\" x2=\"" + num(f.sx(x[i])) + "\" y1=\"" + num(f.sy(y[i] - err[i])) +
         "\" y2=\"" + num(f.sy(y[i] + err[i])) + "\" stroke=\"#1f77b4\"/>\n";
    s += "<circle cx=\"" + num(f.sx(x[i])) + "\" cy=\"" + num(f.sy(y[i])) + "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  }
  return s + "</svg>\n";
}

}  // namespace ugmae
