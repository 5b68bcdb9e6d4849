#include "rlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "rlab/errors.hpp"
#include "rlab/log.hpp"
#include "rlab/parallel.hpp"

namespace rlab {

namespace {

// Volume of the unit n-ball.
Scalar unit_ball_volume(int n) {
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

DiscreteSurface DiscreteSurface::from_data(PointMatrix points,
                                           PointMatrix normals,
                                           Eigen::VectorXd weights) {
  const Index n = points.rows();
  const Index d = points.cols();
  if (n == 0) throw BadInput("empty point set");
  if (d < 2 || d > kMaxAmbientDim) {
    throw BadInput("ambient dimension " + std::to_string(d) +
                   " outside supported range [2, 8]");
  }
  if (normals.rows() != 0 &&
      (normals.rows() != n || normals.cols() != d)) {
    throw BadInput("normals shape does not match points");
  }
  if (weights.size() != n) throw BadInput("weights length does not match points");
  if (!points.allFinite()) throw BadInput("non-finite point coordinates");
  for (Index i = 0; i < n; ++i) {
    if (!(weights[i] > 0) || !std::isfinite(weights[i])) {
      throw BadInput("weight " + std::to_string(i) + " is not positive");
    }
  }
  if (normals.rows() != 0) {
    for (Index i = 0; i < n; ++i) {
      const Scalar len = normals.row(i).norm();
      if (std::abs(len - 1.0) > 1e-9) {
        throw BadInput("normal " + std::to_string(i) + " is not unit (|nu| = " +
                       std::to_string(len) + ")");
      }
    }
  }
  DiscreteSurface s;
  s.index_ = SpatialIndex(std::move(points));
  s.normals_ = std::move(normals);
  s.weights_ = std::move(weights);
  s.total_weight_ = s.weights_.sum();
  if (!std::isfinite(s.total_weight_)) throw BadInput("total weight not finite");
  return s;
}

DiscreteSurface DiscreteSurface::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadInput("cannot open input file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw BadInput("empty file: " + path);
  const auto cols = split_csv_line(header);

  int d = 0;
  while (d < static_cast<int>(cols.size()) &&
         cols[d] == "x" + std::to_string(d)) {
    ++d;
  }
  if (d < 2) throw BadInput("header must start with x0,x1,...: " + path);
  size_t pos = d;
  bool have_normals = false;
  if (pos < cols.size() && cols[pos] == "nu0") {
    for (int k = 0; k < d; ++k, ++pos) {
      if (pos >= cols.size() || cols[pos] != "nu" + std::to_string(k)) {
        throw BadInput("malformed normal columns in header: " + path);
      }
    }
    have_normals = true;
  }
  bool have_weights = false;
  if (pos < cols.size() && cols[pos] == "w") {
    have_weights = true;
    ++pos;
  }
  if (pos != cols.size()) throw BadInput("unexpected trailing columns: " + path);

  std::vector<Scalar> vals;
  std::string line;
  Index rows = 0;
  const size_t ncol = cols.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != ncol) {
      throw BadInput("row " + std::to_string(rows + 2) + " has " +
                     std::to_string(fields.size()) + " fields, expected " +
                     std::to_string(ncol));
    }
    for (const auto& f : fields) vals.push_back(std::stod(f));
    ++rows;
  }
  if (rows == 0) throw BadInput("no data rows in " + path);

  PointMatrix pts(rows, d);
  PointMatrix nus(have_normals ? rows : 0, have_normals ? d : 0);
  Eigen::VectorXd w(rows);
  for (Index i = 0; i < rows; ++i) {
    const Scalar* row = vals.data() + i * ncol;
    for (int k = 0; k < d; ++k) pts(i, k) = row[k];
    if (have_normals) {
      for (int k = 0; k < d; ++k) nus(i, k) = row[d + k];
    }
    w[i] = have_weights ? row[ncol - 1] : 1.0;
  }

  if (!have_weights) {
    // k-NN quadrature masses: w_i = vol_n(r_k(i)) / k with k = 8.
    const int k = 8;
    SpatialIndex idx(pts);
    const int n = d - 1;
    const Scalar wn = unit_ball_volume(n);
    Eigen::VectorXd west(rows);
    parallel_for(rows, [&](Index i) {
      const auto nn = idx.knn(idx.point(i), std::min<Index>(k + 1, rows));
      const Scalar rk = nn.back().first;  // includes the point itself at d=0
      west[i] = wn * std::pow(rk, n) / k;
    });
    w = west;
    RLAB_INFO("estimated weights from " << k << "-NN ball areas");
  }

  return from_data(std::move(pts), std::move(nus), std::move(w));
}

void DiscreteSurface::save_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw BadInput("cannot open output file: " + path);
  const int d = ambient_dim();
  std::string header;
  for (int k = 0; k < d; ++k) header += "x" + std::to_string(k) + ",";
  if (has_normals()) {
    for (int k = 0; k < d; ++k) header += "nu" + std::to_string(k) + ",";
  }
  header += "w\n";
  std::fputs(header.c_str(), f);
  for (Index i = 0; i < size(); ++i) {
    for (int k = 0; k < d; ++k) std::fprintf(f, "%.17g,", points()(i, k));
    if (has_normals()) {
      for (int k = 0; k < d; ++k) std::fprintf(f, "%.17g,", normals_(i, k));
    }
    std::fprintf(f, "%.17g\n", weights_[i]);
  }
  std::fclose(f);
}

Scalar DiscreteSurface::median_nn_spacing() const {
  if (median_nn_ >= 0) return median_nn_;
  const Index n = size();
  std::vector<Scalar> d(n);
  parallel_for(n, [&](Index i) {
    const auto nn = index_.knn(point(i), 2);
    d[i] = nn.size() > 1 ? nn[1].first : 0;
  });
  std::nth_element(d.begin(), d.begin() + n / 2, d.end());
  median_nn_ = d[n / 2];
  return median_nn_;
}

}  // namespace rlab
