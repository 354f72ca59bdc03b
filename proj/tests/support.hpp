#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shearlab/analysis.hpp"
#include "shearlab/grid.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/types.hpp"

namespace shearlab::testing {

inline ShearFlow zero_flow_table(Real t_max = 10.0, Real y_max = 12.0) {
  std::vector<Real> ts{0.0, t_max / 2, t_max};
  std::vector<Real> ys;
  for (int i = 0; i <= 32; ++i) ys.push_back(-y_max + 2 * y_max * i / 32.0);
  std::vector<std::vector<Real>> values(ts.size(), std::vector<Real>(ys.size(), 0.0));
  return tabulated_flow(ts, ys, values, "zero");
}

inline ShearFlow analytic_flow(std::function<Real(Real, Real)> v,
                               std::function<Real(Real, Real)> dy,
                               std::function<Real(Real, Real)> dyy,
                               std::function<Real(Real, Real)> dty, const std::string& name) {
  ShearFlow f;
  f.eval = std::move(v);
  f.d_y = std::move(dy);
  f.d_yy = std::move(dyy);
  f.d_ty = std::move(dty);
  f.name = name;
  return f;
}

inline Field dirichlet_random(const Grid& g, unsigned long long seed) {
  Field f = random_field(g, seed);
  if (g.boundary == BoundaryKind::Dirichlet) {
    f[0] = Complex(0, 0);
    f[g.n - 1] = Complex(0, 0);
  }
  return f;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = (std::filesystem::temp_directory_path() /
             ("shearlab_" + tag + "_" + std::to_string(counter_++)))
                .string();
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  static inline int counter_ = 0;
  std::string path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace shearlab::testing
