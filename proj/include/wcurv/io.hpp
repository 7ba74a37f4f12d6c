#pragma once

// CSV files for fields, geometry and monitor histories.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wcurv/errors.hpp"
#include "wcurv/estimate_monitor.hpp"
#include "wcurv/hypersurface_geometry.hpp"
#include "wcurv/sphere_mesh.hpp"

namespace wcurv {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

inline std::string field_csv(const ScalarField& field) {
  const SphereMesh& mesh = field.mesh();
  std::string s = "theta,phi,value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    s += format_number(mesh.theta(i)) + "," + format_number(mesh.phi(i)) + "," + format_number(field[i]) + "\n";
  }
  return s;
}

inline std::string geometry_csv(const GraphGeometry& geo) {
  const SphereMesh& mesh = *geo.mesh;
  std::string s = "theta,phi,r,v,H,kappa1,kappa2,mu1,mu2,tau\n";
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const NodeGeometry& ng = geo.nodes[i];
    const double cols[] = {mesh.theta(i), mesh.phi(i), ng.r,        ng.v,      ng.H,
                           ng.kappa[0],   ng.kappa[1], ng.mu[0],    ng.mu[1],  ng.tau};
    for (std::size_t c = 0; c < std::size(cols); ++c) s += (c ? "," : "") + format_number(cols[c]);
    s += "\n";
  }
  return s;
}

inline std::string monitor_csv(const std::vector<MonitorRecord>& records) {
  std::string s = "t,r_min,r_max,tau_min,grad_max,kappa_max\n";
  for (const MonitorRecord& m : records) {
    s += format_number(m.t) + "," + format_number(m.r_min) + "," + format_number(m.r_max) + "," +
         format_number(m.tau_min) + "," + format_number(m.grad_max) + "," + format_number(m.kappa_max) + "\n";
  }
  return s;
}

// Reads theta,phi,value rows written on a staggered mesh (any row order).
// A single distinct phi means a reduced mesh.
inline ScalarField read_field_csv(const std::string& path, int order = 0) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  std::vector<std::array<double, 3>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find("theta") != std::string::npos) continue;
    std::array<double, 3> row{};
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(ss, cell, ',')) throw Error(path + ":" + std::to_string(lineno) + ": expected 3 columns");
      char* end = nullptr;
      row[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw Error(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw Error(path + ": no data rows");

  auto distinct = [&](int c) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[c]);
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
      if (out.empty() || x - out.back() > 1e-9) out.push_back(x);
    }
    return out;
  };
  const std::vector<double> thetas = distinct(0), phis = distinct(1);
  const int nt = static_cast<int>(thetas.size()), np = static_cast<int>(phis.size());
  if (static_cast<std::size_t>(nt) * np != rows.size()) throw Error(path + ": rows do not form a tensor grid");
  const bool reduced = np == 1;
  const MeshPtr mesh = SphereMesh::build(nt, reduced ? 1 : np, reduced, order);
  std::vector<double> values(mesh->size());
  std::vector<bool> seen(mesh->size(), false);
  for (const auto& r : rows) {
    const int j = static_cast<int>(std::lround(r[0] / mesh->d_theta() - 0.5));
    const int m = reduced ? 0 : static_cast<int>(std::lround(r[1] / mesh->d_phi()));
    if (j < 0 || j >= nt || m < 0 || m >= mesh->n_phi() || std::abs(mesh->theta_at(j) - r[0]) > 1e-9 ||
        std::abs(mesh->phi_at(m) - r[1]) > 1e-9) {
      throw Error(path + ": point (" + format_number(r[0]) + ", " + format_number(r[1]) +
                  ") is not a staggered mesh node");
    }
    const std::size_t idx = mesh->index(j, m);
    if (seen[idx]) throw Error(path + ": duplicate node");
    seen[idx] = true;
    values[idx] = r[2];
  }
  return ScalarField(mesh, std::move(values));
}

}  // namespace wcurv
