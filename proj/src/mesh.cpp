#include "fracfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fracfem {

double Mesh1D::ext_radius() const { return std::max(-nodes.front(), nodes.back()); }

bool Mesh1D::is_uniform() const {
  if (n_elements() < 1) return false;
  const double h0 = elem_len(0);
  for (int e = 1; e < n_elements(); ++e)
    if (std::fabs(elem_len(e) - h0) > 1e-12 * h0) return false;
  return true;
}

double TriMesh2D::tri_area(int t) const {
  const auto& p0 = points[triangles[t][0]];
  const auto& p1 = points[triangles[t][1]];
  const auto& p2 = points[triangles[t][2]];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double TriMesh2D::tri_diameter(int t) const {
  double d = 0;
  for (int k = 0; k < 3; ++k) {
    const auto& a = points[triangles[t][k]];
    const auto& b = points[triangles[t][(k + 1) % 3]];
    d = std::max(d, std::hypot(a[0] - b[0], a[1] - b[1]));
  }
  return d;
}

Mesh1D build_mesh_1d(double omega_a, double omega_b, double H, double h) {
  if (!(omega_b > omega_a)) throw std::invalid_argument("build_mesh_1d: empty omega interval");
  if (!(H > 0)) throw std::invalid_argument("build_mesh_1d: H must be positive");
  if (!(h > 0) || h >= omega_b - omega_a)
    throw std::invalid_argument("build_mesh_1d: h must satisfy 0 < h < |omega|");

  const int n_in = static_cast<int>(std::ceil((omega_b - omega_a) / h - 1e-9));
  const int n_out = static_cast<int>(std::ceil(H / h - 1e-9));
  const double h_in = (omega_b - omega_a) / n_in;
  const double h_out = H / n_out;

  Mesh1D m;
  m.omega_a = omega_a;
  m.omega_b = omega_b;
  m.ext_distance = H;
  m.nodes.reserve(n_in + 2 * n_out + 1);
  for (int i = 0; i <= n_out; ++i) m.nodes.push_back(omega_a - H + i * h_out);
  m.nodes.back() = omega_a;
  for (int i = 1; i <= n_in; ++i) m.nodes.push_back(omega_a + i * h_in);
  m.nodes.back() = omega_b;
  for (int i = 1; i <= n_out; ++i) m.nodes.push_back(omega_b + i * h_out);
  m.nodes.back() = omega_b + H;

  m.elem_region.resize(m.n_elements());
  m.first_omega_elem = n_out;
  m.end_omega_elem = n_out + n_in;
  for (int e = 0; e < m.n_elements(); ++e)
    m.elem_region[e] = (e >= m.first_omega_elem && e < m.end_omega_elem) ? Region::omega
                                                                         : Region::exterior;
  m.node_region.resize(m.n_nodes());
  for (int i = 0; i < m.n_nodes(); ++i) {
    const double x = m.nodes[i];
    if (x == omega_a || x == omega_b) m.node_region[i] = NodeRegion::boundary;
    else if (x > omega_a && x < omega_b) m.node_region[i] = NodeRegion::interior;
    else m.node_region[i] = NodeRegion::exterior;
  }
  return m;
}

namespace {

constexpr int kCoreCount = 8;

int angular_count(double r, double target, int prev_m) {
  // counts are kCoreCount * 2^m so that ring transitions double or halve
  double ideal = 2.0 * std::numbers::pi * r / std::max(target, 1e-300);
  int m = static_cast<int>(std::lround(std::log2(std::max(ideal / kCoreCount, 1.0))));
  m = std::max(m, 0);
  if (prev_m >= 0) m = std::clamp(m, prev_m - 1, prev_m + 1);
  return m;
}

} // namespace

TriMesh2D build_disk_mesh_2d(double r_omega, double r_ext, double h_omega,
                             double grading_exponent) {
  if (!(r_omega > 0) || !(r_ext > r_omega))
    throw std::invalid_argument("build_disk_mesh_2d: need 0 < r_omega < r_ext");
  if (!(h_omega > 0) || !(h_omega < r_omega))
    throw std::invalid_argument("build_disk_mesh_2d: need 0 < h_omega < r_omega");
  if (grading_exponent < 0)
    throw std::invalid_argument("build_disk_mesh_2d: grading exponent must be >= 0");

  // radial schedule: uniform inside omega, graded outside, ending exactly at r_ext
  std::vector<double> radii;
  const int n_in = std::max(2, static_cast<int>(std::lround(r_omega / h_omega)));
  const double dr_in = r_omega / n_in;
  for (int i = 1; i <= n_in; ++i) radii.push_back(i * dr_in);
  double r = r_omega;
  double w_prev = dr_in;
  while (r < r_ext - 1e-12 * r_ext) {
    const double dist = r - r_omega;
    double w = std::max(h_omega, h_omega * std::pow(dist, grading_exponent));
    w = std::min(w, 2.2 * w_prev);        // keep neighboring ring widths comparable
    w = std::min(w, std::max(0.75 * r, h_omega));
    if (r + 1.5 * w >= r_ext) w = r_ext - r;
    r += w;
    radii.push_back(r);
    w_prev = w;
  }
  radii.back() = r_ext;

  TriMesh2D mesh;
  mesh.r_omega = r_omega;
  mesh.ext_radius = r_ext;
  mesh.points.push_back({0.0, 0.0});

  // ring node layout; counts change only by factors of two between rings
  std::vector<int> ring_start(radii.size()), ring_count(radii.size());
  int prev_m = -1;
  for (size_t j = 0; j < radii.size(); ++j) {
    const double width = (j == 0) ? radii[0] : radii[j] - radii[j - 1];
    const int m = angular_count(radii[j], width, prev_m);
    prev_m = m;
    const int n = kCoreCount << m;
    ring_start[j] = static_cast<int>(mesh.points.size());
    ring_count[j] = n;
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      mesh.points.push_back({radii[j] * std::cos(th), radii[j] * std::sin(th)});
    }
  }

  auto add_tri = [&mesh](int a, int b, int c, Region reg) {
    mesh.triangles.push_back({a, b, c});
    mesh.label.push_back(reg);
    if (mesh.tri_area(static_cast<int>(mesh.triangles.size()) - 1) <= 0.0)
      std::swap(mesh.triangles.back()[1], mesh.triangles.back()[2]);
  };

  // center fan
  for (int k = 0; k < ring_count[0]; ++k)
    add_tri(0, ring_start[0] + k, ring_start[0] + (k + 1) % ring_count[0], Region::omega);

  for (size_t j = 0; j + 1 < radii.size(); ++j) {
    const int ni = ring_count[j], no = ring_count[j + 1];
    const int si = ring_start[j], so = ring_start[j + 1];
    const Region reg = (radii[j + 1] <= r_omega * (1 + 1e-12)) ? Region::omega : Region::exterior;
    if (no == ni) {
      for (int k = 0; k < ni; ++k) {
        const int k1 = (k + 1) % ni;
        add_tri(si + k, so + k, so + k1, reg);
        add_tri(si + k, so + k1, si + k1, reg);
      }
    } else if (no == 2 * ni) {
      for (int k = 0; k < ni; ++k) {
        const int k1 = (k + 1) % ni;
        add_tri(si + k, so + 2 * k, so + 2 * k + 1, reg);
        add_tri(si + k, so + 2 * k + 1, si + k1, reg);
        add_tri(si + k1, so + 2 * k + 1, so + (2 * k + 2) % no, reg);
      }
    } else if (2 * no == ni) {
      for (int k = 0; k < no; ++k) {
        const int k1 = (k + 1) % no;
        add_tri(si + 2 * k, so + k, si + 2 * k + 1, reg);
        add_tri(si + 2 * k + 1, so + k, so + k1, reg);
        add_tri(si + 2 * k + 1, so + k1, si + (2 * k + 2) % ni, reg);
      }
    } else {
      throw std::runtime_error("build_disk_mesh_2d: inconsistent ring counts");
    }
  }

  mesh.omega_area = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (mesh.tri_in_omega(t)) mesh.omega_area += mesh.tri_area(t);
  return mesh;
}

MeshStats mesh_stats(const Mesh1D& mesh) {
  MeshStats st;
  st.n_nodes = mesh.n_nodes();
  st.shape_ratio = 1.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    st.h_max = std::max(st.h_max, mesh.elem_len(e));
    if (mesh.elem_in_omega(e)) st.omega_measure += mesh.elem_len(e);
  }
  return st;
}

MeshStats mesh_stats(const TriMesh2D& mesh) {
  MeshStats st;
  st.n_nodes = mesh.n_nodes();
  st.omega_measure = mesh.omega_area;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double area = mesh.tri_area(t);
    const double diam = mesh.tri_diameter(t);
    double perim = 0;
    for (int k = 0; k < 3; ++k) {
      const auto& a = mesh.points[mesh.triangles[t][k]];
      const auto& b = mesh.points[mesh.triangles[t][(k + 1) % 3]];
      perim += std::hypot(a[0] - b[0], a[1] - b[1]);
    }
    const double rho = 4.0 * area / perim; // diameter of inscribed circle
    st.h_max = std::max(st.h_max, diam);
    st.shape_ratio = std::max(st.shape_ratio, diam / rho);
  }
  return st;
}

bool check_conformity(const TriMesh2D& mesh, std::string* why) {
  std::map<std::pair<int, int>, int> edge_count;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (mesh.tri_area(t) <= 1e-14 * mesh.tri_diameter(t) * mesh.tri_diameter(t)) {
      if (why) *why = "degenerate triangle " + std::to_string(t);
      return false;
    }
    for (int k = 0; k < 3; ++k) {
      int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_count[{a, b}]++;
    }
  }
  for (const auto& [edge, cnt] : edge_count) {
    if (cnt > 2) {
      if (why)
        *why = "edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
               ") shared by " + std::to_string(cnt) + " triangles";
      return false;
    }
  }
  return true;
}

void save_mesh_text(const Mesh1D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "POINTS " << mesh.n_nodes() << "\n";
  for (double x : mesh.nodes) out << x << "\n";
  out << "CELLS " << mesh.n_elements() << "\n";
  for (int e = 0; e < mesh.n_elements(); ++e) out << e << " " << e + 1 << "\n";
  out << "LABELS " << mesh.n_elements() << "\n";
  for (int e = 0; e < mesh.n_elements(); ++e)
    out << (mesh.elem_in_omega(e) ? "omega" : "exterior") << "\n";
}

void save_mesh_text(const TriMesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "POINTS " << mesh.n_nodes() << "\n";
  for (const auto& p : mesh.points) out << p[0] << " " << p[1] << "\n";
  out << "CELLS " << mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "LABELS " << mesh.n_triangles() << "\n";
  for (auto l : mesh.label) out << (l == Region::omega ? "omega" : "exterior") << "\n";
}

namespace {

void expect_section(std::istream& in, const std::string& name, int& count) {
  std::string tok;
  if (!(in >> tok >> count) || tok != name)
    throw std::runtime_error("mesh file: expected section " + name);
}

} // namespace

Mesh1D load_mesh_text_1d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  int np = 0, nc = 0, nl = 0;
  expect_section(in, "POINTS", np);
  Mesh1D m;
  m.nodes.resize(np);
  for (auto& x : m.nodes) in >> x;
  expect_section(in, "CELLS", nc);
  for (int e = 0; e < nc; ++e) {
    int a, b;
    in >> a >> b;
    if (a != e || b != e + 1) throw std::runtime_error("mesh file: 1d cells must be consecutive");
  }
  expect_section(in, "LABELS", nl);
  if (nl != nc) throw std::runtime_error("mesh file: label count mismatch");
  m.elem_region.resize(nc);
  m.first_omega_elem = -1;
  for (int e = 0; e < nc; ++e) {
    std::string lab;
    in >> lab;
    m.elem_region[e] = (lab == "omega") ? Region::omega : Region::exterior;
    if (m.elem_region[e] == Region::omega) {
      if (m.first_omega_elem < 0) m.first_omega_elem = e;
      m.end_omega_elem = e + 1;
    }
  }
  if (m.first_omega_elem < 0) throw std::runtime_error("mesh file: no omega cells");
  m.omega_a = m.nodes[m.first_omega_elem];
  m.omega_b = m.nodes[m.end_omega_elem];
  m.ext_distance = std::max(m.omega_a - m.nodes.front(), m.nodes.back() - m.omega_b);
  m.node_region.resize(np);
  for (int i = 0; i < np; ++i) {
    const double x = m.nodes[i];
    if (x == m.omega_a || x == m.omega_b) m.node_region[i] = NodeRegion::boundary;
    else if (x > m.omega_a && x < m.omega_b) m.node_region[i] = NodeRegion::interior;
    else m.node_region[i] = NodeRegion::exterior;
  }
  return m;
}

TriMesh2D load_mesh_text_2d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  int np = 0, nc = 0, nl = 0;
  expect_section(in, "POINTS", np);
  TriMesh2D m;
  m.points.resize(np);
  for (auto& p : m.points) in >> p[0] >> p[1];
  expect_section(in, "CELLS", nc);
  m.triangles.resize(nc);
  for (auto& t : m.triangles) in >> t[0] >> t[1] >> t[2];
  expect_section(in, "LABELS", nl);
  if (nl != nc) throw std::runtime_error("mesh file: label count mismatch");
  m.label.resize(nc);
  m.omega_area = 0;
  for (int t = 0; t < nc; ++t) {
    std::string lab;
    in >> lab;
    m.label[t] = (lab == "omega") ? Region::omega : Region::exterior;
    if (m.label[t] == Region::omega) m.omega_area += m.tri_area(t);
  }
  for (int t = 0; t < nc; ++t)
    if (m.label[t] == Region::omega)
      for (int v : m.triangles[t])
        m.r_omega = std::max(m.r_omega, std::hypot(m.points[v][0], m.points[v][1]));
  for (const auto& p : m.points) m.ext_radius = std::max(m.ext_radius, std::hypot(p[0], p[1]));
  return m;
}

} // namespace fracfem
