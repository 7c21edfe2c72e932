#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace fracfem {

enum class Region : unsigned char { omega = 0, exterior = 1 };
enum class NodeRegion : unsigned char { interior = 0, boundary = 1, exterior = 2 };

/// Conforming partition of Lambda = [a-H, b+H] meshing Omega = (a,b) exactly.
struct Mesh1D {
  std::vector<double> nodes;            // strictly increasing
  double omega_a = 0, omega_b = 0;      // Omega = (omega_a, omega_b)
  double ext_distance = 0;              // H: Lambda extends H beyond each side of Omega
  std::vector<Region> elem_region;      // per element (consecutive node pair)
  std::vector<NodeRegion> node_region;

  int n_elements() const { return static_cast<int>(nodes.size()) - 1; }
  int n_nodes() const { return static_cast<int>(nodes.size()); }
  double elem_lo(int e) const { return nodes[e]; }
  double elem_hi(int e) const { return nodes[e + 1]; }
  double elem_len(int e) const { return nodes[e + 1] - nodes[e]; }
  bool elem_in_omega(int e) const { return elem_region[e] == Region::omega; }
  double lambda_lo() const { return nodes.front(); }
  double lambda_hi() const { return nodes.back(); }
  double ext_radius() const;   // outer radius of Lambda (half-width for symmetric Omega)
  bool is_uniform() const;
  int first_omega_elem = 0, end_omega_elem = 0; // omega elements form [first, end)
};

/// Conforming triangulation of Lambda = B(0, r_ext) with the polygonal disk of
/// radius r_omega meshed exactly by whole, omega-labeled triangles.
struct TriMesh2D {
  std::vector<std::array<double, 2>> points;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<Region> label;
  double r_omega = 0;
  double ext_radius = 0;   // R_Lambda
  double omega_area = 0;   // area of the inscribed polygon approximating Omega

  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_nodes() const { return static_cast<int>(points.size()); }
  double tri_area(int t) const;
  double tri_diameter(int t) const;
  bool tri_in_omega(int t) const { return label[t] == Region::omega; }
};

struct MeshStats {
  double h_max = 0;
  int n_nodes = 0;
  double omega_measure = 0;
  double shape_ratio = 0;
};

/// Uniform-by-parts 1D mesh: spacing <= h on Omega with nodes exactly at its
/// endpoints, spacing <= h on the exterior out to distance H.
Mesh1D build_mesh_1d(double omega_a, double omega_b, double H, double h);

/// Concentric-ring disk triangulation. Interior target size h_omega; exterior
/// ring widths grow like max(h, h * dist^grading_exponent).
TriMesh2D build_disk_mesh_2d(double r_omega, double r_ext, double h_omega,
                             double grading_exponent);

MeshStats mesh_stats(const Mesh1D& mesh);
MeshStats mesh_stats(const TriMesh2D& mesh);

/// Every interior edge shared by exactly two triangles, all areas positive.
bool check_conformity(const TriMesh2D& mesh, std::string* why = nullptr);

/// Plain-text format: POINTS / CELLS / LABELS sections.
void save_mesh_text(const Mesh1D& mesh, const std::string& path);
void save_mesh_text(const TriMesh2D& mesh, const std::string& path);
Mesh1D load_mesh_text_1d(const std::string& path);
TriMesh2D load_mesh_text_2d(const std::string& path);

} // namespace fracfem
