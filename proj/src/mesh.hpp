#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stochbif {

enum class BoundaryTag { Inlet, Wall, Outlet };
enum class SymmetryMode { StructuredSymmetric, Unstructured };

std::string to_string(BoundaryTag tag);

// Sudden-expansion channel ([0, x_step] x [strip_lo, strip_hi]) joined to
// ([x_step, x_out] x [0, y_max]); the inlet strip carries the parabolic
// inflow and the symmetry axis sits at y_max / 2.
struct ChannelGeometry {
  double x_step = 10.0;
  double x_out = 50.0;
  double strip_lo = 2.5;
  double strip_hi = 5.0;
  double y_max = 7.5;

  double axis() const { return 0.5 * y_max; }
};

// Subdivision counts: nx1 columns along the inlet channel, nx2 along the
// expansion, m rows across the inlet strip (the outer strips get a matching
// spacing).
struct ChannelResolution {
  int nx1 = 0;
  int nx2 = 0;
  int m = 0;
};

struct ChannelMesh {
  struct BoundaryEdge {
    int n1;
    int n2;
    BoundaryTag tag;
  };

  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 4>> quads;  // counter-clockwise corner ids
  std::vector<BoundaryEdge> boundary;
  SymmetryMode mode = SymmetryMode::StructuredSymmetric;
  ChannelGeometry geometry;
  std::string preset;  // empty for custom meshes
  std::uint64_t jitter_seed = 0;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_quads() const { return static_cast<int>(quads.size()); }
};

// Deterministic mesh of the channel. Unstructured mode displaces interior
// nodes by a seeded jitter bounded by 10% of the local edge length;
// structured-symmetric mode is bitwise mirror-symmetric about the axis.
ChannelMesh build_channel_mesh(const ChannelGeometry& geometry, const ChannelResolution& resolution,
                               SymmetryMode mode, int refinement = 0,
                               std::uint64_t jitter_seed = 7291);

// Named presets: "symmetric" (935 nodes), "coarse-unstructured" (1275),
// "fine-unstructured" (1541).
ChannelMesh build_channel_mesh(const std::string& preset, int refinement = 0,
                               std::uint64_t jitter_seed = 7291);

const std::vector<std::string>& channel_mesh_presets();

// Parabolic inflow profile on the inlet strip.
Eigen::Vector2d inlet_profile(double x2, const ChannelGeometry& geometry = {});

// Plain-text mesh format with a bit-exact round trip:
//   nodes N quads M
//   N lines "x y", M lines of 4 node ids, then boundary edges "n1 n2 tag".
void write_mesh(const ChannelMesh& mesh, std::ostream& out);
ChannelMesh read_mesh(std::istream& in);
void write_mesh_file(const ChannelMesh& mesh, const std::string& path);
ChannelMesh read_mesh_file(const std::string& path);

}  // namespace stochbif
