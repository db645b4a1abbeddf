#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace stochbif {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Inlet: return "inlet";
    case BoundaryTag::Wall: return "wall";
    case BoundaryTag::Outlet: return "outlet";
  }
  return "wall";
}

namespace {

BoundaryTag tag_from_string(const std::string& s) {
  if (s == "inlet") return BoundaryTag::Inlet;
  if (s == "outlet") return BoundaryTag::Outlet;
  if (s == "wall") return BoundaryTag::Wall;
  throw std::runtime_error("read_mesh: unknown boundary tag '" + s + "'");
}

// Bilinear jacobian determinant at a reference point.
double quad_jacobian(const ChannelMesh& mesh, const std::array<int, 4>& quad, double xi,
                     double eta) {
  const auto& p0 = mesh.nodes[quad[0]];
  const auto& p1 = mesh.nodes[quad[1]];
  const auto& p2 = mesh.nodes[quad[2]];
  const auto& p3 = mesh.nodes[quad[3]];
  const Eigen::Vector2d dxi = 0.25 * (-(1 - eta) * p0 + (1 - eta) * p1 + (1 + eta) * p2 - (1 + eta) * p3);
  const Eigen::Vector2d deta = 0.25 * (-(1 - xi) * p0 - (1 + xi) * p1 + (1 + xi) * p2 + (1 - xi) * p3);
  return dxi.x() * deta.y() - dxi.y() * deta.x();
}

void validate(const ChannelMesh& mesh) {
  const double gauss = std::sqrt(3.0 / 5.0);
  for (const auto& quad : mesh.quads) {
    for (double xi : {-gauss, 0.0, gauss})
      for (double eta : {-gauss, 0.0, gauss})
        if (quad_jacobian(mesh, quad, xi, eta) <= 0.0)
          throw std::runtime_error("build_channel_mesh: non-positive element jacobian");
  }
}

}  // namespace

Eigen::Vector2d inlet_profile(double x2, const ChannelGeometry& geometry) {
  if (x2 < geometry.strip_lo - 1e-12 || x2 > geometry.strip_hi + 1e-12)
    throw std::invalid_argument("inlet_profile: coordinate outside the inlet strip");
  return {20.0 * (geometry.strip_hi - x2) * (x2 - geometry.strip_lo), 0.0};
}

ChannelMesh build_channel_mesh(const ChannelGeometry& geometry, const ChannelResolution& resolution,
                               SymmetryMode mode, int refinement, std::uint64_t jitter_seed) {
  if (refinement < 0) throw std::invalid_argument("build_channel_mesh: refinement must be >= 0");
  if (geometry.x_step <= 0.0 || geometry.x_out <= geometry.x_step || geometry.strip_lo <= 0.0 ||
      geometry.strip_hi <= geometry.strip_lo || geometry.y_max <= geometry.strip_hi)
    throw std::invalid_argument("build_channel_mesh: degenerate channel geometry");
  if (resolution.nx1 < 1 || resolution.nx2 < 1 || resolution.m < 1)
    throw std::invalid_argument("build_channel_mesh: subdivision counts must be positive");

  const int scale = 1 << refinement;
  const int nx1 = resolution.nx1 * scale;
  const int nx2 = resolution.nx2 * scale;
  const int m = resolution.m * scale;

  const double dy_strip = (geometry.strip_hi - geometry.strip_lo) / m;
  const int n_low = std::max(1, static_cast<int>(std::lround(geometry.strip_lo / dy_strip)));
  const int n_up =
      std::max(1, static_cast<int>(std::lround((geometry.y_max - geometry.strip_hi) / dy_strip)));
  const int ny = n_low + m + n_up;

  // Vertical levels, constructed mirror-exact about the axis.
  std::vector<double> y(ny + 1);
  for (int j = 0; j <= ny; ++j) {
    if (j <= n_low)
      y[j] = (static_cast<double>(j) * geometry.strip_lo) / n_low;
    else if (j <= n_low + m)
      y[j] = geometry.strip_lo +
             (static_cast<double>(j - n_low) * (geometry.strip_hi - geometry.strip_lo)) / m;
    else
      y[j] = geometry.strip_hi +
             (static_cast<double>(j - n_low - m) * (geometry.y_max - geometry.strip_hi)) / n_up;
  }
  if (n_low == n_up) {
    // Snap the lower levels onto multiples of 2^-50 so that reflection about
    // the axis is exact in both directions, then mirror the upper half.
    for (int j = 0; 2 * j < ny; ++j) {
      y[j] = std::round(y[j] * 0x1p50) * 0x1p-50;
      y[ny - j] = geometry.y_max - y[j];
    }
    if (ny % 2 == 0) y[ny / 2] = geometry.axis();
  }

  ChannelMesh mesh;
  mesh.mode = mode;
  mesh.geometry = geometry;
  mesh.jitter_seed = jitter_seed;

  // Inlet-channel columns i < nx1, then the full expansion block (which owns
  // the shared column at x = x_step).
  const auto inlet_id = [&](int i, int j) { return i * (m + 1) + j; };
  const int expansion_base = nx1 * (m + 1);
  const auto exp_id = [&](int i, int j) { return expansion_base + i * (ny + 1) + j; };
  // Corner id with the inlet column nx1 folded onto the expansion block.
  const auto strip_id = [&](int i, int j) {
    return i < nx1 ? inlet_id(i, j) : exp_id(0, j + n_low);
  };

  for (int i = 0; i < nx1; ++i) {
    const double x = (static_cast<double>(i) * geometry.x_step) / nx1;
    for (int j = 0; j <= m; ++j) mesh.nodes.push_back({x, y[n_low + j]});
  }
  for (int i = 0; i <= nx2; ++i) {
    const double x =
        geometry.x_step + (static_cast<double>(i) * (geometry.x_out - geometry.x_step)) / nx2;
    for (int j = 0; j <= ny; ++j) mesh.nodes.push_back({x, y[j]});
  }

  for (int i = 0; i < nx1; ++i)
    for (int j = 0; j < m; ++j)
      mesh.quads.push_back(
          {strip_id(i, j), strip_id(i + 1, j), strip_id(i + 1, j + 1), strip_id(i, j + 1)});
  for (int i = 0; i < nx2; ++i)
    for (int j = 0; j < ny; ++j)
      mesh.quads.push_back({exp_id(i, j), exp_id(i + 1, j), exp_id(i + 1, j + 1), exp_id(i, j + 1)});

  for (int j = 0; j < m; ++j)
    mesh.boundary.push_back({inlet_id(0, j), inlet_id(0, j + 1), BoundaryTag::Inlet});
  for (int i = 0; i < nx1; ++i) {
    mesh.boundary.push_back({strip_id(i, 0), strip_id(i + 1, 0), BoundaryTag::Wall});
    mesh.boundary.push_back({strip_id(i, m), strip_id(i + 1, m), BoundaryTag::Wall});
  }
  for (int j = 0; j < n_low; ++j)
    mesh.boundary.push_back({exp_id(0, j), exp_id(0, j + 1), BoundaryTag::Wall});
  for (int j = n_low + m; j < ny; ++j)
    mesh.boundary.push_back({exp_id(0, j), exp_id(0, j + 1), BoundaryTag::Wall});
  for (int i = 0; i < nx2; ++i) {
    mesh.boundary.push_back({exp_id(i, 0), exp_id(i + 1, 0), BoundaryTag::Wall});
    mesh.boundary.push_back({exp_id(i, ny), exp_id(i + 1, ny), BoundaryTag::Wall});
  }
  for (int j = 0; j < ny; ++j)
    mesh.boundary.push_back({exp_id(nx2, j), exp_id(nx2, j + 1), BoundaryTag::Outlet});

  if (mode == SymmetryMode::Unstructured) {
    std::vector<bool> on_boundary(mesh.nodes.size(), false);
    for (const auto& edge : mesh.boundary) {
      on_boundary[edge.n1] = true;
      on_boundary[edge.n2] = true;
    }
    // Smallest incident edge length per node on the structured grid.
    const double dx1 = geometry.x_step / nx1;
    const double dx2 = (geometry.x_out - geometry.x_step) / nx2;
    std::vector<double> local(mesh.nodes.size(), dx2);
    for (int i = 0; i < nx1; ++i)
      for (int j = 0; j <= m; ++j) local[inlet_id(i, j)] = dx1;
    for (int j = 0; j <= ny; ++j) local[exp_id(0, j)] = std::min(dx1, dx2);
    for (size_t n = 0; n < mesh.nodes.size(); ++n) local[n] = std::min(local[n], dy_strip);

    RandomStream rng(jitter_seed);
    for (size_t n = 0; n < mesh.nodes.size(); ++n) {
      // Two draws per node regardless of placement keeps node positions
      // independent of boundary layout.
      const double ux = rng.uniform(-1.0, 1.0);
      const double uy = rng.uniform(-1.0, 1.0);
      if (on_boundary[n]) continue;
      const double amp = 0.07 * local[n];  // |displacement| <= 0.1 * edge
      mesh.nodes[n].x() += amp * ux;
      mesh.nodes[n].y() += amp * uy;
    }
  }

  validate(mesh);
  return mesh;
}

const std::vector<std::string>& channel_mesh_presets() {
  static const std::vector<std::string> names = {"symmetric", "coarse-unstructured",
                                                 "fine-unstructured"};
  return names;
}

ChannelMesh build_channel_mesh(const std::string& preset, int refinement,
                               std::uint64_t jitter_seed) {
  ChannelMesh mesh;
  if (preset == "symmetric") {
    mesh = build_channel_mesh(ChannelGeometry{}, {25, 39, 6}, SymmetryMode::StructuredSymmetric,
                              refinement, jitter_seed);
  } else if (preset == "coarse-unstructured") {
    mesh = build_channel_mesh(ChannelGeometry{}, {22, 58, 6}, SymmetryMode::Unstructured,
                              refinement, jitter_seed);
  } else if (preset == "fine-unstructured") {
    mesh = build_channel_mesh(ChannelGeometry{}, {41, 65, 6}, SymmetryMode::Unstructured,
                              refinement, jitter_seed);
  } else {
    throw std::invalid_argument("build_channel_mesh: unknown preset '" + preset + "'");
  }
  mesh.preset = preset;
  return mesh;
}

void write_mesh(const ChannelMesh& mesh, std::ostream& out) {
  char buffer[64];
  out << "nodes " << mesh.n_nodes() << " quads " << mesh.n_quads() << "\n";
  for (const auto& node : mesh.nodes) {
    std::snprintf(buffer, sizeof(buffer), "%.17g %.17g", node.x(), node.y());
    out << buffer << "\n";
  }
  for (const auto& quad : mesh.quads)
    out << quad[0] << " " << quad[1] << " " << quad[2] << " " << quad[3] << "\n";
  for (const auto& edge : mesh.boundary)
    out << edge.n1 << " " << edge.n2 << " " << to_string(edge.tag) << "\n";
}

ChannelMesh read_mesh(std::istream& in) {
  ChannelMesh mesh;
  std::string keyword;
  int n_nodes = 0, n_quads = 0;
  in >> keyword >> n_nodes;
  if (keyword != "nodes") throw std::runtime_error("read_mesh: malformed header");
  in >> keyword >> n_quads;
  if (keyword != "quads") throw std::runtime_error("read_mesh: malformed header");
  mesh.nodes.resize(n_nodes);
  for (auto& node : mesh.nodes) in >> node.x() >> node.y();
  mesh.quads.resize(n_quads);
  for (auto& quad : mesh.quads) in >> quad[0] >> quad[1] >> quad[2] >> quad[3];
  int n1, n2;
  std::string tag;
  while (in >> n1 >> n2 >> tag) mesh.boundary.push_back({n1, n2, tag_from_string(tag)});
  if (n_nodes == 0) throw std::runtime_error("read_mesh: empty mesh");
  mesh.mode = SymmetryMode::Unstructured;
  return mesh;
}

void write_mesh_file(const ChannelMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh_file: cannot open " + path);
  write_mesh(mesh, out);
}

ChannelMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh_file: cannot open " + path);
  return read_mesh(in);
}

}  // namespace stochbif
