#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <optional>
#include <vector>

#include "mesh.hpp"

namespace stochbif {

using SparseMat = Eigen::SparseMatrix<double>;

// Q2-Q1 Taylor-Hood spaces on a channel mesh. Scalar Q2 dofs are numbered
// corners first (mesh node ids), then edge midpoints, then cell centers;
// pressure dofs are the mesh nodes. A velocity vector stacks the two
// components, [vx; vy], so full states read [vx; vy; p].
class TaylorHoodSpace {
public:
  explicit TaylorHoodSpace(ChannelMesh mesh);

  const ChannelMesh& mesh() const { return mesh_; }
  int n_q2() const { return n_q2_; }
  int n_p() const { return static_cast<int>(mesh_.nodes.size()); }
  int n_velocity() const { return 2 * n_q2_; }
  int n_total() const { return n_velocity() + n_p(); }

  const std::array<int, 9>& element_q2(int e) const { return elem_q2_[e]; }
  const std::array<int, 4>& element_q1(int e) const { return mesh_.quads[e]; }
  const Eigen::Vector2d& q2_coord(int dof) const { return q2_coords_[dof]; }

  // Dirichlet data over both velocity components, indexed in [vx; vy].
  const std::vector<std::pair<int, double>>& constrained() const { return constrained_; }
  bool is_constrained(int vdof) const { return constrained_flag_[vdof]; }
  double constrained_value(int vdof) const { return constrained_value_[vdof]; }
  const std::vector<int>& free_velocity_dofs() const { return free_v_; }

  // Element containing a point, with its reference coordinates.
  struct Location {
    int element;
    double xi;
    double eta;
  };
  std::optional<Location> locate(const Eigen::Vector2d& point) const;

  // Field evaluation at a point; `component` indexes a scalar Q2 dof vector.
  double eval_q2(const Eigen::VectorXd& scalar_field, const Location& loc) const;
  double eval_q1(const Eigen::VectorXd& nodal_field, const Location& loc) const;

  // Interpolation of an analytic function onto the scalar Q2 dofs.
  Eigen::VectorXd interpolate_q2(const std::function<double(double, double)>& f) const;

private:
  ChannelMesh mesh_;
  int n_q2_ = 0;
  std::vector<std::array<int, 9>> elem_q2_;
  std::vector<Eigen::Vector2d> q2_coords_;
  std::vector<std::pair<int, double>> constrained_;
  std::vector<bool> constrained_flag_;
  std::vector<double> constrained_value_;
  std::vector<int> free_v_;

  // Uniform-grid bucket index for point location.
  Eigen::Vector2d bbox_lo_, bbox_hi_;
  int cells_x_ = 0, cells_y_ = 0;
  std::vector<std::vector<int>> buckets_;

  void build_dofs();
  void build_constraints();
  void build_buckets();
};

// Reference-element machinery shared with the assembly routines.
namespace q2 {
constexpr int kQuadPoints = 9;
// 3x3 Gauss points and weights on [-1,1]^2.
void quadrature(std::array<Eigen::Vector2d, kQuadPoints>& points,
                std::array<double, kQuadPoints>& weights);
void shape_values(double xi, double eta, std::array<double, 9>& values);
void shape_gradients(double xi, double eta, std::array<Eigen::Vector2d, 9>& gradients);
void q1_values(double xi, double eta, std::array<double, 4>& values);
void q1_gradients(double xi, double eta, std::array<Eigen::Vector2d, 4>& gradients);
}  // namespace q2

// Deterministic operator tensors of the flow problem. The trilinear
// convection form is kept element-wise (values, physical gradients and
// weights per quadrature point) and contracted on the fly.
struct FemTensors {
  SparseMat A;  // scalar Q2 diffusion
  SparseMat D;  // divergence, n_p x 2 n_q2
  SparseMat C;  // pressure-gradient coupling, C = D^T
  Eigen::VectorXd f_rhs;

  struct ElementData {
    std::array<int, 9> dofs;
    std::array<int, 4> pdofs;
    std::array<double, q2::kQuadPoints> jxw;
    std::array<std::array<double, 9>, q2::kQuadPoints> value;
    std::array<std::array<Eigen::Vector2d, 9>, q2::kQuadPoints> gradient;
  };
  std::vector<ElementData> elements;
};

FemTensors assemble_fem_tensors(const TaylorHoodSpace& space);

// Interpolation onto the mirrored channel (reflection about the axis):
// velocity components are sampled at the reflected dof positions and the
// vertical component changes sign. Exact on the structured-symmetric preset.
struct MirrorOperator {
  SparseMat q2;  // n_q2 x n_q2
  SparseMat q1;  // n_p x n_p

  // state = [vx; vy; p]
  Eigen::VectorXd apply(const Eigen::VectorXd& state) const;
};

MirrorOperator build_mirror_operator(const TaylorHoodSpace& space);

}  // namespace stochbif
