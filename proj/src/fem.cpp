#include "fem.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace stochbif {

namespace q2 {

namespace {
// 1D quadratic Lagrange basis on {-1, 0, 1}.
inline double l1d(int node, double t) {
  switch (node) {
    case 0: return 0.5 * t * (t - 1.0);
    case 1: return 1.0 - t * t;
    default: return 0.5 * t * (t + 1.0);
  }
}
inline double dl1d(int node, double t) {
  switch (node) {
    case 0: return t - 0.5;
    case 1: return -2.0 * t;
    default: return t + 0.5;
  }
}
// local node -> (column, row) on the {-1,0,1} tensor grid
constexpr int kNodeIx[9] = {0, 2, 2, 0, 1, 2, 1, 0, 1};
constexpr int kNodeIy[9] = {0, 0, 2, 2, 0, 1, 2, 1, 1};
}  // namespace

void quadrature(std::array<Eigen::Vector2d, kQuadPoints>& points,
                std::array<double, kQuadPoints>& weights) {
  const double g = std::sqrt(3.0 / 5.0);
  const double nodes[3] = {-g, 0.0, g};
  const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  int k = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j, ++k) {
      points[k] = {nodes[i], nodes[j]};
      weights[k] = w[i] * w[j];
    }
}

void shape_values(double xi, double eta, std::array<double, 9>& values) {
  for (int a = 0; a < 9; ++a) values[a] = l1d(kNodeIx[a], xi) * l1d(kNodeIy[a], eta);
}

void shape_gradients(double xi, double eta, std::array<Eigen::Vector2d, 9>& gradients) {
  for (int a = 0; a < 9; ++a) {
    gradients[a].x() = dl1d(kNodeIx[a], xi) * l1d(kNodeIy[a], eta);
    gradients[a].y() = l1d(kNodeIx[a], xi) * dl1d(kNodeIy[a], eta);
  }
}

void q1_values(double xi, double eta, std::array<double, 4>& values) {
  values[0] = 0.25 * (1 - xi) * (1 - eta);
  values[1] = 0.25 * (1 + xi) * (1 - eta);
  values[2] = 0.25 * (1 + xi) * (1 + eta);
  values[3] = 0.25 * (1 - xi) * (1 + eta);
}

void q1_gradients(double xi, double eta, std::array<Eigen::Vector2d, 4>& gradients) {
  gradients[0] = {-0.25 * (1 - eta), -0.25 * (1 - xi)};
  gradients[1] = {0.25 * (1 - eta), -0.25 * (1 + xi)};
  gradients[2] = {0.25 * (1 + eta), 0.25 * (1 + xi)};
  gradients[3] = {-0.25 * (1 + eta), 0.25 * (1 - xi)};
}

}  // namespace q2

TaylorHoodSpace::TaylorHoodSpace(ChannelMesh mesh) : mesh_(std::move(mesh)) {
  build_dofs();
  build_constraints();
  build_buckets();
}

void TaylorHoodSpace::build_dofs() {
  const int n_nodes = mesh_.n_nodes();
  std::map<std::pair<int, int>, int> edge_dofs;
  elem_q2_.resize(mesh_.n_quads());
  q2_coords_.assign(mesh_.nodes.begin(), mesh_.nodes.end());

  int next = n_nodes;
  const int local_edges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  for (int e = 0; e < mesh_.n_quads(); ++e) {
    const auto& quad = mesh_.quads[e];
    for (int c = 0; c < 4; ++c) elem_q2_[e][c] = quad[c];
    for (int s = 0; s < 4; ++s) {
      const int a = quad[local_edges[s][0]];
      const int b = quad[local_edges[s][1]];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_dofs.try_emplace(key, next);
      if (inserted) {
        q2_coords_.push_back(0.5 * (mesh_.nodes[a] + mesh_.nodes[b]));
        ++next;
      }
      elem_q2_[e][4 + s] = it->second;
    }
  }
  for (int e = 0; e < mesh_.n_quads(); ++e) {
    const auto& quad = mesh_.quads[e];
    elem_q2_[e][8] = next++;
    q2_coords_.push_back(0.25 * (mesh_.nodes[quad[0]] + mesh_.nodes[quad[1]] +
                                 mesh_.nodes[quad[2]] + mesh_.nodes[quad[3]]));
  }
  n_q2_ = next;
}

void TaylorHoodSpace::build_constraints() {
  std::map<std::pair<int, int>, int> edge_dofs;
  const int local_edges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  for (int e = 0; e < mesh_.n_quads(); ++e) {
    const auto& quad = mesh_.quads[e];
    for (int s = 0; s < 4; ++s)
      edge_dofs[std::minmax(quad[local_edges[s][0]], quad[local_edges[s][1]])] = elem_q2_[e][4 + s];
  }

  std::vector<char> seen(n_velocity(), 0);
  std::vector<double> value(n_velocity(), 0.0);
  const auto constrain = [&](int q2_dof, const Eigen::Vector2d& v) {
    for (int comp = 0; comp < 2; ++comp) {
      const int vdof = comp * n_q2_ + q2_dof;
      if (seen[vdof] && std::abs(value[vdof] - v[comp]) > 1e-12)
        throw std::runtime_error("TaylorHoodSpace: conflicting Dirichlet values on one dof");
      seen[vdof] = 1;
      value[vdof] = v[comp];
    }
  };

  for (const auto& edge : mesh_.boundary) {
    if (edge.tag == BoundaryTag::Outlet) continue;
    const auto mid = edge_dofs.find(std::minmax(edge.n1, edge.n2));
    if (mid == edge_dofs.end())
      throw std::runtime_error("TaylorHoodSpace: boundary edge not part of any element");
    for (int dof : {edge.n1, edge.n2, mid->second}) {
      if (edge.tag == BoundaryTag::Wall) {
        constrain(dof, {0.0, 0.0});
      } else {
        constrain(dof, inlet_profile(q2_coords_[dof].y(), mesh_.geometry));
      }
    }
  }

  constrained_flag_.assign(n_velocity(), false);
  constrained_value_.assign(n_velocity(), 0.0);
  for (int vdof = 0; vdof < n_velocity(); ++vdof) {
    if (seen[vdof]) {
      constrained_.emplace_back(vdof, value[vdof]);
      constrained_flag_[vdof] = true;
      constrained_value_[vdof] = value[vdof];
    } else {
      free_v_.push_back(vdof);
    }
  }
}

void TaylorHoodSpace::build_buckets() {
  bbox_lo_ = mesh_.nodes[0];
  bbox_hi_ = mesh_.nodes[0];
  for (const auto& node : mesh_.nodes) {
    bbox_lo_ = bbox_lo_.cwiseMin(node);
    bbox_hi_ = bbox_hi_.cwiseMax(node);
  }
  cells_x_ = 64;
  cells_y_ = 16;
  buckets_.assign(cells_x_ * cells_y_, {});
  const Eigen::Vector2d span = bbox_hi_ - bbox_lo_;
  for (int e = 0; e < mesh_.n_quads(); ++e) {
    Eigen::Vector2d lo = mesh_.nodes[mesh_.quads[e][0]];
    Eigen::Vector2d hi = lo;
    for (int c = 1; c < 4; ++c) {
      lo = lo.cwiseMin(mesh_.nodes[mesh_.quads[e][c]]);
      hi = hi.cwiseMax(mesh_.nodes[mesh_.quads[e][c]]);
    }
    const int ix0 = std::clamp(static_cast<int>((lo.x() - bbox_lo_.x()) / span.x() * cells_x_), 0, cells_x_ - 1);
    const int ix1 = std::clamp(static_cast<int>((hi.x() - bbox_lo_.x()) / span.x() * cells_x_), 0, cells_x_ - 1);
    const int iy0 = std::clamp(static_cast<int>((lo.y() - bbox_lo_.y()) / span.y() * cells_y_), 0, cells_y_ - 1);
    const int iy1 = std::clamp(static_cast<int>((hi.y() - bbox_lo_.y()) / span.y() * cells_y_), 0, cells_y_ - 1);
    for (int ix = ix0; ix <= ix1; ++ix)
      for (int iy = iy0; iy <= iy1; ++iy) buckets_[iy * cells_x_ + ix].push_back(e);
  }
}

namespace {

// Inverse of the bilinear map by Newton iteration.
bool invert_bilinear(const ChannelMesh& mesh, const std::array<int, 4>& quad,
                     const Eigen::Vector2d& point, double& xi, double& eta) {
  xi = 0.0;
  eta = 0.0;
  for (int it = 0; it < 25; ++it) {
    std::array<double, 4> values;
    std::array<Eigen::Vector2d, 4> grads;
    q2::q1_values(xi, eta, values);
    q2::q1_gradients(xi, eta, grads);
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 4; ++a) {
      x += values[a] * mesh.nodes[quad[a]];
      jac.col(0) += grads[a].x() * mesh.nodes[quad[a]];
      jac.col(1) += grads[a].y() * mesh.nodes[quad[a]];
    }
    const Eigen::Vector2d r = x - point;
    if (r.lpNorm<Eigen::Infinity>() < 1e-12) return true;
    const double det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    if (std::abs(det) < 1e-300) return false;
    const Eigen::Vector2d step = jac.inverse() * r;
    xi -= step.x();
    eta -= step.y();
    if (std::abs(xi) > 3.0 || std::abs(eta) > 3.0) return false;
  }
  return false;
}

}  // namespace

std::optional<TaylorHoodSpace::Location> TaylorHoodSpace::locate(const Eigen::Vector2d& point) const {
  const Eigen::Vector2d span = bbox_hi_ - bbox_lo_;
  const int ix = std::clamp(static_cast<int>((point.x() - bbox_lo_.x()) / span.x() * cells_x_), 0,
                            cells_x_ - 1);
  const int iy = std::clamp(static_cast<int>((point.y() - bbox_lo_.y()) / span.y() * cells_y_), 0,
                            cells_y_ - 1);
  const auto try_elements = [&](const std::vector<int>& candidates) -> std::optional<Location> {
    for (int e : candidates) {
      double xi, eta;
      if (!invert_bilinear(mesh_, mesh_.quads[e], point, xi, eta)) continue;
      if (std::abs(xi) <= 1.0 + 1e-9 && std::abs(eta) <= 1.0 + 1e-9) {
        // Snap reference coordinates onto element nodes so that evaluation
        // at mesh nodes reproduces nodal values exactly.
        const auto snap = [](double t) {
          if (std::abs(t) < 1e-9) return 0.0;
          if (std::abs(t - 1.0) < 1e-9) return 1.0;
          if (std::abs(t + 1.0) < 1e-9) return -1.0;
          return std::clamp(t, -1.0, 1.0);
        };
        return Location{e, snap(xi), snap(eta)};
      }
    }
    return std::nullopt;
  };
  if (auto loc = try_elements(buckets_[iy * cells_x_ + ix])) return loc;
  // Bucket boundary fallback.
  std::vector<int> all(mesh_.n_quads());
  for (int e = 0; e < mesh_.n_quads(); ++e) all[e] = e;
  return try_elements(all);
}

double TaylorHoodSpace::eval_q2(const Eigen::VectorXd& scalar_field, const Location& loc) const {
  std::array<double, 9> values;
  q2::shape_values(loc.xi, loc.eta, values);
  double result = 0.0;
  for (int a = 0; a < 9; ++a) result += values[a] * scalar_field[elem_q2_[loc.element][a]];
  return result;
}

double TaylorHoodSpace::eval_q1(const Eigen::VectorXd& nodal_field, const Location& loc) const {
  std::array<double, 4> values;
  q2::q1_values(loc.xi, loc.eta, values);
  double result = 0.0;
  for (int a = 0; a < 4; ++a) result += values[a] * nodal_field[mesh_.quads[loc.element][a]];
  return result;
}

Eigen::VectorXd TaylorHoodSpace::interpolate_q2(
    const std::function<double(double, double)>& f) const {
  Eigen::VectorXd result(n_q2_);
  for (int d = 0; d < n_q2_; ++d) result[d] = f(q2_coords_[d].x(), q2_coords_[d].y());
  return result;
}

FemTensors assemble_fem_tensors(const TaylorHoodSpace& space) {
  const auto& mesh = space.mesh();
  FemTensors tensors;
  tensors.f_rhs = Eigen::VectorXd::Zero(space.n_total());

  std::array<Eigen::Vector2d, q2::kQuadPoints> qpoints;
  std::array<double, q2::kQuadPoints> qweights;
  q2::quadrature(qpoints, qweights);

  std::vector<Eigen::Triplet<double>> a_triplets;
  std::vector<Eigen::Triplet<double>> d_triplets;
  tensors.elements.resize(mesh.n_quads());

  for (int e = 0; e < mesh.n_quads(); ++e) {
    auto& data = tensors.elements[e];
    data.dofs = space.element_q2(e);
    data.pdofs = space.element_q1(e);
    const auto& quad = mesh.quads[e];

    Eigen::Matrix<double, 9, 9> a_local = Eigen::Matrix<double, 9, 9>::Zero();
    Eigen::Matrix<double, 4, 18> d_local = Eigen::Matrix<double, 4, 18>::Zero();

    for (int q = 0; q < q2::kQuadPoints; ++q) {
      const double xi = qpoints[q].x();
      const double eta = qpoints[q].y();
      std::array<Eigen::Vector2d, 4> corner_grads;
      q2::q1_gradients(xi, eta, corner_grads);
      Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
      for (int a = 0; a < 4; ++a) {
        jac.col(0) += corner_grads[a].x() * mesh.nodes[quad[a]];
        jac.col(1) += corner_grads[a].y() * mesh.nodes[quad[a]];
      }
      const double det = jac.determinant();
      if (det <= 0.0) throw std::runtime_error("assemble_fem_tensors: singular element mapping");
      const Eigen::Matrix2d inv_t = jac.inverse().transpose();

      data.jxw[q] = qweights[q] * det;
      q2::shape_values(xi, eta, data.value[q]);
      std::array<Eigen::Vector2d, 9> ref_grads;
      q2::shape_gradients(xi, eta, ref_grads);
      for (int a = 0; a < 9; ++a) data.gradient[q][a] = inv_t * ref_grads[a];

      std::array<double, 4> pvals;
      q2::q1_values(xi, eta, pvals);

      for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b)
          a_local(a, b) += data.jxw[q] * data.gradient[q][a].dot(data.gradient[q][b]);
      for (int k = 0; k < 4; ++k)
        for (int a = 0; a < 9; ++a) {
          d_local(k, a) += data.jxw[q] * pvals[k] * data.gradient[q][a].x();
          d_local(k, 9 + a) += data.jxw[q] * pvals[k] * data.gradient[q][a].y();
        }
    }

    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b)
        a_triplets.emplace_back(data.dofs[a], data.dofs[b], a_local(a, b));
    for (int k = 0; k < 4; ++k)
      for (int a = 0; a < 9; ++a) {
        d_triplets.emplace_back(data.pdofs[k], data.dofs[a], d_local(k, a));
        d_triplets.emplace_back(data.pdofs[k], space.n_q2() + data.dofs[a], d_local(k, 9 + a));
      }
  }

  tensors.A.resize(space.n_q2(), space.n_q2());
  tensors.A.setFromTriplets(a_triplets.begin(), a_triplets.end());
  tensors.D.resize(space.n_p(), space.n_velocity());
  tensors.D.setFromTriplets(d_triplets.begin(), d_triplets.end());
  tensors.C = SparseMat(tensors.D.transpose());
  return tensors;
}

Eigen::VectorXd MirrorOperator::apply(const Eigen::VectorXd& state) const {
  const int n = static_cast<int>(q2.rows());
  const int np = static_cast<int>(q1.rows());
  Eigen::VectorXd result(2 * n + np);
  result.segment(0, n) = q2 * state.segment(0, n);
  result.segment(n, n) = -(q2 * state.segment(n, n));
  result.segment(2 * n, np) = q1 * state.segment(2 * n, np);
  return result;
}

MirrorOperator build_mirror_operator(const TaylorHoodSpace& space) {
  MirrorOperator mirror;
  const double y_top = space.mesh().geometry.y_max;
  std::vector<Eigen::Triplet<double>> v_triplets, p_triplets;

  for (int d = 0; d < space.n_q2(); ++d) {
    const Eigen::Vector2d target(space.q2_coord(d).x(), y_top - space.q2_coord(d).y());
    const auto loc = space.locate(target);
    if (!loc) throw std::runtime_error("build_mirror_operator: reflected point left the mesh");
    std::array<double, 9> values;
    q2::shape_values(loc->xi, loc->eta, values);
    for (int a = 0; a < 9; ++a) {
      if (values[a] != 0.0) v_triplets.emplace_back(d, space.element_q2(loc->element)[a], values[a]);
    }
  }
  for (int n = 0; n < space.n_p(); ++n) {
    const Eigen::Vector2d target(space.mesh().nodes[n].x(), y_top - space.mesh().nodes[n].y());
    const auto loc = space.locate(target);
    if (!loc) throw std::runtime_error("build_mirror_operator: reflected point left the mesh");
    std::array<double, 4> values;
    q2::q1_values(loc->xi, loc->eta, values);
    for (int a = 0; a < 4; ++a) {
      if (values[a] != 0.0)
        p_triplets.emplace_back(n, space.mesh().quads[loc->element][a], values[a]);
    }
  }

  mirror.q2.resize(space.n_q2(), space.n_q2());
  mirror.q2.setFromTriplets(v_triplets.begin(), v_triplets.end());
  mirror.q1.resize(space.n_p(), space.n_p());
  mirror.q1.setFromTriplets(p_triplets.begin(), p_triplets.end());
  return mirror;
}

}  // namespace stochbif
