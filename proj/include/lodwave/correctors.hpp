#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/interpolation.hpp"
#include "lodwave/mesh.hpp"
#include "lodwave/saddle.hpp"
#include "lodwave/threading.hpp"

namespace lodwave {

// One element corrector: the solution Q^K_{h,k}(Phi_z) of
//   int_{U_k(K)} a grad Q . grad w = - int_K a grad Phi_z . grad w
// for all w in the localized kernel space, returned per interior vertex z
// of K as a sparse vector over the patch free nodes.
struct ElementCorrector {
  int coarse_vertex = -1;  // global coarse vertex id
  SparseVector q;          // zero-extended to the full fine index set
};

namespace detail {

// Right-hand sides -sum_{T in K} a_T int_T grad Phi_z . grad lambda_i for the
// (up to three) interior corner hats of K, over the patch free nodes.
inline std::vector<std::pair<int, Vector>> element_rhs(const MeshHierarchy& hier,
                                                       const CoefficientField& field,
                                                       int coarse_element,
                                                       const std::vector<int>& free_index,
                                                       std::size_t n_free) {
  const Triangulation& tc = hier.coarse;
  const Triangulation& tf = hier.fine;
  const auto& corners = tc.triangles[coarse_element];
  std::vector<std::pair<int, Vector>> rhs;
  for (int c = 0; c < 3; ++c) {
    if (tc.boundary_flags[corners[c]]) continue;
    rhs.emplace_back(corners[c], Vector(n_free, 0.0));
  }
  if (rhs.empty()) return rhs;

  for (int fe : hier.coarse_to_fine_elements[coarse_element]) {
    const auto g = detail::p1_gradients(tf, fe);
    const double scale = field.values[fe] * g.area;
    const auto& tr = tf.triangles[fe];
    std::array<std::array<double, 3>, 3> lambda;  // [fine corner][coarse corner]
    for (int i = 0; i < 3; ++i)
      lambda[i] = barycentric(tc, coarse_element, tf.vertices[tr[i]]);
    for (auto& [z, vec] : rhs) {
      int c = 0;
      while (corners[c] != z) ++c;
      // gradient of Phi_z on this fine element from its nodal values
      double px = 0.0, py = 0.0;
      for (int i = 0; i < 3; ++i) {
        px += lambda[i][c] * g.gx[i];
        py += lambda[i][c] * g.gy[i];
      }
      for (int i = 0; i < 3; ++i) {
        const int slot = free_index[tr[i]];
        if (slot >= 0) vec[slot] -= scale * (px * g.gx[i] + py * g.gy[i]);
      }
    }
  }
  return rhs;
}

}  // namespace detail

// Solves the localized corrector problems of one coarse element. The three
// right-hand sides share the patch factorization.
inline std::vector<ElementCorrector> element_correctors(const MeshHierarchy& hier,
                                                        const SparseMatrix& stiffness_full,
                                                        const CoefficientField& field,
                                                        const ClementOperator& clement,
                                                        int coarse_element, int k,
                                                        const SaddleOptions& opt = {}) {
  const Patch patch = build_patch(hier, coarse_element, k);
  std::vector<int> free_index(hier.fine.n_vertices(), -1);
  for (std::size_t i = 0; i < patch.fine_free_nodes.size(); ++i)
    free_index[patch.fine_free_nodes[i]] = static_cast<int>(i);

  auto rhs = detail::element_rhs(hier, field, coarse_element, free_index,
                                 patch.fine_free_nodes.size());
  std::vector<ElementCorrector> out;
  if (rhs.empty()) return out;

  const SparseMatrix a_patch =
      stiffness_full.submatrix(patch.fine_free_nodes, patch.fine_free_nodes);
  const SparseMatrix c = constraint_matrix(clement, hier, patch);

  std::vector<Vector> rhs_list;
  rhs_list.reserve(rhs.size());
  for (auto& [z, vec] : rhs) rhs_list.push_back(std::move(vec));
  std::vector<Vector> solutions;
  try {
    solutions = saddle_solve(a_patch, c, rhs_list, opt);
  } catch (const std::exception& e) {
    throw std::runtime_error("element_correctors: K=" + std::to_string(coarse_element) +
                             " k=" + std::to_string(k) + ": " + e.what());
  }

  out.reserve(rhs.size());
  for (std::size_t s = 0; s < rhs.size(); ++s) {
    ElementCorrector ec;
    ec.coarse_vertex = rhs[s].first;
    for (std::size_t i = 0; i < patch.fine_free_nodes.size(); ++i)
      if (solutions[s][i] != 0.0) {
        ec.q.idx.push_back(patch.fine_free_nodes[i]);
        ec.q.val.push_back(solutions[s][i]);
      }
    out.push_back(std::move(ec));
  }
  return out;
}

// Corrector operator and multiscale basis: per interior coarse node z the
// fine coefficient vectors of Q_{h,k}(Phi_z) and psi_z = Phi_z + Q_{h,k}(Phi_z).
// Rows follow the dense interior coarse numbering of the Clement operator.
struct CorrectorBasis {
  int k = 0;
  int n_fine_vertices = 0;
  std::vector<int> coarse_nodes;       // coarse vertex id per row
  std::vector<SparseVector> phi;       // fine representation of Phi_z
  std::vector<SparseVector> q;
  std::vector<SparseVector> psi;
};

// Builds the corrector basis by summing element correctors,
// Q_{h,k}(Phi_z) = sum_{K owning z} Q^K_{h,k}(Phi_z). Element solves run in
// parallel; accumulation happens in element-index order so results do not
// depend on scheduling.
inline CorrectorBasis build_corrector_basis(const MeshHierarchy& hier,
                                            const SparseMatrix& stiffness_full,
                                            const CoefficientField& field,
                                            const ClementOperator& clement, int k,
                                            int threads = 1, const SaddleOptions& opt = {}) {
  CorrectorBasis basis;
  basis.k = k;
  basis.n_fine_vertices = hier.fine.n_vertices();
  basis.coarse_nodes = clement.coarse_nodes;
  basis.phi = clement.basis;
  basis.q.assign(clement.basis.size(), {});

  const std::size_t n_elements = hier.coarse.n_triangles();
  std::mutex mtx;
  std::map<std::size_t, std::vector<ElementCorrector>> pending;
  std::size_t next_accum = 0;
  std::exception_ptr failure;

  auto accumulate = [&](const std::vector<ElementCorrector>& contrib) {
    for (const auto& ec : contrib) {
      const int row = hier.coarse.interior_node_index[ec.coarse_vertex];
      basis.q[row] = SparseVector::sum(basis.q[row], ec.q);
    }
  };

  parallel_for(n_elements, threads, [&](std::size_t e) {
    {
      std::lock_guard<std::mutex> lock(mtx);
      if (failure) return;
    }
    std::vector<ElementCorrector> contrib;
    try {
      contrib = element_correctors(hier, stiffness_full, field, clement,
                                   static_cast<int>(e), k, opt);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mtx);
      if (!failure) failure = std::current_exception();
      return;
    }
    std::lock_guard<std::mutex> lock(mtx);
    pending.emplace(e, std::move(contrib));
    while (!pending.empty() && pending.begin()->first == next_accum) {
      accumulate(pending.begin()->second);
      pending.erase(pending.begin());
      ++next_accum;
    }
  });
  if (failure) std::rethrow_exception(failure);
  // drain whatever is left in order (failure-free runs leave nothing)
  for (auto& [e, contrib] : pending) accumulate(contrib);

  basis.psi.resize(basis.q.size());
  for (std::size_t z = 0; z < basis.q.size(); ++z)
    basis.psi[z] = SparseVector::sum(basis.phi[z], basis.q[z]);
  return basis;
}

// Corrected coarse matrices (S_k)_ij = psi_j^T A_h psi_i and
// (M_k)_ij = psi_j^T M_h psi_i.
struct MultiscaleSystem {
  DenseMatrix stiffness;  // S_k
  DenseMatrix mass;       // M_k
};

namespace detail {

struct LatticeBox {
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;
  bool overlaps(const LatticeBox& o) const {
    return i0 <= o.i1 && o.i0 <= i1 && j0 <= o.j1 && o.j0 <= j1;
  }
};

inline LatticeBox support_box(const SparseVector& v, int stride) {
  LatticeBox b{1 << 30, -1, 1 << 30, -1};
  for (int id : v.idx) {
    const int i = id % stride;
    const int j = id / stride;
    b.i0 = std::min(b.i0, i);
    b.i1 = std::max(b.i1, i);
    b.j0 = std::min(b.j0, j);
    b.j1 = std::max(b.j1, j);
  }
  return b;
}

}  // namespace detail

inline MultiscaleSystem assemble_multiscale(const CorrectorBasis& basis,
                                            const SparseMatrix& stiffness_full,
                                            const SparseMatrix& mass_full,
                                            const Triangulation& fine) {
  const int n = static_cast<int>(basis.psi.size());
  MultiscaleSystem ms{DenseMatrix(n), DenseMatrix(n)};
  const int stride = fine.n_per_side + 1;
  std::vector<detail::LatticeBox> box(n);
  for (int z = 0; z < n; ++z) box[z] = detail::support_box(basis.psi[z], stride);

  const int nf = basis.n_fine_vertices;
  Vector a_psi(nf, 0.0), m_psi(nf, 0.0);
  std::vector<int> dirty;
  auto scatter_product = [&](const SparseMatrix& mat, const SparseVector& v, Vector& out) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const int c = v.idx[i];
      const double s = v.val[i];
      for (std::int64_t p = mat.row_ptr()[c]; p < mat.row_ptr()[c + 1]; ++p) {
        const int r = mat.col_idx()[p];
        if (a_psi[r] == 0.0 && m_psi[r] == 0.0) dirty.push_back(r);
        out[r] += mat.values()[p] * s;
      }
    }
  };
  for (int i = 0; i < n; ++i) {
    scatter_product(stiffness_full, basis.psi[i], a_psi);
    scatter_product(mass_full, basis.psi[i], m_psi);
    for (int j = 0; j <= i; ++j) {
      if (!box[i].overlaps(box[j])) continue;
      double s = 0.0, m = 0.0;
      const SparseVector& pj = basis.psi[j];
      for (std::size_t p = 0; p < pj.size(); ++p) {
        s += pj.val[p] * a_psi[pj.idx[p]];
        m += pj.val[p] * m_psi[pj.idx[p]];
      }
      ms.stiffness.at(i, j) = s;
      ms.stiffness.at(j, i) = s;
      ms.mass.at(i, j) = m;
      ms.mass.at(j, i) = m;
    }
    for (int r : dirty) {
      a_psi[r] = 0.0;
      m_psi[r] = 0.0;
    }
    dirty.clear();
  }
  return ms;
}

// Multiscale load vector G_i = psi_i^T b for an assembled fine load b.
inline Vector assemble_ms_load(const CorrectorBasis& basis, const Vector& fine_load_full) {
  if (static_cast<int>(fine_load_full.size()) != basis.n_fine_vertices)
    throw std::invalid_argument("assemble_ms_load: dimension mismatch");
  Vector g(basis.psi.size());
  for (std::size_t i = 0; i < basis.psi.size(); ++i)
    g[i] = basis.psi[i].dot_dense(fine_load_full);
  return g;
}

// Binary persistence of the corrector vectors so reruns can skip the solve
// stage. Only q is stored; phi and psi are rebuilt from the hierarchy.
inline void save_corrector_basis(const std::string& path, const CorrectorBasis& basis,
                                 std::uint64_t coefficient_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_corrector_basis: cannot open " + path);
  const char magic[4] = {'L', 'O', 'D', 'B'};
  const std::uint32_t version = 1;
  const std::uint32_t k = basis.k;
  const std::uint32_t nf = basis.n_fine_vertices;
  const std::uint32_t nz = static_cast<std::uint32_t>(basis.q.size());
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&k), 4);
  out.write(reinterpret_cast<const char*>(&nf), 4);
  out.write(reinterpret_cast<const char*>(&nz), 4);
  out.write(reinterpret_cast<const char*>(&coefficient_hash), 8);
  for (std::uint32_t z = 0; z < nz; ++z) {
    const std::uint32_t node = basis.coarse_nodes[z];
    const std::uint64_t nnz = basis.q[z].size();
    out.write(reinterpret_cast<const char*>(&node), 4);
    out.write(reinterpret_cast<const char*>(&nnz), 8);
    out.write(reinterpret_cast<const char*>(basis.q[z].idx.data()),
              static_cast<std::streamsize>(nnz * sizeof(int)));
    out.write(reinterpret_cast<const char*>(basis.q[z].val.data()),
              static_cast<std::streamsize>(nnz * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_corrector_basis: write failed");
}

// Returns an empty optional when the file is absent or the header does not
// match the requested configuration.
inline std::optional<CorrectorBasis> load_corrector_basis(const std::string& path,
                                                          const ClementOperator& clement, int k,
                                                          int n_fine_vertices,
                                                          std::uint64_t coefficient_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0, fk = 0, fnf = 0, fnz = 0;
  std::uint64_t hash = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&fk), 4);
  in.read(reinterpret_cast<char*>(&fnf), 4);
  in.read(reinterpret_cast<char*>(&fnz), 4);
  in.read(reinterpret_cast<char*>(&hash), 8);
  if (!in || std::memcmp(magic, "LODB", 4) != 0 || version != 1) return std::nullopt;
  if (fk != static_cast<std::uint32_t>(k) || fnf != static_cast<std::uint32_t>(n_fine_vertices) ||
      fnz != clement.basis.size() || hash != coefficient_hash)
    return std::nullopt;

  CorrectorBasis basis;
  basis.k = k;
  basis.n_fine_vertices = n_fine_vertices;
  basis.coarse_nodes = clement.coarse_nodes;
  basis.phi = clement.basis;
  basis.q.resize(fnz);
  for (std::uint32_t z = 0; z < fnz; ++z) {
    std::uint32_t node = 0;
    std::uint64_t nnz = 0;
    in.read(reinterpret_cast<char*>(&node), 4);
    in.read(reinterpret_cast<char*>(&nnz), 8);
    if (!in || node != static_cast<std::uint32_t>(basis.coarse_nodes[z])) return std::nullopt;
    basis.q[z].idx.resize(nnz);
    basis.q[z].val.resize(nnz);
    in.read(reinterpret_cast<char*>(basis.q[z].idx.data()),
            static_cast<std::streamsize>(nnz * sizeof(int)));
    in.read(reinterpret_cast<char*>(basis.q[z].val.data()),
            static_cast<std::streamsize>(nnz * sizeof(double)));
    if (!in) return std::nullopt;
  }
  basis.psi.resize(basis.q.size());
  for (std::size_t z = 0; z < basis.q.size(); ++z)
    basis.psi[z] = SparseVector::sum(basis.phi[z], basis.q[z]);
  return basis;
}

// FNV-1a over the coefficient samples; used to key persisted correctors.
inline std::uint64_t coefficient_hash(const CoefficientField& field) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t count = field.values.size();
  mix(&count, sizeof(count));
  mix(field.values.data(), field.values.size() * sizeof(double));
  return h;
}

}  // namespace lodwave
