#include "rigkit/mesh.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "mc_tables.hpp"

namespace rigkit {

namespace {

// Exact zeros would place vertices on cell corners shared by several
// edges, producing zero-area triangles; a nudge of 1e-7 truncation units
// (sub-micrometer for any sane voxel size) sidesteps that.
float nudged(float f) { return f == 0.0f ? 1e-7f : f; }

}  // namespace

TriangleMesh extract_mesh(const TsdfVolume& vol) {
  TriangleMesh mesh;
  const int nx = vol.dims[0];
  const int ny = vol.dims[1];
  const int nz = vol.dims[2];
  // Edge key: linear index of the edge's lower voxel * 3 + axis.
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        float f[8];
        int cube = 0;
        bool observed = true;
        for (int c = 0; c < 8; ++c) {
          const std::size_t at = vol.index(i + mc::kCornerShift[c][0], j + mc::kCornerShift[c][1],
                                           k + mc::kCornerShift[c][2]);
          if (vol.weight[at] == 0.0f) {
            observed = false;
            break;
          }
          f[c] = nudged(vol.tsdf[at]);
          if (f[c] < 0.0f) cube |= 1 << c;
        }
        if (!observed || cube == 0 || cube == 255) continue;

        std::uint32_t cell_vertex[12];
        for (int e = 0; e < 12; ++e) {
          if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
          const int ei = i + mc::kEdgeShift[e][0];
          const int ej = j + mc::kEdgeShift[e][1];
          const int ek = k + mc::kEdgeShift[e][2];
          const int axis = mc::kEdgeShift[e][3];
          const std::uint64_t key = static_cast<std::uint64_t>(vol.index(ei, ej, ek)) * 3 + axis;
          const auto found = edge_vertex.find(key);
          if (found != edge_vertex.end()) {
            cell_vertex[e] = found->second;
            continue;
          }
          const double f0 = std::abs(static_cast<double>(f[mc::kEdgeCorners[e][0]]));
          const double f1 = std::abs(static_cast<double>(f[mc::kEdgeCorners[e][1]]));
          Vec3d p = vol.voxel_center(ei, ej, ek);
          p(axis) += vol.voxel_size * f0 / (f0 + f1);
          const std::uint32_t id = static_cast<std::uint32_t>(mesh.vertices.size());
          mesh.vertices.push_back(p);
          edge_vertex.emplace(key, id);
          cell_vertex[e] = id;
        }

        for (int t = 0; mc::kTriTable[cube][t] != -1; t += 3) {
          // Reversed order so normals point toward positive tsdf (outside).
          mesh.triangles.push_back({cell_vertex[mc::kTriTable[cube][t]],
                                    cell_vertex[mc::kTriTable[cube][t + 2]],
                                    cell_vertex[mc::kTriTable[cube][t + 1]]});
        }
      }
    }
  }

  mesh.normals.assign(mesh.vertices.size(), Vec3d::Zero());
  for (const std::array<std::uint32_t, 3>& tri : mesh.triangles) {
    const Vec3d a = mesh.vertices[tri[0]];
    const Vec3d n = (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a);
    for (const std::uint32_t v : tri) mesh.normals[v] += n;  // area-weighted
  }
  for (Vec3d& n : mesh.normals) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
  return mesh;
}

MeshTopology mesh_topology(const TriangleMesh& mesh) {
  MeshTopology topo;
  topo.vertex_count = mesh.vertices.size();
  topo.face_count = mesh.triangles.size();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> edge_uses;
  for (const std::array<std::uint32_t, 3>& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = tri[e];
      const std::uint32_t b = tri[(e + 1) % 3];
      ++edge_uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  topo.edge_count = edge_uses.size();
  topo.closed = !mesh.triangles.empty();
  for (const auto& [edge, uses] : edge_uses) {
    if (uses != 2) {
      topo.closed = false;
      break;
    }
  }
  topo.euler_characteristic = static_cast<std::int64_t>(topo.vertex_count) -
                              static_cast<std::int64_t>(topo.edge_count) +
                              static_cast<std::int64_t>(topo.face_count);
  return topo;
}

}  // namespace rigkit
