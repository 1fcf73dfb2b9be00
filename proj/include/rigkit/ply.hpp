#pragma once

#include <string>

#include "rigkit/cloud.hpp"
#include "rigkit/mesh.hpp"

namespace rigkit {

/// Binary little-endian PLY, 32-bit float properties. Clouds write x y z
/// (+ intensity when present); meshes write x y z (+ nx ny nz when normals
/// are present) and uchar-counted int32 face lists. Throws IoError.
void export_ply(const PointCloud& cloud, const std::string& path);
void export_ply(const TriangleMesh& mesh, const std::string& path);

/// Minimal readers for the files this library writes (binary little-endian,
/// float32 vertex properties). Throws IoError / CorruptContainer.
PointCloud load_ply_cloud(const std::string& path);
TriangleMesh load_ply_mesh(const std::string& path);

}  // namespace rigkit
