#include "rigkit/ply.hpp"

#include <algorithm>
#include <cstring>
#include <optional>
#include <fstream>
#include <sstream>

#include "wire.hpp"

namespace rigkit {

namespace {

void write_f32(std::vector<std::uint8_t>& out, double v) {
  wire::put_f32(out, static_cast<float>(v));
}

struct PlyHeader {
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  std::vector<std::string> vertex_properties;
  bool has_face_list = false;
  std::size_t body_offset = 0;
  std::optional<FrameTag> frame;
};

std::optional<FrameTag> parse_frame_tag(const std::string& name) {
  for (const FrameTag tag : {FrameTag::Camera, FrameTag::Rig, FrameTag::World}) {
    if (name == frame_tag_name(tag)) return tag;
  }
  return std::nullopt;
}

PlyHeader parse_header(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const char* end_marker = "end_header\n";
  const std::string text(reinterpret_cast<const char*>(bytes.data()),
                         std::min<std::size_t>(bytes.size(), 4096));
  const std::size_t end = text.find(end_marker);
  if (end == std::string::npos) {
    raise(ErrorCode::CorruptContainer, path + ": PLY header end not found");
  }
  PlyHeader h;
  h.body_offset = end + std::strlen(end_marker);
  std::istringstream in(text.substr(0, end));
  std::string line;
  std::string element;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      if (line != "ply") raise(ErrorCode::BadMagic, path + ": not a PLY file");
      first = false;
      continue;
    }
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment") {
      std::string key, value;
      ls >> key >> value;
      if (key == "frame") h.frame = parse_frame_tag(value);
      continue;
    }
    if (word == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt != "binary_little_endian") {
        raise(ErrorCode::UnsupportedVersion, path + ": only binary little-endian PLY is read");
      }
    } else if (word == "element") {
      std::size_t count = 0;
      ls >> element >> count;
      if (element == "vertex") {
        h.vertex_count = count;
      } else if (element == "face") {
        h.face_count = count;
      } else {
        raise(ErrorCode::CorruptContainer, path + ": unsupported element " + element);
      }
    } else if (word == "property") {
      std::string type;
      ls >> type;
      if (element == "vertex") {
        if (type != "float") {
          raise(ErrorCode::CorruptContainer, path + ": vertex properties must be float32");
        }
        std::string name;
        ls >> name;
        h.vertex_properties.push_back(name);
      } else if (element == "face") {
        std::string counter, index, name;
        ls >> counter >> index >> name;
        if (type != "list" || counter != "uchar" || index != "int") {
          raise(ErrorCode::CorruptContainer, path + ": face lists must be uchar-counted int32");
        }
        h.has_face_list = true;
      }
    }
  }
  return h;
}

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& header,
                const std::vector<std::uint8_t>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot create " + path);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  out.close();
  if (out.fail()) raise(ErrorCode::IoError, "write failed on " + path);
}

}  // namespace

void export_ply(const PointCloud& cloud, const std::string& path) {
  if (!cloud.intensity.empty() && cloud.intensity.size() != cloud.points.size()) {
    raise(ErrorCode::DimensionMismatch, "intensity list must be empty or match the points");
  }
  const bool with_intensity = !cloud.intensity.empty();
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n"
         << "comment frame " << frame_tag_name(cloud.frame) << "\n"
         << "element vertex " << cloud.points.size() << "\n"
         << "property float x\nproperty float y\nproperty float z\n";
  if (with_intensity) header << "property float intensity\n";
  header << "end_header\n";

  std::vector<std::uint8_t> body;
  body.reserve(cloud.points.size() * (with_intensity ? 16 : 12));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    for (int k = 0; k < 3; ++k) write_f32(body, cloud.points[i](k));
    if (with_intensity) wire::put_f32(body, cloud.intensity[i]);
  }
  write_file(path, header.str(), body);
}

void export_ply(const TriangleMesh& mesh, const std::string& path) {
  if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size()) {
    raise(ErrorCode::DimensionMismatch, "normal list must be empty or match the vertices");
  }
  const bool with_normals = !mesh.normals.empty();
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n"
         << "element vertex " << mesh.vertices.size() << "\n"
         << "property float x\nproperty float y\nproperty float z\n";
  if (with_normals) header << "property float nx\nproperty float ny\nproperty float nz\n";
  header << "element face " << mesh.triangles.size() << "\n"
         << "property list uchar int vertex_indices\n"
         << "end_header\n";

  std::vector<std::uint8_t> body;
  body.reserve(mesh.vertices.size() * (with_normals ? 24 : 12) + mesh.triangles.size() * 13);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int k = 0; k < 3; ++k) write_f32(body, mesh.vertices[i](k));
    if (with_normals) {
      for (int k = 0; k < 3; ++k) write_f32(body, mesh.normals[i](k));
    }
  }
  for (const std::array<std::uint32_t, 3>& tri : mesh.triangles) {
    wire::put_u8(body, 3);
    for (const std::uint32_t v : tri) wire::put_u32(body, v);
  }
  write_file(path, header.str(), body);
}

PointCloud load_ply_cloud(const std::string& path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  const PlyHeader h = parse_header(path, bytes);
  wire::Cursor c(bytes.data() + h.body_offset, bytes.size() - h.body_offset);
  PointCloud cloud;
  if (h.frame) cloud.frame = *h.frame;
  const std::size_t props = h.vertex_properties.size();
  const bool with_intensity = props == 4 && h.vertex_properties[3] == "intensity";
  if (props != 3 && !with_intensity) {
    raise(ErrorCode::CorruptContainer, path + ": expected x y z [intensity] properties");
  }
  cloud.points.reserve(h.vertex_count);
  for (std::size_t i = 0; i < h.vertex_count; ++i) {
    Vec3d p;
    for (int k = 0; k < 3; ++k) p(k) = c.f32();
    cloud.points.push_back(p);
    if (with_intensity) cloud.intensity.push_back(c.f32());
  }
  return cloud;
}

TriangleMesh load_ply_mesh(const std::string& path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  const PlyHeader h = parse_header(path, bytes);
  wire::Cursor c(bytes.data() + h.body_offset, bytes.size() - h.body_offset);
  TriangleMesh mesh;
  const std::size_t props = h.vertex_properties.size();
  const bool with_normals = props == 6;
  if (props != 3 && props != 6) {
    raise(ErrorCode::CorruptContainer, path + ": expected x y z [nx ny nz] properties");
  }
  mesh.vertices.reserve(h.vertex_count);
  for (std::size_t i = 0; i < h.vertex_count; ++i) {
    Vec3d p;
    for (int k = 0; k < 3; ++k) p(k) = c.f32();
    mesh.vertices.push_back(p);
    if (with_normals) {
      Vec3d n;
      for (int k = 0; k < 3; ++k) n(k) = c.f32();
      mesh.normals.push_back(n);
    }
  }
  mesh.triangles.reserve(h.face_count);
  for (std::size_t i = 0; i < h.face_count; ++i) {
    if (c.u8() != 3) raise(ErrorCode::CorruptContainer, path + ": only triangle faces are read");
    std::array<std::uint32_t, 3> tri;
    for (std::uint32_t& v : tri) {
      v = c.u32();
      if (v >= h.vertex_count) raise(ErrorCode::CorruptContainer, path + ": face index range");
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

}  // namespace rigkit
