#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rigkit/cloud.hpp"
#include "rigkit/container.hpp"
#include "rigkit/mesh.hpp"
#include "rigkit/ply.hpp"
#include "rigkit/sim/simulator.hpp"
#include "rigkit/sync.hpp"
#include "rigkit/trajectory.hpp"
#include "rigkit/trajectory_eval.hpp"
#include "rigkit/tsdf.hpp"

namespace {

using namespace rigkit;

std::uint16_t find_stream(const ContainerReader& reader, StreamKind kind, const char* what) {
  for (const StreamDescriptor& d : reader.descriptors()) {
    if (d.kind == kind) return d.stream_id;
  }
  raise(ErrorCode::UnknownStream, std::string("container has no ") + what + " stream");
}

const StreamDescriptor& descriptor_for(const ContainerReader& reader, std::uint16_t id) {
  for (const StreamDescriptor& d : reader.descriptors()) {
    if (d.stream_id == id) return d;
  }
  raise(ErrorCode::UnknownStream, "no stream with id " + std::to_string(id));
}

DecodedDepth decoded_depth_at(const ContainerReader& reader, const StreamDescriptor& desc,
                              std::size_t index, AbFrame* ab_out) {
  if (desc.kind == StreamKind::DEPTH_LONG_THROW) {
    LongThrowFrame f = reader.read_long_throw(desc.stream_id, index);
    if (ab_out) *ab_out = f.ab;
    return decode_long_throw(validate_long_throw(f.depth, f.sigma));
  }
  if (desc.kind == StreamKind::DEPTH_AHAT) {
    AhatFrame f = reader.read_ahat(desc.stream_id, index);
    if (ab_out) *ab_out = f.ab;
    return decode_ahat(f.depth);
  }
  raise(ErrorCode::ModeMismatch,
        "stream " + std::to_string(desc.stream_id) + " is not a depth stream");
}

PoseTrajectory head_trajectory(const ContainerReader& reader) {
  return reader.read_pose_trajectory(find_stream(reader, StreamKind::HEAD_POSE, "head pose"));
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<double> duration,
                 std::optional<int> threads) {
  sim::SimConfig cfg = config_path.empty() ? sim::parse_sim_config(sim::default_sim_config_text())
                                           : sim::load_sim_config(config_path);
  if (seed) cfg.noise.seed = *seed;
  if (duration) cfg.trajectory.duration_s = *duration;
  if (threads) cfg.threads = *threads;
  const sim::SimSummary summary = sim::simulate(cfg, out_path);
  std::cout << "wrote " << summary.record_count << " records to " << summary.container_path
            << "\nground truth: " << summary.sidecar_path << "\n";
  return 0;
}

int cmd_inspect(const std::string& input, bool as_json, const std::string& out_path) {
  const InspectReport report = inspect_container(input);
  const std::string text = as_json ? report.to_json() : report.to_text();
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) raise(ErrorCode::IoError, "cannot create " + out_path);
    out << text;
  }
  return 0;
}

int cmd_validate(const std::string& input) {
  const std::vector<std::string> violations = check_container(input);
  if (violations.empty()) {
    std::cout << "OK: " << input << "\n";
    return 0;
  }
  for (const std::string& v : violations) std::cerr << "violation: " << v << "\n";
  std::cerr << input << ": " << violations.size() << " violation(s)\n";
  return 2;
}

int cmd_sync(const std::string& input, int ref_stream, const std::string& out_path,
             std::optional<std::uint64_t> tol_ticks) {
  const ContainerReader reader = ContainerReader::open(input);
  const std::uint16_t ref = static_cast<std::uint16_t>(ref_stream);
  const StreamDescriptor& desc = descriptor_for(reader, ref);
  const std::uint64_t tol =
      tol_ticks ? *tol_ticks : default_tolerance_ticks(desc.nominal_fps);
  const PoseTrajectory traj = head_trajectory(reader);
  const std::vector<FrameBundle> bundles = build_bundles(reader, ref, tol, traj);
  write_bundle_manifest(bundles, out_path);
  std::cout << "wrote " << bundles.size() << " bundles to " << out_path << "\n";
  return 0;
}

int cmd_unproject(const std::string& input, int stream, std::size_t index,
                  const std::string& out_path, const std::string& frame) {
  const ContainerReader reader = ContainerReader::open(input);
  const StreamDescriptor& desc = descriptor_for(reader, static_cast<std::uint16_t>(stream));
  if (!desc.camera) {
    raise(ErrorCode::ModeMismatch, "stream " + std::to_string(stream) + " has no camera model");
  }
  AbFrame ab;
  const DecodedDepth depth = decoded_depth_at(reader, desc, index, &ab);
  PointCloud cloud = unproject_depth(depth, ab, *desc.camera);
  if (frame == "rig") {
    cloud = transform_cloud(cloud, desc.rig_from_sensor, FrameTag::Rig);
  } else if (frame == "world") {
    const PoseTrajectory traj = head_trajectory(reader);
    const Timestamp t = reader.index(desc.stream_id)[index].timestamp;
    cloud = transform_cloud(cloud, compose(locate_rig_at(traj, t), desc.rig_from_sensor),
                            FrameTag::World);
  }
  export_ply(cloud, out_path);
  std::cout << "wrote " << cloud.points.size() << " points (" << frame_tag_name(cloud.frame)
            << " frame) to " << out_path << "\n";
  return 0;
}

int cmd_triangulate(const std::string& input, int stream_a, const std::vector<double>& pixel_a,
                    int stream_b, const std::vector<double>& pixel_b) {
  const ContainerReader reader = ContainerReader::open(input);
  auto rig_ray = [&](int stream, const std::vector<double>& pixel) {
    const StreamDescriptor& desc = descriptor_for(reader, static_cast<std::uint16_t>(stream));
    if (!desc.camera) {
      raise(ErrorCode::ModeMismatch, "stream " + std::to_string(stream) + " has no camera model");
    }
    const Vec3d dir_cam = ray_from_pixel(*desc.camera, Vec2d(pixel[0], pixel[1]));
    return make_ray(desc.rig_from_sensor.translation, desc.rig_from_sensor.rotation * dir_cam,
                    FrameTag::Rig);
  };
  const TriangulationResult result = triangulate_midpoint(rig_ray(stream_a, pixel_a),
                                                          rig_ray(stream_b, pixel_b));
  char line[160];
  std::snprintf(line, sizeof line, "point_rig %.9g %.9g %.9g\ngap_m %.9g\n", result.point.x(),
                result.point.y(), result.point.z(), result.gap);
  std::cout << line;
  return 0;
}

int cmd_integrate(const std::string& input, const std::string& out_path, double voxel, double mu,
                  double wmax, std::optional<int> stream, const std::vector<double>& origin_opt,
                  const std::vector<int>& dims_opt, std::size_t max_frames, int threads) {
  const ContainerReader reader = ContainerReader::open(input);
  const std::uint16_t id =
      stream ? static_cast<std::uint16_t>(*stream)
             : find_stream(reader, StreamKind::DEPTH_LONG_THROW, "long-throw depth");
  const StreamDescriptor& desc = descriptor_for(reader, id);
  if (!desc.camera) raise(ErrorCode::ModeMismatch, "depth stream has no camera model");
  const PoseTrajectory traj = head_trajectory(reader);
  const std::size_t total = reader.frame_count(id);
  const std::size_t count = max_frames ? std::min(total, max_frames) : total;
  if (count == 0) raise(ErrorCode::DomainError, "depth stream is empty");

  auto world_from_camera = [&](std::size_t i) {
    const Timestamp t = reader.index(id)[i].timestamp;
    return compose(locate_rig_at(traj, t), desc.rig_from_sensor);
  };

  Vec3d origin;
  std::array<int, 3> dims{};
  if (origin_opt.size() == 3 && dims_opt.size() == 3) {
    origin = Vec3d(origin_opt[0], origin_opt[1], origin_opt[2]);
    dims = {dims_opt[0], dims_opt[1], dims_opt[2]};
  } else {
    // Bounds pass: world-space AABB of the unprojected points from up to
    // eight frames spread across the sequence, padded by the truncation
    // band plus two voxels.
    Vec3d lo = Vec3d::Constant(std::numeric_limits<double>::infinity());
    Vec3d hi = -lo;
    const std::size_t stride = std::max<std::size_t>(1, count / 8);
    for (std::size_t i = 0; i < count; i += stride) {
      const DecodedDepth depth = decoded_depth_at(reader, desc, i, nullptr);
      const PointCloud cloud = transform_cloud(unproject_depth(depth, *desc.camera),
                                               world_from_camera(i), FrameTag::World);
      for (const Vec3d& p : cloud.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    }
    if (!lo.allFinite() || !hi.allFinite()) {
      raise(ErrorCode::DomainError, "no valid depth pixels to bound the volume");
    }
    const double pad = mu + 2 * voxel;
    lo.array() -= pad;
    hi.array() += pad;
    origin = lo;
    for (int a = 0; a < 3; ++a) {
      dims[a] = static_cast<int>(std::ceil((hi(a) - lo(a)) / voxel));
    }
  }

  TsdfVolume vol = make_tsdf_volume(origin, voxel, dims, mu, wmax);
  for (std::size_t i = 0; i < count; ++i) {
    const DecodedDepth depth = decoded_depth_at(reader, desc, i, nullptr);
    tsdf_integrate(vol, depth, *desc.camera, world_from_camera(i), threads);
  }
  save_volume(vol, out_path);
  std::cout << "integrated " << count << " frames into " << dims[0] << "x" << dims[1] << "x"
            << dims[2] << " volume: " << out_path << "\n";
  return 0;
}

int cmd_mesh(const std::string& input, const std::string& out_path) {
  const TsdfVolume vol = load_volume(input);
  const TriangleMesh mesh = extract_mesh(vol);
  export_ply(mesh, out_path);
  const MeshTopology topo = mesh_topology(mesh);
  std::cout << "vertices " << topo.vertex_count << "\nedges " << topo.edge_count << "\nfaces "
            << topo.face_count << "\neuler_characteristic " << topo.euler_characteristic
            << "\nclosed " << (topo.closed ? "true" : "false") << "\nwrote " << out_path << "\n";
  return 0;
}

int cmd_ate(const std::string& est_path, const std::string& ref_path,
            std::optional<std::uint64_t> tol_ticks) {
  const PoseTrajectory est = load_trajectory(est_path);
  const PoseTrajectory ref = load_trajectory(ref_path);
  std::uint64_t tol = std::numeric_limits<std::uint64_t>::max();
  if (tol_ticks) tol = *tol_ticks;
  const AteResult result = trajectory_ate(est, ref, tol);
  std::cout << ate_report(result);
  return 0;
}

int cmd_export(const std::string& input, const std::string& out_dir) {
  export_streams(input, out_dir);
  const ContainerReader reader = ContainerReader::open(input);
  std::cout << "exported " << reader.descriptors().size() << " streams to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sensor rig capture toolkit: simulate, record-style containers, "
               "sync, and reconstruction"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> sim_duration;
  std::optional<int> sim_threads;
  bool sim_print_default = false;
  CLI::App* simulate = app.add_subcommand("simulate", "Render a synthetic capture container");
  simulate->add_option("--config", sim_config, "Sim config JSON (omit for the built-in default)");
  simulate->add_option("--out", sim_out, "Output container path");
  simulate->add_option("--seed", sim_seed, "Noise seed override");
  simulate->add_option("--duration", sim_duration, "Duration override, seconds");
  simulate->add_option("--threads", sim_threads, "Render threads");
  simulate->add_flag("--print-default-config", sim_print_default,
                     "Print the built-in config and exit");

  // inspect
  std::string ins_input, ins_out;
  bool ins_json = false;
  CLI::App* inspect = app.add_subcommand("inspect", "Summarize a container's streams");
  inspect->add_option("input", ins_input, "Container path")->required();
  inspect->add_flag("--json", ins_json, "Emit JSON instead of a table");
  inspect->add_option("--out", ins_out, "Write the report to a file instead of stdout");

  // validate
  std::string val_input;
  CLI::App* validate = app.add_subcommand("validate", "Check container format invariants");
  validate->add_option("input", val_input, "Container path")->required();

  // sync
  std::string sync_input, sync_out;
  int sync_ref = 0;
  std::optional<std::uint64_t> sync_tol;
  CLI::App* sync = app.add_subcommand("sync", "Build frame bundles around a reference stream");
  sync->add_option("input", sync_input, "Container path")->required();
  sync->add_option("--ref", sync_ref, "Reference stream id")->required();
  sync->add_option("--tolerance-ticks", sync_tol,
                   "Association tolerance (default: half the reference period)");
  sync->add_option("--out", sync_out, "Bundle manifest path (JSON lines)")->required();

  // unproject
  std::string unp_input, unp_out, unp_frame = "camera";
  int unp_stream = 5;
  std::size_t unp_index = 0;
  CLI::App* unproject = app.add_subcommand("unproject", "Depth frame to a PLY point cloud");
  unproject->add_option("input", unp_input, "Container path")->required();
  unproject->add_option("--stream", unp_stream, "Depth stream id (default 5, long throw)");
  unproject->add_option("--index", unp_index, "Frame index");
  unproject->add_option("--frame", unp_frame, "Output frame: camera, rig, or world")
      ->check(CLI::IsMember({"camera", "rig", "world"}));
  unproject->add_option("--out", unp_out, "Output PLY path")->required();

  // triangulate
  std::string tri_input;
  int tri_stream_a = 0, tri_stream_b = 2;
  std::vector<double> tri_pixel_a, tri_pixel_b;
  CLI::App* triangulate =
      app.add_subcommand("triangulate", "Midpoint triangulation of two pixel rays");
  triangulate->add_option("input", tri_input, "Container path (for calibration)")->required();
  triangulate->add_option("--stream-a", tri_stream_a, "First camera stream id");
  triangulate->add_option("--pixel-a", tri_pixel_a, "First pixel: u v")
      ->expected(2)
      ->required();
  triangulate->add_option("--stream-b", tri_stream_b, "Second camera stream id");
  triangulate->add_option("--pixel-b", tri_pixel_b, "Second pixel: u v")
      ->expected(2)
      ->required();

  // integrate
  std::string int_input, int_out;
  double int_voxel = 0.02, int_mu = 0.08, int_wmax = 64.0;
  std::optional<int> int_stream;
  std::vector<double> int_origin;
  std::vector<int> int_dims;
  std::size_t int_max_frames = 0;
  int int_threads = 0;
  CLI::App* integrate = app.add_subcommand("integrate", "Fuse depth frames into a TSDF volume");
  integrate->add_option("input", int_input, "Container path")->required();
  integrate->add_option("--voxel", int_voxel, "Voxel size, meters")
      ->check(CLI::PositiveNumber);
  integrate->add_option("--mu", int_mu, "Truncation distance, meters")
      ->check(CLI::PositiveNumber);
  integrate->add_option("--wmax", int_wmax, "Weight cap")->check(CLI::PositiveNumber);
  integrate->add_option("--stream", int_stream, "Depth stream id (default: long throw)");
  integrate->add_option("--origin", int_origin, "Volume origin: x y z (default: auto bounds)")
      ->expected(3);
  integrate->add_option("--dims", int_dims, "Voxel counts: nx ny nz (default: auto bounds)")
      ->expected(3);
  integrate->add_option("--max-frames", int_max_frames, "Integrate at most N frames (0 = all)");
  integrate->add_option("--threads", int_threads, "Worker threads (0 = hardware)");
  integrate->add_option("--out", int_out, "Output volume path")->required();

  // mesh
  std::string mesh_input, mesh_out;
  CLI::App* mesh = app.add_subcommand("mesh", "Extract a triangle mesh from a TSDF volume");
  mesh->add_option("input", mesh_input, "Volume path")->required();
  mesh->add_option("--out", mesh_out, "Output PLY path")->required();

  // ate
  std::string ate_est, ate_ref;
  std::optional<std::uint64_t> ate_tol;
  CLI::App* ate = app.add_subcommand("ate", "Absolute trajectory error between two trajectories");
  ate->add_option("est", ate_est, "Estimated trajectory file")->required();
  ate->add_option("ref", ate_ref, "Reference trajectory file")->required();
  ate->add_option("--tolerance-ticks", ate_tol, "Pairing tolerance (default: unlimited)");

  // export
  std::string exp_input, exp_out;
  CLI::App* exp = app.add_subcommand("export", "Dump raw payloads and timestamps per stream");
  exp->add_option("input", exp_input, "Container path")->required();
  exp->add_option("--out", exp_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // --help exits 0, every usage error exits 1
  }

  try {
    if (simulate->parsed()) {
      if (sim_print_default) {
        std::cout << rigkit::sim::default_sim_config_text();
        return 0;
      }
      if (sim_out.empty()) {
        std::cerr << "simulate: --out is required\n" << simulate->help();
        return 1;
      }
      return cmd_simulate(sim_config, sim_out, sim_seed, sim_duration, sim_threads);
    }
    if (inspect->parsed()) return cmd_inspect(ins_input, ins_json, ins_out);
    if (validate->parsed()) return cmd_validate(val_input);
    if (sync->parsed()) return cmd_sync(sync_input, sync_ref, sync_out, sync_tol);
    if (unproject->parsed()) {
      return cmd_unproject(unp_input, unp_stream, unp_index, unp_out, unp_frame);
    }
    if (triangulate->parsed()) {
      return cmd_triangulate(tri_input, tri_stream_a, tri_pixel_a, tri_stream_b, tri_pixel_b);
    }
    if (integrate->parsed()) {
      return cmd_integrate(int_input, int_out, int_voxel, int_mu, int_wmax, int_stream,
                           int_origin, int_dims, int_max_frames, int_threads);
    }
    if (mesh->parsed()) return cmd_mesh(mesh_input, mesh_out);
    if (ate->parsed()) return cmd_ate(ate_est, ate_ref, ate_tol);
    if (exp->parsed()) return cmd_export(exp_input, exp_out);
  } catch (const rigkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
