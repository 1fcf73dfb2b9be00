#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "rigkit/trajectory.hpp"
#include "rigkit/transform.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

RunResult run_cli(const std::string& dir, const std::string& args) {
  const std::string out_path = testutil::path_in(dir, "stdout.txt");
  const std::string err_path = testutil::path_in(dir, "stderr.txt");
  const std::string cmd =
      std::string(RIGKIT_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("the full pipeline runs through every subcommand") {
  const std::string dir = testutil::scratch_dir("cli_pipeline");
  const std::string cap = testutil::path_in(dir, "cap.rmrc");

  const RunResult sim = run_cli(dir, "simulate --out " + cap + " --duration 0.1");
  CHECK(sim.exit_code == 0);
  CHECK(sim.out.find("records") != std::string::npos);
  REQUIRE(fs::exists(cap));
  REQUIRE(fs::exists(cap + ".truth.json"));

  SUBCASE("inspect summarizes all twelve streams") {
    const RunResult r = run_cli(dir, "inspect " + cap + " --json");
    CHECK(r.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["streams"].size() == 12);
    const RunResult text = run_cli(dir, "inspect " + cap);
    CHECK(text.exit_code == 0);
    CHECK(text.out.find("vlc_left_front") != std::string::npos);
  }

  SUBCASE("validate passes a clean capture") {
    const RunResult r = run_cli(dir, "validate " + cap);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("OK:") != std::string::npos);
  }

  SUBCASE("validate rejects a flipped byte with a data error") {
    std::string bytes = slurp(cap);
    bytes[bytes.size() / 3] ^= 0x10;
    const std::string bad = testutil::path_in(dir, "bad.rmrc");
    std::ofstream(bad, std::ios::binary).write(bytes.data(), std::streamsize(bytes.size()));
    const RunResult r = run_cli(dir, "validate " + bad);
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
  }

  SUBCASE("sync writes one manifest line per reference frame") {
    const std::string manifest = testutil::path_in(dir, "bundles.jsonl");
    const RunResult r = run_cli(dir, "sync " + cap + " --ref 5 --out " + manifest);
    CHECK(r.exit_code == 0);
    std::ifstream in(manifest);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
      const nlohmann::json j = nlohmann::json::parse(line);
      CHECK(j["ref_stream"] == 5);
      CHECK(j["matches"].is_array());
      ++lines;
    }
    CHECK(lines == 1);  // long throw runs at 5 fps: one frame in 0.1 s
  }

  SUBCASE("unproject emits a world-frame point cloud") {
    const std::string ply = testutil::path_in(dir, "cloud.ply");
    const RunResult r =
        run_cli(dir, "unproject " + cap + " --stream 5 --index 0 --frame world --out " + ply);
    CHECK(r.exit_code == 0);
    CHECK(slurp(ply).rfind("ply\n", 0) == 0);
  }

  SUBCASE("triangulate reports a midpoint and gap") {
    const RunResult r = run_cli(dir, "triangulate " + cap +
                                         " --stream-a 0 --pixel-a 400 240"
                                         " --stream-b 2 --pixel-b 200 240");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("point_rig") != std::string::npos);
    CHECK(r.out.find("gap_m") != std::string::npos);
  }

  SUBCASE("integrate then mesh produce a volume and a PLY surface") {
    const std::string vol = testutil::path_in(dir, "vol.rmtv");
    const RunResult r =
        run_cli(dir, "integrate " + cap + " --voxel 0.05 --max-frames 1 --out " + vol);
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(vol));
    const std::string ply = testutil::path_in(dir, "mesh.ply");
    const RunResult m = run_cli(dir, "mesh " + vol + " --out " + ply);
    CHECK(m.exit_code == 0);
    CHECK(m.out.find("vertices") != std::string::npos);
    CHECK(slurp(ply).rfind("ply\n", 0) == 0);
  }

  SUBCASE("export dumps raw payload and timestamp files") {
    const std::string out_dir = testutil::path_in(dir, "dump");
    const RunResult r = run_cli(dir, "export " + cap + " --out " + out_dir);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out_dir + "/stream_0_LEFT_FRONT.bin"));
    CHECK(fs::exists(out_dir + "/stream_5_DEPTH_LONG_THROW_timestamps.txt"));
  }
}

TEST_CASE("identical seeds reproduce the container byte for byte") {
  const std::string dir = testutil::scratch_dir("cli_repro");
  // The stock config is noise-free, so give the seed some bytes to touch.
  nlohmann::json cfg = nlohmann::json::parse(run_cli(dir, "simulate --print-default-config").out);
  cfg["noise"]["depth_sigma_m"] = 0.004;
  cfg["noise"]["invalid_probability"] = 0.05;
  const std::string cfg_path = testutil::path_in(dir, "noisy.json");
  std::ofstream(cfg_path) << cfg.dump(1);
  const std::string base = "simulate --config " + cfg_path + " --duration 0.05 ";
  const std::string a = testutil::path_in(dir, "a.rmrc");
  const std::string b = testutil::path_in(dir, "b.rmrc");
  CHECK(run_cli(dir, base + "--out " + a + " --seed 9").exit_code == 0);
  CHECK(run_cli(dir, base + "--out " + b + " --seed 9").exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  const std::string c = testutil::path_in(dir, "c.rmrc");
  CHECK(run_cli(dir, base + "--out " + c + " --seed 10").exit_code == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("a custom config drives the simulation") {
  const std::string dir = testutil::scratch_dir("cli_config");
  const RunResult dump = run_cli(dir, "simulate --print-default-config");
  CHECK(dump.exit_code == 0);
  nlohmann::json cfg = nlohmann::json::parse(dump.out);
  cfg["duration_s"] = 0.05;
  cfg["streams"]["vlc"] = false;
  const std::string cfg_path = testutil::path_in(dir, "scene.json");
  std::ofstream(cfg_path) << cfg.dump(1);
  const std::string cap = testutil::path_in(dir, "cap.rmrc");
  CHECK(run_cli(dir, "simulate --config " + cfg_path + " --out " + cap).exit_code == 0);
  const RunResult ins = run_cli(dir, "inspect " + cap + " --json");
  const nlohmann::json j = nlohmann::json::parse(ins.out);
  CHECK(j["streams"].size() == 8);  // four VLC streams dropped
}

TEST_CASE("ate scores trajectory files") {
  const std::string dir = testutil::scratch_dir("cli_ate");
  rigkit::PoseTrajectory traj;
  for (int i = 0; i < 10; ++i) {
    rigkit::RigidTransformd p = rigkit::rotation_about_y(0.1 * i);
    p.translation = rigkit::Vec3d(0.2 * i, 0.0, 1.0);
    traj.append({rigkit::Timestamp{1000u + 100u * std::uint64_t(i)}, p});
  }
  const std::string est = testutil::path_in(dir, "est.txt");
  const std::string ref = testutil::path_in(dir, "ref.txt");
  rigkit::save_trajectory(est, traj);
  rigkit::save_trajectory(ref, traj);
  const RunResult r = run_cli(dir, "ate " + est + " " + ref);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("pairs 10") != std::string::npos);
  CHECK(r.out.find("rmse_m 0\n") != std::string::npos);
}

TEST_CASE("usage and data errors use distinct exit codes") {
  const std::string dir = testutil::scratch_dir("cli_errors");
  CHECK(run_cli(dir, "frobnicate").exit_code == 1);
  CHECK(run_cli(dir, "inspect").exit_code == 1);
  CHECK(run_cli(dir, "simulate --out x.rmrc --no-such-flag").exit_code == 1);
  CHECK(run_cli(dir, "").exit_code == 1);

  const RunResult missing = run_cli(dir, "inspect " + testutil::path_in(dir, "absent.rmrc"));
  CHECK(missing.exit_code == 2);
  CHECK(!missing.err.empty());

  const std::string junk = testutil::path_in(dir, "junk.rmrc");
  std::ofstream(junk, std::ios::binary) << "this is not a container";
  CHECK(run_cli(dir, "validate " + junk).exit_code == 2);
  CHECK(run_cli(dir, "sync " + junk + " --ref 5 --out x.jsonl").exit_code == 2);

  // A config that fails schema validation is a data error, not a crash.
  const std::string bad_cfg = testutil::path_in(dir, "bad.json");
  std::ofstream(bad_cfg) << R"({"trajectory": {"teleport": {}}})";
  const RunResult bad = run_cli(dir, "simulate --config " + bad_cfg + " --out y.rmrc");
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("error:") != std::string::npos);
}
