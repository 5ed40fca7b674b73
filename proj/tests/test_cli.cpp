#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(XCT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kTinyConfig =
    "[phantom]\n"
    "height = 16\n"
    "width = 16\n"
    "n_steps = 8\n"
    "save_every = 1\n"
    "seed = 77\n"
    "\n"
    "[scan]\n"
    "n_theta = 8\n"
    "k = 2\n"
    "n_det = -1\n"
    "\n"
    "[reconstruct]\n"
    "outer_iters = 2\n"
    "inr_updates = 2\n"
    "cgls_iters = 4\n"
    "mapping_size = 8\n"
    "hidden = 8\n"
    "layers = 2\n"
    "downsample = 2\n"
    "\n"
    "[metrics]\n"
    "masked = true\n";

}  // namespace

TEST_CASE("cli: help and argument errors") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("phantom --help") == 0);
  CHECK(run_cli("definitely-not-a-subcommand") == 2);
  CHECK(run_cli("") == 2);                       // a subcommand is required
  CHECK(run_cli("phantom") == 2);                // --out is required
  CHECK(run_cli("reconstruct --stack /nonexistent --out /tmp/xct_cli_nope") != 0);
}

TEST_CASE("cli: full pipeline on a tiny problem") {
  const fs::path root = fresh_dir("xct_cli_pipe");
  write_file(root / "config.ini", kTinyConfig);
  const std::string cfg = " --config " + (root / "config.ini").string();

  // phantom
  REQUIRE(run_cli("phantom" + cfg + " --out " + (root / "seq").string()) == 0);
  CHECK(fs::exists(root / "seq" / "frame_0000.raw"));
  CHECK(fs::exists(root / "seq" / "frame_0008.raw"));  // 8 steps, save_every 1 → 9 frames
  CHECK_FALSE(fs::exists(root / "seq" / "frame_0009.raw"));
  CHECK(fs::exists(root / "seq" / "phantom_meta.txt"));
  CHECK(fs::exists(root / "seq" / "manifest.txt"));
  CHECK(fs::exists(root / "seq" / "resolved_config.ini"));

  // scan
  REQUIRE(run_cli("scan" + cfg + " --sequence " + (root / "seq").string() + " --out " +
                  (root / "scan").string()) == 0);
  CHECK(fs::exists(root / "scan" / "stack_meta.txt"));
  CHECK(fs::exists(root / "scan" / "data.raw"));
  CHECK(fs::exists(root / "scan" / "gt_0000.raw"));
  CHECK(fs::exists(root / "scan" / "gt_0001.raw"));
  CHECK_FALSE(fs::exists(root / "scan" / "counts.raw"));  // noiseless

  // reconstruct, both methods
  REQUIRE(run_cli("reconstruct" + cfg + " --stack " + (root / "scan").string() +
                  " --method fbp --out " + (root / "fbp").string()) == 0);
  CHECK(fs::exists(root / "fbp" / "recon_0000.raw"));
  CHECK(fs::exists(root / "fbp" / "recon_0001.raw"));
  CHECK(fs::exists(root / "fbp" / "recon_meta.txt"));
  REQUIRE(run_cli("reconstruct" + cfg + " --stack " + (root / "scan").string() +
                  " --method admm-inr --out " + (root / "admm").string()) == 0);
  CHECK(fs::exists(root / "admm" / "recon_0000.raw"));
  CHECK(fs::exists(root / "admm" / "history.csv"));
  CHECK(fs::exists(root / "admm" / "model.ckpt"));

  // metrics
  REQUIRE(run_cli("metrics" + cfg + " --recon " + (root / "fbp").string() + " --stack " +
                  (root / "scan").string() + " --out " + (root / "m").string()) == 0);
  const std::string csv = slurp(root / "m" / "metrics.csv");
  CHECK(csv.find("frame,psnr_db,ssim") == 0);
  CHECK(csv.find("mean,") != std::string::npos);

  // export-png
  REQUIRE(run_cli("export-png --in " + (root / "fbp").string() + " --gt " +
                  (root / "seq").string() + " --out " + (root / "png").string()) == 0);
  CHECK(fs::exists(root / "png" / "export_meta.txt"));
  int pngs = 0;
  for (const auto& e : fs::directory_iterator(root / "png"))
    if (e.path().extension() == ".png") ++pngs;
  CHECK(pngs == 2);
}

TEST_CASE("cli: config validation failures exit with code 2") {
  const fs::path root = fresh_dir("xct_cli_bad");
  write_file(root / "bad_key.ini", "[phantom]\nmobillity = 2\n");
  CHECK(run_cli("phantom --config " + (root / "bad_key.ini").string() + " --out " +
                (root / "out1").string()) == 2);

  write_file(root / "bad_section.ini", "[phantasm]\nheight = 16\n");
  CHECK(run_cli("phantom --config " + (root / "bad_section.ini").string() + " --out " +
                (root / "out2").string()) == 2);

  write_file(root / "bad_value.ini", "[phantom]\nheight = tall\n");
  CHECK(run_cli("phantom --config " + (root / "bad_value.ini").string() + " --out " +
                (root / "out3").string()) == 2);

  // WLS requested on a noiseless stack (no photon counts stored).
  write_file(root / "tiny.ini", kTinyConfig);
  const std::string cfg = " --config " + (root / "tiny.ini").string();
  REQUIRE(run_cli("phantom" + cfg + " --out " + (root / "seq").string()) == 0);
  REQUIRE(run_cli("scan" + cfg + " --sequence " + (root / "seq").string() + " --out " +
                  (root / "scan").string()) == 0);
  CHECK(run_cli("reconstruct" + cfg + " --stack " + (root / "scan").string() +
                " --method fbp --wls --out " + (root / "r").string()) == 2);
  CHECK(run_cli("reconstruct" + cfg + " --stack " + (root / "scan").string() +
                " --method shearlet --out " + (root / "r2").string()) == 2);
}

TEST_CASE("cli: reruns are byte-identical") {
  const fs::path root = fresh_dir("xct_cli_det");
  write_file(root / "config.ini", kTinyConfig);
  const std::string cfg = " --config " + (root / "config.ini").string();

  REQUIRE(run_cli("phantom" + cfg + " --out " + (root / "a").string()) == 0);
  REQUIRE(run_cli("phantom" + cfg + " --out " + (root / "b").string()) == 0);
  for (int t = 0; t < 9; ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.raw", t);
    const std::string fa = slurp(root / "a" / name);
    const std::string fb = slurp(root / "b" / name);
    REQUIRE(!fa.empty());
    CHECK(fa == fb);
  }

  REQUIRE(run_cli("scan" + cfg + " --sequence " + (root / "a").string() + " --out " +
                  (root / "s1").string()) == 0);
  REQUIRE(run_cli("scan" + cfg + " --sequence " + (root / "a").string() + " --out " +
                  (root / "s2").string()) == 0);
  CHECK(slurp(root / "s1" / "data.raw") == slurp(root / "s2" / "data.raw"));
  CHECK(!slurp(root / "s1" / "data.raw").empty());
}

TEST_CASE("cli: adjoint certification subcommand") {
  CHECK(run_cli("certify-adjoint --height 16 --width 16 --angles 6 --pairs 3 --dets 24") == 0);
}
