// End-to-end checks of the srslab binary: exit codes, emitted files, manifest
// completeness, and byte-level reproducibility of repeated runs.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// one scratch tree per test-binary invocation, wiped up front so stale files
// from an earlier run can't mask a regression
const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "srslab-test-cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliRun run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_file = scratch() / ("stdout." + std::to_string(counter));
  const fs::path err_file = scratch() / ("stderr." + std::to_string(counter));
  ++counter;
  const std::string cmd = "\"" SRSLAB_CLI "\" " + args + " >" + out_file.string() + " 2>" +
                          err_file.string();
  int status = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::string dir_arg(const char* name) {
  return (scratch() / name).string();
}

}  // namespace

TEST_CASE("moments run emits csv and a manifest naming it") {
  const std::string dir = dir_arg("moments");
  CliRun r = run_cli("moments --alphas 1,3 --betas 1,2 --out " + dir);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("moments.csv"));

  const std::string csv = slurp(fs::path(dir) / "moments.csv");
  CHECK(csv.rfind("beta,1,3", 0) == 0);
  CHECK_THAT(csv, ContainsSubstring("0.0685 (0.2746)"));

  const std::string manifest = slurp(fs::path(dir) / "run-manifest");
  CHECK_THAT(manifest, ContainsSubstring("subcommand=moments\n"));
  CHECK_THAT(manifest, ContainsSubstring("alphas=1,3\n"));
  CHECK_THAT(manifest, ContainsSubstring("output.1=moments.csv\n"));
}

TEST_CASE("shape prints the minimum and refuses pole parameters") {
  CliRun ok = run_cli("shape --alpha 5 --beta 3 --out " + dir_arg("shape"));
  REQUIRE(ok.exit_code == 0);
  CHECK_THAT(ok.out, ContainsSubstring("min at x=-3"));
  CHECK_THAT(ok.out, ContainsSubstring("supremum 5"));

  CliRun pole = run_cli("shape --alpha 1 --beta 5 --out " + dir_arg("shape-pole"));
  CHECK(pole.exit_code == 1);
  CHECK_THAT(pole.err, ContainsSubstring("--beta"));
}

TEST_CASE("usage errors exit 1 and name the offending flag") {
  CliRun unknown = run_cli("moments --bogus 3 --out " + dir_arg("e1"));
  CHECK(unknown.exit_code == 1);
  CHECK_THAT(unknown.err, ContainsSubstring("--bogus"));

  CliRun bad_act = run_cli("train --dataset two-moons --act nosuch --out " + dir_arg("e2"));
  CHECK(bad_act.exit_code == 1);
  CHECK_THAT(bad_act.err, ContainsSubstring("nosuch"));

  CliRun bad_lr = run_cli("train --dataset two-moons --lr -1 --out " + dir_arg("e3"));
  CHECK(bad_lr.exit_code == 1);
  CHECK_THAT(bad_lr.err, ContainsSubstring("--lr"));

  CliRun bad_cfg = run_cli("--config " + dir_arg("absent.cfg") + " moments --out " + dir_arg("e4"));
  CHECK(bad_cfg.exit_code == 1);
  CHECK_THAT(bad_cfg.err, ContainsSubstring("--config"));

  CliRun bad_widths =
      run_cli("train --dataset two-moons --widths 3,8,2 --out " + dir_arg("e5"));
  CHECK(bad_widths.exit_code == 1);
  CHECK_THAT(bad_widths.err, ContainsSubstring("--widths"));
}

TEST_CASE("runtime failures exit 2") {
  CliRun no_data = run_cli("train --dataset fashion-mnist --data-dir " + dir_arg("no-such-dir") +
                           " --steps 10 --out " + dir_arg("e6"));
  CHECK(no_data.exit_code == 2);
  CHECK_THAT(no_data.err, ContainsSubstring("failure:"));

  // an absurd tolerance turns a healthy gradient check into a reported failure
  CliRun strict = run_cli("gradcheck --acts relu --widths 4,6,3 --batches 1 --samples 4 "
                          "--tol 1e-18 --out " + dir_arg("e7"));
  CHECK(strict.exit_code == 2);
}

TEST_CASE("gradcheck passes its own default tolerance") {
  CliRun r = run_cli("gradcheck --acts srs,relu --widths 4,6,3 --batches 2 --samples 6 --out " +
                     dir_arg("gradcheck"));
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("srs"));
  CHECK_THAT(r.out, ContainsSubstring("overall max_rel_error"));
  const std::string manifest = slurp(fs::path(dir_arg("gradcheck")) / "run-manifest");
  CHECK_THAT(manifest, ContainsSubstring("subcommand=gradcheck\n"));
  CHECK_THAT(manifest, ContainsSubstring("acts=srs,relu\n"));
}

TEST_CASE("iterate writes one trajectory per run with stepped seeds") {
  const std::string dir = dir_arg("iterate");
  CliRun r = run_cli("iterate --act srs --iters 20 --runs 2 --seed 5 --out " + dir);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(fs::path(dir) / "trajectory_srs_seed5.csv"));
  CHECK(fs::exists(fs::path(dir) / "trajectory_srs_seed6.csv"));

  const std::string manifest = slurp(fs::path(dir) / "run-manifest");
  CHECK_THAT(manifest, ContainsSubstring("output.1=trajectory_srs_seed5.csv\n"));
  CHECK_THAT(manifest, ContainsSubstring("output.2=trajectory_srs_seed6.csv\n"));

  const std::string csv = slurp(fs::path(dir) / "trajectory_srs_seed5.csv");
  CHECK(csv.rfind("iter,x,dx\n", 0) == 0);
}

TEST_CASE("landscape emits an image and csv per activation") {
  const std::string dir = dir_arg("landscape");
  CliRun r = run_cli("landscape --acts srs,relu --height 8 --width 10 --out " + dir);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("srs roughness="));
  CHECK_THAT(r.out, ContainsSubstring("relu roughness="));

  const std::string pgm = slurp(fs::path(dir) / "landscape_srs.pgm");
  CHECK(pgm.rfind("P5\n10 8\n255\n", 0) == 0);
  CHECK(fs::exists(fs::path(dir) / "landscape_srs.csv"));
  CHECK(fs::exists(fs::path(dir) / "landscape_relu.pgm"));
  CHECK(fs::exists(fs::path(dir) / "landscape_relu.csv"));

  const std::string manifest = slurp(fs::path(dir) / "run-manifest");
  for (const char* name : {"landscape_srs.pgm", "landscape_srs.csv", "landscape_relu.pgm",
                           "landscape_relu.csv"}) {
    CHECK_THAT(manifest, ContainsSubstring("=" + std::string(name) + "\n"));
  }
}

TEST_CASE("flags override config file values") {
  const fs::path cfg = scratch() / "precedence.cfg";
  {
    std::ofstream out(cfg);
    out << "lr=0.5\nsteps=37\nnoise=0.1\n";
  }
  const std::string dir = dir_arg("precedence");
  CliRun r = run_cli("--config " + cfg.string() + " train --dataset two-moons --lr 0.05 --out " +
                     dir);
  REQUIRE(r.exit_code == 0);
  const std::string manifest = slurp(fs::path(dir) / "run-manifest");
  CHECK_THAT(manifest, ContainsSubstring("lr=0.05\n"));
  CHECK_THAT(manifest, ContainsSubstring("steps=37\n"));
  CHECK_THAT(manifest, ContainsSubstring("noise=0.1\n"));
}

TEST_CASE("identical invocations reproduce every byte") {
  const std::string args = "train --dataset two-moons --steps 120 --lr 0.1 --widths 2,16,16,2 ";
  CliRun a = run_cli(args + "--out " + dir_arg("repro-a"));
  CliRun b = run_cli(args + "--out " + dir_arg("repro-b"));
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(fs::path(dir_arg("repro-a")) / "metrics_srs.csv") ==
        slurp(fs::path(dir_arg("repro-b")) / "metrics_srs.csv"));
  CHECK(slurp(fs::path(dir_arg("repro-a")) / "run-manifest") ==
        slurp(fs::path(dir_arg("repro-b")) / "run-manifest"));

  CliRun c = run_cli(args + "--seed 2 --out " + dir_arg("repro-c"));
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(fs::path(dir_arg("repro-a")) / "metrics_srs.csv") !=
        slurp(fs::path(dir_arg("repro-c")) / "metrics_srs.csv"));
}

TEST_CASE("a manifest replayed as config reproduces the run") {
  const std::string first = dir_arg("replay-a");
  CliRun a = run_cli("train --dataset two-moons --act elu --steps 90 --lr 0.2 --noise 0.15 "
                     "--widths 2,12,12,2 --seed 3 --out " + first);
  REQUIRE(a.exit_code == 0);

  const std::string second = dir_arg("replay-b");
  CliRun b = run_cli("--config " + first + "/run-manifest train --out " + second);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(fs::path(first) / "metrics_elu.csv") ==
        slurp(fs::path(second) / "metrics_elu.csv"));
}

TEST_CASE("ablate prints the csv it writes") {
  const std::string dir = dir_arg("ablate");
  CliRun r = run_cli("ablate --dataset two-moons --acts relu,srs --lrs 0.05 --bns 0 "
                     "--steps 60 --widths 2,8,8,2 --out " + dir);
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(fs::path(dir) / "ablation.csv");
  CHECK(r.out == csv);
  CHECK(csv.rfind("model,lr0.05\n", 0) == 0);
  CHECK_THAT(csv, ContainsSubstring("\nrelu,"));
  CHECK_THAT(csv, ContainsSubstring("\nsrs,"));

  const std::string manifest = slurp(fs::path(dir) / "run-manifest");
  CHECK_THAT(manifest, ContainsSubstring("subcommand=ablate\n"));
  CHECK_THAT(manifest, ContainsSubstring("output.1=ablation.csv\n"));
}
