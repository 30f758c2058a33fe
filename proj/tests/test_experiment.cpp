#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "tdm/experiment.hpp"
#include "tdm/image_io.hpp"
#include "tdm/metrics.hpp"
#include "test_util.hpp"

using namespace tdm;
using namespace tdmtest;

namespace {

ExperimentSpec tiny_ct_spec(const std::string& outdir) {
  ExperimentSpec spec;
  spec.task = "ct";
  spec.phantom = "ellipses";
  spec.size = 32;
  spec.phantom_seed = 3;
  spec.angles = 12;
  spec.noise = 0.05;
  spec.noise_seed = 7;
  spec.run.lev = 1;
  spec.run.outer_iters = 2;
  spec.run.inner_iters = 4;
  spec.run.pd.max_iters = 250;
  spec.run.reg.max_outer = 6;
  spec.run.alpha = 0.02;
  spec.run.beta = 0.2;
  spec.run.reg_scale = 0.05;
  spec.outdir = outdir;
  return spec;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("phantom pairs are deterministic and dissimilar enough") {
  const PhantomPair a = gen_phantom("ellipses", 64, 42);
  const PhantomPair b = gen_phantom("ellipses", 64, 42);
  CHECK((a.reference.array() == b.reference.array()).all());
  CHECK((a.target.array() == b.target.array()).all());
  CHECK(ssim(a.reference, a.target) < 0.95);

  const PhantomPair t = gen_phantom("triangles-to-stars", 64, 1);
  CHECK(ssim(t.reference, t.target) < 0.95);

  const PhantomPair brain = gen_phantom("brain-like", 64, 2);
  CHECK(brain.has_detail);
  CHECK(ssim(brain.reference, brain.target) < 0.95);

  CHECK_THROWS(gen_phantom("squares", 64, 1));
  CHECK_THROWS(gen_phantom("ellipses", 16, 1));
}

TEST_CASE("static detail variants change the image only inside the bbox") {
  const PhantomPair p = gen_phantom("ellipses-detail-static", 64, 5);
  CHECK(p.has_detail);
  bool differs_inside = false;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      const bool inside = i >= p.detail_x0 && i < p.detail_x1 && j >= p.detail_y0 &&
                          j < p.detail_y1;
      if (inside) {
        if (p.reference(i, j) != p.target(i, j)) differs_inside = true;
      } else {
        CHECK(p.reference(i, j) == p.target(i, j));
      }
    }
  CHECK(differs_inside);
}

TEST_CASE("spec parsing echoes canonically and rejects unknown keys") {
  const std::string text =
      "task = ct\n"
      "# a comment line\n"
      "phantom = brain-like\n"
      "size = 64\n"
      "alpha = 0.025\n"
      "beta = 0.5\n"
      "reg_scale = 0.08\n"
      "lev = 5\n";
  const ExperimentSpec spec = parse_spec_text(text);
  CHECK(spec.run.alpha == 0.025);
  CHECK(spec.run.beta == 0.5);
  CHECK(spec.run.reg_scale == 0.08);
  CHECK(spec.run.lev == 5);

  const std::string echo = spec_echo(spec);
  const ExperimentSpec again = parse_spec_text(echo);
  CHECK(spec_echo(again) == echo);
  CHECK(spec_hash(again) == spec_hash(spec));

  CHECK_THROWS(parse_spec_text("unknown_key = 1\n"));
  CHECK_THROWS(parse_spec_text("task ct\n"));
  CHECK_THROWS(parse_spec_text("baseline_l2tv = maybe\n"));
}

TEST_CASE("run_experiment emits a reproducible report") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "tdm_exp_test";
  fs::remove_all(dir);
  ExperimentSpec spec = tiny_ct_spec(dir.string());

  const ExperimentReport rep1 = run_experiment(spec);
  REQUIRE(rep1.rows.size() == 2);
  CHECK(rep1.rows[0].method == "tdm-inv");
  CHECK(rep1.rows[1].method == "l2tv");
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "reference.pfm"));
  CHECK(fs::exists(dir / "tdm-inv.pfm"));
  CHECK(fs::exists(dir / "config.txt"));
  CHECK(fs::exists(dir / "tdm-inv-log.csv"));

  // rerun: numeric columns identical, only runtime may differ
  const ExperimentReport rep2 = run_experiment(spec, false);
  for (size_t i = 0; i < rep1.rows.size(); ++i) {
    CHECK(rep1.rows[i].method == rep2.rows[i].method);
    CHECK(rep1.rows[i].ssim_val == rep2.rows[i].ssim_val);
    CHECK(rep1.rows[i].psnr_val == rep2.rows[i].psnr_val);
  }
  CHECK(rep1.config_hash_hex == rep2.config_hash_hex);

  // written artifacts round-trip losslessly enough to rank methods
  const Image recon = read_pfm((dir / "tdm-inv.pfm").string());
  CHECK(recon.n1() == 32);
  fs::remove_all(dir);
}

TEST_CASE("output root environment variable redirects artifacts") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "tdm_root_test";
  fs::remove_all(root);
  setenv("TDMINV_OUTPUT_ROOT", root.c_str(), 1);
  ExperimentSpec spec = tiny_ct_spec("exp_subdir");
  spec.run.outer_iters = 1;
  spec.run.inner_iters = 2;
  spec.baseline_l2tv = false;
  simulate_data(spec);
  unsetenv("TDMINV_OUTPUT_ROOT");
  CHECK(fs::exists(root / "exp_subdir" / "data.pfm"));
  CHECK(fs::exists(root / "exp_subdir" / "data.txt"));
  fs::remove_all(root);
}

TEST_CASE("grid_search returns singleton grids verbatim and ranks cells") {
  ExperimentSpec spec = tiny_ct_spec("");
  spec.run.outer_iters = 1;
  spec.run.inner_iters = 2;
  spec.run.pd.max_iters = 150;
  spec.run.reg.max_outer = 4;

  const GridSearchResult single = grid_search(spec, {0.02}, {0.2}, {0.05});
  CHECK(single.alpha == 0.02);
  CHECK(single.beta == 0.2);
  CHECK(single.reg_scale == 0.05);
  CHECK(single.table.size() == 2);  // header + one cell

  // a sane alpha beats an absurd one on the same problem
  const GridSearchResult two = grid_search(spec, {0.02, 50.0}, {0.2}, {0.05});
  CHECK(two.table.size() == 3);
  CHECK(two.alpha == 0.02);

  CHECK_THROWS(grid_search(spec, {}, {0.2}, {0.05}));
}

TEST_CASE("pgm and pfm round trips") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "tdm_io_test";
  fs::create_directories(dir);
  const Image img = random_image(17, 9, 77);

  write_pfm((dir / "a.pfm").string(), img);
  const Image back = read_pfm((dir / "a.pfm").string());
  CHECK((back.array() - img.array()).abs().maxCoeff() < 1e-7);  // float32 round

  write_pgm((dir / "a.pgm").string(), img, 65535);
  const Image q = read_pgm((dir / "a.pgm").string());
  CHECK((q.array() - img.array()).abs().maxCoeff() < 1.0 / 65535);

  write_pgm((dir / "b.pgm").string(), img, 255);
  const Image q8 = read_pgm((dir / "b.pgm").string());
  CHECK((q8.array() - img.array()).abs().maxCoeff() < 1.0 / 255);
  fs::remove_all(dir);
}

}  // TEST_SUITE
