#include "tdm/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "tdm/image_io.hpp"
#include "tdm/metrics.hpp"
#include "tdm/palm.hpp"

namespace tdm {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentSpec parse_spec_text(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto as_int = [&] { return std::stoi(val); };
    auto as_double = [&] { return std::stod(val); };
    auto as_u64 = [&] { return static_cast<std::uint64_t>(std::stoull(val)); };
    auto as_bool = [&] {
      if (val == "1" || val == "true" || val == "yes") return true;
      if (val == "0" || val == "false" || val == "no") return false;
      throw std::invalid_argument("config: bad boolean '" + val + "'");
    };

    if (key == "task") spec.task = val;
    else if (key == "phantom") spec.phantom = val;
    else if (key == "size") spec.size = as_int();
    else if (key == "phantom_seed") spec.phantom_seed = as_u64();
    else if (key == "angles") spec.angles = as_int();
    else if (key == "angle_step") spec.angle_step = as_double();
    else if (key == "rays") spec.rays = as_int();
    else if (key == "factor") spec.factor = as_int();
    else if (key == "noise") spec.noise = as_double();
    else if (key == "noise_seed") spec.noise_seed = as_u64();
    else if (key == "lev") spec.run.lev = as_int();
    else if (key == "alpha") spec.run.alpha = as_double();
    else if (key == "beta") spec.run.beta = as_double();
    else if (key == "reg_scale") spec.run.reg_scale = as_double();
    else if (key == "outer_iters") spec.run.outer_iters = as_int();
    else if (key == "inner_iters") spec.run.inner_iters = as_int();
    else if (key == "pd_max_iters") spec.run.pd.max_iters = as_int();
    else if (key == "pd_tol") spec.run.pd.tol = as_double();
    else if (key == "reg_max_outer") spec.run.reg.max_outer = as_int();
    else if (key == "reg_cg_iters") spec.run.reg.cg_iters = as_int();
    else if (key == "reg_grad_tol") spec.run.reg.grad_tol = as_double();
    else if (key == "interp") {
      if (val == "bilinear") spec.run.scheme = Interp::bilinear;
      else if (val == "bicubic") spec.run.scheme = Interp::bicubic;
      else throw std::invalid_argument("config: interp must be bilinear or bicubic");
    }
    else if (key == "ktilde") {
      spec.run.ktilde.clear();
      std::istringstream ks(val);
      std::string tok;
      while (std::getline(ks, tok, ',')) spec.run.ktilde.push_back(std::stoi(trim(tok)));
    }
    else if (key == "seed") spec.run.seed = as_u64();
    else if (key == "palm_K") spec.palm_K = as_int();
    else if (key == "palm_iters") spec.palm_iters = as_int();
    else if (key == "palm_lev") spec.palm_lev = as_int();
    else if (key == "baseline_l2tv") spec.baseline_l2tv = as_bool();
    else if (key == "baseline_bicubic") spec.baseline_bicubic = as_bool();
    else if (key == "l2tv_alpha") spec.l2tv_alpha = as_double();
    else if (key == "outdir") spec.outdir = val;
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str());
}

std::string spec_echo(const ExperimentSpec& s) {
  std::ostringstream os;
  os.precision(17);
  os << "task = " << s.task << "\n"
     << "phantom = " << s.phantom << "\n"
     << "size = " << s.size << "\n"
     << "phantom_seed = " << s.phantom_seed << "\n"
     << "angles = " << s.angles << "\n"
     << "angle_step = " << s.angle_step << "\n"
     << "rays = " << s.rays << "\n"
     << "factor = " << s.factor << "\n"
     << "noise = " << s.noise << "\n"
     << "noise_seed = " << s.noise_seed << "\n"
     << "lev = " << s.run.lev << "\n"
     << "alpha = " << s.run.alpha << "\n"
     << "beta = " << s.run.beta << "\n"
     << "reg_scale = " << s.run.reg_scale << "\n"
     << "outer_iters = " << s.run.outer_iters << "\n"
     << "inner_iters = " << s.run.inner_iters << "\n"
     << "pd_max_iters = " << s.run.pd.max_iters << "\n"
     << "pd_tol = " << s.run.pd.tol << "\n"
     << "reg_max_outer = " << s.run.reg.max_outer << "\n"
     << "reg_cg_iters = " << s.run.reg.cg_iters << "\n"
     << "reg_grad_tol = " << s.run.reg.grad_tol << "\n"
     << "interp = " << (s.run.scheme == Interp::bilinear ? "bilinear" : "bicubic") << "\n";
  os << "ktilde = ";
  for (size_t i = 0; i < s.run.ktilde.size(); ++i)
    os << (i ? "," : "") << s.run.ktilde[i];
  os << "\n"
     << "seed = " << s.run.seed << "\n"
     << "palm_K = " << s.palm_K << "\n"
     << "palm_iters = " << s.palm_iters << "\n"
     << "palm_lev = " << s.palm_lev << "\n"
     << "baseline_l2tv = " << (s.baseline_l2tv ? 1 : 0) << "\n"
     << "baseline_bicubic = " << (s.baseline_bicubic ? 1 : 0) << "\n"
     << "l2tv_alpha = " << s.l2tv_alpha << "\n"
     << "outdir = " << s.outdir << "\n";
  return os.str();
}

std::uint64_t spec_hash(const ExperimentSpec& spec) {
  // FNV-1a over the canonical echo, outdir excluded (it does not affect the
  // numbers).
  std::string text = spec_echo(spec);
  const auto cut = text.find("outdir = ");
  if (cut != std::string::npos) text = text.substr(0, cut);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

struct Problem {
  PhantomPair phantom;
  std::shared_ptr<MeasurementOp> op;
  MeasurementData data_clean;
  MeasurementData data;
};

PhantomPair load_or_generate(const ExperimentSpec& spec) {
  if (spec.phantom.rfind("file:", 0) == 0) {
    const std::string rest = spec.phantom.substr(5);
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("phantom file pair needs 'file:<ref>,<target>'");
    PhantomPair p;
    p.reference = read_pfm(trim(rest.substr(0, comma)));
    p.target = read_pfm(trim(rest.substr(comma + 1)));
    if (!p.reference.same_shape(p.target))
      throw std::invalid_argument("phantom file pair: shape mismatch");
    return p;
  }
  return gen_phantom(spec.phantom, spec.size, spec.phantom_seed);
}

Problem make_problem(const ExperimentSpec& spec) {
  Problem pr;
  pr.phantom = load_or_generate(spec);
  const int n = pr.phantom.reference.n1();

  if (spec.task == "ct") {
    std::vector<double> angs;
    if (spec.angle_step > 0) {
      for (int i = 0; i < spec.angles; ++i) angs.push_back(i * spec.angle_step);
    } else {
      angs = equispaced_angles(spec.angles);
    }
    pr.op = radon_make(n, angs, spec.rays);
  } else if (spec.task == "superres") {
    pr.op = p4_make(n, spec.factor);
  } else if (spec.task == "denoise") {
    pr.op = identity_make(n, pr.phantom.reference.n2());
  } else {
    throw std::invalid_argument("unknown task '" + spec.task + "'");
  }

  pr.data_clean = pr.op->apply(pr.phantom.target);
  pr.data = add_gaussian_noise(pr.data_clean, spec.noise, spec.noise_seed);
  return pr;
}

double region_mse(const Image& a, const Image& b, const PhantomPair& ph) {
  if (!ph.has_detail) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  int count = 0;
  for (int j = ph.detail_y0; j < ph.detail_y1; ++j)
    for (int i = ph.detail_x0; i < ph.detail_x1; ++i) {
      const double d = a(i, j) - b(i, j);
      acc += d * d;
      ++count;
    }
  return acc / std::max(count, 1);
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace

std::string ExperimentReport::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "method,ssim,psnr,detail_mse,runtime_sec,config_hash\n";
  for (const auto& r : rows)
    os << r.method << "," << r.ssim_val << "," << r.psnr_val << "," << r.detail_mse
       << "," << r.runtime_sec << "," << config_hash_hex << "\n";
  return os.str();
}

namespace {

std::string resolve_outdir(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  if (const char* root = std::getenv("TDMINV_OUTPUT_ROOT"))
    return (fs::path(root) / fs::path(spec.outdir).filename()).string();
  return spec.outdir;
}

void write_inputs(const std::string& outdir, const ExperimentSpec& spec,
                  const Problem& pr) {
  std::filesystem::create_directories(outdir);
  write_pfm(outdir + "/reference.pfm", pr.phantom.reference);
  write_pgm(outdir + "/reference.pgm", pr.phantom.reference);
  write_pfm(outdir + "/target.pfm", pr.phantom.target);
  write_pgm(outdir + "/target.pgm", pr.phantom.target);
  write_pfm(outdir + "/data.pfm", Image(pr.data.values));
  std::ofstream side(outdir + "/data.txt");
  side << pr.data.geometry << "\n";
  std::ofstream echo(outdir + "/config.txt");
  echo << spec_echo(spec);
  if (pr.phantom.has_detail) {
    std::ofstream d(outdir + "/detail_bbox.txt");
    d << pr.phantom.detail_x0 << " " << pr.phantom.detail_x1 << " "
      << pr.phantom.detail_y0 << " " << pr.phantom.detail_y1 << "\n";
  }
}

}  // namespace

void simulate_data(const ExperimentSpec& spec) {
  const Problem pr = make_problem(spec);
  write_inputs(resolve_outdir(spec), spec, pr);
}

ExperimentReport run_experiment(const ExperimentSpec& spec, bool write_files) {
  const Problem pr = make_problem(spec);
  const Image& target = pr.phantom.target;
  const std::string outdir = resolve_outdir(spec);

  ExperimentReport report;
  report.phantom = pr.phantom;
  report.config_hash_hex = hex64(spec_hash(spec));

  if (write_files) write_inputs(outdir, spec, pr);

  auto add_row = [&](const std::string& name, const Image& recon, double secs) {
    report.rows.push_back({name, ssim(recon, target), psnr(recon, target),
                           region_mse(recon, target, pr.phantom), secs});
    if (write_files) {
      write_pfm(outdir + "/" + name + ".pfm", recon);
      write_pgm(outdir + "/" + name + ".pgm", recon);
    }
  };

  {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res = run_tdm_inv(pr.phantom.reference, pr.data, pr.op, spec.run, &target);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    report.tdm_log = res.log;
    add_row("tdm-inv", res.path.frame(0), secs);
    if (write_files) {
      write_run_log_csv(outdir + "/tdm-inv-log.csv", res.log);
      for (int k = 0; k <= res.path.K(); ++k)
        write_pfm(outdir + "/path_frame_" + std::to_string(k) + ".pfm",
                  res.path.frames()[static_cast<size_t>(k)]);
    }
  }

  if (spec.palm_K > 0) {
    PalmConfig pc;
    pc.alpha = spec.run.alpha;
    pc.beta = spec.run.beta;
    pc.reg_scale = spec.run.reg_scale;
    pc.K = spec.palm_K;
    pc.max_iters = spec.palm_iters;
    pc.lev = spec.palm_lev;
    pc.pd = spec.run.pd;
    pc.reg = spec.run.reg;
    pc.scheme = spec.run.scheme;
    const auto t0 = std::chrono::steady_clock::now();
    PalmResult res = run_palm(pr.phantom.reference, pr.data, pr.op, pc);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    add_row("tdm-inv-palm", res.path.frame(0), secs);
    if (write_files) {
      std::ofstream log(outdir + "/palm-objective.csv");
      log.precision(17);
      log << "iter,objective\n";
      for (size_t i = 0; i < res.objective.size(); ++i)
        log << i << "," << res.objective[i] << "\n";
    }
  }

  if (spec.baseline_l2tv) {
    const double a = spec.l2tv_alpha > 0 ? spec.l2tv_alpha : spec.run.alpha;
    const auto [n1, n2] = pr.op->grid_shape();
    const auto t0 = std::chrono::steady_clock::now();
    const Image recon = solve_l2tv(*pr.op, pr.data, a, Image(n1, n2), spec.run.pd);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    add_row("l2tv", recon, secs);
  }

  if (spec.baseline_bicubic && spec.task == "superres") {
    const auto t0 = std::chrono::steady_clock::now();
    const Image recon = resize(Image(pr.data.values), target.n1(), target.n2(),
                               Interp::bicubic);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    add_row("bicubic", recon, secs);
  }

  if (write_files) {
    std::ofstream csv(outdir + "/report.csv");
    csv << report.csv();
  }
  return report;
}

GridSearchResult grid_search(const ExperimentSpec& spec,
                             const std::vector<double>& alphas,
                             const std::vector<double>& betas,
                             const std::vector<double>& reg_scales) {
  if (alphas.empty() || betas.empty() || reg_scales.empty())
    throw std::invalid_argument("grid_search: empty grid");

  GridSearchResult best;
  best.ssim_val = -2.0;
  best.psnr_val = -std::numeric_limits<double>::infinity();
  best.table.push_back("alpha,beta,reg_scale,ssim,psnr");

  for (double a : alphas)
    for (double b : betas)
      for (double r : reg_scales) {
        ExperimentSpec cell = spec;
        cell.run.alpha = a;
        cell.run.beta = b;
        cell.run.reg_scale = r;
        cell.baseline_l2tv = false;
        cell.baseline_bicubic = false;
        cell.palm_K = 0;
        const ExperimentReport rep = run_experiment(cell, false);
        const MethodRow& row = rep.rows.front();
        std::ostringstream os;
        os.precision(17);
        os << a << "," << b << "," << r << "," << row.ssim_val << "," << row.psnr_val;
        best.table.push_back(os.str());

        const bool better =
            row.ssim_val > best.ssim_val ||
            (row.ssim_val == best.ssim_val && row.psnr_val > best.psnr_val) ||
            (row.ssim_val == best.ssim_val && row.psnr_val == best.psnr_val &&
             std::tie(a, b, r) < std::tie(best.alpha, best.beta, best.reg_scale));
        if (better) {
          best.alpha = a;
          best.beta = b;
          best.reg_scale = r;
          best.ssim_val = row.ssim_val;
          best.psnr_val = row.psnr_val;
        }
      }
  return best;
}

}  // namespace tdm
