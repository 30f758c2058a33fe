#pragma once

#include <string>
#include <vector>

#include "tdm/energy.hpp"

namespace tdm {

struct RegParams {
  int max_outer = 30;
  int cg_iters = 60;
  double cg_tol = 1e-3;        // relative CG residual
  double armijo_c = 1e-4;      // sufficient-decrease constant, in (0, 1/2]
  double armijo_shrink = 0.5;  // step shrink factor, in (0, 1)
  double grad_tol = 1e-6;      // stop when |grad| <= grad_tol (1 + |R|)

  void validate() const;
};

struct RegIterRow {
  int iter;
  double energy;
  double grad_norm;
  double step;
  bool cg_fallback;
};

using RegLog = std::vector<RegIterRow>;

// Gauss-Newton minimization of R(v; I_a, I_b): the step solves
// (2 J^T J + Q_reg) delta = -grad by matrix-free CG, followed by Armijo
// backtracking from unit step. The returned field never has higher energy
// than v0.
DisplacementField register_pair(const Image& Ia, const Image& Ib,
                                const DisplacementField& v0,
                                const EnergyParams& params, const RegParams& reg,
                                Interp scheme = Interp::bilinear,
                                RegLog* log = nullptr);

void write_reg_log_csv(const std::string& path, const RegLog& log);

}  // namespace tdm
