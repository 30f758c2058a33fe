#include "tdm/registration.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tdm {

void RegParams::validate() const {
  if (max_outer < 1 || cg_iters < 1) throw std::invalid_argument("RegParams: counts must be positive");
  if (!(cg_tol > 0) || !(grad_tol > 0)) throw std::invalid_argument("RegParams: tolerances must be positive");
  if (!(armijo_c > 0) || armijo_c > 0.5) throw std::invalid_argument("RegParams: armijo_c must be in (0, 1/2]");
  if (!(armijo_shrink > 0) || armijo_shrink >= 1) throw std::invalid_argument("RegParams: armijo_shrink must be in (0, 1)");
}

namespace {

// CG on the SPD Gauss-Newton system; returns false on a breakdown
// (non-positive curvature from rounding), in which case delta is unreliable.
bool conjugate_gradient(const std::function<DisplacementField(const DisplacementField&)>& A,
                        const DisplacementField& b, DisplacementField& x,
                        int max_iters, double rel_tol) {
  x = DisplacementField(b.n1(), b.n2());
  DisplacementField r = b;
  DisplacementField p = r;
  double rs = r.dot(r);
  const double stop = rel_tol * rel_tol * rs;
  if (rs == 0) return true;
  for (int it = 0; it < max_iters; ++it) {
    const DisplacementField ap = A(p);
    const double pap = p.dot(ap);
    if (!(pap > 0)) return it > 0;  // keep progress if any was made
    const double alpha = rs / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.dot(r);
    if (rs_new <= stop) return true;
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return true;
}

}  // namespace

DisplacementField register_pair(const Image& Ia, const Image& Ib,
                                const DisplacementField& v0,
                                const EnergyParams& params, const RegParams& reg,
                                Interp scheme, RegLog* log) {
  reg.validate();
  if (Ia.n1() != v0.n1() || Ia.n2() != v0.n2() || !Ia.same_shape(Ib))
    throw std::invalid_argument("register_pair: shape mismatch");

  DisplacementField v = v0;
  for (int outer = 0; outer < reg.max_outer; ++outer) {
    RegistrationEval eval = registration_energy(v, Ia, Ib, params, scheme);
    const double gnorm = eval.grad.norm();
    if (log) log->push_back({outer, eval.value, gnorm, 0.0, false});
    if (gnorm <= reg.grad_tol * (1.0 + std::abs(eval.value))) break;

    DisplacementField delta(v.n1(), v.n2());
    DisplacementField rhs = -1.0 * eval.grad;
    const bool cg_ok = conjugate_gradient(eval.gn_apply, rhs, delta,
                                          reg.cg_iters, reg.cg_tol);
    double slope = eval.grad.dot(delta);
    if (!cg_ok || !(slope < 0)) {
      delta = rhs;  // steepest descent fallback
      slope = -rhs.dot(rhs);
      if (log && !log->empty()) log->back().cg_fallback = true;
    }

    double s = 1.0;
    bool accepted = false;
    while (s > 1e-12) {
      const DisplacementField trial = v + s * delta;
      const double val = registration_value(trial, Ia, Ib, params, scheme);
      if (val <= eval.value + reg.armijo_c * s * slope) {
        v = trial;
        accepted = true;
        break;
      }
      s *= reg.armijo_shrink;
    }
    if (log && !log->empty()) log->back().step = accepted ? s : 0.0;
    if (!accepted) break;  // no admissible step left, stationary up to rounding
  }
  return v;
}

void write_reg_log_csv(const std::string& path, const RegLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_reg_log_csv: cannot open " + path);
  out << "iter,energy,grad_norm,step,cg_fallback\n";
  for (const auto& r : log)
    out << r.iter << "," << r.energy << "," << r.grad_norm << "," << r.step << ","
        << (r.cg_fallback ? 1 : 0) << "\n";
}

}  // namespace tdm
