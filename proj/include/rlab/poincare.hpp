#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rlab/surface.hpp"
#include "rlab/types.hpp"

namespace rlab {

/// Closed-form scalar field on R^{n+1} with an analytic ambient gradient and a
/// computable Lipschitz constant on the unit ball. The family covers linear
/// forms, distance-to-point, smooth bumps, and low-frequency trig sums.
class TestFunction {
 public:
  static TestFunction linear(Vec a, Scalar offset = 0);
  static TestFunction dist_to_point(Vec p);
  static TestFunction bump(Vec center, Scalar height, Scalar width);
  static TestFunction trig(std::vector<Vec> freq, std::vector<Scalar> amp,
                           std::vector<Scalar> phase);
  /// Up to 5 modes with |freq| <= max_freq, drawn deterministically.
  static TestFunction random_trig(int dim, Scalar max_freq, std::uint64_t seed);

  Scalar value(const Vec& y) const { return value_(y); }
  Vec gradient(const Vec& y) const { return gradient_(y); }
  Scalar lipschitz_bound() const { return lipschitz_; }
  const std::string& name() const { return name_; }

 private:
  TestFunction(std::string name, Scalar lip,
               std::function<Scalar(const Vec&)> value,
               std::function<Vec(const Vec&)> gradient)
      : name_(std::move(name)),
        lipschitz_(lip),
        value_(std::move(value)),
        gradient_(std::move(gradient)) {}

  std::string name_;
  Scalar lipschitz_;
  std::function<Scalar(const Vec&)> value_;
  std::function<Vec(const Vec&)> gradient_;
};

/// Tangential gradient at sample point y: ambient gradient minus its normal
/// component; orthogonal to nu(y) by construction. Throws MissingNormals.
Vec tangential_gradient(const DiscreteSurface& s, const TestFunction& f,
                        Index y_index);

/// Inf-convolution extension of values given on the subset A:
/// fbar(y) = min_a f(a) + L |y - a|. Verifies L-Lipschitz-ness on A pairwise
/// and throws NotLipschitz with a witness pair otherwise.
Scalar mcshane_extend(const PointMatrix& a_points,
                      const Eigen::VectorXd& a_values, const Vec& y, Scalar l);

struct LipProfile {
  std::vector<Scalar> radii;   // the resolvable radii actually used
  std::vector<Scalar> sup;     // difference-quotient sup per radius
  Scalar value = 0;            // sup at the smallest resolvable radius
};

/// Discrete local Lipschitz constant at sample x: per radius, the sup of
/// |f(y)-f(x)|/|y-x| over ball neighbors; the returned value is taken at the
/// smallest radius that has a neighbor. Throws NoNeighbors when every radius
/// is empty.
LipProfile lip_local(const DiscreteSurface& s, std::span<const Scalar> f_values,
                     Index x_index, const std::vector<Scalar>& radii);

struct PoincareRecord {
  int function = 0;
  Index probe = 0;
  Scalar r = 0;
  Scalar lhs = 0;       // mean oscillation over B_r
  Scalar rhs_core = 0;  // r * L2 mean of the tangential gradient over B_2r
  Scalar ratio = 0;     // lhs / rhs_core where defined
  bool hard_failure = false;  // lhs > 0 with vanishing rhs_core
};

struct PoincareReport {
  Scalar c_p = 0;  // max ratio over records with rhs_core > 0
  PoincareRecord worst;
  std::vector<PoincareRecord> records;
  int hard_failures = 0;
  int skipped_degenerate = 0;  // 0/0 records (constant functions)
};

/// Estimates the Poincare constant over the test family: per (f, probe, r),
/// lhs = mean |f - f_{x,r}| over B_r, rhs_core = r (mean |grad^M f|^2 over
/// B_2r)^{1/2}. Records with rhs_core ~ 0 and lhs above tolerance are hard
/// failures (the inequality cannot hold for any constant).
PoincareReport poincare_audit(const DiscreteSurface& s,
                              const std::vector<TestFunction>& functions,
                              const std::vector<Index>& probes,
                              const std::vector<Scalar>& radii);

struct KeithRecord {
  Index probe = 0;
  Scalar r = 0;
  Scalar lhs = 0;
  Scalar rhs = 0;    // diam(B) * (mean (Lip f)^2 over 2B)^{1/2}
  Scalar ratio = 0;  // lhs / rhs
  bool violation = false;
};

struct KeithReport {
  Scalar kappa1 = 0;  // the bound checked against (C_P / 2)
  Scalar slack = 0;   // discretization allowance on top of kappa1
  Scalar worst_ratio = 0;
  std::vector<KeithRecord> records;
  int violations = 0;
};

/// Metric-side form of the inequality: lhs <= kappa1 * diam(B) *
/// (mean (Lip f)^2 over 2B)^{1/2} with the local Lipschitz constant in place
/// of the tangential gradient. A record is a violation only beyond
/// kappa1 * (1 + slack); the discrete Lip underestimates the gradient by a few
/// percent, and kappa1 itself arrives as a finite-sample estimate.
KeithReport keith_form_audit(const DiscreteSurface& s,
                             std::span<const Scalar> f_values,
                             const std::vector<Ball>& balls, Scalar kappa1,
                             Scalar slack = 0.1);

}  // namespace rlab
