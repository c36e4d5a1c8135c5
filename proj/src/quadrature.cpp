#include "fimci/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "fimci/errors.hpp"

namespace fimci {

namespace {

// 15-point Kronrod abscissae (non-negative half) and weights; the even
// indices interleave the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  Eigen::VectorXd kronrod;
  double error;  // max over components of |K15 - G7|
};

Segment evaluate_segment(const VectorIntegrand& f, int dim, double a, double b,
                         Eigen::VectorXd& scratch) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  Eigen::VectorXd kron = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd gauss = Eigen::VectorXd::Zero(dim);

  for (int i = 0; i < 8; ++i) {
    const bool is_center = (i == 7);
    f(center - half * kXgk[i], scratch);
    Eigen::VectorXd sum = scratch;
    if (!is_center) {
      f(center + half * kXgk[i], scratch);
      sum += scratch;
    }
    kron += kWgk[i] * sum;
    if (i % 2 == 1 || is_center) gauss += kWg[i / 2] * sum;
  }
  kron *= half;
  gauss *= half;

  Segment seg;
  seg.a = a;
  seg.b = b;
  seg.kronrod = std::move(kron);
  seg.error = (seg.kronrod - gauss).cwiseAbs().maxCoeff();
  return seg;
}

}  // namespace

QuadratureResult integrate_gk15(const VectorIntegrand& f, int dim, double a,
                                double b, double abs_tol, int max_segments) {
  if (!(b > a)) throw QuadratureError("integrate_gk15: empty interval");
  Eigen::VectorXd scratch(dim);

  auto worse = [](const Segment& lhs, const Segment& rhs) {
    return lhs.error < rhs.error;
  };
  std::priority_queue<Segment, std::vector<Segment>, decltype(worse)> queue(worse);
  queue.push(evaluate_segment(f, dim, a, b, scratch));
  double total_error = queue.top().error;

  while (total_error > abs_tol) {
    if (static_cast<int>(queue.size()) >= max_segments) {
      throw QuadratureError("integrate_gk15: tolerance not reached within segment budget");
    }
    Segment worst = queue.top();
    queue.pop();
    total_error -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("integrate_gk15: interval no longer bisectable");
    }
    Segment left = evaluate_segment(f, dim, worst.a, mid, scratch);
    Segment right = evaluate_segment(f, dim, mid, worst.b, scratch);
    total_error += left.error + right.error;
    queue.push(std::move(left));
    queue.push(std::move(right));
  }

  QuadratureResult result;
  result.value = Eigen::VectorXd::Zero(dim);
  result.error_estimate = total_error;
  result.segments = static_cast<int>(queue.size());
  while (!queue.empty()) {
    result.value += queue.top().kronrod;
    queue.pop();
  }
  return result;
}

}  // namespace fimci
