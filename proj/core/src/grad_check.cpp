#include "sgrd/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgrd/error.hpp"

namespace sgrd {

std::string GradCheckReport::summary() const {
  std::ostringstream out;
  out << (pass ? "pass" : "FAIL") << " max_rel_error=" << max_rel_error << " tolerance="
      << tolerance << " worst=" << worst_param;
  return out.str();
}

GradCheckReport grad_check(const Net& net, const ParamStore& store, const Tensor& input,
                           double tolerance, Rng& rng) {
  if (!input.all_finite()) throw NumericError("grad_check: non-finite input");

  NetCache cache;
  Tensor out = net.forward(store, input, &cache);

  std::vector<double> proj(out.size());
  for (auto& c : proj) c = rng.normal();

  Tensor dout(out.shape);
  for (int i = 0; i < out.size(); ++i) dout[i] = static_cast<float>(proj[i]);
  GradMap grads;
  net.backward(store, cache, dout, grads);

  F64Params params64 = params_to_f64(store);
  std::vector<double> input64(input.data.begin(), input.data.end());

  auto loss64 = [&]() {
    std::vector<double> y = net.forward_f64(params64, input64, input.shape);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += proj[i] * y[i];
    return s;
  };

  const double h = 1e-3;
  GradCheckReport report;
  report.tolerance = tolerance;
  for (const std::string& name : net.param_names()) {
    Tensor analytic =
        grads.count(name) ? grads.at(name) : Tensor::zeros(store.at(name).shape);
    std::vector<double>& p64 = params64.at(name);
    GradCheckEntry entry{name, 0.0};
    for (std::size_t i = 0; i < p64.size(); ++i) {
      double saved = p64[i];
      p64[i] = saved + h;
      double lp = loss64();
      p64[i] = saved - h;
      double lm = loss64();
      p64[i] = saved;
      double numeric = (lp - lm) / (2.0 * h);
      double a = static_cast<double>(analytic[static_cast<int>(i)]);
      double denom = std::max({std::abs(a), std::abs(numeric), 1e-2});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(a - numeric) / denom);
    }
    if (entry.max_rel_error > report.max_rel_error) {
      report.max_rel_error = entry.max_rel_error;
      report.worst_param = name;
    }
    report.per_param.push_back(std::move(entry));
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace sgrd
