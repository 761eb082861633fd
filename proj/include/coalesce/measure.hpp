#pragma once

// The driving measure of a Lambda-coalescent.
//
// Either a Beta(2-alpha, alpha) member, for which every rate has a closed
// form through Gamma ratios, or a generic probability density on (0,1)
// integrated by quadrature.  Atoms at 0 and 1 are excluded by construction:
// the generic kind is density-only.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "coalesce/quadrature.hpp"
#include "coalesce/special.hpp"

namespace coalesce {

class LambdaMeasure {
 public:
  enum class Kind { kBeta, kGeneric };

  // Densities take (x, 1-x); the complement is supplied without
  // cancellation so endpoint-singular densities stay accurate.
  using Density = std::function<double(double, double)>;

  static LambdaMeasure beta(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 2.0)) {
      throw std::domain_error("LambdaMeasure::beta: alpha must be in (0,2)");
    }
    LambdaMeasure m;
    m.kind_ = Kind::kBeta;
    m.alpha_ = alpha;
    m.label_ = "beta(" + std::to_string(2.0 - alpha) + "," +
               std::to_string(alpha) + ")";
    return m;
  }

  static LambdaMeasure generic(Density density, std::string label = "generic") {
    LambdaMeasure m;
    m.kind_ = Kind::kGeneric;
    m.density_ = std::move(density);
    m.label_ = std::move(label);
    const double mass =
        integrate_01([&](double x, double xc) { return m.density_(x, xc); },
                     1e-10)
            .value;
    if (std::abs(mass - 1.0) > 1e-8) {
      throw std::domain_error(
          "LambdaMeasure::generic: density mass " + std::to_string(mass) +
          " is not 1 within 1e-8");
    }
    m.mass_ = mass;
    return m;
  }

  Kind kind() const { return kind_; }
  bool is_beta() const { return kind_ == Kind::kBeta; }

  double alpha() const {
    if (kind_ != Kind::kBeta) {
      throw std::logic_error("LambdaMeasure::alpha: not a Beta measure");
    }
    return alpha_;
  }

  const std::string& label() const { return label_; }

  double density(double x, double xc) const {
    if (kind_ == Kind::kBeta) {
      const double a = alpha_;
      return std::exp((1.0 - a) * std::log(x) + (a - 1.0) * std::log(xc) -
                      log_beta(2.0 - a, a));
    }
    return density_(x, xc);
  }

  // integral of x^a (1-x)^b Lambda(dx) for a, b > -1 plus the density
  // exponents.  These are the only moments the rates need.
  double kernel_integral(double a, double b, double tol = 1e-12) const {
    if (kind_ == Kind::kBeta) {
      const double al = alpha_;
      return std::exp(log_beta(a + 2.0 - al, b + al) - log_beta(2.0 - al, al));
    }
    return integrate_01(
               [&](double x, double xc) {
                 return std::pow(x, a) * std::pow(xc, b) * density_(x, xc);
               },
               tol)
        .value;
  }

 private:
  LambdaMeasure() = default;

  Kind kind_ = Kind::kBeta;
  double alpha_ = 1.0;
  double mass_ = 1.0;
  Density density_;
  std::string label_;
};

}  // namespace coalesce
