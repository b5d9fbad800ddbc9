#include <cmath>

#include "qzo/harness.hpp"

namespace qzo {

std::vector<std::string> builtin_names() {
  return {"quadratic", "linear-simplex", "linf-center", "log-sum-exp", "matching-pennies", "rps"};
}

Vector builtin_cost_vector(int d) {
  if (d < 1) throw InvalidInput("dimension must be positive");
  Vector c = Vector::Zero(d);
  for (int j = 1; j < d; ++j) c[j] = 0.5 + 0.5 * double(j - 1) / double(std::max(1, d - 2));
  return c;
}

std::optional<ZsgInstance> builtin_game(const std::string& name) {
  ZsgInstance z;
  if (name == "matching-pennies") {
    z.A.resize(2, 2);
    z.A << 1, -1, -1, 1;
  } else if (name == "rps") {
    z.A.resize(3, 3);
    z.A << 0, -1, 1, 1, 0, -1, -1, 1, 0;
  } else {
    return std::nullopt;
  }
  return z;
}

double default_norm_p(Method method, const std::string& problem) {
  const bool mirror = method == Method::qmd || method == Method::qda || method == Method::qmp;
  return mirror && problem != "quadratic" ? 1.0 : 2.0;
}

namespace {

MirrorGeometry geometry_for(const DomainSpec& dom, double p) {
  if (p == 1.0 && dom.kind() == DomainSpec::Kind::simplex) return MirrorGeometry::simplex_entropy(dom.dim());
  return MirrorGeometry::euclidean(dom.dim());
}

BuiltinProblem quadratic(int d, double kappa) {
  if (!(kappa >= 1.0)) throw InvalidInput("quadratic: kappa must be >= 1");
  Vector lam(d);
  for (int i = 0; i < d; ++i) lam[i] = d == 1 ? 1.0 : 1.0 + (kappa - 1.0) * double(i) / double(d - 1);
  BuiltinProblem p;
  ObjectiveSpec& s = p.spec;
  s.name = "quadratic";
  s.d = d;
  s.evaluator = [lam](const Vector& x) { return 0.5 * lam.dot(x.cwiseProduct(x)); };
  s.exact_gradient = [lam](const Vector& x) -> Vector { return lam.cwiseProduct(x); };
  s.L = lam.maxCoeff();
  s.mu = lam.minCoeff();
  s.domain = DomainSpec::whole_space(d);
  s.f_star = 0.0;
  p.start = Vector::Ones(d);
  // Gradient steps with eta <= 2/L contract every coordinate, so iterates stay within |x0| of 0.
  const double R = std::sqrt(double(d));
  p.sublevel_radius = R;
  s.G = *s.L * R;
  p.geometry = MirrorGeometry::euclidean(d);
  return p;
}

BuiltinProblem linear_simplex(int d, double norm_p) {
  const Vector c = builtin_cost_vector(d);
  BuiltinProblem p;
  ObjectiveSpec& s = p.spec;
  s.name = "linear-simplex";
  s.d = d;
  s.evaluator = [c](const Vector& x) { return c.dot(x); };
  s.exact_gradient = [c](const Vector&) -> Vector { return c; };
  s.domain = DomainSpec::simplex(d);
  s.f_star = 0.0;
  const double g = norm_p == 1.0 ? c.cwiseAbs().maxCoeff() : c.norm();
  s.G = g > 0.0 ? g : 1.0;
  p.geometry = geometry_for(s.domain, norm_p);
  return p;
}

BuiltinProblem linf_center(int d) {
  Vector center(d);
  for (int i = 0; i < d; ++i) center[i] = double(i + 1);
  center /= center.sum();
  BuiltinProblem p;
  ObjectiveSpec& s = p.spec;
  s.name = "linf-center";
  s.d = d;
  s.evaluator = [center](const Vector& x) { return (x - center).cwiseAbs().maxCoeff(); };
  s.domain = DomainSpec::simplex(d);
  s.f_star = 0.0;
  // |.|_inf is 1-Lipschitz for every l_p with p <= inf.
  s.G = 1.0;
  p.geometry = geometry_for(s.domain, 1.0);
  return p;
}

BuiltinProblem log_sum_exp(int d, double norm_p) {
  const Vector c = builtin_cost_vector(d);
  BuiltinProblem p;
  ObjectiveSpec& s = p.spec;
  s.name = "log-sum-exp";
  s.d = d;
  s.evaluator = [c](const Vector& x) {
    const double m = x.maxCoeff();
    return m + std::log((x.array() - m).exp().sum()) + c.dot(x);
  };
  s.exact_gradient = [c](const Vector& x) -> Vector {
    Vector e = (x.array() - x.maxCoeff()).exp().matrix();
    return e / e.sum() + c;
  };
  s.domain = DomainSpec::simplex(d);
  // The gaps c_j - c_0 >= 1/2 exceed (e - 1) / (e + d - 1), so the vertex e_0 is optimal.
  s.f_star = std::log(std::exp(1.0) + double(d - 1));
  if (norm_p == 1.0) {
    s.G = 1.0 + c.maxCoeff();
    s.L = 0.25;
  } else {
    s.G = 1.0 + c.norm();
    s.L = 0.5;
  }
  p.geometry = geometry_for(s.domain, norm_p);
  return p;
}

}  // namespace

BuiltinProblem make_builtin(const std::string& name, int d, double p, double kappa) {
  if (d < 1) throw ConfigError("problem dimension must be positive");
  if (p != 1.0 && p != 2.0) throw ConfigError("built-in problems are stated for p = 1 or p = 2");
  BuiltinProblem out;
  if (name == "quadratic") {
    out = quadratic(d, kappa);
  } else if (name == "linear-simplex") {
    out = linear_simplex(d, p);
  } else if (name == "linf-center") {
    out = linf_center(d);
    out.geometry = geometry_for(out.spec.domain, p);
  } else if (name == "log-sum-exp") {
    out = log_sum_exp(d, p);
  } else if (builtin_game(name)) {
    throw ConfigError("'" + name + "' is a game; use the zsg command");
  } else {
    throw ConfigError("unknown built-in problem '" + name + "'");
  }
  out.spec.validate();
  return out;
}

}  // namespace qzo
