#include "colayers/core.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace colayers {

const char* to_string(SignDomain domain) {
  switch (domain) {
    case SignDomain::any: return "any";
    case SignDomain::strictly_negative: return "strictly_negative";
    case SignDomain::strictly_positive: return "strictly_positive";
  }
  return "unknown";
}

void require_finite(const Vector& values, const char* what) {
  if (values.size() == 0) {
    throw DimensionError(std::string(what) + ": empty vector");
  }
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << what << ": non-finite entry " << values[i] << " at index " << i;
      throw NumericalError(msg.str());
    }
  }
}

void require_sign(const Objective& theta, SignDomain domain, const std::string& who) {
  if (domain == SignDomain::any) return;
  for (Index i = 0; i < theta.size(); ++i) {
    const bool ok = domain == SignDomain::strictly_negative ? theta[i] < 0.0 : theta[i] > 0.0;
    if (!ok) {
      std::ostringstream msg;
      msg << who << " requires a " << to_string(domain) << " objective, got theta[" << i
          << "] = " << theta[i];
      throw SignDomainError(msg.str());
    }
  }
}

void require_same_size(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(msg.str());
  }
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  const Index n = std::min(a.size(), b.size());
  for (Index i = 0; i < n; ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return a.size() < b.size();
}

Vertex CoOracle::operator()(const Objective& theta) const {
  require_finite(theta, name.c_str());
  require_sign(theta, sign_domain, name);
  return solve(theta);
}

Vertex brute_force_argmax(const Objective& theta, std::span<const Vertex> vertices) {
  if (vertices.empty()) throw DimensionError("brute_force_argmax: empty vertex set");
  require_finite(theta, "brute_force_argmax");
  const Vertex* best = nullptr;
  double best_value = 0.0;
  for (const Vertex& v : vertices) {
    require_same_size(theta.size(), v.size(), "brute_force_argmax");
    const double value = theta.dot(v);
    if (best == nullptr || value > best_value) {
      best = &v;
      best_value = value;
    }
  }
  return *best;
}

CoOracle make_enumerated_oracle(std::vector<Vertex> vertices, std::string name, SignDomain domain) {
  if (vertices.empty()) throw DimensionError("make_enumerated_oracle: empty vertex set");
  auto shared = std::make_shared<const std::vector<Vertex>>(std::move(vertices));
  CoOracle oracle;
  oracle.name = std::move(name);
  oracle.sign_domain = domain;
  oracle.solve = [shared](const Objective& theta) { return brute_force_argmax(theta, *shared); };
  oracle.enumerate = [shared] { return *shared; };
  return oracle;
}

SparseDistribution::SparseDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

SparseDistribution SparseDistribution::dirac(Vertex v) {
  return SparseDistribution({Atom{std::move(v), 1.0}});
}

Moment SparseDistribution::mean() const {
  if (atoms_.empty()) return {};
  Moment mu = Moment::Zero(atoms_.front().vertex.size());
  for (const Atom& atom : atoms_) mu += atom.weight * atom.vertex;
  return mu;
}

bool SparseDistribution::valid(double tol) const {
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].weight < 0.0) return false;
    total += atoms_[i].weight;
    for (std::size_t j = 0; j < i; ++j) {
      if (atoms_[i].vertex == atoms_[j].vertex) return false;
    }
  }
  return std::abs(total - 1.0) <= tol;
}

}  // namespace colayers
