#pragma once

// Oracle contract and the value types shared by every layer.
//
// An oracle answers argmax_{v in V} theta^T v over a finite feasible set V.
// The dimension d travels with each call; nothing in the library keeps a
// global notion of problem size.

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "colayers/errors.hpp"

namespace colayers {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Objective direction theta fed to an oracle.
using Objective = Vector;
// Feasible solution v returned by an oracle.
using Vertex = Vector;
// Point of conv(V), typically the output of a probabilistic layer.
using Moment = Vector;

enum class SignDomain { any, strictly_negative, strictly_positive };

const char* to_string(SignDomain domain);

// Black-box linear maximization oracle.
//
// `solve` must be a pure function of theta: layers call it concurrently.
// `enumerate`, when set, lists all of V and is meant for small test
// polytopes only.
struct CoOracle {
  std::function<Vertex(const Objective&)> solve;
  SignDomain sign_domain = SignDomain::any;
  std::function<std::vector<Vertex>()> enumerate;
  std::string name = "oracle";

  // Validates theta (finite, sign domain) then forwards to `solve`.
  Vertex operator()(const Objective& theta) const;

  bool enumerable() const { return static_cast<bool>(enumerate); }
};

// Throws NumericalError on NaN/Inf entries and DimensionError on d == 0.
void require_finite(const Vector& values, const char* what);

// Throws SignDomainError when theta violates `domain`.
void require_sign(const Objective& theta, SignDomain domain, const std::string& who);

void require_same_size(Index a, Index b, const char* what);

// Strict lexicographic order on equally sized vectors.
bool lexicographically_less(const Vector& a, const Vector& b);

// Exact vertex maximizing theta^T v; ties go to the first maximizer in list
// order. Pass a sorted list to get the lexicographically smallest one.
Vertex brute_force_argmax(const Objective& theta, std::span<const Vertex> vertices);

// Oracle answering by exhaustive search over a fixed vertex list.
CoOracle make_enumerated_oracle(std::vector<Vertex> vertices, std::string name = "enumerated",
                                SignDomain domain = SignDomain::any);

struct Atom {
  Vertex vertex;
  double weight = 0.0;
};

// Finitely supported distribution over vertices. Weights live on the
// simplex and atoms are pairwise distinct.
class SparseDistribution {
 public:
  SparseDistribution() = default;
  explicit SparseDistribution(std::vector<Atom> atoms);

  static SparseDistribution dirac(Vertex v);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  // sum_i w_i v_i
  Moment mean() const;
  // True when weights are >= 0, sum to one within `tol` and atoms are distinct.
  bool valid(double tol = 1e-9) const;

 private:
  std::vector<Atom> atoms_;
};

}  // namespace colayers
