#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadInput : Error {
  using Error::Error;
};
struct BadSpec : Error {
  using Error::Error;
};
struct EmptyBall : Error {
  using Error::Error;
};
struct EmptyIntersection : Error {
  using Error::Error;
};
struct MissingNormals : Error {
  using Error::Error;
};
struct ResolutionExceeded : Error {
  using Error::Error;
};
struct NoEscapePoint : Error {
  using Error::Error;
};
struct HypothesisViolated : Error {
  using Error::Error;
};
struct DegenerateNormal : Error {
  using Error::Error;
};
struct FlowDiverged : Error {
  using Error::Error;
};
struct DegeneratePair : Error {
  using Error::Error;
};
struct NoNeighbors : Error {
  using Error::Error;
};

struct NotLipschitz : Error {
  NotLipschitz(const std::string& msg, long witness_a, long witness_b)
      : Error(msg), a(witness_a), b(witness_b) {}
  long a, b;  // witness pair of sample indices
};

struct Disconnected : Error {
  Disconnected(const std::string& msg, int n_components)
      : Error(msg), components(n_components) {}
  int components;
};

struct EpsilonExceeded : Error {
  EpsilonExceeded(const std::string& msg, double eps, std::string pair)
      : Error(msg), achieved_eps(eps), worst_pair(std::move(pair)) {}
  double achieved_eps;
  std::string worst_pair;  // human/JSON description of the offending pair
};

}  // namespace rlab
