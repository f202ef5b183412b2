#pragma once

// Krupa-Melbourne indices for a detected heteroclinic cycle, the closed-form
// indices and stability regions stated for the reduced system, and an
// empirical basin probe.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "q8/dynamics.hpp"

namespace q8::stability {

using dynamics::Params;

struct NodeEigenSplit {
  int node = 0;
  std::string label;
  int out_axis = -1;
  int in_axis = -1;
  int transverse_axis = -1;
  double e = 0.0;  // eigenvalue on the outgoing axis
  double c = 0.0;  // |eigenvalue on the incoming axis|
  double t = 0.0;  // transverse eigenvalue, signed
  double incoming_eigenvalue = 0.0;
  bool geometry_violation = false;  // e <= 0 or incoming eigenvalue >= 0
  bool transverse_expanding = false;
};

class GeometryViolation : public std::runtime_error {
 public:
  GeometryViolation(const std::string& what, std::vector<NodeEigenSplit> splits)
      : std::runtime_error(what), splits_(std::move(splits)) {}
  const std::vector<NodeEigenSplit>& splits() const { return splits_; }

 private:
  std::vector<NodeEigenSplit> splits_;
};

// Split at a single node from its axis eigenvalues and the axis roles.
NodeEigenSplit split_node(int node, const std::array<double, 3>& eigs, int out_axis, int in_axis);

// Axis of the largest displacement from `vertex` at the end of an arc.
int approach_axis(const dynamics::ConnectionResult& leg, int vertex);

// Splits for every node of the cycle. Throws GeometryViolation when any node
// has e <= 0 or a non-negative incoming eigenvalue.
std::vector<NodeEigenSplit> split_eigenvalues(const dynamics::DetectedCycle& cycle,
                                              const Params& prm);

struct ClosedFormRho {
  bool lower_branch = false;  // q < 3u/4 - eps/2
  double rho1 = 0.0;
  double rho2 = 0.0;  // = rho3
  double rho = 0.0;   // rho1 * rho2 * rho3 as printed
  double rho_abs = 0.0;
  bool closed_form_applies = false;  // the product form is stated for u < 0 only
};

// Throws std::domain_error when u + 2 eps = 0.
ClosedFormRho rho_closed_form(const Params& prm);

struct RhoReport {
  std::vector<double> rho_i;
  double rho = 1.0;
  bool km_convention_used = true;
  std::optional<ClosedFormRho> closed_form;
  std::vector<std::string> discrepancy_notes;
};

RhoReport rho_km(const std::vector<NodeEigenSplit>& splits);

enum class StabilityKind {
  AsymptoticallyStable,
  EssentiallyAsymptoticallyStable,
  CompletelyUnstable,
  Inconclusive
};
std::string_view to_string(StabilityKind k);

struct StabilityClass {
  StabilityKind kind = StabilityKind::Inconclusive;
  std::string trigger;  // "stable-region", "essential-region", "u>0" or "none"
  bool stable_region = false;
  bool essential_region = false;
  bool unstable_region = false;
  double stable_bound = 0.0;  // 3u/4 - eps/2
  std::optional<double> essential_upper;
  bool existence_printed = false;  // |eps| < u/2 and |eps + 2q| < u/2
  bool existence_abs = false;      // same with |u|/2
  std::string domain_note;
};

StabilityClass classify(const Params& prm);

struct CrossCheck {
  bool applicable = false;  // class AS, geometry valid, every t_i < 0
  bool holds = true;        // rho_km > 1 when applicable
  std::string note;
};

struct StabilityReport {
  Params prm;
  StabilityClass cls;
  std::optional<dynamics::DetectedCycle> cycle;
  std::vector<NodeEigenSplit> splits;
  std::optional<RhoReport> rho;
  std::optional<ClosedFormRho> closed_form;
  std::string geometry_error;
  CrossCheck cross_check;
  std::vector<std::string> notes;
};

StabilityReport analyze(const Params& prm, const dynamics::ConnectionOptions& opt,
                        const group::GroupTable& t);

struct BasinProbeResult {
  double r = 0.0;
  std::size_t n = 0;
  std::size_t returned = 0;
  double returned_fraction = 0.0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::size_t failures = 0;  // samples whose integration failed; counted as not returned
};

struct ProbeOptions {
  double tol = 1e-9;       // integrator tolerance
  unsigned threads = 0;    // 0: Q8_THREADS or hardware concurrency
};

// Requires r > 0 and n >= 100; throws std::invalid_argument otherwise.
BasinProbeResult basin_probe(const Params& prm, const dynamics::DetectedCycle& cycle, double r,
                             std::size_t n, std::uint64_t seed, const ProbeOptions& opt = {});

// Worker count from Q8_THREADS (if set and positive), else hardware concurrency.
unsigned worker_count(unsigned requested = 0);

// Cycle arcs resampled to `points` positions by arc length, starting at the
// first node; consecutive points form the polyline.
std::vector<dynamics::Theta3> cycle_polyline(const dynamics::DetectedCycle& cycle,
                                             std::size_t points = 1000);
// Min Euclidean distance (angles compared modulo 2π) to the polyline segments.
double distance_to_polyline(const dynamics::Theta3& x, const std::vector<dynamics::Theta3>& line);

}  // namespace q8::stability
