#pragma once

// Phase dynamics on the 16-torus: the Q8 x S^1 action, the isotropy catalog
// with literal verification, coordinates on the three-dimensional fixed-point
// plane and the reduced vector field on it.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "q8/group.hpp"

namespace q8::torus {

using Phase16 = std::array<double, group::kCells>;
using Theta3 = std::array<double, 3>;

struct Params {
  double u = 0.0;
  double epsilon = 0.0;
  double q = 0.0;
};

// Adds theta to every component, reduced to [0, 2π).
Phase16 phase_shift(const Phase16& p, double theta);

// Cell i's angle moves to cell g(i), then every angle is shifted by theta.
Phase16 group_phase_action(const group::Perm16& g, double theta, const Phase16& p);

// Max circular distance over components.
double circular_distance(const Phase16& x, const Phase16& y);

// One component of a family: constant (in units of π/4) plus optionally one
// free parameter with unit coefficient.
struct AffineAngle {
  int quarter_pi = 0;  // constant = quarter_pi * π/4
  int param = -1;      // 0-based parameter index, -1 for none

  double evaluate(const std::vector<double>& params) const;
  std::string text(int dim) const;
  bool operator==(const AffineAngle&) const = default;
};

struct CatalogGenerator {
  std::string element;  // word in a, b
  int quarter_pi = 0;   // phase shift in units of π/4

  double phase() const;
};

struct IsotropyEntry {
  std::string name;
  std::array<AffineAngle, group::kCells> family;
  std::vector<CatalogGenerator> generators;
  int dim = 0;  // number of free parameters of the printed family

  Phase16 point(const std::vector<double>& params) const;
  std::string family_text() const;
};

// Rows exactly as printed, in printed order.
const std::vector<IsotropyEntry>& printed_isotropy_table();

enum class RowVerdict { Verified, Failed };

struct FailedSample {
  std::vector<double> params;
  std::string generator;
  double distance;
};

struct CorrectedFamily {
  bool exists = false;  // false when the generators fix no point
  std::array<AffineAngle, group::kCells> family{};
  int dim = 0;
  std::string text;
};

struct CatalogRowReport {
  std::size_t row = 0;  // 1-based printed row
  IsotropyEntry entry;
  RowVerdict verdict = RowVerdict::Verified;
  std::size_t samples = 0;
  std::size_t failures = 0;
  std::vector<FailedSample> failed_samples;  // first few
  std::optional<CorrectedFamily> corrected;   // present iff failed
  std::vector<std::string> flags;             // duplicate rows, dim mismatch
};

// Parameter samples {kπ/4 + 0.1 : k = 0..7}, tolerance 1e-9.
std::vector<CatalogRowReport> isotropy_catalog(const group::GroupTable& t);

// Solution of the fixed-point conditions of the generators with the first
// cell anchored at 0 (the diagonal phase shift commutes with the action).
CorrectedFamily solve_fixed_family(const group::GroupTable& t,
                                   const std::vector<CatalogGenerator>& generators);

// Basis e1, e2, e3 of the fixed-point plane, exactly as printed (-1/8 scaled).
const std::array<Phase16, 3>& plane_basis();

Phase16 embed_unreduced(const Theta3& t);
Phase16 embed(const Theta3& t);

struct Projection {
  Theta3 theta;
  double residual;  // Euclidean distance from the lifted point to the plane
};

// Lifts each angle to the branch nearest embed_unreduced(reference), then
// solves the least-squares problem in span{e1, e2, e3}.
Projection project(const Phase16& p, const Theta3& reference = {0.0, 0.0, 0.0});

// Group elements whose permutation action maps the fixed-point plane onto
// itself, with the induced linear map on (θ1, θ2, θ3).
struct PlaneSymmetry {
  std::string element;
  std::array<std::array<double, 3>, 3> matrix{};
};

std::vector<PlaneSymmetry> plane_symmetries(const group::GroupTable& t);

// Reduced field, trigonometric form.
Theta3 reduced_field(const Theta3& t, const Params& prm);
// Reduced field, factored form sin θ_i * (...).
Theta3 factored_field(const Theta3& t, const Params& prm);

}  // namespace q8::torus
