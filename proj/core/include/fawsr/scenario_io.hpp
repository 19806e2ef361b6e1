#pragma once

#include <filesystem>
#include <string>

#include "fawsr/types.hpp"

namespace fawsr {

/// One fully specified problem instance. The per-user path-response matrices
/// already carry the pathloss scaling; `distance_m` is kept for provenance.
struct Scenario {
  SystemDims dims;
  std::vector<PathGeometry> geometry;  // K entries
  RealVec distances_m;                 // K, informational
  double wavelength = 1.0;             // meters
  double box_scale = 2.0;              // rho: box pitch in wavelengths
  double min_separation = 0.0;         // D, meters
  double power_budget = 1.0;           // watts
  RealVec noise;                       // K, watts
  RealVec weights;                     // K
  std::uint64_t seed = 0;

  void validate() const;
};

namespace layout {

/// Movable-antenna layout: boxes centered on a ceil(sqrt(n)) x ceil(sqrt(n))
/// x-y grid with pitch rho*lambda, each box spanning (rho*lambda - D) in x and
/// y and [-rho*lambda, rho*lambda] in z; antennas start at the box centers
/// (a uniform planar array with spacing rho*lambda).
void fill_movable(int count, double wavelength, double rho, double min_sep,
                  Positions& positions, std::vector<Box>& boxes);

/// Fixed half-wavelength-spaced planar array; boxes degenerate to points so
/// position steps are no-ops and containment checks still hold.
void fill_fixed(int count, double wavelength, Positions& positions,
                std::vector<Box>& boxes);

/// Assemble a full layout. `movable_tx` / `movable_rx` select between the
/// movable grid and the fixed half-wavelength array per side.
AntennaLayout build(const Scenario& scenario, bool movable_tx, bool movable_rx);

}  // namespace layout

namespace io {

/// Serialize / parse the scenario JSON document. Doubles round-trip losslessly.
std::string to_json(const Scenario& scenario);
Scenario from_json(const std::string& text);

void save(const Scenario& scenario, const std::filesystem::path& path);
Scenario load(const std::filesystem::path& path);

double dbm_to_watt(double dbm);
double db_to_linear(double db);

}  // namespace io

}  // namespace fawsr
