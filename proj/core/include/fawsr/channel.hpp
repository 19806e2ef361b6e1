#pragma once

#include "fawsr/types.hpp"

namespace fawsr::channel {

enum class Side { Tx, Rx };

/// Unit propagation direction for a path with the given elevation/azimuth:
/// [cos(el)cos(az), cos(el)sin(az), sin(el)].
Vec3 direction_vector(double elevation, double azimuth);

/// Signed path-length difference g^T t between an antenna at `position` and
/// the array origin, along unit direction `direction`.
double projected_distance(const Vec3& direction, const Vec3& position);

/// Field-response vector at `position`: one unit-modulus complex exponential
/// per path of the chosen side.
Vec field_response_vector(const PathGeometry& geometry, Side side, const Vec3& position);

/// Assemble H_k = F_k^H Sigma_k G_k for every user from the current layout.
ChannelSet assemble_channels(const std::vector<PathGeometry>& geometry,
                             const AntennaLayout& layout);

/// Refresh only the transmit-side factors (G_k and H_k) after T moved.
void update_tx_side(const std::vector<PathGeometry>& geometry,
                    const AntennaLayout& layout, ChannelSet& channels);

/// Refresh only user k's receive-side factors (F_k and H_k) after R_k moved.
void update_rx_side(const std::vector<PathGeometry>& geometry,
                    const AntennaLayout& layout, int user, ChannelSet& channels);

/// Distance-law gain T0 * (d/d0)^(-exponent). Requires d >= d0 > 0.
double pathloss(double distance, double exponent, double reference_loss,
                double reference_distance);

}  // namespace fawsr::channel
