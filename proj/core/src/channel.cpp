#include "fawsr/channel.hpp"

#include <cmath>

namespace fawsr::channel {

Vec3 direction_vector(double elevation, double azimuth) {
  if (!std::isfinite(elevation) || !std::isfinite(azimuth))
    throw std::invalid_argument("direction_vector: non-finite angle");
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

double projected_distance(const Vec3& direction, const Vec3& position) {
  return direction.dot(position);
}

Vec field_response_vector(const PathGeometry& geometry, Side side, const Vec3& position) {
  const bool tx = (side == Side::Tx);
  const RealVec& elev = tx ? geometry.aod_elevation : geometry.aoa_elevation;
  const RealVec& azim = tx ? geometry.aod_azimuth : geometry.aoa_azimuth;
  const double wavenumber = 2.0 * M_PI / geometry.wavelength;
  Vec v(elev.size());
  for (int q = 0; q < elev.size(); ++q) {
    const double rho = projected_distance(direction_vector(elev[q], azim[q]), position);
    v[q] = std::polar(1.0, wavenumber * rho);
  }
  return v;
}

static Mat frm(const PathGeometry& geometry, Side side, const Positions& positions) {
  const int paths = (side == Side::Tx) ? geometry.num_tx_paths() : geometry.num_rx_paths();
  Mat m(paths, positions.rows());
  for (int i = 0; i < positions.rows(); ++i)
    m.col(i) = field_response_vector(geometry, side, positions.row(i).transpose());
  return m;
}

ChannelSet assemble_channels(const std::vector<PathGeometry>& geometry,
                             const AntennaLayout& layout) {
  if (geometry.size() != layout.rx.size())
    throw std::invalid_argument("assemble_channels: user count mismatch");
  ChannelSet ch;
  const size_t k_count = geometry.size();
  ch.H.resize(k_count);
  ch.G.resize(k_count);
  ch.F.resize(k_count);
  for (size_t k = 0; k < k_count; ++k) {
    geometry[k].validate();
    ch.G[k] = frm(geometry[k], Side::Tx, layout.tx);
    ch.F[k] = frm(geometry[k], Side::Rx, layout.rx[k]);
    ch.H[k] = ch.F[k].adjoint() * geometry[k].path_response * ch.G[k];
  }
  return ch;
}

void update_tx_side(const std::vector<PathGeometry>& geometry,
                    const AntennaLayout& layout, ChannelSet& channels) {
  for (size_t k = 0; k < geometry.size(); ++k) {
    channels.G[k] = frm(geometry[k], Side::Tx, layout.tx);
    channels.H[k] = channels.F[k].adjoint() * geometry[k].path_response * channels.G[k];
  }
}

void update_rx_side(const std::vector<PathGeometry>& geometry,
                    const AntennaLayout& layout, int user, ChannelSet& channels) {
  channels.F[user] = frm(geometry[user], Side::Rx, layout.rx[user]);
  channels.H[user] =
      channels.F[user].adjoint() * geometry[user].path_response * channels.G[user];
}

double pathloss(double distance, double exponent, double reference_loss,
                double reference_distance) {
  if (reference_distance <= 0 || distance < reference_distance)
    throw std::invalid_argument("pathloss: requires distance >= reference_distance > 0");
  return reference_loss * std::pow(distance / reference_distance, -exponent);
}

}  // namespace fawsr::channel
