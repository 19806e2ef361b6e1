#include <doctest.h>

#include <random>

#include "fawsr/channel.hpp"
#include "helpers.hpp"

using namespace fawsr;

TEST_CASE("direction vector hits the axes at the canonical angles") {
  const double pi = std::acos(-1.0);
  CHECK((channel::direction_vector(0.0, 0.0) - Vec3(1, 0, 0)).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK((channel::direction_vector(0.0, pi / 2) - Vec3(0, 1, 0)).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK((channel::direction_vector(pi / 2, 0.0) - Vec3(0, 0, 1)).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("direction vectors are unit length for random angles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, std::acos(-1.0));
  for (int i = 0; i < 50; ++i) {
    const Vec3 g = channel::direction_vector(u(rng), u(rng));
    CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("projected distance is the inner product with the direction") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, std::acos(-1.0));
  for (int i = 0; i < 20; ++i) {
    const Vec3 g = channel::direction_vector(u(rng), u(rng));
    const Vec3 t(n(rng), n(rng), n(rng));
    CHECK(channel::projected_distance(g, t) ==
          doctest::Approx(g.dot(t)).epsilon(1e-14));
  }
}

TEST_CASE("field response vector: unit modulus, identity at the origin, and "
          "per-path phase advance under translation") {
  const auto spec = testing::small_spec(21);
  const Scenario scenario = spec.sample(0);
  const auto& geom = scenario.geometry[0];
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 0.01);

  const Vec at_origin =
      channel::field_response_vector(geom, channel::Side::Tx, Vec3::Zero());
  REQUIRE(at_origin.size() == geom.num_tx_paths());
  for (int q = 0; q < at_origin.size(); ++q)
    CHECK(std::abs(at_origin[q] - Complex(1, 0)) <= 1e-14);

  const double two_pi = 2.0 * std::acos(-1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 t(n(rng), n(rng), n(rng));
    const Vec3 shift(n(rng), n(rng), n(rng));
    const Vec base = channel::field_response_vector(geom, channel::Side::Tx, t);
    const Vec moved =
        channel::field_response_vector(geom, channel::Side::Tx, t + shift);
    for (int q = 0; q < base.size(); ++q) {
      CHECK(std::abs(base[q]) == doctest::Approx(1.0).epsilon(1e-14));
      const Vec3 g = channel::direction_vector(geom.aod_elevation[q],
                                               geom.aod_azimuth[q]);
      const Complex phase =
          std::exp(Complex(0, two_pi / geom.wavelength * g.dot(shift)));
      CHECK(std::abs(moved[q] - base[q] * phase) <= 1e-12);
    }
  }
}

TEST_CASE("assembled channel equals the brute-force triple product") {
  const auto spec = testing::small_spec(22);
  for (int i = 0; i < 5; ++i) {
    const Scenario scenario = spec.sample(i);
    const auto layout = layout::build(scenario, true, true);
    const ChannelSet channels =
        channel::assemble_channels(scenario.geometry, layout);
    REQUIRE(static_cast<int>(channels.H.size()) == scenario.dims.num_users);
    for (int k = 0; k < scenario.dims.num_users; ++k) {
      const auto& geom = scenario.geometry[k];
      Mat g(geom.num_tx_paths(), scenario.dims.num_tx);
      for (int m = 0; m < scenario.dims.num_tx; ++m)
        g.col(m) = channel::field_response_vector(geom, channel::Side::Tx,
                                                  layout.tx.row(m).transpose());
      Mat f(geom.num_rx_paths(), scenario.dims.num_rx);
      for (int n = 0; n < scenario.dims.num_rx; ++n)
        f.col(n) = channel::field_response_vector(
            geom, channel::Side::Rx, layout.rx[k].row(n).transpose());
      const Mat h = f.adjoint() * geom.path_response * g;
      CHECK((channels.G[k] - g).norm() <= 1e-13 * g.norm());
      CHECK((channels.F[k] - f).norm() <= 1e-13 * f.norm());
      CHECK((channels.H[k] - h).norm() <= 1e-12 * std::max(h.norm(), 1e-30));
    }
  }
}

TEST_CASE("transmit-side refresh touches only the moved antenna's column") {
  const auto spec = testing::small_spec(23);
  const Scenario scenario = spec.sample(0);
  auto layout = layout::build(scenario, true, true);
  ChannelSet channels = channel::assemble_channels(scenario.geometry, layout);
  const ChannelSet before = channels;

  const int moved = 2;
  layout.tx(moved, 0) += 0.1 * scenario.wavelength;
  channel::update_tx_side(scenario.geometry, layout, channels);

  const ChannelSet fresh = channel::assemble_channels(scenario.geometry, layout);
  for (int k = 0; k < scenario.dims.num_users; ++k) {
    CHECK((channels.G[k] - fresh.G[k]).norm() <= 1e-13 * fresh.G[k].norm());
    CHECK((channels.H[k] - fresh.H[k]).norm() <=
          1e-12 * std::max(fresh.H[k].norm(), 1e-30));
    for (int m = 0; m < scenario.dims.num_tx; ++m) {
      if (m == moved) continue;
      CHECK((channels.G[k].col(m) - before.G[k].col(m)).norm() == 0.0);
    }
    // The receive factors must be untouched.
    CHECK((channels.F[k] - before.F[k]).norm() == 0.0);
  }
}

TEST_CASE("receive-side refresh touches only the chosen user") {
  const auto spec = testing::small_spec(24);
  const Scenario scenario = spec.sample(0);
  auto layout = layout::build(scenario, true, true);
  ChannelSet channels = channel::assemble_channels(scenario.geometry, layout);
  const ChannelSet before = channels;

  layout.rx[1](0, 1) += 0.1 * scenario.wavelength;
  channel::update_rx_side(scenario.geometry, layout, 1, channels);

  const ChannelSet fresh = channel::assemble_channels(scenario.geometry, layout);
  CHECK((channels.F[1] - fresh.F[1]).norm() <= 1e-13 * fresh.F[1].norm());
  CHECK((channels.H[1] - fresh.H[1]).norm() <=
        1e-12 * std::max(fresh.H[1].norm(), 1e-30));
  CHECK((channels.F[0] - before.F[0]).norm() == 0.0);
  CHECK((channels.H[0] - before.H[0]).norm() == 0.0);
  CHECK((channels.G[1] - before.G[1]).norm() == 0.0);
}

TEST_CASE("pathloss follows the reference-distance power law") {
  const double t0 = 7.24e-7;  // -61.4 dB
  CHECK(channel::pathloss(1.0, 3.67, t0, 1.0) == doctest::Approx(t0));
  const double at_100 = channel::pathloss(100.0, 3.67, t0, 1.0);
  const double at_200 = channel::pathloss(200.0, 3.67, t0, 1.0);
  CHECK(at_100 / at_200 == doctest::Approx(std::pow(2.0, 3.67)).epsilon(1e-12));
  CHECK_THROWS_AS(channel::pathloss(0.5, 3.67, t0, 1.0), std::invalid_argument);
}
