#include "fawsr/scenario_io.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace fawsr {

void Scenario::validate() const {
  dims.validate();
  if (static_cast<int>(geometry.size()) != dims.num_users)
    throw std::invalid_argument("scenario: geometry count != num_users");
  for (const auto& g : geometry) g.validate();
  if (noise.size() != dims.num_users || weights.size() != dims.num_users)
    throw std::invalid_argument("scenario: noise/weights length != num_users");
  if (wavelength <= 0 || power_budget <= 0)
    throw std::invalid_argument("scenario: wavelength and power must be positive");
  if ((noise.array() <= 0).any() || (weights.array() <= 0).any())
    throw std::invalid_argument("scenario: noise and weights must be positive");
  if (box_scale * wavelength <= min_separation)
    throw std::invalid_argument("scenario: box pitch must exceed min separation");
}

namespace layout {

namespace {

int grid_side(int count) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
}

void fill_grid(int count, double pitch, Positions& positions) {
  const int side = grid_side(count);
  positions.resize(count, 3);
  const double off = 0.5 * (side - 1) * pitch;
  for (int i = 0; i < count; ++i) {
    positions(i, 0) = (i % side) * pitch - off;
    positions(i, 1) = (i / side) * pitch - off;
    positions(i, 2) = 0.0;
  }
}

}  // namespace

void fill_movable(int count, double wavelength, double rho, double min_sep,
                  Positions& positions, std::vector<Box>& boxes) {
  const double pitch = rho * wavelength;
  if (pitch <= min_sep)
    throw std::invalid_argument("fill_movable: pitch must exceed min separation");
  fill_grid(count, pitch, positions);
  const double half = 0.5 * (pitch - min_sep);  // x-y half extent
  boxes.resize(count);
  for (int i = 0; i < count; ++i) {
    const Vec3 c = positions.row(i).transpose();
    boxes[i].lo = Vec3(c.x() - half, c.y() - half, -pitch);
    boxes[i].hi = Vec3(c.x() + half, c.y() + half, pitch);
  }
}

void fill_fixed(int count, double wavelength, Positions& positions,
                std::vector<Box>& boxes) {
  fill_grid(count, 0.5 * wavelength, positions);
  boxes.resize(count);
  for (int i = 0; i < count; ++i)
    boxes[i].lo = boxes[i].hi = positions.row(i).transpose();
}

AntennaLayout build(const Scenario& scenario, bool movable_tx, bool movable_rx) {
  AntennaLayout out;
  out.min_separation = scenario.min_separation;
  if (movable_tx)
    fill_movable(scenario.dims.num_tx, scenario.wavelength, scenario.box_scale,
                 scenario.min_separation, out.tx, out.tx_boxes);
  else
    fill_fixed(scenario.dims.num_tx, scenario.wavelength, out.tx, out.tx_boxes);
  out.rx.resize(scenario.dims.num_users);
  out.rx_boxes.resize(scenario.dims.num_users);
  for (int k = 0; k < scenario.dims.num_users; ++k) {
    if (movable_rx)
      fill_movable(scenario.dims.num_rx, scenario.wavelength, scenario.box_scale,
                   scenario.min_separation, out.rx[k], out.rx_boxes[k]);
    else
      fill_fixed(scenario.dims.num_rx, scenario.wavelength, out.rx[k], out.rx_boxes[k]);
  }
  return out;
}

}  // namespace layout

namespace io {

using nlohmann::json;

namespace {

json vec_to_json(const RealVec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

RealVec vec_from_json(const json& arr) {
  RealVec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

json mat_part_to_json(const Mat& m, bool real_part) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(real_part ? m(r, c).real() : m(r, c).imag());
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const json& re, const json& im) {
  if (re.size() != im.size())
    throw std::invalid_argument("scenario json: prm_real/prm_imag shape mismatch");
  const int rows = static_cast<int>(re.size());
  const int cols = rows ? static_cast<int>(re[0].size()) : 0;
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(re[r].size()) != cols || static_cast<int>(im[r].size()) != cols)
      throw std::invalid_argument("scenario json: ragged prm rows");
    for (int c = 0; c < cols; ++c)
      m(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
  }
  return m;
}

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

}  // namespace

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string to_json(const Scenario& s) {
  json j;
  j["dims"] = {{"num_tx", s.dims.num_tx},
               {"num_rx", s.dims.num_rx},
               {"num_users", s.dims.num_users},
               {"num_streams", s.dims.num_streams},
               {"num_clusters", s.dims.num_clusters}};
  j["wavelength_m"] = s.wavelength;
  json users = json::array();
  for (int k = 0; k < s.dims.num_users; ++k) {
    const auto& g = s.geometry[k];
    json u;
    u["aod_elevation"] = vec_to_json(g.aod_elevation);
    u["aod_azimuth"] = vec_to_json(g.aod_azimuth);
    u["aoa_elevation"] = vec_to_json(g.aoa_elevation);
    u["aoa_azimuth"] = vec_to_json(g.aoa_azimuth);
    u["prm_real"] = mat_part_to_json(g.path_response, true);
    u["prm_imag"] = mat_part_to_json(g.path_response, false);
    u["distance_m"] = s.distances_m.size() > k ? s.distances_m[k] : 0.0;
    users.push_back(u);
  }
  j["users"] = users;
  j["box"] = {{"rho", s.box_scale}, {"D", s.min_separation}};
  // Stored in watts to keep the round trip lossless; dBm kept for readability.
  j["noise_w"] = vec_to_json(s.noise);
  j["noise_dbm"] = watt_to_dbm(s.noise.size() ? s.noise[0] : 1.0);
  j["power_w"] = s.power_budget;
  j["power_dbm"] = watt_to_dbm(s.power_budget);
  j["weights"] = vec_to_json(s.weights);
  j["seed"] = s.seed;
  return j.dump(2);
}

Scenario from_json(const std::string& text) {
  json j = json::parse(text);
  Scenario s;
  const auto& d = j.at("dims");
  s.dims.num_tx = d.at("num_tx").get<int>();
  s.dims.num_rx = d.at("num_rx").get<int>();
  s.dims.num_users = d.at("num_users").get<int>();
  s.dims.num_streams = d.at("num_streams").get<int>();
  s.dims.num_clusters = d.value("num_clusters", 1);
  s.wavelength = j.at("wavelength_m").get<double>();
  s.distances_m = RealVec::Zero(s.dims.num_users);
  for (const auto& u : j.at("users")) {
    PathGeometry g;
    g.aod_elevation = vec_from_json(u.at("aod_elevation"));
    g.aod_azimuth = vec_from_json(u.at("aod_azimuth"));
    g.aoa_elevation = vec_from_json(u.at("aoa_elevation"));
    g.aoa_azimuth = vec_from_json(u.at("aoa_azimuth"));
    g.path_response = mat_from_json(u.at("prm_real"), u.at("prm_imag"));
    g.wavelength = s.wavelength;
    const int k = static_cast<int>(s.geometry.size());
    if (k < s.dims.num_users) s.distances_m[k] = u.value("distance_m", 0.0);
    s.geometry.push_back(std::move(g));
  }
  s.box_scale = j.at("box").at("rho").get<double>();
  s.min_separation = j.at("box").at("D").get<double>();
  if (j.contains("noise_w"))
    s.noise = vec_from_json(j.at("noise_w"));
  else
    s.noise = RealVec::Constant(s.dims.num_users, dbm_to_watt(j.at("noise_dbm").get<double>()));
  s.power_budget =
      j.contains("power_w") ? j.at("power_w").get<double>() : dbm_to_watt(j.at("power_dbm").get<double>());
  s.weights = vec_from_json(j.at("weights"));
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

void save(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << to_json(scenario) << '\n';
}

Scenario load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace io
}  // namespace fawsr
