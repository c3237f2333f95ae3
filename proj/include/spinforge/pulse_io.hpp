/* Copyright 2026 The SpinForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// File formats: pulse CSV with a commented header, system configuration
// (JSON), trajectory / search-trace / chi / history CSVs, and QPT action
// images.
//
// Pulse values are stored in Hz (and microseconds for dt). Each value is
// written with the fewest significant digits (at least 17) whose conversion
// back to rad/s reproduces the stored double exactly; the conversion is done
// in long double so that save -> load is the identity on every sample.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinforge/error.hpp"
#include "spinforge/geodesic.hpp"
#include "spinforge/mintime.hpp"
#include "spinforge/propagation.hpp"
#include "spinforge/qpt.hpp"
#include "spinforge/spin_model.hpp"

namespace spinforge {

inline constexpr int kPulseFormatVersion = 1;

namespace io_detail {

// Hz <-> rad/s conversions run in extended precision with the same 2 pi the
// model uses, so frequencies built as kTwoPi * hz print back as hz.
inline constexpr long double kTwoPiL = static_cast<long double>(kTwoPi);

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline long double parse_long(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) throw FormatError(what + ": empty number");
  char* end = nullptr;
  const long double v = std::strtold(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(static_cast<double>(v))) {
    throw FormatError(what + ": not a finite number: '" + t + "'");
  }
  return v;
}

inline double parse_double(const std::string& text, const std::string& what) {
  return static_cast<double>(parse_long(text, what));
}

inline std::string render(long double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
  return buf;
}

// Shortest rendering of value / scale (at least `min_digits` digits unless
// fewer already round-trip) such that parse(text) * scale == value.
inline std::string render_scaled(double value, long double scale, int min_digits = 1) {
  const long double x = static_cast<long double>(value) / scale;
  // Enough digits for the integer part keeps e.g. 12500 out of exponent form.
  if (std::abs(x) >= 1.0L && std::abs(x) < 1e17L) {
    min_digits = std::max(min_digits, static_cast<int>(std::floor(std::log10(std::abs(x)))) + 1);
  }
  for (int digits = min_digits; digits <= 21; ++digits) {
    const std::string s = render(x, digits);
    if (static_cast<double>(std::strtold(s.c_str(), nullptr) * scale) == value) return s;
  }
  return render(x, 21);
}

inline double unscale(const std::string& text, long double scale, const std::string& what) {
  return static_cast<double>(parse_long(text, what) * scale);
}

// Shortest text that parses back to exactly v.
inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace io_detail

// FNV-1a 64 over a canonical rendering of every system parameter.
inline std::string system_fingerprint(const SpinSystem& sys) {
  std::string text = io_detail::shortest(sys.omega0()) + ";" + io_detail::shortest(sys.omega_rf()) + ";" +
                     io_detail::shortest(sys.control_bound());
  for (double d : sys.chemical_shifts()) text += ";" + io_detail::shortest(d);
  const auto& j = sys.j_couplings_hz();
  for (Eigen::Index r = 0; r < j.rows(); ++r) {
    for (Eigen::Index c = 0; c < j.cols(); ++c) text += ";" + io_detail::shortest(j(r, c));
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct PulseHeader {
  int version = kPulseFormatVersion;
  double bound = 0.0;       // rad/s
  std::string created;      // free text
  std::string fingerprint;  // system_fingerprint, may be empty
};

struct PulseFile {
  PulseHeader header;
  PulseSequence pulse;
};

inline void write_pulse(std::ostream& out, const PulseSequence& pulse, const PulseHeader& header) {
  using io_detail::kTwoPiL;
  if (!(header.bound > 0.0)) throw ModelError("write_pulse: bound must be positive");
  check_bound(pulse, header.bound);
  out << "# spinforge pulse\n"
      << "# version = " << header.version << "\n"
      << "# dt_us = " << io_detail::render_scaled(pulse.dt(), 1e-6L) << "\n"
      << "# steps = " << pulse.size() << "\n"
      << "# bound_hz = " << io_detail::render_scaled(header.bound, kTwoPiL) << "\n"
      << "# created = " << header.created << "\n"
      << "# fingerprint = " << header.fingerprint << "\n"
      << "wx_hz,wy_hz,amplitude_fraction,phase_deg\n";
  for (const auto& s : pulse.samples()) {
    const double r = s.amplitude();
    double phase = r == 0.0 ? 0.0 : std::atan2(s.wy, s.wx) * 180.0 / kPi;
    if (phase < 0.0) phase += 360.0;
    out << io_detail::render_scaled(s.wx, kTwoPiL, 17) << ',' << io_detail::render_scaled(s.wy, kTwoPiL, 17) << ','
        << io_detail::shortest(r / header.bound) << ',' << io_detail::shortest(phase) << '\n';
  }
  if (!out) throw FormatError("write_pulse: write failed");
}

inline PulseFile read_pulse(std::istream& in) {
  using io_detail::kTwoPiL;
  std::map<std::string, std::string> fields;
  std::string line;
  bool saw_columns = false;
  std::vector<ControlSample> samples;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io_detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos) fields[io_detail::trim(t.substr(1, eq - 1))] = io_detail::trim(t.substr(eq + 1));
      continue;
    }
    if (!saw_columns) {
      if (t != "wx_hz,wy_hz,amplitude_fraction,phase_deg") {
        throw FormatError("pulse file: missing column header (line " + std::to_string(line_no) + ")");
      }
      saw_columns = true;
      continue;
    }
    const auto cols = io_detail::split(t, ',');
    if (cols.size() != 4) {
      throw FormatError("pulse file: expected 4 columns on line " + std::to_string(line_no));
    }
    const std::string where = "pulse file sample " + std::to_string(samples.size());
    io_detail::parse_double(cols[2], where);
    io_detail::parse_double(cols[3], where);
    samples.push_back({io_detail::unscale(cols[0], kTwoPiL, where), io_detail::unscale(cols[1], kTwoPiL, where)});
  }
  for (const char* key : {"version", "dt_us", "steps", "bound_hz"}) {
    if (!fields.count(key)) throw FormatError(std::string("pulse file: header field '") + key + "' missing");
  }
  if (!saw_columns) throw FormatError("pulse file: missing column header");

  PulseFile f;
  const double version = io_detail::parse_double(fields["version"], "pulse file version");
  if (version != kPulseFormatVersion) {
    throw FormatError("pulse file: unsupported version " + fields["version"]);
  }
  const double steps = io_detail::parse_double(fields["steps"], "pulse file steps");
  if (steps < 0 || steps != std::floor(steps)) throw FormatError("pulse file: steps must be a count");
  if (static_cast<std::size_t>(steps) != samples.size()) {
    throw FormatError("pulse file: header says " + fields["steps"] + " steps but the body has " +
                      std::to_string(samples.size()));
  }
  f.header.bound = io_detail::unscale(fields["bound_hz"], kTwoPiL, "pulse file bound_hz");
  if (!(f.header.bound > 0.0)) throw FormatError("pulse file: bound_hz must be positive");
  f.header.created = fields["created"];
  f.header.fingerprint = fields["fingerprint"];
  const double dt = io_detail::unscale(fields["dt_us"], 1e-6L, "pulse file dt_us");
  try {
    f.pulse = PulseSequence(dt, std::move(samples));
  } catch (const ModelError& e) {
    throw FormatError(std::string("pulse file: ") + e.what());
  }
  check_bound(f.pulse, f.header.bound);
  return f;
}

inline void save_pulse(const PulseSequence& pulse, const std::string& path, const PulseHeader& header) {
  auto out = io_detail::open_out(path);
  write_pulse(out, pulse, header);
}

inline void save_pulse(const PulseSequence& pulse, const SpinSystem& sys, const std::string& path,
                       const std::string& created = {}) {
  save_pulse(pulse, path, {kPulseFormatVersion, sys.control_bound(), created, system_fingerprint(sys)});
}

inline PulseFile load_pulse_file(const std::string& path) {
  auto in = io_detail::open_in(path);
  return read_pulse(in);
}

inline PulseSequence load_pulse(const std::string& path) { return load_pulse_file(path).pulse; }

// ---------------------------------------------------------------------------
// Targets: "I,Rz(90)" style. Factors are separated by ',' or 'x'; each is
// I, Rx(a), Ry(a) or Rz(a) with a in degrees (a suffix "pi" form such as
// "pi/2" is also accepted, in radians). Rk(a) is the rotation of the Bloch
// vector by a about k, exp(-i a sigma_k).

namespace io_detail {

inline double parse_angle(const std::string& text) {
  std::string t = trim(text);
  const auto pi = t.find("pi");
  if (pi == std::string::npos) return parse_double(t, "rotation angle") * kPi / 180.0;
  const std::string before = trim(t.substr(0, pi));
  std::string after = trim(t.substr(pi + 2));
  double v = kPi;
  if (!before.empty() && before != "-") {
    std::string b = before;
    if (b.back() == '*') b.pop_back();
    v *= parse_double(b, "rotation angle");
  } else if (before == "-") {
    v = -v;
  }
  if (!after.empty()) {
    if (after[0] != '/') throw FormatError("rotation angle: cannot parse '" + text + "'");
    v /= parse_double(after.substr(1), "rotation angle");
  }
  return v;
}

inline ComplexMatrix parse_factor(const std::string& text) {
  const std::string t = trim(text);
  if (t == "I" || t == "I2" || t == "I_2") return identity(2);
  if (t.size() >= 5 && (t[0] == 'R' || t[0] == 'r') && t[2] == '(' && t.back() == ')') {
    const char ax = static_cast<char>(std::tolower(static_cast<unsigned char>(t[1])));
    const double angle = parse_angle(t.substr(3, t.size() - 4));
    if (ax == 'x') return rotation(SpinAxis::x, angle);
    if (ax == 'y') return rotation(SpinAxis::y, angle);
    if (ax == 'z') return rotation(SpinAxis::z, angle);
  }
  throw FormatError("target: cannot parse factor '" + t + "' (use I, Rx(deg), Ry(deg), Rz(deg))");
}

}  // namespace io_detail

inline TargetTransformation parse_target(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == ',' || c == 'x' || c == '*') && !current.empty() &&
        !(c == 'x' && (current.back() == 'R' || current.back() == 'r'))) {
      parts.push_back(current);
      current.clear();
      continue;
    }
    if (c != ' ') current += c;
  }
  if (!current.empty()) parts.push_back(current);
  if (parts.empty()) throw FormatError("target: empty");
  std::vector<ComplexMatrix> factors;
  for (const auto& p : parts) factors.push_back(io_detail::parse_factor(p));
  std::string label;
  for (std::size_t i = 0; i < parts.size(); ++i) label += (i ? " x " : "") + parts[i];
  return TargetTransformation(std::move(factors), label);
}

// ---------------------------------------------------------------------------
// System configuration (JSON):
//   larmor_hz   number, default 100e6
//   shifts_hz   array of N numbers (delta_k omega0 / 2 pi), required
//   j_hz        number (every pair) or N x N symmetric array, default 0
//   carrier_hz  number, default larmor_hz
//   bound_hz    number (Omega / 2 pi), required
//   target      optional; either a string in parse_target syntax or an
//               array with one entry per spin, each "I", a string factor,
//               {"axis": "x"|"y"|"z", "angle_deg": a} or
//               {"matrix": [[[re, im], [re, im]], [[re, im], [re, im]]]}

struct SystemConfig {
  double larmor_hz = kDefaultLarmorHz;
  std::vector<double> shifts_hz;
  Eigen::MatrixXd j_hz;
  std::optional<double> carrier_hz;
  double bound_hz = 0.0;
  std::optional<nlohmann::json> target_spec;

  SpinSystem system() const { return SpinSystem::from_hz(larmor_hz, shifts_hz, j_hz, bound_hz, carrier_hz); }

  // The configured target, if any.
  std::optional<TargetTransformation> target() const;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["larmor_hz"] = larmor_hz;
    j["shifts_hz"] = shifts_hz;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(j_hz.rows()));
    for (Eigen::Index r = 0; r < j_hz.rows(); ++r) {
      for (Eigen::Index c = 0; c < j_hz.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(j_hz(r, c));
    }
    j["j_hz"] = rows;
    j["carrier_hz"] = carrier_hz.value_or(larmor_hz);
    j["bound_hz"] = bound_hz;
    if (target_spec) j["target"] = *target_spec;
    return j;
  }

  static SystemConfig trichloroethylene() {
    SystemConfig c;
    c.shifts_hz = {11930.18, 11202.80};
    c.j_hz = Eigen::MatrixXd(2, 2);
    c.j_hz << 0.0, 103.49, 103.49, 0.0;
    c.bound_hz = 12500.0;
    return c;
  }
};

inline ComplexMatrix parse_factor_json(const nlohmann::json& f) {
  if (f.is_string()) return io_detail::parse_factor(f.get<std::string>());
  if (!f.is_object()) throw FormatError("config: each target factor must be a string or an object");
  if (f.contains("matrix")) {
    const auto& m = f["matrix"];
    ComplexMatrix u(2, 2);
    if (!m.is_array() || m.size() != 2) throw FormatError("config: target matrix must be 2 x 2");
    for (std::size_t r = 0; r < 2; ++r) {
      if (!m[r].is_array() || m[r].size() != 2) throw FormatError("config: target matrix must be 2 x 2");
      for (std::size_t c = 0; c < 2; ++c) {
        const auto& e = m[r][c];
        if (e.is_number()) {
          u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = e.get<double>();
        } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
          u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = Complex(e[0].get<double>(), e[1].get<double>());
        } else {
          throw FormatError("config: matrix entries must be numbers or [re, im] pairs");
        }
      }
    }
    return u;
  }
  if (!f.contains("axis") || !f["axis"].is_string() || !f.contains("angle_deg") || !f["angle_deg"].is_number()) {
    throw FormatError("config: a target factor needs 'axis' and 'angle_deg', or 'matrix'");
  }
  const std::string axis = f["axis"].get<std::string>();
  const double angle = f["angle_deg"].get<double>() * kPi / 180.0;
  if (axis == "x") return rotation(SpinAxis::x, angle);
  if (axis == "y") return rotation(SpinAxis::y, angle);
  if (axis == "z") return rotation(SpinAxis::z, angle);
  throw FormatError("config: axis must be x, y or z");
}

inline std::optional<TargetTransformation> SystemConfig::target() const {
  if (!target_spec) return std::nullopt;
  try {
    if (target_spec->is_string()) return parse_target(target_spec->get<std::string>());
    if (!target_spec->is_array()) throw FormatError("config: 'target' must be a string or an array");
    std::vector<ComplexMatrix> factors;
    std::string label;
    for (const auto& f : *target_spec) {
      factors.push_back(parse_factor_json(f));
      label += (label.empty() ? "" : " x ") + (f.is_string() ? f.get<std::string>() : f.dump());
    }
    return TargetTransformation(std::move(factors), label);
  } catch (const ModelError& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
}

inline SystemConfig parse_system_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config: top level must be an object");
  static const std::vector<std::string> known{"larmor_hz", "shifts_hz", "j_hz", "carrier_hz", "bound_hz", "target"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw FormatError("config: unknown key '" + key + "'");
    }
  }
  auto number = [&](const nlohmann::json& v, const std::string& what) {
    if (!v.is_number()) throw FormatError("config: '" + what + "' must be a number");
    return v.get<double>();
  };
  SystemConfig c;
  if (j.contains("larmor_hz")) c.larmor_hz = number(j["larmor_hz"], "larmor_hz");
  if (!j.contains("shifts_hz") || !j["shifts_hz"].is_array()) throw FormatError("config: 'shifts_hz' array required");
  for (const auto& v : j["shifts_hz"]) c.shifts_hz.push_back(number(v, "shifts_hz"));
  const auto n = static_cast<Eigen::Index>(c.shifts_hz.size());
  c.j_hz = Eigen::MatrixXd::Zero(n, n);
  if (j.contains("j_hz")) {
    const auto& jj = j["j_hz"];
    if (jj.is_number()) {
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index col = 0; col < n; ++col) c.j_hz(r, col) = r == col ? 0.0 : jj.get<double>();
      }
    } else if (jj.is_array() && static_cast<Eigen::Index>(jj.size()) == n) {
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = jj[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
          throw FormatError("config: 'j_hz' must be N x N");
        }
        for (Eigen::Index col = 0; col < n; ++col) c.j_hz(r, col) = number(row[static_cast<std::size_t>(col)], "j_hz");
      }
    } else {
      throw FormatError("config: 'j_hz' must be a number or an N x N array");
    }
  }
  if (j.contains("carrier_hz")) c.carrier_hz = number(j["carrier_hz"], "carrier_hz");
  if (!j.contains("bound_hz")) throw FormatError("config: 'bound_hz' required");
  c.bound_hz = number(j["bound_hz"], "bound_hz");
  if (j.contains("target")) {
    c.target_spec = j["target"];
    if (c.target()->n_spins() != static_cast<int>(c.shifts_hz.size())) {
      throw FormatError("config: 'target' has " + std::to_string(c.target()->n_spins()) + " factors for " +
                        std::to_string(c.shifts_hz.size()) + " spins");
    }
  }
  try {
    (void)c.system();
  } catch (const ModelError& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

inline SystemConfig load_system_config(const std::string& path) {
  auto in = io_detail::open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_config(ss.str());
}

// ---------------------------------------------------------------------------
// CSV outputs.

// Every `decimate`-th sample plus the final one.
inline void write_trajectory_csv(std::ostream& out, const BlochTrajectory& traj, std::size_t decimate = 1) {
  if (decimate == 0) throw ModelError("write_trajectory_csv: decimation must be >= 1");
  out << "t_us,x,y,z\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (i % decimate != 0 && i + 1 != traj.times.size()) continue;
    const auto& v = traj.vectors[i];
    out << io_detail::render(traj.times[i] / 1e-6L, 15) << ',' << io_detail::shortest(v.x()) << ',' << io_detail::shortest(v.y())
        << ',' << io_detail::shortest(v.z()) << '\n';
  }
}

inline void write_trace_csv(std::ostream& out, const std::vector<SearchAttempt>& attempts) {
  out << "duration_us,phi,converged\n";
  for (const auto& a : attempts) {
    out << io_detail::render(a.duration / 1e-6L, 15) << ',' << io_detail::shortest(a.fidelity) << ',' << (a.converged ? 1 : 0)
        << '\n';
  }
}

inline void write_history_csv(std::ostream& out, const std::vector<double>& fidelity_history) {
  out << "iteration,phi\n";
  for (std::size_t i = 0; i < fidelity_history.size(); ++i) {
    out << i << ',' << io_detail::shortest(fidelity_history[i]) << '\n';
  }
}

// 16 x 16 table with basis labels 1..16 on both axes; `imag` selects the
// imaginary part.
inline void write_chi_csv(std::ostream& out, const ProcessMatrix& p, bool imag) {
  out << "m\\n";
  for (int n = 1; n <= kQptBasisSize; ++n) out << ',' << n;
  out << '\n';
  for (int m = 1; m <= kQptBasisSize; ++m) {
    out << m;
    for (int n = 1; n <= kQptBasisSize; ++n) {
      const Complex c = p.chi(m - 1, n - 1);
      out << ',' << io_detail::shortest(imag ? c.imag() : c.real());
    }
    out << '\n';
  }
}

// Action images, one row per matrix element:
//   unit,row,col,re,im   with unit = i + 4 j for the input |i><j| (0..15).
inline void write_action_images(std::ostream& out, const ActionImages& images) {
  if (images.size() != static_cast<std::size_t>(kQptBasisSize)) throw ModelError("write_action_images: need 16 images");
  out << "unit,row,col,re,im\n";
  for (int k = 0; k < kQptBasisSize; ++k) {
    for (int r = 0; r < kQptDim; ++r) {
      for (int c = 0; c < kQptDim; ++c) {
        const Complex v = images[static_cast<std::size_t>(k)](r, c);
        out << k << ',' << r << ',' << c << ',' << io_detail::shortest(v.real()) << ',' << io_detail::shortest(v.imag())
            << '\n';
      }
    }
  }
}

inline ActionImages read_action_images(std::istream& in) {
  ActionImages images(kQptBasisSize, ComplexMatrix::Zero(kQptDim, kQptDim));
  std::vector<int> seen(kQptBasisSize * kQptDim * kQptDim, 0);
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io_detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header) {
      if (t != "unit,row,col,re,im") throw FormatError("action images: missing column header");
      header = true;
      continue;
    }
    const auto cols = io_detail::split(t, ',');
    const std::string where = "action images line " + std::to_string(line_no);
    if (cols.size() != 5) throw FormatError(where + ": expected 5 columns");
    const double k = io_detail::parse_double(cols[0], where), r = io_detail::parse_double(cols[1], where),
                 c = io_detail::parse_double(cols[2], where);
    if (k < 0 || k >= kQptBasisSize || r < 0 || r >= kQptDim || c < 0 || c >= kQptDim || k != std::floor(k) ||
        r != std::floor(r) || c != std::floor(c)) {
      throw FormatError(where + ": index out of range");
    }
    const int ki = static_cast<int>(k), ri = static_cast<int>(r), ci = static_cast<int>(c);
    images[static_cast<std::size_t>(ki)](ri, ci) =
        Complex(io_detail::parse_double(cols[3], where), io_detail::parse_double(cols[4], where));
    ++seen[static_cast<std::size_t>((ki * kQptDim + ri) * kQptDim + ci)];
  }
  for (int s : seen) {
    if (s != 1) throw FormatError("action images: every (unit,row,col) must appear exactly once");
  }
  return images;
}

}  // namespace spinforge
