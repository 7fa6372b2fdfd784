#include "invslam/scenario.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace invslam {

using nlohmann::json;

namespace {

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError("scenario: " + msg); }

double number(const json& j, const char* key)
{
  if (!j.contains(key)) {
    fail(fmt::format("missing key '{}'", key));
  }
  if (!j.at(key).is_number()) {
    fail(fmt::format("'{}' must be a number", key));
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) {
    fail(fmt::format("'{}' must be finite", key));
  }
  return v;
}

double number_or(const json& j, const char* key, double fallback)
{
  return j.contains(key) ? number(j, key) : fallback;
}

Vec2 vec2(const json& j, const std::string& what)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(fmt::format("{} must be a 2-element number list", what));
  }
  const Vec2 v(j[0].get<double>(), j[1].get<double>());
  if (!v.allFinite()) {
    fail(fmt::format("{} must be finite", what));
  }
  return v;
}

std::vector<Vec2> points(const json& j, const std::string& what)
{
  if (!j.is_array()) {
    fail(fmt::format("{} must be a list of 2-element lists", what));
  }
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vec2(j[i], fmt::format("{}[{}]", what, i)));
  }
  return out;
}

/// Scalar -> s I, flat list -> diagonal, nested list -> full matrix.
Matrix tuning_matrix(const json& j, Eigen::Index n, const std::string& what)
{
  if (j.is_number()) {
    return j.get<double>() * Matrix::Identity(n, n);
  }
  if (!j.is_array()) {
    fail(fmt::format("{} must be a number, a diagonal list or a matrix", what));
  }
  if (!j.empty() && j[0].is_number()) {
    if (static_cast<Eigen::Index>(j.size()) != n) {
      fail(fmt::format("{} diagonal needs {} entries", what, n));
    }
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
    return d.asDiagonal();
  }
  return Matrix();  // nested list, handled by the caller through matrix()
}

Matrix matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what)
{
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    fail(fmt::format("{} must have {} rows", what, rows));
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(fmt::format("{} row {} must have {} entries", what, r, cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) {
        fail(fmt::format("{} entry ({}, {}) is not a number", what, r, c));
      }
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Matrix square(const json& j, Eigen::Index n, const std::string& what)
{
  Matrix m = tuning_matrix(j, n, what);
  if (m.size() == 0) {
    m = matrix(j, n, n, what);
  }
  if (!m.allFinite()) {
    fail(fmt::format("{} must be finite", what));
  }
  return m;
}

json to_json(const Matrix& m)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json to_json(const std::vector<Vec2>& vs)
{
  json out = json::array();
  for (const auto& v : vs) {
    out.push_back(to_json(v));
  }
  return out;
}

InputProfile parse_profile(const json& j)
{
  if (!j.is_object() || !j.contains("type")) {
    fail("profile must be an object with a 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  try {
    if (type == "constant") {
      return InputProfile::constant(number(j, "u"), number(j, "v"));
    }
    if (type == "straight") {
      return InputProfile::straight(number(j, "u"));
    }
    if (type == "circle") {
      return InputProfile::circle(number(j, "u"), number(j, "radius"));
    }
    if (type == "piecewise") {
      if (!j.contains("segments") || !j.at("segments").is_array()) {
        fail("piecewise profile needs a 'segments' list");
      }
      std::vector<ProfileSegment> segs;
      for (const auto& s : j.at("segments")) {
        segs.push_back({number(s, "t0"), number(s, "t1"), Inputs{number(s, "u"), number(s, "v")}});
      }
      return InputProfile::piecewise(std::move(segs));
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  fail(fmt::format("unknown profile type '{}'", type));
}

json profile_json(const InputProfile& p)
{
  if (p.is_constant()) {
    const Inputs in = p.eval(0.0);
    return {{"type", "constant"}, {"u", in.u}, {"v", in.v}};
  }
  json segs = json::array();
  for (const auto& s : p.segments()) {
    segs.push_back({{"t0", s.t0}, {"t1", s.t1}, {"u", s.input.u}, {"v", s.input.v}});
  }
  return {{"type", "piecewise"}, {"segments", segs}};
}

GainSpec default_gain(ObserverKind kind, std::size_t n_landmarks, double relative_std)
{
  const Eigen::Index dim = state_dim(n_landmarks);
  const Eigen::Index out = 2 * static_cast<Eigen::Index>(n_landmarks);
  switch (kind) {
    case ObserverKind::Prop1: return Prop1Gain{std::vector<double>(n_landmarks, 1.0)};
    case ObserverKind::InvariantizedEkf:
      fail("inv-ekf needs an explicit constant gain matrix");
    case ObserverKind::Ekf:
    case ObserverKind::Iekf: {
      const double n_scale = relative_std > 0.0 ? relative_std * relative_std : 1.0;
      return RiccatiTuning{Matrix::Identity(dim, dim), n_scale * Matrix::Identity(out, out),
                           Matrix::Identity(dim, dim)};
    }
  }
  fail("unhandled observer kind");
}

GainSpec parse_gain(const json& j, ObserverKind kind, std::size_t n_landmarks, double relative_std)
{
  if (j.is_null()) {
    return default_gain(kind, n_landmarks, relative_std);
  }
  if (!j.is_object() || !j.contains("type")) {
    fail("gain must be an object with a 'type'");
  }
  const Eigen::Index dim = state_dim(n_landmarks);
  const Eigen::Index out = 2 * static_cast<Eigen::Index>(n_landmarks);
  const auto type = j.at("type").get<std::string>();
  if (type == "constant") {
    if (!j.contains("L")) {
      fail("constant gain needs 'L'");
    }
    return ConstantGain{matrix(j.at("L"), dim, out, "gain.L")};
  }
  if (type == "prop1") {
    if (!j.contains("k")) {
      return Prop1Gain{std::vector<double>(n_landmarks, 1.0)};
    }
    const json& k = j.at("k");
    if (k.is_number()) {
      return Prop1Gain{std::vector<double>(n_landmarks, k.get<double>())};
    }
    return Prop1Gain{k.get<std::vector<double>>()};
  }
  if (type == "riccati") {
    auto tuning = std::get<RiccatiTuning>(default_gain(ObserverKind::Iekf, n_landmarks, relative_std));
    if (j.contains("M")) tuning.M = square(j.at("M"), dim, "gain.M");
    if (j.contains("N")) tuning.N = square(j.at("N"), out, "gain.N");
    if (j.contains("P0")) tuning.P0 = square(j.at("P0"), dim, "gain.P0");
    return tuning;
  }
  fail(fmt::format("unknown gain type '{}'", type));
}

json gain_json(const GainSpec& g)
{
  return std::visit(overloaded{
                        [](const ConstantGain& c) -> json { return {{"type", "constant"}, {"L", to_json(c.L)}}; },
                        [](const Prop1Gain& p) -> json { return {{"type", "prop1"}, {"k", p.k}}; },
                        [](const RiccatiTuning& r) -> json {
                          return {{"type", "riccati"}, {"M", to_json(r.M)}, {"N", to_json(r.N)},
                                  {"P0", to_json(r.P0)}};
                        },
                    },
                    g);
}

Estimate default_landmark_estimate(const SlamState& truth, Estimate est)
{
  const Observations z = observe(truth);
  const Rot2 r(est.theta);
  est.landmarks.clear();
  for (const auto& zi : z) {
    est.landmarks.push_back(est.x + r * zi);
  }
  return est;
}

}  // namespace

Scenario parse_scenario(const json& j)
{
  if (!j.is_object()) {
    fail("top level must be an object");
  }
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.horizon = number(j, "horizon");
    s.dt = number_or(j, "dt", 0.01);
    if (!(s.dt > 0.0)) {
      fail("dt must be positive");
    }
    if (s.horizon < 0.0 || (s.horizon > 0.0 && s.horizon < s.dt)) {
      fail("horizon must be 0 or at least dt");
    }
    (void)step_count(s.horizon, s.dt);
    if (j.contains("log_every")) {
      const auto every = j.at("log_every").get<long long>();
      if (every < 1) {
        fail("log_every must be >= 1");
      }
      s.log_every = static_cast<std::size_t>(every);
    }

    if (!j.contains("truth")) {
      fail("missing 'truth'");
    }
    const json& truth = j.at("truth");
    s.truth.x = truth.contains("x") ? vec2(truth.at("x"), "truth.x") : Vec2::Zero();
    s.truth.theta = number_or(truth, "theta", 0.0);
    if (!truth.contains("landmarks")) {
      fail("missing 'truth.landmarks'");
    }
    s.truth.landmarks = points(truth.at("landmarks"), "truth.landmarks");
    if (s.truth.landmarks.empty()) {
      fail("at least one landmark is required");
    }

    const json est = j.value("estimate", json::object());
    s.estimate.x = est.contains("x") ? vec2(est.at("x"), "estimate.x") : s.truth.x;
    s.estimate.theta = number_or(est, "theta", s.truth.theta);
    if (est.contains("landmarks")) {
      s.estimate.landmarks = points(est.at("landmarks"), "estimate.landmarks");
      if (s.estimate.landmarks.size() != s.truth.landmarks.size()) {
        fail("estimate.landmarks must match truth.landmarks in count");
      }
    } else {
      s.estimate = default_landmark_estimate(s.truth, s.estimate);
    }

    if (!j.contains("profile")) {
      fail("missing 'profile'");
    }
    s.profile = parse_profile(j.at("profile"));
    if (s.profile.start() > 0.0 || s.profile.end() < s.horizon - 1e-9) {
      fail("profile must cover [0, horizon]");
    }

    const json noise = j.value("noise", json::object());
    s.noise.relative_std = number_or(noise, "relative_std", 0.0);
    if (s.noise.relative_std < 0.0) {
      fail("noise.relative_std must be >= 0");
    }
    if (j.contains("seed")) {
      s.noise.seed = j.at("seed").get<std::uint64_t>();
    }

    s.observer.kind = parse_observer_kind(j.value("observer", std::string("iekf")));
    s.observer.gain = parse_gain(j.value("gain", json()), s.observer.kind, s.truth.landmarks.size(),
                                 s.noise.relative_std);
    validate(s.observer, s.truth.landmarks.size());

    s.transient = number_or(j.value("metrics", json::object()), "transient", 0.25 * s.horizon);
    if (s.transient < 0.0) {
      fail("metrics.transient must be >= 0");
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    fail(e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError(fmt::format("scenario: cannot open '{}'", path.string()));
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(fmt::format("scenario: '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_scenario(j);
}

json to_json(const Scenario& s)
{
  return {
      {"name", s.name},
      {"horizon", s.horizon},
      {"dt", s.dt},
      {"log_every", s.log_every},
      {"truth", {{"x", to_json(s.truth.x)}, {"theta", s.truth.theta}, {"landmarks", to_json(s.truth.landmarks)}}},
      {"estimate",
       {{"x", to_json(s.estimate.x)}, {"theta", s.estimate.theta}, {"landmarks", to_json(s.estimate.landmarks)}}},
      {"profile", profile_json(s.profile)},
      {"noise", {{"relative_std", s.noise.relative_std}}},
      {"seed", s.noise.seed},
      {"observer", std::string(to_string(s.observer.kind))},
      {"gain", gain_json(s.observer.gain)},
      {"metrics", {{"transient", s.transient}}},
  };
}

std::string sha256_hex(std::string_view text)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256_hex: digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += fmt::format("{:02x}", digest[i]);
  }
  return hex;
}

std::string scenario_hash(const Scenario& s) { return sha256_hex(to_json(s).dump()); }

void set_seed(Scenario& s, std::uint64_t seed) { s.noise.seed = seed; }

void set_observer(Scenario& s, ObserverKind kind)
{
  s.observer.kind = kind;
  try {
    validate(s.observer, s.truth.landmarks.size());
  } catch (const std::invalid_argument&) {
    s.observer.gain = default_gain(kind, s.truth.landmarks.size(), s.noise.relative_std);
  }
}

}  // namespace invslam
