#include "nvdephase/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace nvd {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

enum class Rule { Any, NonNegative, Positive };

// Typed access to one JSON object that records which keys were consumed.
class Obj {
 public:
  Obj(const json& j, std::string path, ScenarioReport& report) : j_(j), path_(std::move(path)), report_(report) {}

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    return true;
  }

  double number(const std::string& key, double fallback, Rule rule = Rule::Any) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) {
      violation(key, "expected a number");
      return fallback;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) violation(key, "must be finite");
    if (rule == Rule::NonNegative && !(x >= 0.0)) violation(key, "must be >= 0");
    if (rule == Rule::Positive && !(x > 0.0)) violation(key, "must be > 0");
    return x;
  }

  // Null means "absent" and maps to +infinity.
  double number_or_infinite(const std::string& key, double fallback) {
    if (has(key) && j_.at(key).is_null()) return std::numeric_limits<double>::infinity();
    used_.erase(key);
    return number(key, fallback, Rule::Positive);
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) {
      violation(key, "expected an integer");
      return fallback;
    }
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
      violation(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return fallback;
    }
    return static_cast<int>(x);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      violation(key, "expected a nonnegative integer");
      return fallback;
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) {
      violation(key, "expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback, Rule rule) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) {
      violation(key, "expected an array of numbers");
      return fallback;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        violation(key + "[" + std::to_string(i) + "]", "expected a number");
        continue;
      }
      const double x = v[i].get<double>();
      if ((rule == Rule::Positive && !(x > 0.0)) || (rule == Rule::NonNegative && !(x >= 0.0))) {
        violation(key + "[" + std::to_string(i) + "]", rule == Rule::Positive ? "must be > 0" : "must be >= 0");
      }
      out.push_back(x);
    }
    return out;
  }

  // Child object or array element access; returns nullptr on type mismatch.
  const json* child(const std::string& key, json::value_t type) {
    if (!has(key)) return nullptr;
    const json& v = j_.at(key);
    if (v.type() != type) {
      violation(key, type == json::value_t::object ? "expected an object" : "expected an array");
      return nullptr;
    }
    return &v;
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void violation(const std::string& key, const std::string& what) {
    report_.violations.push_back(path(key) + ": " + what);
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) report_.warnings.push_back(path(it.key()) + ": unknown key ignored");
    }
  }

 private:
  const json& j_;
  std::string path_;
  ScenarioReport& report_;
  std::set<std::string> used_;
};

ChannelKind channel_kind_from_string(const std::string& name) {
  for (ChannelKind k : {ChannelKind::Nitrogen, ChannelKind::Carbon13, ChannelKind::OtherSpins,
                        ChannelKind::StrainGradient, ChannelKind::FieldGradient, ChannelKind::TempFluctuation,
                        ChannelKind::NVNV}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown channel kind '" + name + "'");
}

SampleSpec parse_sample(const json& j, ScenarioReport& report) {
  Obj o(j, "sample", report);
  SampleSpec s;
  s.name = o.string("name", "");
  s.n_ppm = o.number("n_ppm", 0.0, Rule::NonNegative);
  s.c13_percent = o.number("c13_percent", 0.0, Rule::NonNegative);
  s.strain_gradient_hz_per_um = o.number("strain_gradient_hz_per_um", 0.0, Rule::NonNegative);
  s.spot_length_um = o.number("spot_length_um", 0.0, Rule::NonNegative);
  s.grad_coeff_mhz_per_gauss = o.number("grad_coeff_mhz_per_gauss", 0.0, Rule::NonNegative);
  s.bias_gauss = o.number("bias_gauss", 0.0, Rule::NonNegative);
  s.temperature_fluctuation_k = o.number("temperature_fluctuation_k", 0.0, Rule::NonNegative);
  const std::string model = o.string("nitrogen_model", "dipolar");
  try {
    s.nitrogen_model = nitrogen_model_from_string(model);
  } catch (const std::invalid_argument& e) {
    o.violation("nitrogen_model", e.what());
  }
  if (const json* extras = o.child("extra_channels", json::value_t::array)) {
    for (std::size_t i = 0; i < extras->size(); ++i) {
      const std::string path = "sample.extra_channels[" + std::to_string(i) + "]";
      if (!(*extras)[i].is_object()) {
        report.violations.push_back(path + ": expected an object");
        continue;
      }
      Obj e((*extras)[i], path, report);
      ExtraChannel c;
      c.label = e.string("label", "extra");
      c.rate_per_us = e.number("rate_per_us", 0.0, Rule::NonNegative);
      c.method = e.string("method", "SEDOR");
      const std::string kind = e.string("kind", to_string(ChannelKind::OtherSpins));
      try {
        c.kind = channel_kind_from_string(kind);
      } catch (const std::invalid_argument& ex) {
        e.violation("kind", ex.what());
      }
      e.finish();
      s.extra_channels.push_back(c);
    }
  }
  o.finish();
  return s;
}

SpectrumTask parse_spectrum(const json& j, ScenarioReport& report) {
  Obj o(j, "spectrum", report);
  SpectrumTask t;
  const std::string isotope = o.string("isotope", "N14");
  if (isotope == "N14") {
    t.isotope = NitrogenIsotope::N14;
  } else if (isotope == "N15") {
    t.isotope = NitrogenIsotope::N15;
  } else {
    o.violation("isotope", "must be N14 or N15");
  }
  t.field_mt = o.number("field_mt", t.field_mt, Rule::Positive);
  if (t.field_mt >= 1000.0) o.violation("field_mt", "must stay below 1 T");
  t.misalignment_deg = o.number("misalignment_deg", t.misalignment_deg);
  t.tilt_azimuth_deg = o.number("tilt_azimuth_deg", t.tilt_azimuth_deg);
  t.hwhm_khz = o.number("hwhm_khz", t.hwhm_khz, Rule::Positive);
  t.forbidden_amplitude = o.number("forbidden_amplitude", t.forbidden_amplitude, Rule::NonNegative);
  t.f_min_mhz = o.number("f_min_mhz", t.f_min_mhz, Rule::NonNegative);
  t.f_max_mhz = o.number("f_max_mhz", t.f_max_mhz, Rule::Positive);
  if (t.f_max_mhz <= t.f_min_mhz) o.violation("f_max_mhz", "must exceed f_min_mhz");
  t.points = o.integer("points", t.points, 2, 10000000);
  o.finish();
  return t;
}

BudgetTask parse_budget(const json& j, ScenarioReport& report) {
  Obj o(j, "budget", report);
  BudgetTask t;
  if (const json* bases = o.child("bases", json::value_t::array)) {
    t.bases.clear();
    for (const auto& b : *bases) {
      if (b == "SQ") {
        t.bases.push_back(Basis::SQ);
      } else if (b == "DQ") {
        t.bases.push_back(Basis::DQ);
      } else {
        o.violation("bases", "entries must be \"SQ\" or \"DQ\"");
      }
    }
  }
  o.finish();
  return t;
}

RamseyTask parse_ramsey(const json& j, ScenarioReport& report) {
  Obj o(j, "ramsey", report);
  RamseyTask t;
  t.data_file = o.string("data_file", "");
  t.n_lines = o.integer("n_lines", t.n_lines, 1, 3);
  t.dm = o.integer("dm", t.dm, 1, 2);
  t.c0 = o.number("c0", t.c0, Rule::Positive);
  if (t.c0 > 1.0) o.violation("c0", "must lie in (0, 1]");
  t.t2star_us = o.number("t2star_us", t.t2star_us, Rule::Positive);
  t.p = o.number("p", t.p, Rule::Positive);
  if (t.p < 0.5 || t.p > 3.0) o.violation("p", "must lie in [0.5, 3]");
  if (const json* lines = o.child("lines", json::value_t::array)) {
    for (std::size_t i = 0; i < lines->size(); ++i) {
      const std::string path = "ramsey.lines[" + std::to_string(i) + "]";
      if (!(*lines)[i].is_object()) {
        report.violations.push_back(path + ": expected an object");
        continue;
      }
      Obj l((*lines)[i], path, report);
      RamseyTask::Line line;
      line.f_mhz = l.number("f_mhz", line.f_mhz, Rule::NonNegative);
      line.tau0_ns = l.number("tau0_ns", line.tau0_ns);
      l.finish();
      t.lines.push_back(line);
    }
    if (t.lines.empty() || t.lines.size() > 3) o.violation("lines", "needs 1 to 3 entries");
  }
  if (t.data_file.empty() && t.lines.empty()) t.lines.push_back({});
  t.t_max_us = o.number("t_max_us", t.t_max_us, Rule::Positive);
  t.points = o.integer("points", t.points, 10, 10000000);
  t.noise_sd = o.number("noise_sd", t.noise_sd, Rule::NonNegative);
  t.spectrum_pad = o.integer("spectrum_pad", t.spectrum_pad, 1, 64);
  o.finish();
  return t;
}

DriveTask parse_drive(const json& j, ScenarioReport& report) {
  Obj o(j, "drive", report);
  DriveTask t;
  t.dm = o.integer("dm", t.dm, 1, 2);
  t.gamma_khz = o.number("gamma_khz", t.gamma_khz, Rule::NonNegative);
  t.delta_khz = o.number("delta_khz", t.delta_khz, Rule::Positive);
  t.t2_other_us = o.number("t2_other_us", t.t2_other_us, Rule::Positive);
  t.omega_min_khz = o.number("omega_min_khz", t.omega_min_khz, Rule::Positive);
  t.omega_max_khz = o.number("omega_max_khz", t.omega_max_khz, Rule::Positive);
  if (t.omega_max_khz <= t.omega_min_khz) o.violation("omega_max_khz", "must exceed omega_min_khz");
  t.points = o.integer("points", t.points, 2, 1000000);
  t.data_file = o.string("data_file", "");
  o.finish();
  return t;
}

MonteCarloTask parse_montecarlo(const json& j, ScenarioReport& report) {
  Obj o(j, "montecarlo", report);
  MonteCarloTask t;
  t.densities_ppm = o.numbers("densities_ppm", t.densities_ppm, Rule::Positive);
  if (t.densities_ppm.empty()) o.violation("densities_ppm", "needs at least one density");
  t.n_configs = o.integer("n_configs", t.n_configs, 100, 100000000);
  t.expected_count = o.number("expected_count", t.expected_count, Rule::Positive);
  if (t.expected_count < 100.0) o.violation("expected_count", "must be >= 100");
  t.prefactor = o.number("prefactor", t.prefactor, Rule::NonNegative);
  t.odr_file = o.string("odr_file", "");
  o.finish();
  return t;
}

SensitivityTask parse_sensitivity(const json& j, ScenarioReport& report) {
  Obj o(j, "sensitivity", report);
  SensitivityTask t;
  if (const json* p = o.child("point", json::value_t::object)) {
    Obj q(*p, "sensitivity.point", report);
    SensitivityTask::Point pt;
    pt.sigma = q.number("sigma", 0.0, Rule::Positive);
    pt.tau_us = q.number("tau_us", 0.0, Rule::Positive);
    pt.tau_dead_us = q.number("tau_dead_us", 0.0, Rule::NonNegative);
    pt.contrast = q.number("contrast", 0.0, Rule::Positive);
    pt.dm = q.integer("dm", 1, 1, 2);
    if (!q.has("sigma")) q.violation("sigma", "required");
    if (!q.has("tau_us")) q.violation("tau_us", "required");
    if (!q.has("contrast")) q.violation("contrast", "required");
    q.finish();
    t.point = pt;
  }
  if (const json* f = o.child("fom", json::value_t::object)) {
    Obj q(*f, "sensitivity.fom", report);
    SensitivityTask::Fom fom;
    fom.n_min_ppm = q.number("n_min_ppm", fom.n_min_ppm, Rule::Positive);
    fom.n_max_ppm = q.number("n_max_ppm", fom.n_max_ppm, Rule::Positive);
    if (fom.n_max_ppm <= fom.n_min_ppm) q.violation("n_max_ppm", "must exceed n_min_ppm");
    fom.points = q.integer("points", fom.points, 2, 1000000);
    fom.n_nv = q.number("n_nv", fom.n_nv, Rule::Positive);
    if (fom.n_nv > 1.0) q.violation("n_nv", "must lie in (0, 1]");
    fom.strain_t2_us = q.number_or_infinite("strain_t2_us", fom.strain_t2_us);
    fom.c13_t2_us = q.number("c13_t2_us", fom.c13_t2_us, Rule::Positive);
    fom.delta_ref_khz = q.number("delta_ref_khz", fom.delta_ref_khz, Rule::Positive);
    fom.delta_ref_ppm = q.number("delta_ref_ppm", fom.delta_ref_ppm, Rule::Positive);
    fom.normalization_ppm = q.number("normalization_ppm", fom.normalization_ppm, Rule::Positive);
    if (const json* settings = q.child("settings", json::value_t::array)) {
      fom.settings.clear();
      for (std::size_t i = 0; i < settings->size(); ++i) {
        const std::string path = "sensitivity.fom.settings[" + std::to_string(i) + "]";
        if (!(*settings)[i].is_object()) {
          report.violations.push_back(path + ": expected an object");
          continue;
        }
        Obj s((*settings)[i], path, report);
        SensitivityTask::Setting st;
        st.dm = s.integer("dm", 1, 1, 2);
        st.omega_mhz = s.number("omega_mhz", 0.0, Rule::NonNegative);
        st.label = s.string("label", "");
        s.finish();
        fom.settings.push_back(st);
      }
    }
    q.finish();
    t.fom = fom;
  }
  if (const json* a = o.child("allan", json::value_t::object)) {
    Obj q(*a, "sensitivity.allan", report);
    t.allan_file = q.string("data_file", "");
    if (t.allan_file.empty()) q.violation("data_file", "required");
    t.allan_cadence_s = q.number("cadence_s", 1.0, Rule::Positive);
    t.allan_taus_s = q.numbers("taus_s", {}, Rule::Positive);
    q.finish();
  }
  if (!t.point && !t.fom && t.allan_file.empty()) {
    report.violations.push_back("sensitivity: needs at least one of point, fom, allan");
  }
  o.finish();
  return t;
}

std::vector<Check> parse_checks(const json& j, ScenarioReport& report) {
  std::vector<Check> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "checks[" + std::to_string(i) + "]";
    if (!j[i].is_object()) {
      report.violations.push_back(path + ": expected an object");
      continue;
    }
    Obj o(j[i], path, report);
    Check c;
    c.metric = o.string("metric", "");
    if (c.metric.empty()) o.violation("metric", "required");
    if (o.has("expected")) c.expected = o.number("expected", 0.0);
    if (o.has("rel_tol")) c.rel_tol = o.number("rel_tol", 0.0, Rule::NonNegative);
    if (o.has("abs_tol")) c.abs_tol = o.number("abs_tol", 0.0, Rule::NonNegative);
    if (o.has("min")) c.min = o.number("min", 0.0);
    if (o.has("max")) c.max = o.number("max", 0.0);
    c.note = o.string("note", "");
    if (c.expected && !c.rel_tol && !c.abs_tol) o.violation("expected", "needs rel_tol or abs_tol");
    if (!c.expected && !c.min && !c.max) o.violation("metric", "needs expected, min or max");
    o.finish();
    out.push_back(c);
  }
  return out;
}

ordered number_or_null(double x) { return std::isfinite(x) ? ordered(x) : ordered(nullptr); }

}  // namespace

NvConstants ConstantsSpec::nv() const {
  return {zero_field_splitting_mhz * 1e6, gyromagnetic_ghz_per_t * 1e9};
}

CouplingConstants ConstantsSpec::couplings() const {
  const double k = constants::two_pi * 1e3;
  return {dipolar_nn_khz_per_ppm * k, nv_n_khz_per_ppm * k, nv_nv_khz_per_ppm * k, nv_c13_khz_per_percent * k};
}

std::string Scenario::task() const {
  if (spectrum) return "spectrum";
  if (budget) return "budget";
  if (ramsey) return "ramsey";
  if (drive) return "drive-fit";
  if (montecarlo) return "montecarlo";
  if (sensitivity) return "sensitivity";
  return "";
}

Scenario parse_scenario(const std::string& text, ScenarioReport& report) {
  Scenario sc;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    report.violations.push_back(std::string("parse error: ") + e.what());
    return sc;
  }
  if (!root.is_object()) {
    report.violations.push_back("scenario: top level must be an object");
    return sc;
  }
  Obj o(root, "", report);
  sc.name = o.string("name", "");
  sc.seed = o.unsigned_integer("seed", 0);
  if (const json* c = o.child("constants", json::value_t::object)) {
    Obj q(*c, "constants", report);
    ConstantsSpec& k = sc.constants;
    k.zero_field_splitting_mhz = q.number("zero_field_splitting_mhz", k.zero_field_splitting_mhz, Rule::Positive);
    k.gyromagnetic_ghz_per_t = q.number("gyromagnetic_ghz_per_t", k.gyromagnetic_ghz_per_t, Rule::Positive);
    k.dipolar_nn_khz_per_ppm = q.number("dipolar_nn_khz_per_ppm", k.dipolar_nn_khz_per_ppm, Rule::NonNegative);
    k.nv_n_khz_per_ppm = q.number("nv_n_khz_per_ppm", k.nv_n_khz_per_ppm, Rule::NonNegative);
    k.nv_nv_khz_per_ppm = q.number("nv_nv_khz_per_ppm", k.nv_nv_khz_per_ppm, Rule::NonNegative);
    k.nv_c13_khz_per_percent = q.number("nv_c13_khz_per_percent", k.nv_c13_khz_per_percent, Rule::NonNegative);
    q.finish();
  }
  if (const json* s = o.child("sample", json::value_t::object)) sc.sample = parse_sample(*s, report);
  if (const json* t = o.child("spectrum", json::value_t::object)) sc.spectrum = parse_spectrum(*t, report);
  if (const json* t = o.child("budget", json::value_t::object)) sc.budget = parse_budget(*t, report);
  if (const json* t = o.child("ramsey", json::value_t::object)) sc.ramsey = parse_ramsey(*t, report);
  if (const json* t = o.child("drive", json::value_t::object)) sc.drive = parse_drive(*t, report);
  if (const json* t = o.child("montecarlo", json::value_t::object)) sc.montecarlo = parse_montecarlo(*t, report);
  if (const json* t = o.child("sensitivity", json::value_t::object)) sc.sensitivity = parse_sensitivity(*t, report);
  if (const json* c = o.child("checks", json::value_t::array)) sc.checks = parse_checks(*c, report);
  o.finish();

  const int tasks = sc.spectrum.has_value() + sc.budget.has_value() + sc.ramsey.has_value() +
                    sc.drive.has_value() + sc.montecarlo.has_value() + sc.sensitivity.has_value();
  if (tasks != 1) {
    report.violations.push_back("scenario: exactly one task block required (spectrum, budget, ramsey, drive, "
                                "montecarlo, sensitivity), found " + std::to_string(tasks));
  }
  if (sc.budget && !sc.sample) report.violations.push_back("sample: required by the budget task");
  if (sc.ramsey && !sc.ramsey->data_file.empty() && sc.ramsey->lines.size() > 0 &&
      static_cast<int>(sc.ramsey->lines.size()) != sc.ramsey->n_lines) {
    report.violations.push_back("ramsey.lines: count differs from n_lines");
  }
  return sc;
}

Scenario load_scenario(const std::string& path, ScenarioReport& report) {
  std::ifstream in(path);
  if (!in) {
    report.violations.push_back(path + ": cannot open scenario");
    return {};
  }
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str(), report);
  const auto slash = path.find_last_of('/');
  sc.base_dir = slash == std::string::npos ? "." : path.substr(0, slash);
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  ordered root;
  root["name"] = sc.name;
  root["seed"] = sc.seed;
  const ConstantsSpec& k = sc.constants;
  root["constants"] = {{"zero_field_splitting_mhz", k.zero_field_splitting_mhz},
                       {"gyromagnetic_ghz_per_t", k.gyromagnetic_ghz_per_t},
                       {"dipolar_nn_khz_per_ppm", k.dipolar_nn_khz_per_ppm},
                       {"nv_n_khz_per_ppm", k.nv_n_khz_per_ppm},
                       {"nv_nv_khz_per_ppm", k.nv_nv_khz_per_ppm},
                       {"nv_c13_khz_per_percent", k.nv_c13_khz_per_percent}};
  if (sc.sample) {
    const SampleSpec& s = *sc.sample;
    ordered j = {{"name", s.name},
                 {"n_ppm", s.n_ppm},
                 {"c13_percent", s.c13_percent},
                 {"strain_gradient_hz_per_um", s.strain_gradient_hz_per_um},
                 {"spot_length_um", s.spot_length_um},
                 {"grad_coeff_mhz_per_gauss", s.grad_coeff_mhz_per_gauss},
                 {"bias_gauss", s.bias_gauss},
                 {"temperature_fluctuation_k", s.temperature_fluctuation_k},
                 {"nitrogen_model", to_string(s.nitrogen_model)}};
    j["extra_channels"] = ordered::array();
    for (const auto& e : s.extra_channels) {
      j["extra_channels"].push_back(
          {{"label", e.label}, {"rate_per_us", e.rate_per_us}, {"kind", to_string(e.kind)}, {"method", e.method}});
    }
    root["sample"] = j;
  }
  if (sc.spectrum) {
    const SpectrumTask& t = *sc.spectrum;
    root["spectrum"] = {{"isotope", to_string(t.isotope)},
                        {"field_mt", t.field_mt},
                        {"misalignment_deg", t.misalignment_deg},
                        {"tilt_azimuth_deg", t.tilt_azimuth_deg},
                        {"hwhm_khz", t.hwhm_khz},
                        {"forbidden_amplitude", t.forbidden_amplitude},
                        {"f_min_mhz", t.f_min_mhz},
                        {"f_max_mhz", t.f_max_mhz},
                        {"points", t.points}};
  }
  if (sc.budget) {
    ordered bases = ordered::array();
    for (Basis b : sc.budget->bases) bases.push_back(to_string(b));
    root["budget"] = {{"bases", bases}};
  }
  if (sc.ramsey) {
    const RamseyTask& t = *sc.ramsey;
    ordered j = {{"data_file", t.data_file}, {"n_lines", t.n_lines}, {"dm", t.dm},     {"c0", t.c0},
                 {"t2star_us", t.t2star_us}, {"p", t.p},             {"t_max_us", t.t_max_us},
                 {"points", t.points},       {"noise_sd", t.noise_sd}, {"spectrum_pad", t.spectrum_pad}};
    j["lines"] = ordered::array();
    for (const auto& l : t.lines) j["lines"].push_back({{"f_mhz", l.f_mhz}, {"tau0_ns", l.tau0_ns}});
    root["ramsey"] = j;
  }
  if (sc.drive) {
    const DriveTask& t = *sc.drive;
    root["drive"] = {{"dm", t.dm},
                     {"gamma_khz", t.gamma_khz},
                     {"delta_khz", t.delta_khz},
                     {"t2_other_us", t.t2_other_us},
                     {"omega_min_khz", t.omega_min_khz},
                     {"omega_max_khz", t.omega_max_khz},
                     {"points", t.points},
                     {"data_file", t.data_file}};
  }
  if (sc.montecarlo) {
    const MonteCarloTask& t = *sc.montecarlo;
    root["montecarlo"] = {{"densities_ppm", t.densities_ppm},
                          {"n_configs", t.n_configs},
                          {"expected_count", t.expected_count},
                          {"prefactor", t.prefactor},
                          {"odr_file", t.odr_file}};
  }
  if (sc.sensitivity) {
    const SensitivityTask& t = *sc.sensitivity;
    ordered j = ordered::object();
    if (t.point) {
      j["point"] = {{"sigma", t.point->sigma},
                    {"tau_us", t.point->tau_us},
                    {"tau_dead_us", t.point->tau_dead_us},
                    {"contrast", t.point->contrast},
                    {"dm", t.point->dm}};
    }
    if (t.fom) {
      const auto& f = *t.fom;
      ordered fj = {{"n_min_ppm", f.n_min_ppm},
                    {"n_max_ppm", f.n_max_ppm},
                    {"points", f.points},
                    {"n_nv", f.n_nv},
                    {"strain_t2_us", number_or_null(f.strain_t2_us)},
                    {"c13_t2_us", f.c13_t2_us},
                    {"delta_ref_khz", f.delta_ref_khz},
                    {"delta_ref_ppm", f.delta_ref_ppm},
                    {"normalization_ppm", f.normalization_ppm}};
      fj["settings"] = ordered::array();
      for (const auto& s : f.settings) {
        fj["settings"].push_back({{"dm", s.dm}, {"omega_mhz", s.omega_mhz}, {"label", s.label}});
      }
      j["fom"] = fj;
    }
    if (!t.allan_file.empty()) {
      j["allan"] = {{"data_file", t.allan_file}, {"cadence_s", t.allan_cadence_s}, {"taus_s", t.allan_taus_s}};
    }
    root["sensitivity"] = j;
  }
  if (!sc.checks.empty()) {
    ordered checks = ordered::array();
    for (const auto& c : sc.checks) {
      ordered j = {{"metric", c.metric}};
      if (c.expected) j["expected"] = *c.expected;
      if (c.rel_tol) j["rel_tol"] = *c.rel_tol;
      if (c.abs_tol) j["abs_tol"] = *c.abs_tol;
      if (c.min) j["min"] = *c.min;
      if (c.max) j["max"] = *c.max;
      if (!c.note.empty()) j["note"] = c.note;
      checks.push_back(j);
    }
    root["checks"] = checks;
  }
  return root.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace nvd
