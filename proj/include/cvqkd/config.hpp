#pragma once

// JSON form of ProtocolConfig.
//
//   scheme          "coherent" (default) | "squeezed"
//   vn              squeezed noise floor, (0, 1]; required for "squeezed"
//   snr_in | snr_db | base_ber
//                   exactly one; base_ber calibrates snr_in so that the
//                   lossless line has that error rate
//   loss            [0, 1), default 0
//   cutoff_ber      test error rate above which a run is rejected
//   assumed_ber | threshold_margin
//                   cautious Bob error rate used for the Eve bound, given
//                   directly or as cutoff_ber + threshold_margin
//   target_eve_mi   default 0.001
//   squeezed_loss   "linearized" (default) | "exact_tap"
//
// resolved_json() writes every field explicitly, with snr_in and
// assumed_ber numeric, so a manifest does not depend on the input file.

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"

#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"

namespace cvqkd::config {

using nlohmann::json;

namespace detail_cfg {

inline double number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) {
    throw DomainError(std::string("config: '") + key + "' must be a number");
  }
  return v.get<double>();
}

}  // namespace detail_cfg

inline keyrate::ProtocolConfig from_json(const json& j) {
  using detail_cfg::number;
  detail::require(j.is_object(), "config: expected a JSON object");
  static const char* const kKnown[] = {
      "scheme",   "vn",         "snr_in",      "snr_db",
      "base_ber", "loss",       "cutoff_ber",  "assumed_ber",
      "threshold_margin", "target_eve_mi", "squeezed_loss", "description"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    detail::require(known, "config: unknown key '" + key + "'");
  }

  keyrate::ProtocolConfig c;
  const std::string scheme = j.value("scheme", std::string("coherent"));
  if (scheme == "coherent") {
    detail::require(!j.contains("vn") || number(j, "vn") == 1.0,
                    "config: vn applies to the squeezed scheme only");
    c.scheme = keyrate::Scheme::coherent();
  } else if (scheme == "squeezed") {
    detail::require(j.contains("vn"), "config: squeezed scheme needs vn");
    c.scheme = keyrate::Scheme::squeezed(number(j, "vn"));
  } else {
    throw DomainError("config: unknown scheme '" + scheme + "'");
  }

  const int snr_keys = static_cast<int>(j.contains("snr_in")) +
                       static_cast<int>(j.contains("snr_db")) +
                       static_cast<int>(j.contains("base_ber"));
  detail::require(snr_keys == 1,
                  "config: give exactly one of snr_in, snr_db, base_ber");
  if (j.contains("snr_in")) {
    c.snr_in = number(j, "snr_in");
  } else if (j.contains("snr_db")) {
    c.snr_in = std::pow(10.0, number(j, "snr_db") / 10.0);
  } else {
    c.snr_in = keyrate::calibrated_snr(number(j, "base_ber"));
  }
  detail::require(c.snr_in > 0.0 && std::isfinite(c.snr_in),
                  "config: snr must be positive and finite");

  if (j.contains("loss")) c.loss = number(j, "loss");
  detail::require(c.loss >= 0.0 && c.loss < 1.0,
                  "config: loss must lie in [0, 1)");

  if (j.contains("cutoff_ber")) c.cutoff_ber = number(j, "cutoff_ber");
  detail::require(!(j.contains("assumed_ber") &&
                    j.contains("threshold_margin")),
                  "config: give assumed_ber or threshold_margin, not both");
  if (j.contains("assumed_ber")) {
    c.assumed_ber = number(j, "assumed_ber");
  } else if (j.contains("threshold_margin")) {
    c.assumed_ber = c.cutoff_ber + number(j, "threshold_margin");
  } else {
    c.assumed_ber = c.cutoff_ber;
  }
  if (j.contains("target_eve_mi")) c.target_eve_mi = number(j, "target_eve_mi");

  const std::string model = j.value("squeezed_loss", std::string("linearized"));
  if (model == "linearized") {
    c.squeezed_loss = keyrate::SqueezedLossModel::linearized;
  } else if (model == "exact_tap") {
    c.squeezed_loss = keyrate::SqueezedLossModel::exact_tap;
  } else {
    throw DomainError("config: unknown squeezed_loss '" + model + "'");
  }
  return c;
}

inline json resolved_json(const keyrate::ProtocolConfig& c) {
  json j;
  j["scheme"] = c.scheme.is_squeezed() ? "squeezed" : "coherent";
  if (c.scheme.is_squeezed()) j["vn"] = c.scheme.vn;
  j["snr_in"] = c.snr_in;
  j["loss"] = c.loss;
  j["cutoff_ber"] = c.cutoff_ber;
  j["assumed_ber"] = c.assumed_ber;
  j["target_eve_mi"] = c.target_eve_mi;
  j["squeezed_loss"] = c.squeezed_loss == keyrate::SqueezedLossModel::linearized
                           ? "linearized"
                           : "exact_tap";
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError("config: '" + path + "' is not valid JSON: " + e.what());
  }
}

inline keyrate::ProtocolConfig load(const std::string& path) {
  return from_json(read_json_file(path));
}

}  // namespace cvqkd::config
