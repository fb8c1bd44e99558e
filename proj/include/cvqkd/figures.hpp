#pragma once

// Tabulated curve data and its CSV rendering.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/infotheory.hpp"
#include "cvqkd/keyrate.hpp"

namespace cvqkd::figures {

struct Table {
  std::vector<std::string> comments;  // written as '# ' lines
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw DomainError("table: no column '" + name + "'");
  }
  std::vector<double> values(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (const auto& c : t.comments) out += "# " + c + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::string label(double x) { return format_number(x); }

// Coherent scheme: minimum Bob error against Eve's error, one column pair per
// calibration of the lossless base error rate.
inline Table bob_vs_eve_coherent(const std::vector<double>& base_bers,
                                 std::size_t grid_points) {
  detail::require(!base_bers.empty(), "fig3: need at least one base BER");
  const auto scheme = keyrate::Scheme::coherent();
  const auto grid = keyrate::eve_transfer_grid(scheme, grid_points);
  Table t;
  t.comments.push_back(
      "minimum Bob error vs Eve error, coherent scheme, lossless line");
  t.comments.push_back(
      "units: t_eve = Eve signal transfer (dimensionless); *_ber = bit error "
      "probability");
  t.columns.push_back("t_eve");
  std::vector<std::vector<keyrate::CurvePoint>> traces;
  for (double b : base_bers) {
    const double snr = keyrate::calibrated_snr(b);
    t.comments.push_back("trace base_ber=" + label(b) +
                         ": snr_in=" + format_number(snr));
    t.columns.push_back("eve_ber_base" + label(b));
    t.columns.push_back("bob_ber_base" + label(b));
    traces.push_back(keyrate::curve_bob_vs_eve(scheme, snr, grid));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (const auto& tr : traces) {
      row.push_back(tr[i].eve_ber);
      row.push_back(tr[i].bob_ber);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Eve's residual information (1 - 2 b)^n against block length n.
inline Table eve_mi_decay(const std::vector<double>& eve_bers,
                          std::size_t max_n) {
  detail::require(!eve_bers.empty(), "fig4: need at least one Eve BER");
  detail::require(max_n >= 1, "fig4: need max_n >= 1");
  Table t;
  t.comments.push_back(
      "Eve mutual information after block-XOR privacy amplification");
  t.comments.push_back(
      "units: n = block length (bits); eve_mi_* = bits of information per "
      "output bit");
  t.columns.push_back("n");
  std::vector<info::ErrorProbability> bs;
  for (double b : eve_bers) {
    bs.emplace_back(b);
    t.columns.push_back("eve_mi_ber" + label(b));
  }
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::vector<double> row{static_cast<double>(n)};
    for (const auto& b : bs) {
      row.push_back(
          info::eve_mi_after_pa(b, static_cast<std::int64_t>(n)).bits());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Squeezed scheme, long format: one block of rows per (vn, base_ber).
inline Table bob_vs_eve_squeezed(const std::vector<double>& vns,
                                 const std::vector<double>& base_bers,
                                 std::size_t grid_points) {
  detail::require(!vns.empty() && !base_bers.empty(),
                  "fig6: need at least one vn and one base BER");
  Table t;
  t.comments.push_back(
      "minimum Bob error vs Eve error, squeezed scheme, lossless line");
  t.comments.push_back(
      "units: vn = squeezed noise floor (QNL); t_* = signal transfer; *_ber "
      "= bit error probability; snr referred to the squeezed floor");
  t.columns = {"vn", "base_ber", "t_eve", "t_bob", "eve_ber", "bob_ber"};
  for (double vn : vns) {
    const auto scheme = keyrate::Scheme::squeezed(vn);
    const auto grid = keyrate::eve_transfer_grid(scheme, grid_points);
    for (double b : base_bers) {
      const double snr = keyrate::calibrated_snr(b);
      for (const auto& p : keyrate::curve_bob_vs_eve(scheme, snr, grid)) {
        t.rows.push_back({vn, b, p.t_eve, p.t_bob, p.eve_ber, p.bob_ber});
      }
    }
  }
  return t;
}

}  // namespace cvqkd::figures
