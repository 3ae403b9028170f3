#pragma once
// Binned coincidence counts vs time delay, the common output of all
// correlation simulations.

#include <cstdint>
#include <string>
#include <vector>

#include "qdc/common.hpp"

namespace qdc {

struct HistSpec {
  double t_min_ns = -30.0;
  double t_max_ns = 30.0;
  double bin_ns = 0.05;

  int n_bins() const;
  std::vector<std::string> problems(const std::string& prefix = "hist.") const;
  void validate() const;
};

struct CoincidenceHistogram {
  std::vector<double> bin_edges_ns;        // strictly increasing, n+1 edges
  std::vector<std::uint64_t> counts;       // n bins
  std::uint64_t n_start_events = 0;        // normalization count

  // metadata carried into the CSV header
  std::uint64_t seed = 0;
  std::uint64_t n_cycles = 0;
  std::string label;

  static CoincidenceHistogram from_spec(const HistSpec& spec);
  double bin_center(std::size_t i) const {
    return 0.5 * (bin_edges_ns[i] + bin_edges_ns[i + 1]);
  }
  // returns false when t falls outside the range
  bool fill(double t_ns);
  // total counts with bin center in [lo, hi]
  double area(double lo_ns, double hi_ns) const;
  std::uint64_t total() const;
};

std::string histogram_to_csv(const CoincidenceHistogram& h);

// bin centers and counts restricted to [lo, hi], for windowed fits
void histogram_slice(const CoincidenceHistogram& h, double lo_ns, double hi_ns,
                     std::vector<double>& x, std::vector<double>& y);

}  // namespace qdc
