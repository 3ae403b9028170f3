#include "qdc/histogram.hpp"

#include <cmath>

#include "qdc/io_util.hpp"

namespace qdc {

int HistSpec::n_bins() const {
  return static_cast<int>(std::llround((t_max_ns - t_min_ns) / bin_ns));
}

std::vector<std::string> HistSpec::problems(const std::string& prefix) const {
  std::vector<std::string> errs;
  if (!(bin_ns > 0.0)) errs.push_back(prefix + "bin_ns must be > 0");
  if (!(t_max_ns > t_min_ns))
    errs.push_back(prefix + "t_max_ns must be > t_min_ns");
  else if (n_bins() < 1)
    errs.push_back(prefix + "range shorter than one bin");
  return errs;
}

void HistSpec::validate() const {
  const auto errs = problems();
  if (!errs.empty()) throw ConfigError(errs.front());
}

CoincidenceHistogram CoincidenceHistogram::from_spec(const HistSpec& spec) {
  spec.validate();
  CoincidenceHistogram h;
  const int n = spec.n_bins();
  h.bin_edges_ns.resize(n + 1);
  for (int i = 0; i <= n; ++i) h.bin_edges_ns[i] = spec.t_min_ns + i * spec.bin_ns;
  h.counts.assign(n, 0);
  return h;
}

bool CoincidenceHistogram::fill(double t_ns) {
  const double lo = bin_edges_ns.front();
  const double hi = bin_edges_ns.back();
  if (t_ns < lo || t_ns >= hi) return false;
  const double w = (hi - lo) / static_cast<double>(counts.size());
  auto i = static_cast<std::size_t>((t_ns - lo) / w);
  if (i >= counts.size()) i = counts.size() - 1;
  ++counts[i];
  return true;
}

double CoincidenceHistogram::area(double lo_ns, double hi_ns) const {
  double s = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = bin_center(i);
    if (c >= lo_ns && c <= hi_ns) s += static_cast<double>(counts[i]);
  }
  return s;
}

std::uint64_t CoincidenceHistogram::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

void histogram_slice(const CoincidenceHistogram& h, double lo_ns, double hi_ns,
                     std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double c = h.bin_center(i);
    if (c >= lo_ns && c <= hi_ns) {
      x.push_back(c);
      y.push_back(static_cast<double>(h.counts[i]));
    }
  }
}

std::string histogram_to_csv(const CoincidenceHistogram& h) {
  std::string out;
  out += "# qdcascade histogram\n";
  out += "# seed = " + std::to_string(h.seed) + "\n";
  out += "# n_cycles = " + std::to_string(h.n_cycles) + "\n";
  out += "# setting = " + (h.label.empty() ? std::string("-") : h.label) + "\n";
  out += "# n_start_events = " + std::to_string(h.n_start_events) + "\n";
  out += "bin_center_ns,counts\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += fmt_g10(h.bin_center(i));
    out += ',';
    out += std::to_string(h.counts[i]);
    out += '\n';
  }
  return out;
}

}  // namespace qdc
