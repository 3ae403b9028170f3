#include "qdc/runner.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "qdc/fitting.hpp"
#include "qdc/io_util.hpp"
#include "qdc/metrics.hpp"
#include "qdc/rng.hpp"
#include "qdc/stream.hpp"
#include "qdc/tomography.hpp"
#include "qdc/version.hpp"

namespace qdc {

namespace {

struct ArtifactWriter {
  std::filesystem::path dir;
  std::vector<ManifestEntry> entries;

  void write(const std::string& name, const std::string& content) {
    atomic_write_file(dir / name, content);
    entries.push_back({name, content.size(), fnv1a64(content)});
  }
};

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

// --------------------------------------------------------------------
// pipelines
// --------------------------------------------------------------------

void run_cascade_scan(const ExperimentConfig& cfg, ArtifactWriter& w) {
  const auto rows = fss_fidelity_scan(cfg.cascade, cfg.scan.fss_grid);
  w.write("scan.csv", fss_scan_to_csv(rows));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CascadeParams p = cfg.cascade;
    p.fss_ueV = rows[i].fss_ueV;
    const MetricsReport rep = metrics_from_dm(time_integrated_dm(p));
    w.write("metrics_" + zero_pad(static_cast<int>(i), 3) + ".txt",
            metrics_to_text(rep));
  }
}

void run_tomography(const ExperimentConfig& cfg, ArtifactWriter& w) {
  const DensityMatrix4 rho_model = time_integrated_dm(cfg.cascade);
  const auto settings = canonical_settings();
  const TomographyCounts counts = simulate_counts(
      rho_model, {settings.begin(), settings.end()},
      cfg.tomography.n_per_setting, cfg.seed);
  w.write("counts.csv",
          counts_to_text(counts,
                         {"qdcascade tomography counts",
                          "seed = " + std::to_string(cfg.seed),
                          "n_per_setting = " + fmt_g10(cfg.tomography.n_per_setting)}));

  const LinearInversionResult lin = linear_inversion(counts);
  w.write("rho_linear.txt",
          dm_to_text(lin.rho, {"linear inversion (may be non-physical)",
                               "min_eigenvalue = " + fmt_g6(lin.min_eigenvalue),
                               std::string("physical = ") +
                                   (lin.physical ? "1" : "0")}));

  const MleResult mle = mle_reconstruct(counts);
  w.write("rho_mle.txt",
          dm_to_text(mle.rho.m,
                     {"maximum-likelihood reconstruction",
                      "log_likelihood = " + fmt_g10(mle.report.log_likelihood),
                      "iterations = " + std::to_string(mle.report.iterations),
                      "grad_inf_norm = " + fmt_g6(mle.report.grad_inf_norm),
                      std::string("converged = ") +
                          (mle.report.converged ? "1" : "0")}));
  w.write("metrics.txt", metrics_to_text(metrics_from_dm(mle.rho)));
}

void run_cross_correlation(const ExperimentConfig& cfg, ArtifactWriter& w) {
  std::map<std::string, CoincidenceHistogram> hists;
  StreamOptions opts;
  opts.background_mode = BackgroundMode::PairReplacement;
  for (std::size_t i = 0; i < cfg.crosscorr.settings.size(); ++i) {
    const MeasurementSetting setting =
        MeasurementSetting::from_label(cfg.crosscorr.settings[i]);
    opts.analyzers = setting;
    // one independent substream per setting
    const Stream stream = simulate_stream(cfg.cascade, cfg.clock, cfg.detector,
                                          opts, cfg.seed + 1000003 * (i + 1));
    const CoincidenceHistogram h = cross_correlation(stream, setting, cfg.hist);
    w.write("hist_" + setting.label + ".csv", histogram_to_csv(h));
    hists.emplace(setting.label, h);
  }

  MetricsReport rep;
  if (cfg.crosscorr.settings.size() >= 6) {
    VisibilityTriple v;
    const double win = cfg.crosscorr.window_ns;
    auto vis = [&](std::size_t co, std::size_t cross) {
      return visibility_from_histograms(hists.at(cfg.crosscorr.settings[co]),
                                        hists.at(cfg.crosscorr.settings[cross]),
                                        win);
    };
    v.c_linear = vis(0, 1);
    v.c_diagonal = vis(2, 3);
    v.c_circular = vis(4, 5);
    rep.c_linear = v.c_linear;
    rep.c_diagonal = v.c_diagonal;
    rep.c_circular = v.c_circular;
    rep.fidelity_eq1 = fidelity_from_visibilities(v);
    const BellParameters b = bell_parameters(v);
    rep.s_rc = b.s_rc;
    rep.s_dc = b.s_dc;
    rep.s_rd = b.s_rd;
  }
  // closed-form model prediction alongside the measured values
  const MetricsReport model = metrics_from_dm(time_integrated_dm(cfg.cascade));
  std::string text = metrics_to_text(rep);
  text += "# closed-form model prediction\n";
  text += "predicted_fidelity_direct = " + fmt_g6(*model.fidelity_direct) + "\n";
  text += "predicted_s_rd = " + fmt_g6(*model.s_rd) + "\n";
  text += "predicted_concurrence = " + fmt_g6(*model.concurrence) + "\n";
  w.write("metrics.txt", text);
}

void run_hom(const ExperimentConfig& cfg, ArtifactWriter& w) {
  const Line line = cfg.hom.line == "XX" ? Line::XX : Line::X;
  const HomResult co =
      hom_simulate(cfg.cascade, cfg.clock, cfg.detector, cfg.beamsplitter,
                   cfg.hom.v_in, true, line, cfg.hist, cfg.seed, cfg.hom.p_prep);
  const HomResult cross =
      hom_simulate(cfg.cascade, cfg.clock, cfg.detector, cfg.beamsplitter,
                   cfg.hom.v_in, false, line, cfg.hist, cfg.seed + 1,
                   cfg.hom.p_prep);
  w.write("hist_co.csv", histogram_to_csv(co.hist));
  w.write("hist_cross.csv", histogram_to_csv(cross.hist));

  // per-peak fits of the central five-peak cluster
  const std::vector<double> centers = {-4.0, -2.0, 0.0, 2.0, 4.0};
  const LorentzianFit fit_co = fit_peaks_individually(co.hist, centers);
  const LorentzianFit fit_cross = fit_peaks_individually(cross.hist, centers);
  const HomVisibility v = hom_visibility(
      fit_co.peaks, fit_cross.peaks, cfg.beamsplitter.reflectance,
      cfg.beamsplitter.transmittance, cfg.beamsplitter.mode_overlap);

  std::string text = "# qdcascade hom report\n";
  text += "line = " + cfg.hom.line + "\n";
  text += "v_in = " + fmt_g6(cfg.hom.v_in) + "\n";
  text += "v_raw = " + fmt_g6(v.v_raw) + "\n";
  text += "v_corrected = " + fmt_g6(v.v_corrected) + "\n";
  text += "clipped = " + std::string(v.clipped ? "1" : "0") + "\n";
  text += "# co-polarized fit\n" + lorentzian_fit_to_text(fit_co);
  text += "# cross-polarized fit\n" + lorentzian_fit_to_text(fit_cross);
  w.write("hom_report.txt", text);
}

void run_g2(const ExperimentConfig& cfg, ArtifactWriter& w) {
  StreamOptions opts;
  opts.background_mode = BackgroundMode::PoissonSingles;
  const Stream stream =
      simulate_stream(cfg.cascade, cfg.clock, cfg.detector, opts, cfg.seed);
  std::string text = "# qdcascade g2 report\n";
  for (Line line : {Line::XX, Line::X}) {
    const CoincidenceHistogram h = g2_auto(stream, line, cfg.hist);
    w.write(std::string("hist_") + line_name(line) + ".csv",
            histogram_to_csv(h));
    text += std::string("g2_zero_") + line_name(line) + " = " +
            fmt_g6(g2_zero(stream, line)) + "\n";
  }
  w.write("g2_report.txt", text);
}

void run_rabi(const ExperimentConfig& cfg, ArtifactWriter& w) {
  RabiCurve curve;
  StreamOptions opts;
  opts.rabi_kappa = cfg.rabi.kappa;
  ExperimentClock clk = cfg.clock;
  clk.n_cycles = cfg.rabi.n_cycles_per_point;
  for (int i = 0; i < cfg.rabi.n_points; ++i) {
    const double area =
        cfg.rabi.area_max_pi * i / (cfg.rabi.n_points - 1);
    opts.pulse_area_pi = area;
    const Stream s = simulate_stream(cfg.cascade, clk, cfg.detector, opts,
                                     cfg.seed + 7919 * (i + 1));
    const double population =
        static_cast<double>(s.events.size()) /
        (static_cast<double>(clk.pulses_per_cycle) *
         static_cast<double>(clk.n_cycles));
    curve.pulse_areas_pi.push_back(area);
    curve.populations.push_back(population);
  }
  std::string csv = "pulse_area_pi,population\n";
  for (std::size_t i = 0; i < curve.pulse_areas_pi.size(); ++i)
    csv += fmt_g10(curve.pulse_areas_pi[i]) + "," +
           fmt_g10(curve.populations[i]) + "\n";
  w.write("rabi_curve.csv", csv);
  const RabiFit fit = fit_damped_rabi(curve);
  w.write("rabi_report.txt", rabi_fit_to_text(fit));
}

void run_fss(const ExperimentConfig& cfg, ArtifactWriter& w) {
  FssScan scan;
  Rng rng(cfg.seed, stream_id::kSynthetic);
  for (int i = 0; i < cfg.fss.n_angles; ++i) {
    const double angle = 90.0 * i / (cfg.fss.n_angles - 1);
    const double arg = 4.0 * angle * kPi / 180.0 + cfg.fss.phase_deg * kPi / 180.0;
    double de = cfg.fss.offset_ueV + cfg.cascade.fss_ueV * std::cos(arg);
    if (cfg.fss.noise_sigma_ueV > 0.0)
      de += cfg.fss.noise_sigma_ueV * rng.normal();
    scan.angles_deg.push_back(angle);
    scan.delta_e_ueV.push_back(de);
  }
  std::string csv = "angle_deg,delta_e_ueV\n";
  for (std::size_t i = 0; i < scan.angles_deg.size(); ++i)
    csv += fmt_g10(scan.angles_deg[i]) + "," + fmt_g10(scan.delta_e_ueV[i]) +
           "\n";
  w.write("fss_scan.csv", csv);
  const FssFit fit = fit_fss(scan);
  w.write("fss_report.txt", fss_fit_to_text(fit));
}

}  // namespace

std::string manifest_to_text(const RunManifest& m) {
  std::string out = "# qdcascade run manifest\n";
  out += "version = " + m.version + "\n";
  for (const auto& [k, v] : m.config) out += k + " = " + v + "\n";
  for (const auto& a : m.artifacts)
    out += "artifact " + a.name + " bytes=" + std::to_string(a.bytes) +
           " fnv1a64=" + hex64(a.digest) + "\n";
  return out;
}

RunManifest run(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);

  ArtifactWriter w{dir, {}};
  try {
    if (cfg.experiment == "cascade-scan") run_cascade_scan(cfg, w);
    else if (cfg.experiment == "tomography") run_tomography(cfg, w);
    else if (cfg.experiment == "cross-correlation") run_cross_correlation(cfg, w);
    else if (cfg.experiment == "hom") run_hom(cfg, w);
    else if (cfg.experiment == "g2") run_g2(cfg, w);
    else if (cfg.experiment == "rabi") run_rabi(cfg, w);
    else if (cfg.experiment == "fss") run_fss(cfg, w);
    else throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  } catch (const std::exception& e) {
    // leave a marker so partial outputs are recognizable
    try {
      atomic_write_file(dir / ".failed", std::string(e.what()) + "\n");
    } catch (...) {
    }
    throw;
  }

  RunManifest m;
  m.version = kVersion;
  m.config = config_snapshot(cfg);
  m.artifacts = w.entries;
  atomic_write_file(dir / "manifest.txt", manifest_to_text(m));

  // verify digests against what actually landed on disk
  for (const auto& a : m.artifacts) {
    const std::string bytes = read_file(dir / a.name);
    if (fnv1a64(bytes) != a.digest)
      throw Error("manifest digest mismatch for " + a.name);
  }
  return m;
}

bool verify_manifest_file(const std::filesystem::path& manifest_path,
                          std::string* first_mismatch) {
  const std::string text = read_file(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("artifact ", 0) != 0) continue;
    const auto parts = split(line, ' ');
    if (parts.size() != 4) return false;
    const std::string name = parts[1];
    const std::string digest_field = parts[3];
    const auto eq = digest_field.find('=');
    const std::string want = digest_field.substr(eq + 1);
    std::string got;
    try {
      got = hex64(fnv1a64(read_file(dir / name)));
    } catch (const Error&) {
      got = "missing";
    }
    if (got != want) {
      if (first_mismatch) *first_mismatch = name;
      return false;
    }
  }
  return true;
}

}  // namespace qdc
