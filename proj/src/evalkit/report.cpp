#include "magloc/evalkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "magloc/errors.hpp"
#include "magloc/util/text.hpp"

namespace magloc::evalkit {

namespace {

constexpr int kDigits = 6;

std::string cell(double v) { return std::isfinite(v) ? util::format_significant(v, kDigits) : "failed"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round numbers for axis ticks: 1, 2 or 5 times a power of ten.
double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "sigma_deg";
  for (const auto& s : sweep.series) out << "," << s.name;
  out << "\n";
  for (std::size_t i = 0; i < sweep.sigmas_deg.size(); ++i) {
    out << cell(sweep.sigmas_deg[i]);
    for (const auto& s : sweep.series) out << "," << cell(s.failed[i] ? std::nan("") : s.mae_m[i]);
    out << "\n";
  }
  return out.str();
}

SweepTable parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("sweep CSV is empty");
  auto header = util::split(line, ',');
  if (header.empty() || header[0] != "sigma_deg") throw DataError("sweep CSV must start with sigma_deg");
  SweepTable t;
  t.columns.assign(header.begin() + 1, header.end());
  t.values.resize(t.columns.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (util::trim(line).empty()) continue;
    const auto fields = util::split(line, ',');
    if (fields.size() != header.size()) throw DataError("sweep CSV row " + std::to_string(row) + " has wrong width");
    auto number = [&](const std::string& f) {
      if (f == "failed") return std::numeric_limits<double>::quiet_NaN();
      double v;
      if (!util::parse_double(f, v)) throw DataError("sweep CSV row " + std::to_string(row) + ": bad number '" + f + "'");
      return v;
    };
    t.sigmas_deg.push_back(number(fields[0]));
    for (std::size_t c = 0; c < t.columns.size(); ++c) t.values[c].push_back(number(fields[c + 1]));
  }
  return t;
}

std::string sweep_svg(const SweepResult& sweep) {
  constexpr double W = 640, H = 400, left = 70, right = 150, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double xmin = sweep.sigmas_deg.empty() ? 0.0 : sweep.sigmas_deg.front();
  double xmax = sweep.sigmas_deg.empty() ? 1.0 : sweep.sigmas_deg.back();
  if (xmax <= xmin) xmax = xmin + 1.0;
  double ymax = 0.0;
  for (const auto& s : sweep.series)
    for (double v : s.mae_m)
      if (std::isfinite(v)) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  const double ystep = nice_step(ymax, 5);
  ymax = std::ceil(ymax / ystep) * ystep;
  const double xstep = nice_step(xmax - xmin, 8);
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + ph - y / ymax * ph; };
  auto num = [](double v) { return util::format_significant(v, 6); };

  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(sweep.building + " " + perturb::to_string(sweep.kind)) << "</text>\n";
  out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  out << "</g>\n<g class=\"ticks\">\n";
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
    out << "<text x=\"" << num(px(x)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(x)
        << "</text>\n";
  }
  for (double y = 0.0; y <= ymax + 1e-9 * ystep; y += ystep) {
    out << "<text x=\"" << left - 8 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<text class=\"xlabel\" x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">sigma (deg)</text>\n";
  out << "<text class=\"ylabel\" x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">MAE (m)</text>\n";

  for (std::size_t k = 0; k < sweep.series.size(); ++k) {
    const auto& s = sweep.series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline class=\"series\" data-name=\"" << xml_escape(s.name) << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << (s.replicated ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.mae_m.size(); ++i) {
      if (s.failed[i] || !std::isfinite(s.mae_m[i])) continue;
      out << (first ? "" : " ") << num(px(sweep.sigmas_deg[i])) << "," << num(py(s.mae_m[i]));
      first = false;
    }
    out << "\"/>\n";
  }
  out << "<g class=\"legend\">\n";
  for (std::size_t k = 0; k < sweep.series.size(); ++k) {
    const double y = top + 10 + 20.0 * k;
    const auto& s = sweep.series[k];
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << y << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << y
        << "\" stroke=\"" << kColors[k % std::size(kColors)] << "\" stroke-width=\"2\"/>\n";
    out << "<text class=\"legend-entry\" x=\"" << left + pw + 46 << "\" y=\"" << y + 4 << "\">" << xml_escape(s.name)
        << (s.replicated ? " (invariant-replicated)" : "") << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string thresholds_csv(const std::vector<ThresholdResult>& thresholds) {
  std::ostringstream out;
  out << "building,threshold_deg,mae3d_m,mae2d_m,label\n";
  for (const auto& t : thresholds) {
    out << t.building << ",";
    if (t.threshold_deg) {
      out << cell(*t.threshold_deg) << "," << cell(t.mae3d_m) << "," << cell(t.mae2d_m);
    } else {
      out << "none,,";
    }
    out << ",\"" << t.label << "\"\n";
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const std::vector<SweepResult>& sweeps,
                                               const std::vector<ThresholdResult>& thresholds,
                                               const std::filesystem::path& out_dir) {
  if (sweeps.empty() && thresholds.empty()) throw ContractError("emit_report: nothing to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create report directory " + out_dir.string() + (ec ? ": " + ec.message() : ""));
  }
  std::vector<std::filesystem::path> written;
  for (const auto& s : sweeps) {
    for (const auto& s2 : sweeps)
      if (&s2 != &s && s2.file_stem() == s.file_stem()) throw ContractError("two sweeps share the name " + s.file_stem());
    const auto csv = out_dir / (s.file_stem() + ".csv");
    const auto svg = out_dir / (s.file_stem() + ".svg");
    write_text(csv, sweep_csv(s));
    write_text(svg, sweep_svg(s));
    written.push_back(csv);
    written.push_back(svg);
  }
  if (!thresholds.empty()) {
    const auto path = out_dir / "thresholds.csv";
    write_text(path, thresholds_csv(thresholds));
    written.push_back(path);
  }
  return written;
}

}  // namespace magloc::evalkit
