#pragma once

// CSV and SVG output for experiment runs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hdrfuse/harness.hpp"

namespace hdrfuse {

inline constexpr const char* kFrameCsvHeader =
    "frame,controller,t_cmd,t_eff,frac_complete,mean_rel_err,promoted,updated,ignored";
inline constexpr const char* kTraceCsvHeader = "frame,t_candidate,U_e,U_r,U_total,chosen";

namespace detail {

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline std::string frames_csv(const std::vector<FrameRecord>& records) {
  std::string s = std::string(kFrameCsvHeader) + "\n";
  for (const auto& r : records) {
    s += std::to_string(r.frame) + "," + r.controller + "," + detail::fmt_num(r.t_cmd) + "," +
         detail::fmt_num(r.t_eff) + "," + detail::fmt_num(r.frac_complete) + "," + detail::fmt_num(r.mean_rel_err) +
         "," + std::to_string(r.stats.promoted) + "," + std::to_string(r.stats.updated) + "," +
         std::to_string(r.stats.ignored) + "\n";
  }
  return s;
}

/// Writes the per-frame record CSV. Throws std::invalid_argument on an
/// empty record list.
inline void emit_csv(const std::vector<FrameRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("no records to write");
  detail::write_text(path, frames_csv(records));
}

/// Parses a CSV written by emit_csv. Only the columns present in the file
/// are restored; fusion counters other than promoted/updated/ignored stay 0.
inline std::vector<FrameRecord> parse_frames_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kFrameCsvHeader) throw IoError("unexpected CSV header");
  std::vector<FrameRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split(line, ',');
    if (f.size() != 9) throw IoError("CSV row has " + std::to_string(f.size()) + " fields");
    FrameRecord r;
    try {
      r.frame = std::stoi(f[0]);
      r.controller = f[1];
      r.t_cmd = std::stod(f[2]);
      r.t_eff = std::stod(f[3]);
      r.frac_complete = std::stod(f[4]);
      r.mean_rel_err = f[5] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[5]);
      r.stats.promoted = std::stoull(f[6]);
      r.stats.updated = std::stoull(f[7]);
      r.stats.ignored = std::stoull(f[8]);
    } catch (const std::exception&) {
      throw IoError("malformed CSV row: " + line);
    }
    out.push_back(r);
  }
  return out;
}

/// Utility trace for one controller.
inline void emit_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  std::string s = std::string(kTraceCsvHeader) + "\n";
  for (const auto& r : rows)
    s += std::to_string(r.frame) + "," + detail::fmt_num(r.terms.t) + "," + detail::fmt_num(r.terms.exploration) +
         "," + detail::fmt_num(r.terms.refinement) + "," + detail::fmt_num(r.terms.total) + "," +
         (r.chosen ? "1" : "0") + "\n";
  detail::write_text(path, s);
}

/// Two-panel SVG: percentage of complete points and mean relative error
/// against frame index, one polyline per controller in each panel.
inline std::string plot_svg(const std::vector<FrameRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records to plot");
  std::vector<std::string> names;
  for (const auto& r : records)
    if (std::find(names.begin(), names.end(), r.controller) == names.end()) names.push_back(r.controller);
  int max_frame = 1;
  double max_err = 0.0;
  for (const auto& r : records) {
    max_frame = std::max(max_frame, r.frame);
    if (std::isfinite(r.mean_rel_err)) max_err = std::max(max_err, r.mean_rel_err);
  }
  if (!(max_err > 0.0)) max_err = 1.0;

  static const char* palette[] = {"#2ca02c", "#d62728", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  const double pw = 360, ph = 240, left = 60, top = 30, gap = 90;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * pw + gap + left + 20 << "\" height=\""
      << ph + top + 110 << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto panel = [&](int idx, const char* title, const char* ylabel, double ymax, auto value) {
    const double x0 = left + idx * (pw + gap), y0 = top;
    svg << "<g>\n<text x=\"" << x0 + pw / 2 << "\" y=\"" << y0 - 10 << "\" text-anchor=\"middle\">" << title
        << "</text>\n"
        << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n"
        << "<text x=\"" << x0 + pw / 2 << "\" y=\"" << y0 + ph + 35 << "\" text-anchor=\"middle\">frame</text>\n"
        << "<text x=\"" << x0 - 45 << "\" y=\"" << y0 + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
        << x0 - 45 << ' ' << y0 + ph / 2 << ")\">" << ylabel << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
      const double y = y0 + ph - ph * k / 4.0;
      svg << "<text x=\"" << x0 - 5 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
          << detail::fmt_num(ymax * k / 4.0) << "</text>\n";
      const double x = x0 + pw * k / 4.0;
      svg << "<text x=\"" << x << "\" y=\"" << y0 + ph + 15 << "\" text-anchor=\"middle\">"
          << detail::fmt_num(max_frame * k / 4.0) << "</text>\n";
    }
    for (std::size_t n = 0; n < names.size(); ++n) {
      svg << "<polyline fill=\"none\" stroke=\"" << palette[n % 7] << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (const auto& r : records) {
        if (r.controller != names[n]) continue;
        const double v = value(r);
        if (!std::isfinite(v)) continue;
        svg << (first ? "" : " ") << detail::fmt_num(x0 + pw * r.frame / max_frame) << ','
            << detail::fmt_num(y0 + ph - ph * std::min(v, ymax) / ymax);
        first = false;
      }
      svg << "\"/>\n";
    }
    svg << "</g>\n";
  };
  panel(0, "complete points", "complete (%)", 100.0, [](const FrameRecord& r) { return 100.0 * r.frac_complete; });
  panel(1, "mean reconstruction error", "mean relative error", max_err,
        [](const FrameRecord& r) { return r.mean_rel_err; });

  for (std::size_t n = 0; n < names.size(); ++n) {
    const double x = left + 150.0 * n, y = top + ph + 70;
    svg << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y << "\" stroke=\""
        << palette[n % 7] << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << x + 25 << "\" y=\"" << y + 4 << "\">" << names[n] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_plot(const std::vector<FrameRecord>& records, const std::filesystem::path& path) {
  const std::string svg = plot_svg(records);  // throws before any file is created
  detail::write_text(path, svg);
}

}  // namespace hdrfuse
