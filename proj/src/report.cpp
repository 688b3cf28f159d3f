#include "lvc/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "lvc/common.h"

namespace lvc {

std::string EvalRow::variant() const {
  std::string s = framework + "_" + strategy;
  if (strategy != "explicit") s += std::to_string(implicit_channels);
  return s;
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string eval_rows_to_json(const std::vector<EvalRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["sequence"] = r.sequence;
    j["framework"] = r.framework;
    j["strategy"] = r.strategy;
    j["implicit_channels"] = r.implicit_channels;
    j["lambda"] = r.lambda;
    j["bpp"] = r.bpp;
    j["psnr"] = r.psnr;
    j["bits_motion"] = r.bits_motion;
    j["bits_inter"] = r.bits_inter;
    j["bits_intra"] = r.bits_intra;
    j["temporal_complexity"] = r.temporal_complexity;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<EvalRow> eval_rows_from_json(const std::string& text) {
  std::vector<EvalRow> rows;
  try {
    nlohmann::json arr = nlohmann::json::parse(text);
    LVC_CHECK(arr.is_array(), "results json must be an array of rows");
    for (const auto& j : arr) {
      EvalRow r;
      r.sequence = j.at("sequence").get<std::string>();
      r.framework = j.at("framework").get<std::string>();
      r.strategy = j.at("strategy").get<std::string>();
      r.implicit_channels = j.at("implicit_channels").get<int>();
      r.lambda = j.at("lambda").get<double>();
      r.bpp = j.at("bpp").get<double>();
      r.psnr = j.at("psnr").get<double>();
      r.bits_motion = j.value("bits_motion", 0.0);
      r.bits_inter = j.value("bits_inter", 0.0);
      r.bits_intra = j.value("bits_intra", 0.0);
      r.temporal_complexity = j.value("temporal_complexity", 0.0);
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad results json: ") + e.what());
  }
  return rows;
}

std::vector<EvalRow> read_eval_rows(const std::string& path) {
  std::ifstream f(path);
  LVC_CHECK(f.good(), "cannot open ", path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return eval_rows_from_json(text);
}

void write_eval_rows(const std::string& path,
                     const std::vector<EvalRow>& rows) {
  write_text_file(path, eval_rows_to_json(rows) + "\n");
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  LVC_CHECK(f.good(), "cannot open ", path, " for writing");
  for (size_t i = 0; i < header.size(); ++i)
    f << (i ? "," : "") << header[i];
  f << "\n";
  for (const auto& row : rows) {
    LVC_CHECK(row.size() == header.size(), "csv row width mismatch");
    for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  LVC_CHECK(f.good(), "write failed for ", path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  LVC_CHECK(f.good(), "cannot open ", path, " for writing");
  f << content;
  LVC_CHECK(f.good(), "write failed for ", path);
}

namespace {

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                          "#bcbd22", "#e377c2"};

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
  LVC_CHECK(!series.empty(), "nothing to plot");
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  LVC_CHECK(x_min <= x_max && y_min <= y_max, "empty plot data");
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double x_pad = 0.06 * (x_max - x_min);
  const double y_pad = 0.08 * (y_max - y_min);
  x_min -= x_pad;
  x_max += x_pad;
  y_min -= y_pad;
  y_max += y_pad;

  const int W = 720, H = 480;
  const int ml = 70, mr = 170, mt = 46, mb = 56;
  const double pw = W - ml - mr, ph = H - mt - mb;
  const auto sx = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * pw;
  };
  const auto sy = [&](double y) {
    return mt + ph - (y - y_min) / (y_max - y_min) * ph;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(W) + "\" height=\"" + std::to_string(H) +
         "\" viewBox=\"0 0 " + std::to_string(W) + " " + std::to_string(H) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt2(ml + pw / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" +
         title + "</text>\n";

  // Axes and ticks.
  svg += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) +
         "\" width=\"" + fmt2(pw) + "\" height=\"" + fmt2(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double tx = x_min + (x_max - x_min) * i / ticks;
    const double ty = y_min + (y_max - y_min) * i / ticks;
    svg += "<line x1=\"" + fmt2(sx(tx)) + "\" y1=\"" + fmt2(mt + ph) +
           "\" x2=\"" + fmt2(sx(tx)) + "\" y2=\"" + fmt2(mt + ph + 5) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(sx(tx)) + "\" y=\"" + fmt2(mt + ph + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt2(tx) + "</text>\n";
    svg += "<line x1=\"" + fmt2(double(ml) - 5) + "\" y1=\"" + fmt2(sy(ty)) +
           "\" x2=\"" + std::to_string(ml) + "\" y2=\"" + fmt2(sy(ty)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(double(ml) - 9) + "\" y=\"" +
           fmt2(sy(ty) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt2(ty) + "</text>\n";
  }
  svg += "<text x=\"" + fmt2(ml + pw / 2) + "\" y=\"" +
         std::to_string(H - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" +
         x_label + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt2(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " + fmt2(mt + ph / 2) +
         ")\">" + y_label + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(char*))];
    if (s.line && s.points.size() > 1) {
      std::string pts;
      for (const auto& [x, y] : s.points)
        pts += fmt2(sx(x)) + "," + fmt2(sy(y)) + " ";
      svg += "<polyline points=\"" + pts +
             "\" fill=\"none\" stroke-width=\"2\" stroke=\"" + color +
             "\"/>\n";
    }
    for (const auto& [x, y] : s.points)
      svg += "<circle cx=\"" + fmt2(sx(x)) + "\" cy=\"" + fmt2(sy(y)) +
             "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
    const double ly = mt + 16 + 18.0 * double(si);
    svg += "<circle cx=\"" + fmt2(double(W - mr) + 16) + "\" cy=\"" +
           fmt2(ly - 4) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + fmt2(double(W - mr) + 26) + "\" y=\"" + fmt2(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label +
           "</text>\n";
  }
  svg += "</svg>\n";
  write_text_file(path, svg);
}

}  // namespace lvc
