#pragma once

#include <string>
#include <vector>

namespace lvc {

// One evaluated operating point: a (model variant, lambda, sequence) triple.
struct EvalRow {
  std::string sequence;
  std::string framework;
  std::string strategy;
  int implicit_channels = 0;
  double lambda = 0.0;
  double bpp = 0.0;
  double psnr = 0.0;
  double bits_motion = 0.0;
  double bits_inter = 0.0;
  double bits_intra = 0.0;
  double temporal_complexity = 0.0;

  std::string variant() const;
};

std::string eval_rows_to_json(const std::vector<EvalRow>& rows);
std::vector<EvalRow> eval_rows_from_json(const std::string& text);
std::vector<EvalRow> read_eval_rows(const std::string& path);
void write_eval_rows(const std::string& path,
                     const std::vector<EvalRow>& rows);

// Deterministic CSV: fixed "%.6f" numeric formatting, rows written in the
// order given. Reruns over identical data produce identical bytes.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::string fmt_num(double v);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
  bool line = true;  // connect points; false for scatter
};

// Self-contained SVG chart with axes, ticks and a legend.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace lvc
