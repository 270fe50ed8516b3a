#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bkuq {

// Shortest decimal text that round-trips the double; "C" locale, no padding.
std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }

struct CsvTable {
  std::string name; // file name, e.g. "spectrum.csv"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <class... Ts>
  void add(const Ts&... cells) {
    rows.push_back({fmt_cell(cells)...});
  }
  // Stable sort by the first `keys` columns (numeric when both cells parse).
  void sort(int keys);
  std::string text() const;

private:
  static std::string fmt_cell(const std::string& s) { return s; }
  static std::string fmt_cell(const char* s) { return s; }
  template <class T>
  static std::string fmt_cell(const T& v) {
    return fmt(v);
  }
};

// A curve of a gnuplot script: columns (x, y) of a CSV with an optional
// filter column equal to a value.
struct PlotCurve {
  std::string csv;
  int x_col = 1;
  int y_col = 2;
  int filter_col = 0; // 0 = no filter
  std::string filter_value;
  std::string title;
};

struct PlotPanel {
  std::string output; // image file name written by gnuplot
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<PlotCurve> curves;
};

std::string plot_script(const std::vector<PlotPanel>& panels);

// Owns the files of one run; everything written through it is removed again
// by discard() (used when the scenario fails).
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir);
  const std::filesystem::path& dir() const { return dir_; }
  void write(const CsvTable& t);
  void write_text(const std::string& name, const std::string& text);
  void discard();
  const std::vector<std::filesystem::path>& files() const { return files_; }

private:
  std::filesystem::path dir_;
  bool created_dir_ = false;
  std::vector<std::filesystem::path> files_;
};

// git-describe-style version string fixed at build time.
std::string version_string();

} // namespace bkuq
