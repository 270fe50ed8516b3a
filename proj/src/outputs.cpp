#include "bkuq/outputs.hpp"

#include "bkuq/common.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#ifndef BKUQ_VERSION
#define BKUQ_VERSION "0.1.0-unknown"
#endif

namespace bkuq {

namespace fs = std::filesystem;

std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(long long v) { return std::to_string(v); }

namespace {

bool as_number(const std::string& s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

} // namespace

void CsvTable::sort(int keys) {
  std::stable_sort(rows.begin(), rows.end(), [keys](const auto& a, const auto& b) {
    for (int c = 0; c < keys; ++c) {
      double x, y;
      if (as_number(a[c], x) && as_number(b[c], y)) {
        if (x != y) return x < y;
      } else if (a[c] != b[c]) {
        return a[c] < b[c];
      }
    }
    return false;
  });
}

std::string CsvTable::text() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw std::logic_error("csv row width differs from header in " + name);
    line(r);
  }
  return out;
}

std::string plot_script(const std::vector<PlotPanel>& panels) {
  std::ostringstream os;
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 900,600\n";
  os << "set key outside right\n";
  for (const auto& p : panels) {
    os << "\nset output '" << p.output << "'\n";
    os << "set xlabel '" << p.xlabel << "'\n";
    os << "set ylabel '" << p.ylabel << "'\n";
    os << (p.logx ? "set logscale x\n" : "unset logscale x\n");
    os << (p.logy ? "set logscale y\n" : "unset logscale y\n");
    if (p.curves.empty()) {
      os << "# no data\n";
      continue;
    }
    os << "plot ";
    for (std::size_t i = 0; i < p.curves.size(); ++i) {
      const PlotCurve& c = p.curves[i];
      if (i) os << ", \\\n     ";
      os << "'" << c.csv << "' every ::1 using " << c.x_col << ":";
      if (c.filter_col > 0)
        os << "(strcol(" << c.filter_col << ") eq '" << c.filter_value << "' ? $" << c.y_col << " : 1/0)";
      else
        os << c.y_col;
      os << " with linespoints title '" << c.title << "'";
    }
    os << "\n";
  }
  return os.str();
}

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!fs::exists(dir_)) {
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    created_dir_ = true;
  }
  if (!fs::is_directory(dir_)) throw std::runtime_error("output path is not a directory: " + dir_.string());
}

void OutputSet::write_text(const std::string& name, const std::string& text) {
  fs::path p = dir_ / name;
  fs::path tmp = p;
  tmp += ".tmp";
  std::error_code ec;
  auto fail = [&](const std::string& msg) {
    fs::remove(tmp, ec);
    throw std::runtime_error(msg);
  };
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) fail("write failed for " + tmp.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) fail("cannot rename " + tmp.string() + " to " + p.string() + ": " + ec.message());
  if (std::find(files_.begin(), files_.end(), p) == files_.end()) files_.push_back(p);
}

void OutputSet::write(const CsvTable& t) { write_text(t.name, t.text()); }

void OutputSet::discard() {
  std::error_code ec;
  for (const auto& f : files_) {
    fs::remove(f, ec);
    fs::path tmp = f;
    tmp += ".tmp";
    fs::remove(tmp, ec);
  }
  files_.clear();
  if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
}

std::string version_string() { return BKUQ_VERSION; }

} // namespace bkuq
