#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace urex {

/// A named, column-major block of the flat parameter vector.
struct Segment {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

/// All learnable weights as one flat vector plus a segment index. The
/// segment layout is fixed at construction and survives save/load.
class ParamVector {
 public:
  ParamVector() = default;

  std::size_t add_segment(std::string name, int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative segment shape");
    Segment s{std::move(name), rows, cols, values_.size()};
    values_.resize(values_.size() + s.size(), 0.0);
    segments_.push_back(std::move(s));
    return segments_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(std::size_t i) const { return segments_.at(i); }

  std::size_t segment_index(const std::string& name) const {
    for (std::size_t i = 0; i < segments_.size(); ++i)
      if (segments_[i].name == name) return i;
    throw std::out_of_range("no parameter segment named " + name);
  }

  /// Name of the segment containing flat coordinate `i`.
  const std::string& segment_of(std::size_t i) const {
    for (const auto& s : segments_)
      if (i >= s.offset && i < s.offset + s.size()) return s.name;
    throw std::out_of_range("parameter index");
  }

  MatrixMap matrix(std::size_t seg) {
    const Segment& s = segments_.at(seg);
    return MatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }
  ConstMatrixMap matrix(std::size_t seg) const {
    const Segment& s = segments_.at(seg);
    return ConstMatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::map<std::string, std::string>& metadata() { return meta_; }
  const std::map<std::string, std::string>& metadata() const { return meta_; }

  bool same_layout(const ParamVector& o) const {
    if (segments_.size() != o.segments_.size()) return false;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto &a = segments_[i], &b = o.segments_[i];
      if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) return false;
    }
    return true;
  }

 private:
  std::vector<double> values_;
  std::vector<Segment> segments_;
  std::map<std::string, std::string> meta_;
};

/// A parameter-shaped accumulator.
struct GradientEstimate {
  std::vector<double> values;
  std::size_t sample_count = 0;

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

// Checkpoint text format, version 1:
//
//   urex-checkpoint 1
//   meta <key> <value>                  (zero or more, sorted by key)
//   segment <name> <rows> <cols>        (then one hex-float per line)
//   end
//
// Hex floats make the round trip exact, so save -> load -> save is
// byte-identical.

inline void write_checkpoint(std::ostream& out, const ParamVector& p) {
  out << "urex-checkpoint 1\n";
  for (const auto& [k, v] : p.metadata()) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw std::invalid_argument("checkpoint metadata must be single-token keys and one-line values");
    out << "meta " << k << " " << v << "\n";
  }
  char buf[64];
  for (const auto& s : p.segments()) {
    out << "segment " << s.name << " " << s.rows << " " << s.cols << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a\n", p[s.offset + i]);
      out << buf;
    }
  }
  out << "end\n";
}

inline ParamVector read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "urex-checkpoint 1")
    throw std::runtime_error("not a version-1 checkpoint");
  ParamVector p;
  while (std::getline(in, line)) {
    if (line == "end") return p;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      p.metadata()[key] = value;
    } else if (tag == "segment") {
      std::string name;
      int rows = 0, cols = 0;
      if (!(ls >> name >> rows >> cols)) throw std::runtime_error("bad segment header: " + line);
      const std::size_t idx = p.add_segment(name, rows, cols);
      const Segment& s = p.segment(idx);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated checkpoint");
        char* end = nullptr;
        p[s.offset + i] = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) throw std::runtime_error("bad value in checkpoint: " + line);
      }
    } else {
      throw std::runtime_error("unexpected checkpoint line: " + line);
    }
  }
  throw std::runtime_error("checkpoint missing end marker");
}

inline void save_checkpoint(const std::string& path, const ParamVector& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_checkpoint(out, p);
}

inline ParamVector load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_checkpoint(in);
}

}  // namespace urex
