#pragma once
// Small text helpers: number formatting with shortest round-trip
// representation (byte-stable exports) and strict CSV parsing.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace hrx {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_int(std::string_view s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

struct CsvRow {
  long line_no = 0;  // 1-based, header is line 1
  std::vector<std::string_view> fields;
};

// Strict CSV file reader: exact header match required, no quoting.
class CsvFile {
 public:
  CsvFile(const std::string& path, const std::vector<std::string>& header)
      : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    content_ = std::move(all);
    std::size_t pos = 0;
    long line_no = 0;
    while (pos <= content_.size()) {
      std::size_t nl = content_.find('\n', pos);
      std::string_view line(content_.data() + pos,
                            (nl == std::string::npos ? content_.size() : nl) - pos);
      pos = (nl == std::string::npos) ? content_.size() + 1 : nl + 1;
      line = strip_cr(line);
      ++line_no;
      if (line_no == 1) {
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
          throw std::runtime_error(path + ": bad header");
        }
        for (std::size_t i = 0; i < header.size(); ++i) {
          if (fields[i] != header[i]) {
            throw std::runtime_error(path + ": bad header field '" +
                                     std::string(fields[i]) + "', expected '" +
                                     header[i] + "'");
          }
        }
        continue;
      }
      if (line.empty()) continue;
      rows_.push_back(CsvRow{line_no, split_csv_line(line)});
    }
  }

  const std::vector<CsvRow>& rows() const { return rows_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::string content_;  // rows_ views into this buffer
  std::vector<CsvRow> rows_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace hrx
