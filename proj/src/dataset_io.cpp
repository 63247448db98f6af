#include "gha/dataset_io.hpp"

#include "gha/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gha::io {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'G', 'H', 'A', '1'};
constexpr std::size_t kHeaderBytes = 4 + 8 + 8;

[[noreturn]] void format_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorKind::Format, path.string() + ": " + what);
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) format_error(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool safe_subject_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

fs::path subject_file(const fs::path& dir, const std::string& id) {
  return dir / ("subj_" + id + ".gha");
}

std::string encode_matrix(const Matrix& M) {
  std::string out(kMagic, sizeof kMagic);
  out.reserve(kHeaderBytes + static_cast<std::size_t>(M.size()) * 8);
  put_u64(out, static_cast<std::uint64_t>(M.rows()));
  put_u64(out, static_cast<std::uint64_t>(M.cols()));
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(M(r, c)));
  return out;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) format_error(tmp, "cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) format_error(tmp, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) format_error(path, "rename failed: " + ec.message());
}

void write_matrix(const fs::path& path, const Matrix& M) {
  write_file_atomic(path, encode_matrix(M));
}

Matrix read_matrix(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kHeaderBytes) {
    format_error(path, "truncated header: expected at least " + std::to_string(kHeaderBytes) +
                           " bytes, found " + std::to_string(bytes.size()));
  }
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) format_error(path, "bad magic (expected GHA1)");
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = get_u64(data + 4);
  const std::uint64_t cols = get_u64(data + 12);
  if (rows != 0 && cols > (UINT64_MAX - kHeaderBytes) / 8 / rows) {
    format_error(path, "header declares an impossible size");
  }
  const std::uint64_t expected = kHeaderBytes + rows * cols * 8;
  if (bytes.size() != expected) {
    format_error(path, std::string(bytes.size() < expected ? "truncated" : "oversized") +
                           " matrix: expected " + std::to_string(expected) + " bytes, found " +
                           std::to_string(bytes.size()));
  }
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t offset = kHeaderBytes;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c, offset += 8) {
      const double v = std::bit_cast<double>(get_u64(data + offset));
      if (!std::isfinite(v)) {
        format_error(path, "non-finite value at byte offset " + std::to_string(offset) +
                               " (row " + std::to_string(r) + ", col " + std::to_string(c) + ")");
      }
      M(r, c) = v;
    }
  }
  return M;
}

void write_matrix_csv(const fs::path& path, const Matrix& M) {
  std::string out;
  char buf[64];
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (c) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof buf, M(r, c));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

Matrix read_matrix_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || !std::isfinite(v)) {
        format_error(path, "bad number on line " + std::to_string(line_no));
      }
      row.push_back(v);
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') format_error(path, "unexpected character on line " + std::to_string(line_no));
      ++p;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      format_error(path, "line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                             " values, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) format_error(path, "no data rows");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return M;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  data.validate();
  const auto& labels = data.subjects.front().labels;
  for (const auto& s : data.subjects) {
    if (s.labels != labels) {
      throw Error(ErrorKind::Format, "subject '" + s.subject_id +
                                         "' has different labels; the dataset format stores one "
                                         "shared label sequence");
    }
    if (!safe_subject_id(s.subject_id)) {
      throw Error(ErrorKind::Format, "subject id '" + s.subject_id +
                                         "' must use only [A-Za-z0-9_.-]");
    }
  }
  std::vector<Label> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  nlohmann::json manifest;
  manifest["format"] = "gha-dataset";
  manifest["version"] = 1;
  manifest["S"] = data.size();
  manifest["T"] = data.timepoints();
  manifest["V"] = data.voxels();
  manifest["subject_ids"] = nlohmann::json::array();
  for (const auto& s : data.subjects) manifest["subject_ids"].push_back(s.subject_id);
  manifest["class_names"] = classes;

  fs::create_directories(dir);
  for (const auto& s : data.subjects) write_matrix(subject_file(dir, s.subject_id), s.matrix);
  std::string label_text;
  for (const auto& l : labels) label_text += l + "\n";
  write_file_atomic(dir / "labels.txt", label_text);
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    format_error(manifest_path, std::string("invalid JSON: ") + e.what());
  }
  std::size_t S = 0, T = 0, V = 0;
  std::vector<std::string> ids;
  std::vector<Label> classes;
  try {
    S = manifest.at("S").get<std::size_t>();
    T = manifest.at("T").get<std::size_t>();
    V = manifest.at("V").get<std::size_t>();
    ids = manifest.at("subject_ids").get<std::vector<std::string>>();
    classes = manifest.at("class_names").get<std::vector<Label>>();
  } catch (const nlohmann::json::exception& e) {
    format_error(manifest_path, std::string("malformed manifest: ") + e.what());
  }
  if (ids.size() != S) {
    format_error(manifest_path, "manifest-mismatch: S = " + std::to_string(S) + " but " +
                                    std::to_string(ids.size()) + " subject ids");
  }

  const fs::path labels_path = dir / "labels.txt";
  std::vector<Label> labels;
  {
    std::istringstream in(read_file(labels_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      labels.push_back(line);
    }
  }
  if (labels.size() != T) {
    format_error(labels_path, "manifest-mismatch: " + std::to_string(labels.size()) +
                                  " labels, manifest declares T = " + std::to_string(T));
  }
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (std::find(classes.begin(), classes.end(), labels[t]) == classes.end()) {
      format_error(labels_path, "line " + std::to_string(t + 1) + ": label '" + labels[t] +
                                    "' not among manifest class_names");
    }
  }

  Dataset data;
  data.subjects.reserve(S);
  for (const auto& id : ids) {
    if (!safe_subject_id(id)) format_error(manifest_path, "invalid subject id '" + id + "'");
    const fs::path path = subject_file(dir, id);
    Matrix M = read_matrix(path);
    if (static_cast<std::size_t>(M.rows()) != T || static_cast<std::size_t>(M.cols()) != V) {
      format_error(path, "manifest-mismatch: file is " + std::to_string(M.rows()) + "x" +
                             std::to_string(M.cols()) + ", manifest declares T=" +
                             std::to_string(T) + ", V=" + std::to_string(V));
    }
    data.subjects.push_back({std::move(M), labels, id});
  }
  data.validate();
  return data;
}

std::uint64_t fingerprint(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : data.subjects) {
    mix(s.subject_id.data(), s.subject_id.size());
    const std::uint64_t shape[2] = {static_cast<std::uint64_t>(s.matrix.rows()),
                                    static_cast<std::uint64_t>(s.matrix.cols())};
    mix(shape, sizeof shape);
    mix(s.matrix.data(), static_cast<std::size_t>(s.matrix.size()) * sizeof(double));
    for (const auto& l : s.labels) {
      mix(l.data(), l.size());
      mix("\n", 1);
    }
  }
  return h;
}

}  // namespace gha::io
