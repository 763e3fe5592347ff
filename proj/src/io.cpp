#include "asymkit/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "asymkit/error.hpp"

namespace asymkit::io {

namespace {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; big-endian hosts need byte swapping");

std::string_view kind_name(MatrixKind k) { return k == MatrixKind::bold ? "bold" : "features"; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view s, const std::string& where) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last)
    throw ValidationError(where + ": '" + t + "' is not a number");
  return v;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

fs::path sidecar_path(const fs::path& matrix_path) {
  fs::path p = matrix_path;
  p.replace_extension(".json");
  return p;
}

Sidecar read_sidecar(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    const json j = json::parse(text);
    Sidecar s;
    s.rows = j.at("rows").get<std::int64_t>();
    s.cols = j.at("cols").get<std::int64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "bold") {
      s.kind = MatrixKind::bold;
    } else if (kind == "features") {
      s.kind = MatrixKind::features;
    } else {
      throw ValidationError("kind must be \"bold\" or \"features\", got \"" + kind + "\"");
    }
    if (j.contains("tr_seconds")) s.tr_seconds = j["tr_seconds"].get<double>();
    if (j.contains("onsets_path")) s.onsets_path = j["onsets_path"].get<std::string>();
    if (j.contains("layer_index")) s.layer_index = j["layer_index"].get<int>();
    if (j.contains("checkpoint_tokens")) s.checkpoint_tokens = j["checkpoint_tokens"].get<std::int64_t>();
    s.run_index = j.at("run_index").get<int>();
    if (s.rows < 0 || s.cols < 0) throw ValidationError("negative matrix shape");
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_sidecar(const Sidecar& s) {
  json j = {{"rows", s.rows}, {"cols", s.cols}, {"kind", kind_name(s.kind)}, {"run_index", s.run_index}};
  if (s.tr_seconds) j["tr_seconds"] = *s.tr_seconds;
  if (s.onsets_path) j["onsets_path"] = *s.onsets_path;
  if (s.layer_index) j["layer_index"] = *s.layer_index;
  if (s.checkpoint_tokens) j["checkpoint_tokens"] = *s.checkpoint_tokens;
  return j.dump(2) + "\n";
}

encoding::Matrix read_matrix(const fs::path& path, std::int64_t rows, std::int64_t cols) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string());
  const auto expected = static_cast<std::uintmax_t>(rows) * static_cast<std::uintmax_t>(cols) * 4u;
  if (size != expected)
    throw ValidationError(path.string() + ": size " + std::to_string(size) + " bytes, sidecar implies " +
                          std::to_string(expected));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<float> buf(static_cast<std::size_t>(rows * cols));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  if (!in) throw IoError("short read on " + path.string());
  encoding::Matrix m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) m(r, c) = buf[static_cast<std::size_t>(r * cols + c)];
  return m;
}

void write_matrix(const fs::path& path, const encoding::Matrix& m) {
  std::string bytes(static_cast<std::size_t>(m.size()) * 4u, '\0');
  std::size_t off = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float f = static_cast<float>(m(r, c));
      std::memcpy(bytes.data() + off, &f, 4);
      off += 4;
    }
  }
  write_atomic(path, bytes);
}

std::vector<double> read_onsets(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<double> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    out.push_back(parse_double(line, path.string() + ":" + std::to_string(line_no)));
  }
  return out;
}

void write_onsets(const fs::path& path, const std::vector<double>& onsets) {
  std::string out;
  for (double v : onsets) out += format_double(v) + "\n";
  write_atomic(path, out);
}

encoding::BoldRun read_bold(const fs::path& path) {
  const Sidecar s = read_sidecar(sidecar_path(path));
  if (s.kind != MatrixKind::bold) throw ValidationError(path.string() + ": sidecar kind is not bold");
  encoding::BoldRun run;
  run.data = read_matrix(path, s.rows, s.cols);
  run.tr_seconds = s.tr_seconds.value_or(2.0);
  run.run_index = s.run_index;
  if (!(run.tr_seconds > 0.0)) throw ValidationError(path.string() + ": tr_seconds must be positive");
  if (!run.data.allFinite()) throw ValidationError(path.string() + ": BOLD data has missing values");
  return run;
}

void write_bold(const fs::path& path, const encoding::BoldRun& run) {
  write_matrix(path, run.data);
  Sidecar s;
  s.rows = run.data.rows();
  s.cols = run.data.cols();
  s.kind = MatrixKind::bold;
  s.tr_seconds = run.tr_seconds;
  s.run_index = run.run_index;
  write_atomic(sidecar_path(path), serialize_sidecar(s));
}

encoding::FeatureMatrix read_features(const fs::path& path) {
  const Sidecar s = read_sidecar(sidecar_path(path));
  if (s.kind != MatrixKind::features) throw ValidationError(path.string() + ": sidecar kind is not features");
  if (!s.onsets_path) throw ValidationError(path.string() + ": features sidecar lacks onsets_path");
  encoding::FeatureMatrix f;
  f.values = read_matrix(path, s.rows, s.cols);
  f.onsets = read_onsets(path.parent_path() / *s.onsets_path);
  f.layer_index = s.layer_index.value_or(0);
  f.checkpoint_tokens = s.checkpoint_tokens.value_or(1);
  f.run_index = s.run_index;
  if (static_cast<std::int64_t>(f.onsets.size()) != s.rows)
    throw ValidationError(path.string() + ": " + std::to_string(f.onsets.size()) + " onsets for " +
                          std::to_string(s.rows) + " event rows");
  return f;
}

void write_features(const fs::path& path, const encoding::FeatureMatrix& f) {
  fs::path onsets = path;
  onsets.replace_extension(".onsets.txt");
  write_matrix(path, f.values);
  write_onsets(onsets, f.onsets);
  Sidecar s;
  s.rows = f.values.rows();
  s.cols = f.values.cols();
  s.kind = MatrixKind::features;
  s.onsets_path = onsets.filename().string();
  s.layer_index = f.layer_index;
  s.checkpoint_tokens = f.checkpoint_tokens;
  s.run_index = f.run_index;
  write_atomic(sidecar_path(path), serialize_sidecar(s));
}

encoding::RegionMask read_mask(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    const json j = json::parse(text);
    encoding::RegionMask m;
    m.name = j.at("name").get<std::string>();
    for (const auto& l : j.at("labels")) {
      const auto s = l.get<std::string>();
      if (s == "left") {
        m.labels.push_back(encoding::Hemisphere::left);
      } else if (s == "right") {
        m.labels.push_back(encoding::Hemisphere::right);
      } else if (s == "other") {
        m.labels.push_back(encoding::Hemisphere::other);
      } else {
        throw ValidationError("unknown region label \"" + s + "\"");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_mask(const fs::path& path, const encoding::RegionMask& mask) {
  json labels = json::array();
  for (auto h : mask.labels) {
    labels.push_back(h == encoding::Hemisphere::left    ? "left"
                     : h == encoding::Hemisphere::right ? "right"
                                                        : "other");
  }
  const json j = {{"name", mask.name}, {"labels", labels}};
  write_atomic(path, j.dump() + "\n");
}

std::vector<transition::Trajectory> parse_trajectories(std::string_view text) {
  std::vector<transition::Trajectory> out;
  std::size_t line_no = 0, start = 0;
  bool header = false;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto where = "line " + std::to_string(line_no);
    if (!header) {
      if (line != "tokens,value,label")
        throw ValidationError(where + ": expected header \"tokens,value,label\"");
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ValidationError(where + ": expected 3 fields");
    const double tokens = parse_double(std::string_view(line).substr(0, c1), where);
    const double value = parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), where);
    const std::string label = trim(std::string_view(line).substr(c2 + 1));
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& t) { return t.label == label; });
    if (it == out.end()) {
      out.push_back(transition::Trajectory{{}, label});
      it = out.end() - 1;
    }
    it->points.push_back({tokens, value});
  }
  if (!header) throw ValidationError("missing header \"tokens,value,label\"");
  return out;
}

std::vector<transition::Trajectory> read_trajectories(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_trajectories(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_trajectories(const std::vector<transition::Trajectory>& ts,
                                   std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += "tokens,value,label\n";
  for (const auto& t : ts) {
    for (const auto& p : t.points) {
      out += format_double(p.tokens) + "," + format_double(p.value) + "," + t.label + "\n";
    }
  }
  return out;
}

}  // namespace asymkit::io
