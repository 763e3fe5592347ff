#pragma once

// File formats shared with the extraction tooling: raw float32 matrices
// with JSON sidecars, onset lists, region masks and trajectory CSVs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asymkit/encoding.hpp"
#include "asymkit/transition.hpp"

namespace asymkit::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const fs::path& path, std::string_view contents);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

enum class MatrixKind { bold, features };

struct Sidecar {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  MatrixKind kind = MatrixKind::bold;
  std::optional<double> tr_seconds;
  std::optional<std::string> onsets_path;  // relative to the sidecar
  std::optional<int> layer_index;
  std::optional<std::int64_t> checkpoint_tokens;
  int run_index = 0;
};

/// Sidecar path for a matrix file: same basename, ".json" extension.
fs::path sidecar_path(const fs::path& matrix_path);

Sidecar read_sidecar(const fs::path& path);
std::string serialize_sidecar(const Sidecar& sidecar);

/// Little-endian float32, row-major, no header.
encoding::Matrix read_matrix(const fs::path& path, std::int64_t rows, std::int64_t cols);
void write_matrix(const fs::path& path, const encoding::Matrix& m);

std::vector<double> read_onsets(const fs::path& path);
void write_onsets(const fs::path& path, const std::vector<double>& onsets);

/// Reads `path` and its sidecar; kind must be bold.
encoding::BoldRun read_bold(const fs::path& path);
void write_bold(const fs::path& path, const encoding::BoldRun& run);

/// Reads `path`, its sidecar and the onsets file it names.
encoding::FeatureMatrix read_features(const fs::path& path);
void write_features(const fs::path& path, const encoding::FeatureMatrix& f);

encoding::RegionMask read_mask(const fs::path& path);
void write_mask(const fs::path& path, const encoding::RegionMask& mask);

/// CSV with header "tokens,value,label"; lines starting with '#' are
/// comments. Rows are grouped by label in order of first appearance.
std::vector<transition::Trajectory> parse_trajectories(std::string_view text);
std::vector<transition::Trajectory> read_trajectories(const fs::path& path);
std::string serialize_trajectories(const std::vector<transition::Trajectory>& ts,
                                   std::string_view comment = {});

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace asymkit::io
