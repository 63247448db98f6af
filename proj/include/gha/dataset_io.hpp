#pragma once

#include "gha/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace gha::io {

/// GHA1 matrix file: "GHA1", rows (u64 LE), cols (u64 LE), then rows*cols
/// IEEE-754 doubles, little-endian, row-major.
void write_matrix(const std::filesystem::path& path, const Matrix& M);
Matrix read_matrix(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Directory layout: manifest.json, subj_<id>.gha per subject, labels.txt.
/// Labels must be identical across subjects.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// 64-bit FNV-1a over shapes, values, labels and ids.
std::uint64_t fingerprint(const Dataset& data);

}  // namespace gha::io
