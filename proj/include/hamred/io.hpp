// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_IO_HPP
#define HAMRED_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include "hamred/linalg.hpp"

namespace hamred
{

//
// Snapshot binary: magic "HSNP1\0\0\0", u64 LE rows, u64 LE cols, u8 velocity flag (0 absent,
// 1 present), rows·cols LE doubles column-major, then the velocity block in the same layout when
// flagged. Also used for basis matrices.
//
struct MatrixFile
{
  Matrix states;
  std::optional<Matrix> velocities;
};

void WriteMatrixFile(const std::filesystem::path &path, const Matrix &states,
                     const std::optional<Matrix> &velocities = std::nullopt);
MatrixFile ReadMatrixFile(const std::filesystem::path &path);

// Matrix Market "coordinate real|integer general|symmetric".
SparseMatrix ReadMatrixMarket(const std::filesystem::path &path);
// Dense vector from Matrix Market "array" format, or a coordinate n×1 matrix.
Vector ReadMatrixMarketVector(const std::filesystem::path &path);
void WriteMatrixMarket(const std::filesystem::path &path, const SparseMatrix &a,
                       bool symmetric = false);
void WriteMatrixMarketVector(const std::filesystem::path &path, const Vector &v);

// printf "%.16e".
std::string FormatDouble(double x);

void WriteTextFile(const std::filesystem::path &path, const std::string &content);
std::string ReadTextFile(const std::filesystem::path &path);

}  // namespace hamred

#endif  // HAMRED_IO_HPP
