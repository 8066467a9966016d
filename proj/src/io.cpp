// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace hamred
{

namespace
{

constexpr std::array<char, 8> MAGIC{'H', 'S', 'N', 'P', '1', '\0', '\0', '\0'};

void PutU64(std::ostream &os, std::uint64_t v)
{
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; i++)
  {
    b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  }
  os.write(reinterpret_cast<const char *>(b.data()), 8);
}

std::uint64_t GetU64(std::istream &is)
{
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char *>(b.data()), 8);
  if (!is)
  {
    throw Error("truncated matrix file header");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; i++)
  {
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  }
  return v;
}

void PutDoubles(std::ostream &os, const Matrix &a)
{
  std::vector<char> buf(static_cast<std::size_t>(a.size()) * 8);
  for (Index k = 0; k < a.size(); k++)
  {
    std::uint64_t bits;
    const double x = a.data()[k];
    std::memcpy(&bits, &x, 8);
    for (int i = 0; i < 8; i++)
    {
      buf[static_cast<std::size_t>(8 * k + i)] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Matrix GetDoubles(std::istream &is, Index rows, Index cols)
{
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols) * 8);
  is.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!is)
  {
    throw Error("truncated matrix file payload");
  }
  Matrix a(rows, cols);
  for (Index k = 0; k < a.size(); k++)
  {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; i++)
    {
      bits |= static_cast<std::uint64_t>(buf[static_cast<std::size_t>(8 * k + i)]) << (8 * i);
    }
    double x;
    std::memcpy(&x, &bits, 8);
    a.data()[k] = x;
  }
  return a;
}

std::string Lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct MmHeader
{
  std::string format;    // coordinate | array
  std::string field;     // real | integer
  std::string symmetry;  // general | symmetric
};

MmHeader ReadHeader(std::istream &is, const std::filesystem::path &path)
{
  std::string line;
  if (!std::getline(is, line))
  {
    throw Error("empty Matrix Market file " + path.string());
  }
  std::istringstream hs(line);
  std::string banner, object;
  MmHeader h;
  hs >> banner >> object >> h.format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket" || Lower(object) != "matrix")
  {
    throw Error("missing Matrix Market banner in " + path.string());
  }
  h.format = Lower(h.format);
  h.field = Lower(h.field);
  h.symmetry = Lower(h.symmetry);
  if (h.field != "real" && h.field != "integer" && h.field != "double")
  {
    throw Error("unsupported Matrix Market field '" + h.field + "' in " + path.string());
  }
  if (h.symmetry != "general" && h.symmetry != "symmetric")
  {
    throw Error("unsupported Matrix Market symmetry '" + h.symmetry + "' in " + path.string());
  }
  if (h.format != "coordinate" && h.format != "array")
  {
    throw Error("unsupported Matrix Market format '" + h.format + "' in " + path.string());
  }
  return h;
}

// Next non-comment, non-blank line.
bool NextDataLine(std::istream &is, std::string &line)
{
  while (std::getline(is, line))
  {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%')
    {
      continue;
    }
    return true;
  }
  return false;
}

std::ifstream OpenIn(const std::filesystem::path &path, std::ios::openmode mode = std::ios::in)
{
  std::ifstream is(path, mode);
  if (!is)
  {
    throw Error("cannot open " + path.string());
  }
  return is;
}

std::ofstream OpenOut(const std::filesystem::path &path, std::ios::openmode mode = std::ios::out)
{
  if (path.has_parent_path())
  {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os)
  {
    throw Error("cannot write " + path.string());
  }
  return os;
}

}  // namespace

void WriteMatrixFile(const std::filesystem::path &path, const Matrix &states,
                     const std::optional<Matrix> &velocities)
{
  if (velocities && (velocities->rows() != states.rows() || velocities->cols() != states.cols()))
  {
    throw Error("velocity block shape does not match states");
  }
  std::ofstream os = OpenOut(path, std::ios::binary);
  os.write(MAGIC.data(), MAGIC.size());
  PutU64(os, static_cast<std::uint64_t>(states.rows()));
  PutU64(os, static_cast<std::uint64_t>(states.cols()));
  const char flag = velocities ? 1 : 0;
  os.write(&flag, 1);
  PutDoubles(os, states);
  if (velocities)
  {
    PutDoubles(os, *velocities);
  }
  if (!os)
  {
    throw Error("failed writing " + path.string());
  }
}

MatrixFile ReadMatrixFile(const std::filesystem::path &path)
{
  std::ifstream is = OpenIn(path, std::ios::binary);
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != MAGIC)
  {
    throw Error("not a snapshot file (bad magic): " + path.string());
  }
  const std::uint64_t rows = GetU64(is);
  const std::uint64_t cols = GetU64(is);
  char flag = 0;
  is.read(&flag, 1);
  if (!is || (flag != 0 && flag != 1))
  {
    throw Error("bad velocity flag in " + path.string());
  }
  constexpr std::uint64_t LIMIT = std::uint64_t(1) << 40;
  if (rows > LIMIT || cols > LIMIT || (rows != 0 && cols > LIMIT / rows))
  {
    throw Error("implausible matrix size in " + path.string());
  }
  MatrixFile f;
  f.states = GetDoubles(is, static_cast<Index>(rows), static_cast<Index>(cols));
  if (flag == 1)
  {
    f.velocities = GetDoubles(is, static_cast<Index>(rows), static_cast<Index>(cols));
  }
  return f;
}

SparseMatrix ReadMatrixMarket(const std::filesystem::path &path)
{
  std::ifstream is = OpenIn(path);
  const MmHeader h = ReadHeader(is, path);
  std::string line;
  if (!NextDataLine(is, line))
  {
    throw Error("missing size line in " + path.string());
  }
  std::istringstream ss(line);
  long long rows = 0, cols = 0, nnz = 0;
  if (h.format == "array")
  {
    ss >> rows >> cols;
    if (!ss || rows <= 0 || cols <= 0)
    {
      throw Error("bad size line in " + path.string());
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (long long j = 0; j < cols; j++)
    {
      const long long i0 = h.symmetry == "symmetric" ? j : 0;
      for (long long i = i0; i < rows; i++)
      {
        if (!NextDataLine(is, line))
        {
          throw Error("truncated array data in " + path.string());
        }
        const double v = std::stod(line);
        if (v != 0.0)
        {
          trip.emplace_back(i, j, v);
          if (h.symmetry == "symmetric" && i != j)
          {
            trip.emplace_back(j, i, v);
          }
        }
      }
    }
    SparseMatrix a(rows, cols);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
  }
  ss >> rows >> cols >> nnz;
  if (!ss || rows <= 0 || cols <= 0 || nnz < 0)
  {
    throw Error("bad size line in " + path.string());
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(h.symmetry == "symmetric" ? 2 * nnz : nnz));
  for (long long k = 0; k < nnz; k++)
  {
    if (!NextDataLine(is, line))
    {
      throw Error("expected " + std::to_string(nnz) + " entries in " + path.string());
    }
    std::istringstream es(line);
    long long i = 0, j = 0;
    double v = 0.0;
    es >> i >> j >> v;
    if (!es || i < 1 || j < 1 || i > rows || j > cols)
    {
      throw Error("bad entry '" + line + "' in " + path.string());
    }
    trip.emplace_back(i - 1, j - 1, v);
    if (h.symmetry == "symmetric" && i != j)
    {
      trip.emplace_back(j - 1, i - 1, v);
    }
  }
  SparseMatrix a(rows, cols);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

Vector ReadMatrixMarketVector(const std::filesystem::path &path)
{
  const SparseMatrix a = ReadMatrixMarket(path);
  if (a.cols() != 1)
  {
    throw Error("expected a single-column Matrix Market file: " + path.string());
  }
  return Vector(Matrix(a).col(0));
}

void WriteMatrixMarket(const std::filesystem::path &path, const SparseMatrix &a, bool symmetric)
{
  std::ofstream os = OpenOut(path);
  std::vector<std::string> rows;
  for (Index k = 0; k < a.outerSize(); k++)
  {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
    {
      if (symmetric && it.row() < it.col())
      {
        continue;
      }
      rows.push_back(std::to_string(it.row() + 1) + " " + std::to_string(it.col() + 1) + " " +
                     FormatDouble(it.value()));
    }
  }
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
  os << a.rows() << " " << a.cols() << " " << rows.size() << "\n";
  for (const auto &r : rows)
  {
    os << r << "\n";
  }
}

void WriteMatrixMarketVector(const std::filesystem::path &path, const Vector &v)
{
  std::ofstream os = OpenOut(path);
  os << "%%MatrixMarket matrix array real general\n";
  os << v.size() << " 1\n";
  for (Index i = 0; i < v.size(); i++)
  {
    os << FormatDouble(v(i)) << "\n";
  }
}

std::string FormatDouble(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.16e", x);
  return std::string(buf.data());
}

void WriteTextFile(const std::filesystem::path &path, const std::string &content)
{
  std::ofstream os = OpenOut(path, std::ios::binary);
  os << content;
  if (!os)
  {
    throw Error("failed writing " + path.string());
  }
}

std::string ReadTextFile(const std::filesystem::path &path)
{
  std::ifstream is = OpenIn(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace hamred
