#include "nrsfm/io.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nrsfm/geomcore.h"

static_assert(std::endian::native == std::endian::little,
              "NRSM1/DSPC payloads are written as raw little-endian words");

namespace nrsfm {
namespace io {

namespace {

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
}

void read_doubles(std::istream& in, double* data, std::size_t count, const char* what) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  if (static_cast<std::size_t>(in.gcount()) != count * 8)
    throw CorruptStream(std::string(what) + ": truncated payload");
}

// Row-major on disk; Eigen matrices are column-major in memory.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    write_doubles(out, row.data(), row.size());
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols,
                            const char* what) {
  Eigen::MatrixXd m(rows, cols);
  std::vector<double> row(static_cast<std::size_t>(cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    read_doubles(in, row.data(), row.size(), what);
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

void write_header(std::ostream& out, const char* kind, long long count, long long points) {
  out << "NRSM1 " << kind << ' ' << count << ' ' << points << '\n';
}

struct Header {
  std::string kind;
  long long count = 0;
  long long points = 0;
};

Header read_header(std::istream& in, const char* expected_kind) {
  if (in.peek() == std::char_traits<char>::eof())
    throw InvalidInput("NRSM1: empty input");
  std::string line;
  if (!std::getline(in, line)) throw CorruptStream("NRSM1: missing header line");
  std::istringstream tokens(line);
  std::string magic;
  Header h;
  if (!(tokens >> magic >> h.kind >> h.count >> h.points) || magic != "NRSM1")
    throw CorruptStream("NRSM1: malformed header");
  if (h.kind != expected_kind)
    throw InvalidInput("NRSM1: expected kind " + std::string(expected_kind) + ", found " +
                       h.kind);
  if (h.count < 1 || h.points < 1) throw CorruptStream("NRSM1: nonpositive dimensions");
  return h;
}

template <typename Fn>
auto with_input(const std::string& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return fn(in);
}

template <typename Fn>
void with_output(const std::string& path, Fn fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  fn(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace

void write_tracks(std::ostream& out, const MeasurementMatrix& w) {
  write_header(out, "W", w.frames, w.points);
  write_matrix(out, w.data);
}

void write_tracks(const std::string& path, const MeasurementMatrix& w) {
  with_output(path, [&](std::ostream& out) { write_tracks(out, w); });
}

MeasurementMatrix read_tracks(std::istream& in) {
  const Header h = read_header(in, "W");
  Eigen::MatrixXd data = read_matrix(in, 2 * h.count, h.points, "W");
  return MeasurementMatrix::create(static_cast<int>(h.count), static_cast<int>(h.points),
                                   std::move(data));
}

MeasurementMatrix read_tracks(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_tracks(in); });
}

void write_shapes(std::ostream& out, const ShapeSequence& s) {
  write_header(out, "S", s.frames, s.points);
  write_matrix(out, s.data);
}

void write_shapes(const std::string& path, const ShapeSequence& s) {
  with_output(path, [&](std::ostream& out) { write_shapes(out, s); });
}

ShapeSequence read_shapes(std::istream& in) {
  const Header h = read_header(in, "S");
  Eigen::MatrixXd data = read_matrix(in, 3 * h.count, h.points, "S");
  return ShapeSequence::create(static_cast<int>(h.count), static_cast<int>(h.points),
                               std::move(data));
}

ShapeSequence read_shapes(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_shapes(in); });
}

void write_poses(std::ostream& out, const std::vector<CameraPose>& poses) {
  if (poses.empty()) throw InvalidInput("write_poses: no poses");
  write_header(out, "R", static_cast<long long>(poses.size()), 3);
  for (const auto& p : poses) write_matrix(out, p.matrix());
}

void write_poses(const std::string& path, const std::vector<CameraPose>& poses) {
  with_output(path, [&](std::ostream& out) { write_poses(out, poses); });
}

std::vector<CameraPose> read_poses(std::istream& in) {
  const Header h = read_header(in, "R");
  if (h.points != 3) throw CorruptStream("R: rotation blocks must have 3 columns");
  std::vector<CameraPose> poses;
  poses.reserve(static_cast<std::size_t>(h.count));
  for (long long f = 0; f < h.count; ++f)
    poses.push_back(CameraPose::from_matrix(read_matrix(in, 3, 3, "R")));
  return poses;
}

std::vector<CameraPose> read_poses(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_poses(in); });
}

void write_dsp(std::ostream& out, const DynamicShapePrior& dsp) {
  if (dsp.size() == 0) throw InvalidInput("write_dsp: empty prior");
  write_header(out, "DSP", dsp.size(), dsp.points());
  for (const auto& state : dsp.states) write_matrix(out, state);
  write_doubles(out, dsp.norms.data(), dsp.norms.size());
}

void write_dsp(const std::string& path, const DynamicShapePrior& dsp) {
  with_output(path, [&](std::ostream& out) { write_dsp(out, dsp); });
}

DynamicShapePrior read_dsp(std::istream& in) {
  const Header h = read_header(in, "DSP");
  DynamicShapePrior dsp;
  dsp.states.reserve(static_cast<std::size_t>(h.count));
  for (long long i = 0; i < h.count; ++i)
    dsp.states.push_back(read_matrix(in, 3, h.points, "DSP"));
  dsp.norms.resize(static_cast<std::size_t>(h.count));
  read_doubles(in, dsp.norms.data(), dsp.norms.size(), "DSP");
  for (long long i = 0; i < h.count; ++i) {
    const double actual = frobenius_norm(dsp.states[static_cast<std::size_t>(i)]);
    if (std::abs(actual - dsp.norms[static_cast<std::size_t>(i)]) >
        1e-9 * std::max(1.0, actual))
      throw CorruptStream("DSP: stored norm disagrees with state");
    if (i > 0 && !(dsp.norms[static_cast<std::size_t>(i)] >
                   dsp.norms[static_cast<std::size_t>(i - 1)]))
      throw CorruptStream("DSP: norms are not strictly increasing");
    dsp.source_ids.push_back(static_cast<int>(i));
  }
  return dsp;
}

DynamicShapePrior read_dsp(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_dsp(in); });
}

namespace {

template <typename T>
void write_raw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(T))
    throw CorruptStream(std::string(what) + ": truncated stream");
  return value;
}

}  // namespace

std::size_t dsp_blob_bytes(const DynamicShapePrior& dsp) {
  std::ostringstream blob;
  write_dsp(blob, dsp);
  return blob.str().size();
}

void write_dspc(std::ostream& out, const CompressedStream& stream) {
  if (stream.id_width != 1 && stream.id_width != 2)
    throw InvalidInput("write_dspc: id width must be 1 or 2");
  out.write("DSPC", 4);
  write_raw<std::uint8_t>(out, 1);  // version
  write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(stream.id_width));
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stream.dsp.size()));
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stream.dsp.points()));
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stream.frames));
  write_dsp(out, stream.dsp);
  for (const auto& rec : stream.records) {
    if (stream.id_width == 1)
      write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(rec.state_id));
    else
      write_raw<std::uint16_t>(out, rec.state_id);
    for (float v : rec.axis_angle) write_raw<float>(out, v);
  }
}

void write_dspc(const std::string& path, const CompressedStream& stream) {
  with_output(path, [&](std::ostream& out) { write_dspc(out, stream); });
}

CompressedStream read_dspc(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "DSPC", 4) != 0)
    throw CorruptStream("DSPC: bad magic");
  const auto version = read_raw<std::uint8_t>(in, "DSPC");
  if (version != 1) throw CorruptStream("DSPC: unsupported version");
  CompressedStream stream;
  stream.id_width = read_raw<std::uint8_t>(in, "DSPC");
  if (stream.id_width != 1 && stream.id_width != 2)
    throw CorruptStream("DSPC: invalid id width");
  const auto q = read_raw<std::uint32_t>(in, "DSPC");
  const auto n = read_raw<std::uint32_t>(in, "DSPC");
  const auto f = read_raw<std::uint32_t>(in, "DSPC");
  stream.frames = static_cast<int>(f);
  stream.dsp = read_dsp(in);
  if (static_cast<std::uint32_t>(stream.dsp.size()) != q ||
      static_cast<std::uint32_t>(stream.dsp.points()) != n)
    throw CorruptStream("DSPC: prior does not match header");
  stream.records.reserve(f);
  for (std::uint32_t i = 0; i < f; ++i) {
    CompressedStream::Record rec;
    rec.state_id = stream.id_width == 1 ? read_raw<std::uint8_t>(in, "DSPC")
                                        : read_raw<std::uint16_t>(in, "DSPC");
    if (rec.state_id >= q) throw CorruptStream("DSPC: state id out of range");
    for (float& v : rec.axis_angle) v = read_raw<float>(in, "DSPC");
    stream.records.push_back(rec);
  }
  return stream;
}

CompressedStream read_dspc(const std::string& path) {
  return with_input(path, [](std::istream& in) { return read_dspc(in); });
}

void write_ids(const std::string& path, const std::vector<int>& ids) {
  with_output(path, [&](std::ostream& out) {
    for (int id : ids) out << id << '\n';
  });
}

std::vector<int> read_ids(const std::string& path) {
  return with_input(path, [&](std::istream& in) {
    std::vector<int> ids;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        ids.push_back(std::stoi(line));
      } catch (const std::exception&) {
        throw CorruptStream("ids: malformed line in " + path);
      }
    }
    if (ids.empty()) throw InvalidInput("ids: empty input " + path);
    return ids;
  });
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  with_output(path, [&](std::ostream& out) {
    for (size_t i = 0; i < header.size(); ++i)
      out << header[i] << (i + 1 < header.size() ? '\t' : '\n');
    out.precision(17);
    for (const auto& row : rows)
      for (size_t i = 0; i < row.size(); ++i)
        out << row[i] << (i + 1 < row.size() ? '\t' : '\n');
  });
}

}  // namespace io
}  // namespace nrsfm
