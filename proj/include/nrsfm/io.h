#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nrsfm/dspbuild.h"
#include "nrsfm/dspr.h"
#include "nrsfm/types.h"

namespace nrsfm {
namespace io {

// NRSM1 family: one ASCII header line `NRSM1 <kind> <F-or-Q> <N>` followed by
// a little-endian float64 payload in row-major order.
//   W   tracks, 2F x N
//   S   shapes, 3F x N
//   R   rotation stream, 3F x 3 (one 3x3 block per frame)
//   DSP prior, 3Q x N states followed by Q norms

void write_tracks(std::ostream& out, const MeasurementMatrix& w);
void write_tracks(const std::string& path, const MeasurementMatrix& w);
MeasurementMatrix read_tracks(std::istream& in);
MeasurementMatrix read_tracks(const std::string& path);

void write_shapes(std::ostream& out, const ShapeSequence& s);
void write_shapes(const std::string& path, const ShapeSequence& s);
ShapeSequence read_shapes(std::istream& in);
ShapeSequence read_shapes(const std::string& path);

void write_poses(std::ostream& out, const std::vector<CameraPose>& poses);
void write_poses(const std::string& path, const std::vector<CameraPose>& poses);
std::vector<CameraPose> read_poses(std::istream& in);
std::vector<CameraPose> read_poses(const std::string& path);

void write_dsp(std::ostream& out, const DynamicShapePrior& dsp);
void write_dsp(const std::string& path, const DynamicShapePrior& dsp);
DynamicShapePrior read_dsp(std::istream& in);
DynamicShapePrior read_dsp(const std::string& path);

// DSPC compressed stream: magic "DSPC", version u8, id_width u8 in {1, 2},
// Q u32, N u32, F u32 (little-endian), the DSP blob in NRSM1 form, then F
// records of [state_id (id_width bytes LE), 3 x f32 LE axis-angle].
void write_dspc(std::ostream& out, const CompressedStream& stream);
void write_dspc(const std::string& path, const CompressedStream& stream);
CompressedStream read_dspc(std::istream& in);
CompressedStream read_dspc(const std::string& path);

/// Bytes the DSP blob occupies inside a DSPC stream.
std::size_t dsp_blob_bytes(const DynamicShapePrior& dsp);
/// Fixed DSPC header size in bytes.
constexpr std::size_t kDspcHeaderBytes = 4 + 1 + 1 + 4 + 4 + 4;

// Plain-text helpers: one integer per line / tab-separated table rows.
void write_ids(const std::string& path, const std::vector<int>& ids);
std::vector<int> read_ids(const std::string& path);
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

}  // namespace io
}  // namespace nrsfm
